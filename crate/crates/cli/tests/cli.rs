//! Binary-level tests: every command end to end, data determinism, and the
//! documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latrect::imaging::{read_pgm, write_pgm, GrayImage};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_latrect"))
}

/// Fresh scratch directory under the harness-managed tmp root.
fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_code(cmd: &mut Command) -> (i32, String) {
    let out = cmd.output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn eval_fields(dir: &Path, matches: &str, homographies: &str) -> (f64, f64, f64, usize) {
    let out = run_ok(bin().current_dir(dir).args([
        "eval",
        "--matches",
        matches,
        "--homographies",
        homographies,
    ]));
    let line = String::from_utf8(out.stdout).unwrap();
    let fields: Vec<&str> = line.trim().split(',').collect();
    assert_eq!(fields.len(), 4, "unexpected eval output: {line}");
    (
        fields[0].parse().unwrap(),
        fields[1].parse().unwrap(),
        fields[2].parse().unwrap(),
        fields[3].parse().unwrap(),
    )
}

#[test]
fn synth_and_rectify_outputs_are_byte_deterministic() {
    let a = scratch("det_a");
    let b = scratch("det_b");
    for dir in [&a, &b] {
        run_ok(bin().current_dir(dir).args([
            "synth",
            "--seed",
            "42",
            "--points",
            "60",
            "--noise-px",
            "0.5",
        ]));
        run_ok(bin().current_dir(dir).args([
            "rectify",
            "--matches",
            "matches.csv",
            "--width",
            "960",
            "--height",
            "720",
            "--iters",
            "400",
            "--seed",
            "9",
        ]));
    }
    for file in ["matches.csv", "truth.json", "homographies.json"] {
        assert_eq!(
            read(&a.join(file)),
            read(&b.join(file)),
            "{file} differs between identical runs"
        );
    }
}

#[test]
fn noiseless_synth_round_trips_through_rectify_and_eval() {
    let dir = scratch("round_trip");
    run_ok(
        bin()
            .current_dir(&dir)
            .args(["synth", "--seed", "7", "--points", "60"]),
    );

    let (vae_truth, _, _, n) = eval_fields(&dir, "matches.csv", "truth.json");
    assert_eq!(n, 60);
    assert!(
        vae_truth < 1e-9,
        "truth pair should align the clean capture: {vae_truth}"
    );

    run_ok(bin().current_dir(&dir).args([
        "rectify",
        "--matches",
        "matches.csv",
        "--width",
        "960",
        "--height",
        "720",
    ]));
    let json: serde_json::Value =
        serde_json::from_slice(&read(&dir.join("homographies.json"))).unwrap();
    let vae_vaeld = json["vae"].as_f64().unwrap();
    assert!(
        vae_vaeld < 1e-6,
        "estimated pair should align the capture: {vae_vaeld}"
    );
    assert_eq!(json["frame"], "centered");

    let (vae_eval, _, _, _) = eval_fields(&dir, "matches.csv", "homographies.json");
    assert!(
        (vae_eval - vae_vaeld).abs() < 1e-9,
        "eval must reproduce the stored vae: {vae_eval} vs {vae_vaeld}"
    );
}

#[test]
fn zero_motion_synth_gives_identical_rows() {
    let dir = scratch("zero_motion");
    run_ok(bin().current_dir(&dir).args([
        "synth",
        "--roll-deg",
        "0",
        "--pitch-deg",
        "0",
        "--seed",
        "3",
        "--points",
        "40",
    ]));
    let text = String::from_utf8(read(&dir.join("matches.csv"))).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[1], f[3], "identical views must produce y1 = y2: {line}");
    }
}

#[test]
fn two_aligned_rows_are_enough_to_rectify() {
    let dir = scratch("two_rows");
    std::fs::write(
        dir.join("pair.csv"),
        "x1,y1,x2,y2\n10,20,40,20\n60,70,25,70\n",
    )
    .unwrap();
    run_ok(bin().current_dir(&dir).args([
        "rectify",
        "--matches",
        "pair.csv",
        "--width",
        "100",
        "--height",
        "100",
    ]));
    let json: serde_json::Value =
        serde_json::from_slice(&read(&dir.join("homographies.json"))).unwrap();
    assert_eq!(json["vae"].as_f64().unwrap(), 0.0);
}

#[test]
fn degenerate_match_file_exits_with_estimation_failure() {
    let dir = scratch("degenerate");
    std::fs::write(
        dir.join("dup.csv"),
        "x1,y1,x2,y2\n10,20,30,40\n10,20,30,40\n",
    )
    .unwrap();
    let (code, stderr) = run_code(bin().current_dir(&dir).args([
        "rectify",
        "--matches",
        "dup.csv",
        "--width",
        "100",
        "--height",
        "100",
    ]));
    assert_eq!(code, 4, "stderr: {stderr}");
    assert!(stderr.contains("rank-deficient"), "stderr: {stderr}");
}

#[test]
fn malformed_match_files_exit_with_usage_errors() {
    let dir = scratch("malformed");
    let cases = [
        ("missing.csv", None, "cannot read"),
        ("one_row.csv", Some("x1,y1,x2,y2\n1,2,3,4\n"), "at least 2"),
        (
            "bad_field.csv",
            Some("x1,y1,x2,y2\n1,2,3,4\n5,6,seven,8\n"),
            "bad_field.csv:3",
        ),
        (
            "non_finite.csv",
            Some("x1,y1,x2,y2\n1,2,3,4\nnan,6,7,8\n"),
            "non-finite",
        ),
        (
            "short_row.csv",
            Some("x1,y1,x2,y2\n1,2,3,4\n5,6\n"),
            "expected 4",
        ),
        ("no_header.csv", Some("1,2,3,4\n5,6,7,8\n"), "header"),
    ];
    for (name, contents, needle) in cases {
        if let Some(c) = contents {
            std::fs::write(dir.join(name), c).unwrap();
        }
        let (code, stderr) = run_code(bin().current_dir(&dir).args([
            "rectify",
            "--matches",
            name,
            "--width",
            "100",
            "--height",
            "100",
        ]));
        assert_eq!(code, 2, "{name} should be a usage error; stderr: {stderr}");
        assert!(
            stderr.contains(needle),
            "{name}: stderr lacks `{needle}`: {stderr}"
        );
    }
}

#[test]
fn unrealizable_scene_exits_with_generation_failure() {
    let dir = scratch("unrealizable");
    let (code, stderr) = run_code(bin().current_dir(&dir).args(["synth", "--pitch-deg", "90"]));
    assert_eq!(code, 3, "stderr: {stderr}");
    assert!(stderr.contains("visible"), "stderr: {stderr}");
}

#[test]
fn eval_rejects_wrong_frame_marker() {
    let dir = scratch("wrong_frame");
    std::fs::write(dir.join("m.csv"), "x1,y1,x2,y2\n1,2,3,4\n5,6,7,8\n").unwrap();
    std::fs::write(
        dir.join("h.json"),
        r#"{"width":100,"height":80,"frame":"top-left","H1":[1,0,0,0,1,0,0,0,1],"H2":[1,0,0,0,1,0,0,0,1],"vae":0.0,"nvd":[0.0,0.0]}"#,
    )
    .unwrap();
    let (code, stderr) = run_code(bin().current_dir(&dir).args([
        "eval",
        "--matches",
        "m.csv",
        "--homographies",
        "h.json",
    ]));
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("frame"), "stderr: {stderr}");
}

#[test]
fn eval_of_identity_pair_reports_raw_vertical_disparity() {
    let dir = scratch("identity_eval");
    std::fs::write(dir.join("m.csv"), "x1,y1,x2,y2\n10,10,10,13\n20,30,20,31\n").unwrap();
    std::fs::write(
        dir.join("h.json"),
        r#"{"width":100,"height":80,"frame":"centered","H1":[1,0,0,0,1,0,0,0,1],"H2":[1,0,0,0,1,0,0,0,1],"vae":0.0,"nvd":[0.0,0.0]}"#,
    )
    .unwrap();
    let (vae, nvd_l, nvd_r, n) = eval_fields(&dir, "m.csv", "h.json");
    assert_eq!(vae, 2.0); // (|10-13| + |30-31|) / 2
    assert_eq!(nvd_l, 0.0);
    assert_eq!(nvd_r, 0.0);
    assert_eq!(n, 2);
}

/// Band-limited texture with no repeats inside the disparity search range.
fn textured(width: u32, height: u32) -> GrayImage {
    GrayImage::new(
        width,
        height,
        (0..width as usize * height as usize)
            .map(|i| {
                let (x, y) = ((i % width as usize) as f64, (i / width as usize) as f64);
                (127.5
                    + 55.0 * (x * 0.21).sin() * (y * 0.17).cos()
                    + 45.0 * (x * 0.046 + y * 0.061).sin()
                    + 25.0 * (x * 0.33 + 1.0).cos() * (y * 0.29).sin()) as f32
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn depth_recovers_a_constant_shift_and_writes_the_float_sidecar() {
    let dir = scratch("depth");
    let base = textured(220, 64);
    let (w, h, shift) = (200u32, 64u32, 7u32);
    let left = base.crop(0, 0, w, h);
    let right = base.crop(shift, 0, w, h);
    write_pgm(&dir.join("left.pgm"), &left).unwrap();
    write_pgm(&dir.join("right.pgm"), &right).unwrap();

    run_ok(bin().current_dir(&dir).args([
        "depth",
        "--left",
        "left.pgm",
        "--right",
        "right.pgm",
        "--block",
        "9",
        "--max-disp",
        "16",
        "--out",
        "disp.pgm",
    ]));

    // PGM: valid pixels are d/max_disp * 255; d=7 -> 112 after rounding.
    let disp = read_pgm(&dir.join("disp.pgm")).unwrap();
    assert_eq!(disp.dims(), (w, h));
    let r = 4u32;
    let (mut hits, mut total) = (0u32, 0u32);
    for y in r..h - r {
        for x in (r + 16)..w - r {
            total += 1;
            if disp.get(x, y) == 112.0 {
                hits += 1;
            }
        }
    }
    assert!(
        hits as f64 / total as f64 >= 0.95,
        "only {hits}/{total} interior pixels recovered the shift"
    );

    // Sidecar: same values as raw floats, NaN where the map is invalid.
    let raw = read(&dir.join("disp.pgm.f32"));
    assert_eq!(raw.len(), (w * h * 4) as usize);
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert!(values[0].is_nan(), "borders must be invalid");
    let center = (h / 2 * w + w / 2) as usize;
    assert_eq!(values[center], 7.0);
}

#[test]
fn depth_rejects_even_blocks_and_mismatched_inputs() {
    let dir = scratch("depth_bad");
    write_pgm(&dir.join("a.pgm"), &textured(64, 48)).unwrap();
    write_pgm(&dir.join("b.pgm"), &textured(64, 40)).unwrap();

    let (code, stderr) = run_code(bin().current_dir(&dir).args([
        "depth", "--left", "a.pgm", "--right", "a.pgm", "--block", "4", "--out", "d.pgm",
    ]));
    assert_eq!(code, 2, "stderr: {stderr}");

    let (code, stderr) = run_code(bin().current_dir(&dir).args([
        "depth", "--left", "a.pgm", "--right", "b.pgm", "--block", "9", "--out", "d.pgm",
    ]));
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("differ"), "stderr: {stderr}");
}

#[test]
fn rectify_writes_a_warped_pair_when_images_are_supplied() {
    let dir = scratch("warp_pair");
    run_ok(bin().current_dir(&dir).args([
        "synth", "--seed", "5", "--points", "80", "--width", "320", "--height", "240", "--focal",
        "266",
    ]));
    write_pgm(&dir.join("left.pgm"), &textured(320, 240)).unwrap();
    write_pgm(&dir.join("right.pgm"), &textured(320, 240)).unwrap();
    run_ok(bin().current_dir(&dir).args([
        "rectify",
        "--matches",
        "matches.csv",
        "--width",
        "320",
        "--height",
        "240",
        "--left",
        "left.pgm",
        "--right",
        "right.pgm",
        "--out-prefix",
        "rect",
    ]));
    let l = read_pgm(&dir.join("rect_left.pgm")).unwrap();
    let r = read_pgm(&dir.join("rect_right.pgm")).unwrap();
    assert_eq!(l.dims(), r.dims(), "rectified pair shares one canvas");
    assert!(l.data().iter().any(|&v| v > 0.0), "warp produced content");
    assert!(r.data().iter().any(|&v| v > 0.0), "warp produced content");
}

#[test]
fn bench_prints_a_header_and_one_row() {
    let out = run_ok(bin().args(["bench", "--repeat", "50"]));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "repeats,median_ms,mean_ms,p99_ms");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row[0], "50");
    for field in &row[1..] {
        let v: f64 = field.parse().unwrap();
        assert!(v >= 0.0 && v.is_finite());
    }
}
