//! Command-line surface for the rectification toolkit: synthesize capture
//! fixtures, estimate rectifying pairs from matches, evaluate alignment,
//! demo block-matching depth, and benchmark the solver chain.
//!
//! Exit codes: 0 success, 2 usage/input errors, 3 scene generation failure,
//! 4 estimation failure.

mod formats;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use latrect::geometry::{CameraIntrinsics, GeometryError, Real};
use latrect::imaging::{
    block_disparity, common_bounds, read_pgm, warp, write_pgm, GrayImage, ImagingError,
};
use latrect::metrics::{self, MetricsError};
use latrect::pipeline::{estimate, EstimateError, RansacConfig};
use latrect::solver::{
    build_hy_pair, compose, pick_h22, shear_pair, solve_two_point, H22Mode, Side,
};
use latrect::synth::{generate, SceneConfig, SynthError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "latrect",
    version,
    about = "Stereo rectification for uncalibrated cameras under latitudinal motion"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic capture: a match CSV plus a ground-truth
    /// homography JSON.
    Synth(SynthArgs),
    /// Estimate a rectifying homography pair from a match CSV.
    Rectify(RectifyArgs),
    /// Evaluate a homography pair against a match CSV (prints
    /// `vae,nvd_left,nvd_right,n`).
    Eval(EvalArgs),
    /// Block-matching disparity map from an already rectified pair.
    Depth(DepthArgs),
    /// Benchmark the single-estimate solver chain.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Camera orbit radius in metres.
    #[arg(long, default_value_t = 0.01)]
    radius_m: Real,
    /// Nearest scene depth in metres.
    #[arg(long, default_value_t = 0.5)]
    depth_min: Real,
    /// Farthest scene depth in metres.
    #[arg(long, default_value_t = 200.0)]
    depth_max: Real,
    /// Total roll between the two views, degrees.
    #[arg(long, default_value_t = 10.0)]
    roll_deg: Real,
    /// Total pitch between the two views, degrees.
    #[arg(long, default_value_t = 20.0)]
    pitch_deg: Real,
    /// Number of correspondences to generate.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Gaussian pixel noise added to every projected coordinate.
    #[arg(long, default_value_t = 0.0)]
    noise_px: Real,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 960)]
    width: u32,
    #[arg(long, default_value_t = 720)]
    height: u32,
    /// Focal length in pixels (fx = fy).
    #[arg(long, default_value_t = 800.0)]
    focal: Real,
    /// Output path for the match CSV.
    #[arg(long, default_value = "matches.csv")]
    out_matches: PathBuf,
    /// Output path for the ground-truth homography JSON.
    #[arg(long, default_value = "truth.json")]
    out_truth: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum H22ModeArg {
    /// Edge-height changes sum to 2H (roughly doubles the output height).
    EdgeSum,
    /// Zero the mean frame-edge height change.
    UnitMean,
}

impl From<H22ModeArg> for H22Mode {
    fn from(v: H22ModeArg) -> Self {
        match v {
            H22ModeArg::EdgeSum => H22Mode::EdgeSum,
            H22ModeArg::UnitMean => H22Mode::UnitMean,
        }
    }
}

#[derive(Args)]
struct RectifyArgs {
    /// Match CSV (top-left pixel frame).
    #[arg(long)]
    matches: PathBuf,
    #[arg(long)]
    width: u32,
    #[arg(long)]
    height: u32,
    /// Sampling iterations.
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = H22ModeArg::EdgeSum)]
    h22_mode: H22ModeArg,
    /// Fixed h23 element of the row-aligning maps.
    #[arg(long, default_value_t = 0.0)]
    h23: Real,
    /// Output path for the homography JSON.
    #[arg(long, default_value = "homographies.json")]
    out: PathBuf,
    /// Left source image (PGM); with --right and --out-prefix, writes the
    /// warped rectified pair.
    #[arg(long, requires = "right", requires = "out_prefix")]
    left: Option<PathBuf>,
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    #[arg(long, requires = "left")]
    out_prefix: Option<String>,
}

#[derive(Args)]
struct EvalArgs {
    /// Match CSV (top-left pixel frame).
    #[arg(long)]
    matches: PathBuf,
    /// Homography JSON produced by `synth` or `rectify`.
    #[arg(long)]
    homographies: PathBuf,
}

#[derive(Args)]
struct DepthArgs {
    /// Left rectified image (PGM).
    #[arg(long)]
    left: PathBuf,
    /// Right rectified image (PGM).
    #[arg(long)]
    right: PathBuf,
    /// Odd SAD block size.
    #[arg(long, default_value_t = 9)]
    block: u32,
    /// Disparity search range in pixels.
    #[arg(long, default_value_t = 64)]
    max_disp: u32,
    /// Output PGM (a raw little-endian f32 sidecar is written next to it
    /// with `.f32` appended; invalid pixels are NaN there and 0 in the PGM).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Number of timed estimate chains.
    #[arg(long)]
    repeat: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum CliError {
    Usage(String),
    Generation(String),
    Estimation(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Generation(_) => 3,
            CliError::Estimation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Generation(m) | CliError::Estimation(m) => m,
        }
    }
}

impl From<String> for CliError {
    fn from(m: String) -> Self {
        CliError::Usage(m)
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::UnrealizableScene { .. } => CliError::Generation(e.to_string()),
            SynthError::InvalidConfig { .. } => CliError::Usage(e.to_string()),
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::NotEnoughMatches { .. } | EstimateError::AllSamplesDegenerate { .. } => {
                CliError::Estimation(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ImagingError> for CliError {
    fn from(e: ImagingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Rectify(a) => cmd_rectify(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Depth(a) => cmd_depth(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let intrinsics = CameraIntrinsics::new(a.focal, a.focal, a.width, a.height)?;
    let cfg = SceneConfig {
        radius_m: a.radius_m,
        depth_min_m: a.depth_min,
        depth_max_m: a.depth_max,
        roll_deg: a.roll_deg,
        pitch_deg: a.pitch_deg,
        n_points: a.points,
        noise_px: a.noise_px,
        seed: a.seed,
        intrinsics,
        ..SceneConfig::default()
    };
    let pair = generate(&cfg)?;
    let dims = intrinsics.dims();

    formats::write_matches(&a.out_matches, &pair.matches.to_top_left(dims))?;

    let (h1, h2) = &pair.true_homographies;
    let report = metrics::report(h1, h2, &pair.matches, dims)?;
    formats::HomographyFile::new(
        dims,
        h1,
        h2,
        report.vae,
        [report.nvd_left, report.nvd_right],
    )
    .write(&a.out_truth)?;

    println!(
        "wrote {} matches to {} and ground truth to {}",
        pair.matches.len(),
        a.out_matches.display(),
        a.out_truth.display()
    );
    Ok(())
}

fn cmd_rectify(a: RectifyArgs) -> Result<(), CliError> {
    let dims = (a.width, a.height);
    if a.width < 2 || a.height < 2 {
        return Err(CliError::Usage(
            "--width and --height must be at least 2".to_string(),
        ));
    }
    let matches = formats::read_matches(&a.matches)?.to_centered(dims);
    let cfg = RansacConfig {
        iterations: a.iters,
        seed: a.seed,
        h22_mode: a.h22_mode.into(),
        h23: a.h23,
        ..RansacConfig::default()
    };
    let r = estimate(&matches, dims, &cfg)?;
    formats::HomographyFile::new(dims, &r.h1, &r.h2, r.vae, [r.nvd_left, r.nvd_right])
        .write(&a.out)?;
    println!(
        "vae={} nvd_left={} nvd_right={} iterations={}",
        r.vae, r.nvd_left, r.nvd_right, r.iterations_used
    );

    if let (Some(left), Some(right), Some(prefix)) = (&a.left, &a.right, &a.out_prefix) {
        let img_l = read_pgm(left)?;
        let img_r = read_pgm(right)?;
        for (img, path) in [(&img_l, left), (&img_r, right)] {
            if img.dims() != dims {
                return Err(CliError::Usage(format!(
                    "{}: image is {}x{} but --width/--height say {}x{}",
                    path.display(),
                    img.dims().0,
                    img.dims().1,
                    a.width,
                    a.height
                )));
            }
        }
        let h1 = r.h1.to_frame_top_left(dims);
        let h2 = r.h2.to_frame_top_left(dims);
        let (out_dims, off1, off2) = common_bounds(&h1, &h2, dims)?;
        let out_l = PathBuf::from(format!("{prefix}_left.pgm"));
        let out_r = PathBuf::from(format!("{prefix}_right.pgm"));
        write_pgm(&out_l, &warp(&img_l, &h1, out_dims, off1))?;
        write_pgm(&out_r, &warp(&img_r, &h2, out_dims, off2))?;
        println!(
            "wrote rectified {}x{} pair to {} and {}",
            out_dims.0,
            out_dims.1,
            out_l.display(),
            out_r.display()
        );
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<(), CliError> {
    let file = formats::HomographyFile::read(&a.homographies)?;
    let (h1, h2) = file.homographies()?;
    let matches = formats::read_matches(&a.matches)?.to_centered(file.dims());
    let report = metrics::report(&h1, &h2, &matches, file.dims())?;
    println!(
        "{:.8e},{:.8e},{:.8e},{}",
        report.vae, report.nvd_left, report.nvd_right, report.n_points
    );
    Ok(())
}

fn cmd_depth(a: DepthArgs) -> Result<(), CliError> {
    if a.max_disp == 0 {
        return Err(CliError::Usage("--max-disp must be at least 1".to_string()));
    }
    let left = read_pgm(&a.left)?;
    let right = read_pgm(&a.right)?;
    let disp = block_disparity(&left, &right, a.block, a.max_disp)?;

    let scale = 255.0 / a.max_disp as f32;
    let gray = GrayImage::new(
        disp.width,
        disp.height,
        disp.values
            .iter()
            .map(|&d| if d.is_nan() { 0.0 } else { d * scale })
            .collect(),
    )?;
    write_pgm(&a.out, &gray)?;

    let sidecar = PathBuf::from(format!("{}.f32", a.out.display()));
    let bytes: Vec<u8> = disp.values.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(&sidecar, bytes)
        .map_err(|e| format!("cannot write {}: {e}", sidecar.display()))?;

    println!(
        "wrote {}x{} disparity to {} (raw floats in {})",
        disp.width,
        disp.height,
        a.out.display(),
        sidecar.display()
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), CliError> {
    if a.repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".to_string()));
    }
    // A compact noiseless capture at the reference 960x720 scale; the chain
    // under test never sees the generator cost.
    let cfg = SceneConfig {
        depth_min_m: 4.0,
        depth_max_m: 6.25,
        n_points: 100,
        seed: a.seed,
        ..SceneConfig::default()
    };
    let pair = generate(&cfg)?;
    let matches = pair.matches.as_slice();
    let dims = cfg.intrinsics.dims();
    let width = dims.0;

    // Pre-draw valid sample pairs so timing covers exactly the estimate
    // chain: solve, pick the row scale, build the pair, shear, compose.
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut samples = Vec::with_capacity(a.repeat);
    while samples.len() < a.repeat {
        let idx = rand::seq::index::sample(&mut rng, matches.len(), 2);
        let (i, j) = (idx.index(0), idx.index(1));
        let ok = solve_two_point(&matches[i], &matches[j])
            .and_then(|sol| Ok((pick_h22(sol.t1, width, H22Mode::EdgeSum)?, sol)))
            .is_ok();
        if ok {
            samples.push((i, j));
        }
    }

    let mut times_ms = Vec::with_capacity(a.repeat);
    for &(i, j) in &samples {
        let (m1, m2) = (
            std::hint::black_box(matches[i]),
            std::hint::black_box(matches[j]),
        );
        let start = Instant::now();
        let sol = solve_two_point(&m1, &m2).expect("pre-validated sample");
        let h22 = pick_h22(sol.t1, width, H22Mode::EdgeSum).expect("pre-validated sample");
        let hy = build_hy_pair(&sol, h22, 0.0);
        let (sl, _) = shear_pair(&hy, dims).expect("winning pair has a non-degenerate frame");
        let h1 = compose(&sl, &hy.0, Side::Left);
        let h2 = compose(&sl, &hy.1, Side::Right);
        let elapsed = start.elapsed();
        std::hint::black_box((h1, h2));
        times_ms.push(elapsed.as_secs_f64() * 1e3);
    }

    times_ms.sort_by(Real::total_cmp);
    let n = times_ms.len();
    let median = if n % 2 == 1 {
        times_ms[n / 2]
    } else {
        (times_ms[n / 2 - 1] + times_ms[n / 2]) / 2.0
    };
    let mean = times_ms.iter().sum::<Real>() / n as Real;
    let p99 = times_ms[((0.99 * n as Real).ceil() as usize).max(1) - 1];
    println!("repeats,median_ms,mean_ms,p99_ms");
    println!("{n},{median:.6},{mean:.6},{p99:.6}");
    Ok(())
}
