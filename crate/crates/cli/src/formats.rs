//! On-disk formats: the match CSV and the homography JSON.
//!
//! Files always store top-left pixel coordinates for matches; homography
//! files carry a mandatory `frame` marker and are written in the centered
//! frame the solver math uses. Conversion between the two frames happens
//! exactly once, at load/store time.

use std::fmt::Write as _;
use std::path::Path;

use latrect::geometry::{Correspondence, Frame, Homography, Mat3, MatchSet, Point2, Real};
use serde::{Deserialize, Serialize};

pub const MATCH_HEADER: &str = "x1,y1,x2,y2";

/// Write correspondences (top-left pixel frame) as CSV.
pub fn write_matches(path: &Path, matches: &MatchSet) -> Result<(), String> {
    debug_assert_eq!(matches.frame(), Frame::TopLeft);
    let mut out = String::with_capacity(32 * (matches.len() + 1));
    out.push_str(MATCH_HEADER);
    out.push('\n');
    for m in matches.iter() {
        // Default float formatting is shortest-round-trip, so reading the
        // file back reproduces the exact values.
        writeln!(out, "{},{},{},{}", m.left.x, m.left.y, m.right.x, m.right.y).unwrap();
    }
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Read a match CSV (top-left pixel frame). Rejects malformed rows and
/// non-finite coordinates with the offending line number.
pub fn read_matches(path: &Path) -> Result<MatchSet, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == MATCH_HEADER => {}
        _ => {
            return Err(format!(
                "{}: first line must be the header `{MATCH_HEADER}`",
                path.display()
            ))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!(
                "{}:{line_no}: expected 4 comma-separated values, found {}",
                path.display(),
                fields.len()
            ));
        }
        let mut vals = [0.0 as Real; 4];
        for (v, f) in vals.iter_mut().zip(&fields) {
            *v = f
                .trim()
                .parse()
                .map_err(|e| format!("{}:{line_no}: {e}: `{f}`", path.display()))?;
            if !v.is_finite() {
                return Err(format!(
                    "{}:{line_no}: non-finite coordinate `{f}`",
                    path.display()
                ));
            }
        }
        rows.push(Correspondence::new(
            Point2::new(vals[0], vals[1]),
            Point2::new(vals[2], vals[3]),
        ));
    }
    if rows.len() < 2 {
        return Err(format!(
            "{}: need at least 2 correspondences, found {}",
            path.display(),
            rows.len()
        ));
    }
    Ok(MatchSet::new(Frame::TopLeft, rows))
}

/// A homography pair with its evaluation, as stored on disk.
#[derive(Debug, Serialize, Deserialize)]
pub struct HomographyFile {
    pub width: u32,
    pub height: u32,
    pub frame: String,
    #[serde(rename = "H1")]
    pub h1: [Real; 9],
    #[serde(rename = "H2")]
    pub h2: [Real; 9],
    pub vae: Real,
    pub nvd: [Real; 2],
}

fn row_major(m: &Mat3) -> [Real; 9] {
    std::array::from_fn(|i| m[(i / 3, i % 3)])
}

fn from_row_major(v: &[Real; 9]) -> Mat3 {
    Mat3::from_fn(|r, c| v[r * 3 + c])
}

impl HomographyFile {
    pub fn new(
        dims: (u32, u32),
        h1: &Homography,
        h2: &Homography,
        vae: Real,
        nvd: [Real; 2],
    ) -> Self {
        Self {
            width: dims.0,
            height: dims.1,
            frame: "centered".to_string(),
            h1: row_major(h1.normalized().matrix()),
            h2: row_major(h2.normalized().matrix()),
            vae,
            nvd,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), String> {
        let mut json = serde_json::to_string_pretty(self).expect("plain data serializes");
        json.push('\n');
        std::fs::write(path, json).map_err(|e| format!("cannot write {}: {e}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: Self =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if file.frame != "centered" {
            return Err(format!(
                "{}: frame must be `centered`, found `{}`",
                path.display(),
                file.frame
            ));
        }
        if file.width < 2 || file.height < 2 {
            return Err(format!(
                "{}: image dimensions must be at least 2x2",
                path.display()
            ));
        }
        if !file.h1.iter().chain(&file.h2).all(|v| v.is_finite()) {
            return Err(format!("{}: non-finite homography entry", path.display()));
        }
        Ok(file)
    }

    pub fn homographies(&self) -> Result<(Homography, Homography), String> {
        let h1 = Homography::new(from_row_major(&self.h1)).map_err(|e| format!("H1: {e}"))?;
        let h2 = Homography::new(from_row_major(&self.h2)).map_err(|e| format!("H2: {e}"))?;
        Ok((h1, h2))
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}
