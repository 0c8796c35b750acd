//! Rectification quality measures.
//!
//! Two complementary numbers: [`vae`] measures how well corresponding points
//! share rows after rectification (the thing rectification is *for*), and
//! [`nvd`] measures how far a map drags the image corners (the distortion
//! paid to get there).

use crate::geometry::{Homography, MatchSet, Point2, Real};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("vertical alignment error is undefined on an empty match set")]
    EmptySet,
    #[error("a frame vertex maps to infinity under this homography")]
    MapsToInfinity,
}

/// Per-evaluation metric bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub vae: Real,
    pub nvd_left: Real,
    pub nvd_right: Real,
    pub n_points: usize,
}

impl MetricReport {
    /// Headline distortion number: mean of the two per-image values.
    pub fn nvd_mean(&self) -> Real {
        0.5 * (self.nvd_left + self.nvd_right)
    }
}

/// Vertical alignment error: mean `|y_left − y_right|` over a rectified
/// match set, in pixels. Frame-independent, since both frames shift y by the
/// same offset.
pub fn vae(rectified: &MatchSet) -> Result<Real, MetricsError> {
    if rectified.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let sum: Real = rectified.iter().map(|m| (m.left.y - m.right.y).abs()).sum();
    Ok(sum / rectified.len() as Real)
}

/// Normalized vertex distance: mean displacement of the four image corners
/// under `h`, divided by the image diagonal.
///
/// `h` acts on the centered frame (as everywhere in this crate); the corners
/// are the raster corners `(0,0) … (W−1,H−1)`, so the map is conjugated into
/// the top-left frame before evaluation.
pub fn nvd(h: &Homography, dims: (u32, u32)) -> Result<Real, MetricsError> {
    let (w, hgt) = (dims.0 as Real, dims.1 as Real);
    let top_left = h.to_frame_top_left(dims);
    let corners = [
        Point2::new(0.0, 0.0),
        Point2::new(w - 1.0, 0.0),
        Point2::new(0.0, hgt - 1.0),
        Point2::new(w - 1.0, hgt - 1.0),
    ];
    let mut sum = 0.0;
    for c in corners {
        let m = top_left.apply(c).ok_or(MetricsError::MapsToInfinity)?;
        sum += ((m.x - c.x).powi(2) + (m.y - c.y).powi(2)).sqrt();
    }
    Ok(sum / (w * w + hgt * hgt).sqrt())
}

/// Evaluate both metrics for a homography pair against an (unrectified)
/// match set: points are pushed through their side's map, then scored.
pub fn report(
    h1: &Homography,
    h2: &Homography,
    matches: &MatchSet,
    dims: (u32, u32),
) -> Result<MetricReport, MetricsError> {
    if matches.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut sum = 0.0;
    for m in matches.iter() {
        let (l, r) = (
            h1.apply(m.left).ok_or(MetricsError::MapsToInfinity)?,
            h2.apply(m.right).ok_or(MetricsError::MapsToInfinity)?,
        );
        sum += (l.y - r.y).abs();
    }
    Ok(MetricReport {
        vae: sum / matches.len() as Real,
        nvd_left: nvd(h1, dims)?,
        nvd_right: nvd(h2, dims)?,
        n_points: matches.len(),
    })
}
