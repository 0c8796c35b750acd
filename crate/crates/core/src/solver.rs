//! Calibration-free rectification from two point correspondences.
//!
//! Rectifying maps are factored as `H = Hs·Hy`: a y-aligning component
//!
//! ```text
//!        ⎡  1    0    0  ⎤             ⎡ Sa  ±Sb  0 ⎤
//! Hy^j = ⎢ ±h21 h22  h23 ⎥ ,    Hs^j = ⎢ 0    1   0 ⎥ ,
//!        ⎣ ±h31  0   h33 ⎦             ⎣ 0    0   1 ⎦
//! ```
//!
//! with the signed entries negated on the right image. Requiring equal
//! rectified rows for a correspondence `(x¹,y¹) ↔ (x²,y²)` gives one linear
//! equation in `t₁ = h22·h31` and `t₂ = h21·h33 − h23·h31`:
//!
//! ```text
//! t₁·(−x²y¹ − x¹y²) + t₂·(x¹ + x²) = y² − y¹ ,
//! ```
//!
//! so two correspondences pin `(t₁, t₂)` and the rest of `Hy` follows from
//! the gauge `h22·h33 = 1` plus a choice of `h22` (vertical scale) and `h23`
//! (vertical offset). Focal lengths never enter. The remaining x-freedom is
//! fixed by [`shear_pair`], which restores orthogonality and aspect of the
//! frame's edge-midpoint axes.
//!
//! All points are in the centered pixel frame.

use crate::geometry::{Correspondence, Homography, Mat3, Point2, Real};
use thiserror::Error;

/// Relative determinant floor for the 2×2 alignment system.
const DEGENERACY_TOL: Real = 1e-9;
/// Relative determinant floor for the shear midpoint system.
const FRAME_TOL: Real = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("the two correspondences give a rank-deficient alignment system")]
    DegenerateSample,
    #[error("perspective coefficient t1={t1} exceeds the distortion bound {limit} (|t1| < 2/W)")]
    ExcessivePerspective { t1: Real, limit: Real },
    #[error("frame midpoint axes collapse under this map; shear is undetermined")]
    DegenerateFrame,
}

/// Which image of the pair a signed parameter set applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// How the free vertical scale `h22` is fixed once `t1` is known.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum H22Mode {
    /// `h22 = √((4 − W²t1²)/2)`: fixed by the edge-sum identity — the two
    /// edge-height *changes* sum to exactly `2H` (see [`edge_lengths`]), so
    /// the rectified frame comes out roughly double height (`h22² = 2` at
    /// `t1 = 0`).
    #[default]
    EdgeSum,
    /// `h22 = √(4 − W²t1²)/2`: the *mean* edge height is preserved instead,
    /// giving a unit scale at `t1 = 0`.
    UnitMean,
}

/// Parameters of one y-aligning factor `Hy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyParams {
    pub h21: Real,
    pub h22: Real,
    pub h23: Real,
    pub h31: Real,
    pub h33: Real,
}

impl HyParams {
    pub fn identity() -> Self {
        HyParams {
            h21: 0.0,
            h22: 1.0,
            h23: 0.0,
            h31: 0.0,
            h33: 1.0,
        }
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::new(
            1.0, 0.0, 0.0, self.h21, self.h22, self.h23, self.h31, 0.0, self.h33,
        )
    }

    pub fn homography(&self) -> Homography {
        Homography::from_matrix_unchecked(self.matrix())
    }

    /// Rectified row coordinate of `p` (may be non-finite when `p` sits on
    /// the map's vanishing line; callers score with that in mind).
    pub fn map_y(&self, p: Point2) -> Real {
        (self.h21 * p.x + self.h22 * p.y + self.h23) / (self.h31 * p.x + self.h33)
    }
}

/// Shear parameters; the right image uses `−Sb`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearParams {
    pub sa: Real,
    pub sb: Real,
}

/// Output of the two-point solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSolution {
    pub t1: Real,
    pub t2: Real,
    /// 2-norm condition number of the 2×2 system; large values flag
    /// near-degenerate samples that still passed the determinant floor.
    pub conditioning: Real,
}

/// Coefficients of the vertical-alignment equation for one correspondence:
/// `t1·c1 + t2·c2 = rhs`.
fn alignment_row(m: &Correspondence) -> (Real, Real, Real) {
    let (l, r) = (m.left, m.right);
    (-(r.x * l.y + l.x * r.y), l.x + r.x, r.y - l.y)
}

/// Solve for `(t1, t2)` from exactly two correspondences in the centered
/// frame.
///
/// The system is solved exactly by Cramer's rule; samples whose determinant
/// falls below `1e-9·max|A|²` (relative, so resolution-independent) are
/// rejected for resampling.
pub fn solve_two_point(
    m1: &Correspondence,
    m2: &Correspondence,
) -> Result<SolverSolution, SolverError> {
    let (a11, a12, b1) = alignment_row(m1);
    let (a21, a22, b2) = alignment_row(m2);

    let det = a11 * a22 - a12 * a21;
    let amax = a11.abs().max(a12.abs()).max(a21.abs()).max(a22.abs());
    if !det.is_finite() || det.abs() <= DEGENERACY_TOL * amax * amax {
        return Err(SolverError::DegenerateSample);
    }

    let t1 = (b1 * a22 - b2 * a12) / det;
    let t2 = (a11 * b2 - a21 * b1) / det;
    if !(t1.is_finite() && t2.is_finite()) {
        return Err(SolverError::DegenerateSample);
    }

    // 2-norm condition number of a 2×2, in closed form: the squared singular
    // values are the roots of λ² − ‖A‖F²·λ + det² = 0, whose product is det².
    let frob2 = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22;
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let lambda_max = 0.5 * (frob2 + disc);
    let conditioning = lambda_max / det.abs();

    Ok(SolverSolution {
        t1,
        t2,
        conditioning,
    })
}

/// Fix the vertical scale from `t1` and the image width.
///
/// Fails when `|t1| ≥ 2/W`, where the radicand `4 − W²t1²` stops being
/// positive — such maps need more perspective correction than the frame can
/// absorb without flipping an edge.
pub fn pick_h22(t1: Real, width: u32, mode: H22Mode) -> Result<Real, SolverError> {
    let w = width as Real;
    let limit = 2.0 / w;
    if !(t1.is_finite() && t1.abs() < limit) {
        return Err(SolverError::ExcessivePerspective { t1, limit });
    }
    let radicand = 4.0 - w * w * t1 * t1;
    Ok(match mode {
        H22Mode::EdgeSum => (radicand / 2.0).sqrt(),
        H22Mode::UnitMean => radicand.sqrt() / 2.0,
    })
}

/// Signed height change of the frame's left and right edges under the map
/// with perspective `t1` and vertical scale `h22` (deviation from the input
/// edge height `H`).
pub fn edge_lengths(t1: Real, h22: Real, dims: (u32, u32)) -> (Real, Real) {
    let (w, h) = (dims.0 as Real, dims.1 as Real);
    let l_left = 2.0 * h * h22 * h22 / (2.0 - t1 * w) - h;
    let l_right = 2.0 * h * h22 * h22 / (2.0 + t1 * w) - h;
    (l_left, l_right)
}

/// Expand a solution into the left/right `Hy` pair.
///
/// `h31 = t1/h22`, `h33 = 1/h22` (the `h22·h33 = 1` gauge) and
/// `h21 = t1·h23 + t2·h22`; the right image negates `h21` and `h31`.
pub fn build_hy_pair(sol: &SolverSolution, h22: Real, h23: Real) -> (HyParams, HyParams) {
    assert!(h22 > 0.0, "vertical scale must be positive (got {h22})");
    let h33 = 1.0 / h22;
    let h31 = sol.t1 / h22;
    let h21 = sol.t1 * h23 + sol.t2 * h22;
    let left = HyParams {
        h21,
        h22,
        h23,
        h31,
        h33,
    };
    let right = HyParams {
        h21: -h21,
        h22,
        h23,
        h31: -h31,
        h33,
    };
    (left, right)
}

/// Shear for a single image: make the images of the edge-midpoint axes
/// perpendicular again and restore the frame's `W²/H²` aspect.
///
/// With `x = b̂−d̂`, `y = ĉ−â` (midpoints of the frame edges mapped through
/// `Hy`), the post-shear x-components `u = Sa·xu + Sb·xv`,
/// `p = Sa·yu + Sb·yv` must satisfy `u·p + xv·yv = 0` and
/// `(u² + xv²)/(p² + yv²) = W²/H²`. Substituting the first into the second
/// collapses to `(u, p) = ±((W/H)·yv, −(H/W)·xv)`, and the 2×2 midpoint
/// system then yields `(Sa, Sb)` in closed form; the sign is fixed by
/// `Sa > 0`.
fn shear_for(hy: &HyParams, dims: (u32, u32)) -> Result<ShearParams, SolverError> {
    let (w, h) = (dims.0 as Real, dims.1 as Real);
    let map = hy.homography();
    let mid = |x: Real, y: Real| map.apply(Point2::new(x, y));
    let (Some(a), Some(b), Some(c), Some(d)) = (
        mid(0.0, -h / 2.0),
        mid(w / 2.0, 0.0),
        mid(0.0, h / 2.0),
        mid(-w / 2.0, 0.0),
    ) else {
        return Err(SolverError::DegenerateFrame);
    };
    let (xu, xv) = (b.x - d.x, b.y - d.y);
    let (yu, yv) = (c.x - a.x, c.y - a.y);

    let det = xu * yv - xv * yu;
    let scale = xu.abs().max(xv.abs()).max(yu.abs()).max(yv.abs());
    if !det.is_finite() || det.abs() <= FRAME_TOL * scale * scale {
        return Err(SolverError::DegenerateFrame);
    }

    let u = w / h * yv;
    let p = -(h / w) * xv;
    let mut sa = (u * yv - xv * p) / det;
    let mut sb = (xu * p - u * yu) / det;
    if sa < 0.0 {
        sa = -sa;
        sb = -sb;
    }
    if sa == 0.0 {
        return Err(SolverError::DegenerateFrame);
    }
    Ok(ShearParams { sa, sb })
}

/// Shear parameters for both images, solved independently per image.
///
/// For pairs built by [`build_hy_pair`] the two solutions agree up to the
/// sign of `Sb`, matching the signed shear convention.
pub fn shear_pair(
    hy: &(HyParams, HyParams),
    dims: (u32, u32),
) -> Result<(ShearParams, ShearParams), SolverError> {
    Ok((shear_for(&hy.0, dims)?, shear_for(&hy.1, dims)?))
}

/// Compose the full rectifying map `H = Hs·Hy` for one side.
///
/// `hs` carries the *left* image's sign convention; `side == Right` negates
/// `Sb`. The shear leaves rows 2 and 3 untouched, so composing never changes
/// vertical alignment.
pub fn compose(hs: &ShearParams, hy: &HyParams, side: Side) -> Homography {
    let sb = match side {
        Side::Left => hs.sb,
        Side::Right => -hs.sb,
    };
    let shear = Mat3::new(hs.sa, sb, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
    Homography::from_matrix_unchecked(shear * hy.matrix())
}
