//! Camera model, pose pairs, and closed-form rectifying homographies.
//!
//! The motion model is a camera on a sphere of fixed latitude whose optical
//! axis points outward along the sphere normal (a pan–tilt rig whose rotation
//! center sits behind the lens). With a rotation of `α` about the optical
//! axis (image roll) and `β` about the vertical axis (pan), split
//! symmetrically between the two captures, the world-to-camera poses are
//!
//! ```text
//! [R(α, −β, 0) | z]   and   [R(−α, β, 0) | z],   z = (0, 0, −1)ᵀ,
//! ```
//!
//! with the Euler convention `R(α, β, γ) = R_z(α)·R_y(β)·R_x(γ)`. Each view
//! is rectified by rotating the camera back to the shared world orientation,
//! which on homogeneous pixels is `H = K·R⁻¹·K⁻¹` with `K = diag(fx, fy, 1)`.
//!
//! All projective math runs in the *centered* pixel frame (origin at the
//! principal point, which is fixed at the image center). Raster I/O uses the
//! *top-left* frame; the conversion offset is `((W−1)/2, (H−1)/2)` and is
//! applied exactly once at the file boundary.

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

pub type Real = f64;
pub type Vec3 = Vector3<Real>;
pub type Mat3 = Matrix3<Real>;

/// Orthonormality slack accepted by [`Pose::new`].
const POSE_ORTHONORMAL_TOL: Real = 1e-9;
/// Determinant floor below which a normalized 3×3 map is treated as singular.
const SINGULAR_DET_TOL: Real = 1e-12;
/// Relative floor on the homogeneous scale under dehomogenization.
const INFINITY_TOL: Real = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("focal lengths must be finite and positive (got fx={fx}, fy={fy})")]
    InvalidFocal { fx: Real, fy: Real },
    #[error("image dimensions must be at least 2x2 (got {width}x{height})")]
    InvalidDims { width: u32, height: u32 },
    #[error(
        "pose angles must be finite and within (-pi/2, pi/2) (got alpha={alpha}, beta={beta})"
    )]
    InvalidAngles { alpha: Real, beta: Real },
    #[error("rotation is not orthonormal within {POSE_ORTHONORMAL_TOL:e}")]
    NotARotation,
    #[error("point sits behind the camera (depth {depth})")]
    PointBehindCamera { depth: Real },
    #[error("matrix is singular or non-finite")]
    SingularMatrix,
}

/// Coordinate frame of image points.
///
/// `Centered` puts the origin at the principal point (image center);
/// `TopLeft` is the raster convention with the origin at pixel (0, 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Centered,
    TopLeft,
}

/// 2D image point. The frame it lives in is tracked by the owning
/// [`MatchSet`] or by the function contract.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: Real,
    pub y: Real,
}

impl Point2 {
    pub fn new(x: Real, y: Real) -> Self {
        Self { x, y }
    }
}

/// Principal point of a `(width, height)` image in top-left coordinates.
///
/// Pixel-center convention: the center of a W-pixel row is `(W−1)/2`.
pub fn principal_point(dims: (u32, u32)) -> (Real, Real) {
    ((dims.0 as Real - 1.0) / 2.0, (dims.1 as Real - 1.0) / 2.0)
}

/// Convert a top-left point to the centered frame.
pub fn top_left_to_centered(p: Point2, dims: (u32, u32)) -> Point2 {
    let (cx, cy) = principal_point(dims);
    Point2::new(p.x - cx, p.y - cy)
}

/// Convert a centered point to the top-left frame.
pub fn centered_to_top_left(p: Point2, dims: (u32, u32)) -> Point2 {
    let (cx, cy) = principal_point(dims);
    Point2::new(p.x + cx, p.y + cy)
}

/// A left/right point correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence {
    pub left: Point2,
    pub right: Point2,
}

impl Correspondence {
    pub fn new(left: Point2, right: Point2) -> Self {
        Self { left, right }
    }
}

/// A set of correspondences that all live in one frame.
///
/// Tagging the frame on the set (rather than every point) keeps mixed-frame
/// data out of the solver while staying cheap in inner loops.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchSet {
    frame: Frame,
    matches: Vec<Correspondence>,
}

impl MatchSet {
    pub fn new(frame: Frame, matches: Vec<Correspondence>) -> Self {
        Self { frame, matches }
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn as_slice(&self) -> &[Correspondence] {
        &self.matches
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Correspondence> {
        self.matches.iter()
    }

    /// Reframe every point into centered coordinates (no-op if already there).
    pub fn to_centered(&self, dims: (u32, u32)) -> MatchSet {
        match self.frame {
            Frame::Centered => self.clone(),
            Frame::TopLeft => self.reframed(Frame::Centered, |p| top_left_to_centered(p, dims)),
        }
    }

    /// Reframe every point into top-left coordinates (no-op if already there).
    pub fn to_top_left(&self, dims: (u32, u32)) -> MatchSet {
        match self.frame {
            Frame::TopLeft => self.clone(),
            Frame::Centered => self.reframed(Frame::TopLeft, |p| centered_to_top_left(p, dims)),
        }
    }

    fn reframed(&self, frame: Frame, f: impl Fn(Point2) -> Point2) -> MatchSet {
        MatchSet {
            frame,
            matches: self
                .matches
                .iter()
                .map(|m| Correspondence::new(f(m.left), f(m.right)))
                .collect(),
        }
    }
}

/// Pinhole intrinsics with the principal point pinned to the image center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: Real,
    pub fy: Real,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: Real, fy: Real, width: u32, height: u32) -> Result<Self, GeometryError> {
        if !(fx.is_finite() && fy.is_finite() && fx > 0.0 && fy > 0.0) {
            return Err(GeometryError::InvalidFocal { fx, fy });
        }
        if width < 2 || height < 2 {
            return Err(GeometryError::InvalidDims { width, height });
        }
        Ok(Self {
            fx,
            fy,
            width,
            height,
        })
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Calibration matrix `diag(fx, fy, 1)` in the centered frame.
    pub fn k(&self) -> Mat3 {
        Mat3::from_diagonal(&Vec3::new(self.fx, self.fy, 1.0))
    }

    pub fn k_inv(&self) -> Mat3 {
        Mat3::from_diagonal(&Vec3::new(1.0 / self.fx, 1.0 / self.fy, 1.0))
    }
}

/// The angle pair of a latitudinal capture: `alpha` spins the image about the
/// optical axis, `beta` pans the view direction in the horizontal plane. The
/// two views of a pair get `(+alpha, −beta)` and `(−alpha, +beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatitudinalPose {
    pub alpha: Real,
    pub beta: Real,
}

impl LatitudinalPose {
    pub fn new(alpha: Real, beta: Real) -> Result<Self, GeometryError> {
        let half = std::f64::consts::FRAC_PI_2;
        if !(alpha.is_finite() && beta.is_finite() && alpha.abs() < half && beta.abs() < half) {
            return Err(GeometryError::InvalidAngles { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }
}

/// World-to-camera rigid pose `x_cam = R·x_world + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub r: Mat3,
    pub t: Vec3,
}

impl Pose {
    /// Build a pose, rejecting rotation matrices that are not in SO(3).
    pub fn new(r: Mat3, t: Vec3) -> Result<Self, GeometryError> {
        let gram = r.transpose() * r;
        let defect = (gram - Mat3::identity()).abs().max();
        if !defect.is_finite() || defect > POSE_ORTHONORMAL_TOL || r.determinant() < 0.0 {
            return Err(GeometryError::NotARotation);
        }
        Ok(Self { r, t })
    }

    /// Camera center in world coordinates (`−Rᵀt`).
    pub fn center(&self) -> Vec3 {
        -(self.r.transpose() * self.t)
    }
}

/// Rotation from yaw/pitch/roll: `R_z(alpha)·R_y(beta)·R_x(gamma)`.
pub fn euler_rotation(alpha: Real, beta: Real, gamma: Real) -> Mat3 {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let rz = Mat3::new(ca, -sa, 0.0, sa, ca, 0.0, 0.0, 0.0, 1.0);
    let ry = Mat3::new(cb, 0.0, sb, 0.0, 1.0, 0.0, -sb, 0.0, cb);
    let rx = Mat3::new(1.0, 0.0, 0.0, 0.0, cg, -sg, 0.0, sg, cg);
    rz * ry * rx
}

/// The symmetric pose pair of a latitudinal capture.
///
/// Both translations are the unit outward offset `z = (0, 0, −1)ᵀ`; physical
/// sphere radius enters by scaling the *scene*, not the pose.
pub fn latitudinal_pose_pair(angles: &LatitudinalPose) -> (Pose, Pose) {
    let z = Vec3::new(0.0, 0.0, -1.0);
    let r1 = euler_rotation(angles.alpha, -angles.beta, 0.0);
    let r2 = euler_rotation(-angles.alpha, angles.beta, 0.0);
    // Orthonormal by construction.
    (Pose { r: r1, t: z }, Pose { r: r2, t: z })
}

/// Project a world point to centered pixel coordinates.
pub fn project(p: &Vec3, pose: &Pose, k: &CameraIntrinsics) -> Result<Point2, GeometryError> {
    let x = pose.r * p + pose.t;
    if x.z <= 0.0 {
        return Err(GeometryError::PointBehindCamera { depth: x.z });
    }
    Ok(Point2::new(k.fx * x.x / x.z, k.fy * x.y / x.z))
}

/// Projective map on homogeneous centered pixels, kept unnormalized
/// internally; scale-normalize only when serializing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(Mat3);

impl Homography {
    /// Wrap a matrix, rejecting singular or non-finite input.
    pub fn new(m: Mat3) -> Result<Self, GeometryError> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::SingularMatrix);
        }
        let h = Homography(m);
        if h.normalized().0.determinant().abs() <= SINGULAR_DET_TOL {
            return Err(GeometryError::SingularMatrix);
        }
        Ok(h)
    }

    /// Wrap a matrix known to be invertible (checked only in debug builds).
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        debug_assert!(
            Homography::new(m).is_ok(),
            "homography invariant violated: {m:?}"
        );
        Homography(m)
    }

    pub fn identity() -> Self {
        Homography(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Scale so the bottom-right entry is 1 when it is safely nonzero,
    /// otherwise fall back to unit max-abs entry.
    pub fn normalized(&self) -> Homography {
        let m = self.0;
        let max = m.abs().max();
        if m[(2, 2)].abs() > INFINITY_TOL * max {
            Homography(m / m[(2, 2)])
        } else if max > 0.0 {
            Homography(m / max)
        } else {
            *self
        }
    }

    /// Map a point; `None` when it is sent to infinity.
    pub fn apply(&self, p: Point2) -> Option<Point2> {
        let v = self.0 * Vec3::new(p.x, p.y, 1.0);
        let scale = v.abs().max();
        if v.z.abs() <= INFINITY_TOL * scale || scale == 0.0 {
            return None;
        }
        Some(Point2::new(v.x / v.z, v.y / v.z))
    }

    /// Inverse map. Well-defined because the type invariant keeps the matrix
    /// away from singular.
    pub fn inverse(&self) -> Homography {
        Homography(
            self.normalized()
                .0
                .try_inverse()
                .expect("homography invariant guarantees invertibility"),
        )
    }

    /// Conjugate a centered-frame map into the top-left frame.
    pub fn to_frame_top_left(&self, dims: (u32, u32)) -> Homography {
        let (cx, cy) = principal_point(dims);
        let t = Mat3::new(1.0, 0.0, cx, 0.0, 1.0, cy, 0.0, 0.0, 1.0);
        let t_inv = Mat3::new(1.0, 0.0, -cx, 0.0, 1.0, -cy, 0.0, 0.0, 1.0);
        Homography(t * self.0 * t_inv)
    }

    /// Conjugate a top-left-frame map into the centered frame.
    pub fn to_frame_centered(&self, dims: (u32, u32)) -> Homography {
        let (cx, cy) = principal_point(dims);
        let t = Mat3::new(1.0, 0.0, cx, 0.0, 1.0, cy, 0.0, 0.0, 1.0);
        let t_inv = Mat3::new(1.0, 0.0, -cx, 0.0, 1.0, -cy, 0.0, 0.0, 1.0);
        Homography(t_inv * self.0 * t)
    }
}

/// Rectifying homography pair `H^j = K·(R^j)⁻¹·K⁻¹` for a calibrated
/// latitudinal capture, evaluated as a matrix product.
pub fn calibrated_rectifying_pair(
    angles: &LatitudinalPose,
    k: &CameraIntrinsics,
) -> (Homography, Homography) {
    let (p1, p2) = latitudinal_pose_pair(angles);
    let h1 = k.k() * p1.r.transpose() * k.k_inv();
    let h2 = k.k() * p2.r.transpose() * k.k_inv();
    (
        Homography::from_matrix_unchecked(h1),
        Homography::from_matrix_unchecked(h2),
    )
}

/// The same pair written out entry by entry.
///
/// Kept separate from [`calibrated_rectifying_pair`] so the two independent
/// routes can be checked against each other.
pub fn rectifying_pair_closed_form(
    angles: &LatitudinalPose,
    k: &CameraIntrinsics,
) -> (Homography, Homography) {
    let (sa, ca) = angles.alpha.sin_cos();
    let (sb, cb) = angles.beta.sin_cos();
    let (fx, fy) = (k.fx, k.fy);
    let h1 = Mat3::new(
        ca * cb,
        fx / fy * sa * cb,
        fx * sb,
        -(fy / fx) * sa,
        ca,
        0.0,
        -ca * sb / fx,
        -sa * sb / fy,
        cb,
    );
    let h2 = Mat3::new(
        ca * cb,
        -(fx / fy) * sa * cb,
        -fx * sb,
        fy / fx * sa,
        ca,
        0.0,
        ca * sb / fx,
        -sa * sb / fy,
        cb,
    );
    (
        Homography::from_matrix_unchecked(h1),
        Homography::from_matrix_unchecked(h2),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn intrinsics(fx: Real, fy: Real) -> CameraIntrinsics {
        CameraIntrinsics::new(fx, fy, 960, 720).unwrap()
    }

    /// Independent oracle: assemble the three axis rotations by hand and
    /// multiply explicitly, without reusing the implementation's helpers.
    fn euler_oracle(a: Real, b: Real, g: Real) -> [[Real; 3]; 3] {
        let mul = |x: [[Real; 3]; 3], y: [[Real; 3]; 3]| {
            let mut out = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for (k, yk) in y.iter().enumerate() {
                        out[i][j] += x[i][k] * yk[j];
                    }
                }
            }
            out
        };
        let rz = [
            [a.cos(), -a.sin(), 0.0],
            [a.sin(), a.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ];
        let ry = [
            [b.cos(), 0.0, b.sin()],
            [0.0, 1.0, 0.0],
            [-b.sin(), 0.0, b.cos()],
        ];
        let rx = [
            [1.0, 0.0, 0.0],
            [0.0, g.cos(), -g.sin()],
            [0.0, g.sin(), g.cos()],
        ];
        mul(mul(rz, ry), rx)
    }

    #[test]
    fn euler_matches_per_axis_product_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let (a, b, g) = (
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            );
            let r = euler_rotation(a, b, g);
            let o = euler_oracle(a, b, g);
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!(r[(i, j)], o[i][j], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn euler_quarter_turn_permutes_axes() {
        let r = euler_rotation(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        let expect = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!((r - expect).abs().max(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn euler_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let r = euler_rotation(
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
            );
            let defect = (r.transpose() * r - Mat3::identity()).abs().max();
            assert!(defect < 1e-12, "orthonormality defect {defect}");
            assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pose_pair_structure() {
        let angles = LatitudinalPose::new(0.3, 0.4).unwrap();
        let (p1, p2) = latitudinal_pose_pair(&angles);
        assert_eq!(p1.t, Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(p2.t, Vec3::new(0.0, 0.0, -1.0));
        // The two rotations differ exactly by negated (1,2), (1,3), (2,1),
        // (3,1) entries; everything else is shared.
        for i in 0..3 {
            for j in 0..3 {
                let flip = matches!((i, j), (0, 1) | (0, 2) | (1, 0) | (2, 0));
                let want = if flip { -p1.r[(i, j)] } else { p1.r[(i, j)] };
                assert_abs_diff_eq!(p2.r[(i, j)], want, epsilon = 1e-15);
            }
        }

        let id = latitudinal_pose_pair(&LatitudinalPose::new(0.0, 0.0).unwrap());
        assert_abs_diff_eq!((id.0.r - Mat3::identity()).abs().max(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn pose_centers_sit_on_the_unit_sphere() {
        let angles = LatitudinalPose::new(0.25, 0.4).unwrap();
        let (p1, p2) = latitudinal_pose_pair(&angles);
        assert_abs_diff_eq!(p1.center().norm(), 1.0, epsilon = 1e-14);
        // Pan moves the centers apart purely horizontally.
        let base = p1.center() - p2.center();
        assert_abs_diff_eq!(base.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(base.z, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(base.norm(), 2.0 * angles.beta.sin(), epsilon = 1e-13);
    }

    #[test]
    fn pose_constructor_rejects_non_rotations() {
        let skew = Mat3::new(1.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(
            Pose::new(skew, Vec3::zeros()).unwrap_err(),
            GeometryError::NotARotation
        );
        let reflect = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert_eq!(
            Pose::new(reflect, Vec3::zeros()).unwrap_err(),
            GeometryError::NotARotation
        );
    }

    #[test]
    fn project_unit_cases() {
        let k = intrinsics(600.0, 600.0);
        let pose = Pose::new(Mat3::identity(), Vec3::new(0.0, 0.0, -1.0)).unwrap();
        let p = project(&Vec3::new(0.0, 0.0, 2.0), &pose, &k).unwrap();
        assert_eq!((p.x, p.y), (0.0, 0.0));
        let p = project(&Vec3::new(1.0, 0.0, 2.0), &pose, &k).unwrap();
        assert_abs_diff_eq!(p.x, 600.0, epsilon = 1e-12);
        assert_eq!(p.y, 0.0);
        // Depth 0.5 − 1 < 0: behind the camera.
        assert!(matches!(
            project(&Vec3::new(0.0, 0.0, 0.5), &pose, &k),
            Err(GeometryError::PointBehindCamera { .. })
        ));
    }

    #[test]
    fn project_matches_homogeneous_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = intrinsics(800.0, 750.0);
        let angles = LatitudinalPose::new(0.2, 0.3).unwrap();
        let (pose, _) = latitudinal_pose_pair(&angles);
        for _ in 0..100 {
            let p = Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(10.0..100.0),
            );
            // Oracle: full 3×4 homogeneous projection matrix times [P; 1].
            let kr = k.k() * pose.r;
            let kt = k.k() * pose.t;
            let h = kr * p + kt;
            let got = project(&p, &pose, &k).unwrap();
            assert_abs_diff_eq!(got.x, h.x / h.z, epsilon = 1e-10);
            assert_abs_diff_eq!(got.y, h.y / h.z, epsilon = 1e-10);
        }
    }

    #[test]
    fn frame_round_trip_is_identity() {
        let dims = (960, 720);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = Point2::new(
                rng.random_range(-480.0..480.0),
                rng.random_range(-360.0..360.0),
            );
            let back = top_left_to_centered(centered_to_top_left(p, dims), dims);
            assert_abs_diff_eq!(back.x, p.x, epsilon = 1e-12);
            assert_abs_diff_eq!(back.y, p.y, epsilon = 1e-12);
        }
    }

    #[test]
    fn rectifying_pair_is_identity_at_zero_angles() {
        let k = intrinsics(800.0, 800.0);
        let (h1, h2) = calibrated_rectifying_pair(&LatitudinalPose::new(0.0, 0.0).unwrap(), &k);
        assert_abs_diff_eq!(
            (h1.matrix() - Mat3::identity()).abs().max(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            (h2.matrix() - Mat3::identity()).abs().max(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn closed_form_matches_product_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let angles =
                LatitudinalPose::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7))
                    .unwrap();
            let k = intrinsics(
                rng.random_range(300.0..1500.0),
                rng.random_range(300.0..1500.0),
            );
            let (p1, p2) = calibrated_rectifying_pair(&angles, &k);
            let (c1, c2) = rectifying_pair_closed_form(&angles, &k);
            for (p, c) in [(p1, c1), (p2, c2)] {
                let scale = p.matrix().abs().max();
                let err = (p.matrix() - c.matrix()).abs().max() / scale;
                assert!(err < 1e-10, "closed form diverges: rel err {err}");
            }
        }
    }

    #[test]
    fn rectified_rows_align_for_true_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let k = intrinsics(700.0, 700.0);
        let angles = LatitudinalPose::new(0.15, 0.25).unwrap();
        let (pose1, pose2) = latitudinal_pose_pair(&angles);
        let (h1, h2) = calibrated_rectifying_pair(&angles, &k);
        for _ in 0..100 {
            let p = Vec3::new(
                rng.random_range(-20.0..20.0),
                rng.random_range(-20.0..20.0),
                rng.random_range(40.0..400.0),
            );
            let (Ok(a), Ok(b)) = (project(&p, &pose1, &k), project(&p, &pose2, &k)) else {
                continue;
            };
            let ra = h1.apply(a).unwrap();
            let rb = h2.apply(b).unwrap();
            assert_abs_diff_eq!(ra.y, rb.y, epsilon = 1e-9);
        }
    }

    #[test]
    fn homography_normalization_and_infinity() {
        let m = Mat3::new(2.0, 0.0, 6.0, 0.0, 2.0, 8.0, 0.0, 0.0, 2.0);
        let h = Homography::new(m).unwrap();
        assert_eq!(h.normalized().matrix()[(2, 2)], 1.0);
        assert_eq!(h.normalized().matrix()[(0, 2)], 3.0);

        // A projective map sends its vanishing line to infinity.
        let h = Homography::new(Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.01, 0.0, 1.0)).unwrap();
        assert!(h.apply(Point2::new(-100.0, 5.0)).is_none());
        assert!(h.apply(Point2::new(50.0, 5.0)).is_some());

        assert_eq!(
            Homography::new(Mat3::zeros()).unwrap_err(),
            GeometryError::SingularMatrix
        );
    }

    #[test]
    fn homography_inverse_round_trips() {
        let h = Homography::new(Mat3::new(
            1.2, 0.1, 30.0, -0.05, 0.9, -12.0, 1e-4, -2e-4, 1.0,
        ))
        .unwrap();
        let inv = h.inverse();
        let p = Point2::new(123.0, -45.0);
        let back = inv.apply(h.apply(p).unwrap()).unwrap();
        assert_abs_diff_eq!(back.x, p.x, epsilon = 1e-9);
        assert_abs_diff_eq!(back.y, p.y, epsilon = 1e-9);
    }

    #[test]
    fn frame_conjugation_keeps_translations() {
        let dims = (640, 480);
        let h = Homography::new(Mat3::new(1.0, 0.0, 3.0, 0.0, 1.0, 4.0, 0.0, 0.0, 1.0)).unwrap();
        let tl = h.to_frame_top_left(dims);
        assert_abs_diff_eq!((tl.matrix() - h.matrix()).abs().max(), 0.0, epsilon = 1e-12);
        let back = tl.to_frame_centered(dims);
        assert_abs_diff_eq!(
            (back.matrix() - h.matrix()).abs().max(),
            0.0,
            epsilon = 1e-12
        );
    }
}
