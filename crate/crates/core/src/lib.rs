//! Stereo rectification for uncalibrated cameras under latitudinal motion.
//!
//! A pan–tilt camera whose optical center sits a small distance from its
//! rotation center traces a sphere as it rotates. Two captures from such a
//! rig form a narrow-baseline stereo pair, and the pair can be row-aligned
//! ("rectified") without knowing the focal length: the vertical alignment
//! constraint is linear in two parameters, so two point correspondences
//! determine the rectifying map.
//!
//! The crate provides:
//!
//! - [`geometry`]: the camera model, pose pairs, and the calibrated
//!   closed-form rectifying homographies (useful as ground truth),
//! - [`solver`]: the two-point solver, the perspective-distortion rule for
//!   the remaining vertical-scale freedom, and the shear that restores the
//!   frame's aspect,
//! - [`pipeline`]: a seeded RANSAC-style estimator over noisy match sets,
//! - [`metrics`]: vertical alignment error and normalized vertex distance,
//! - [`synth`]: a synthetic scene generator and Monte-Carlo sweep harness,
//! - [`imaging`]: homography warps, shared canvas computation, block-matching
//!   disparity, and binary PGM I/O for end-to-end demos.

pub mod geometry;
pub mod imaging;
pub mod metrics;
pub mod pipeline;
pub mod solver;
pub mod synth;

pub use geometry::{
    calibrated_rectifying_pair, euler_rotation, latitudinal_pose_pair, project, CameraIntrinsics,
    Correspondence, Frame, GeometryError, Homography, LatitudinalPose, MatchSet, Point2, Pose,
};
pub use pipeline::{estimate, EstimateError, RansacConfig, RectificationResult};
pub use solver::{HyParams, ShearParams, SolverError, SolverSolution};
pub use synth::{SceneConfig, SynthError, SyntheticPair};
