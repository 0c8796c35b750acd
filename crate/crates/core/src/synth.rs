//! Synthetic latitudinal capture pairs and Monte-Carlo sweeps.
//!
//! A scene is a box of points at a configurable depth range, observed by the
//! symmetric pose pair of [`latitudinal_pose_pair`]. The roll/pitch knobs
//! give the *total* angle between the two views; each view gets half, with
//! opposite signs. Physical units are meters; the pose math works in sphere
//! radii, so the scene is scaled by `1/radius` before projection.
//!
//! Points are drawn uniformly on the box faces and rejected unless both
//! views see them inside the frame; pixel noise (when requested) is added
//! after the full clean set is collected, so the clean geometry for a given
//! seed is identical across noise levels.

use crate::geometry::{
    latitudinal_pose_pair, project, CameraIntrinsics, Correspondence, Frame, Homography,
    LatitudinalPose, MatchSet, Point2, Pose, Real, Vec3,
};
use crate::pipeline::{self, RansacConfig};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

/// Rejection-sampling budget, as a multiple of the requested point count.
const ATTEMPT_BUDGET_FACTOR: usize = 100;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid scene configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error(
        "could not realize the scene: {collected} visible points after {attempts} attempts \
         (the views may share no field of view at these angles)"
    )]
    UnrealizableScene { attempts: usize, collected: usize },
}

/// Scene and capture parameters, in physical units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SceneConfig {
    /// Sphere radius the cameras ride on, in meters.
    pub radius_m: Real,
    /// Near and far extent of the point box, in meters from the rotation
    /// center.
    pub depth_min_m: Real,
    pub depth_max_m: Real,
    /// Total roll between the two views, degrees (0–45).
    pub roll_deg: Real,
    /// Total pitch between the two views, degrees (0–90).
    pub pitch_deg: Real,
    /// Lateral (x and y) extent of the box, in meters; 0 selects an
    /// automatic extent of 0.4·depth_min, a patch comfortably inside the
    /// shared view for moderate angles.
    pub span_m: Real,
    pub n_points: usize,
    /// Standard deviation of the i.i.d. Gaussian noise added to every
    /// projected coordinate, in pixels.
    pub noise_px: Real,
    pub seed: u64,
    pub intrinsics: CameraIntrinsics,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            radius_m: 0.01,
            depth_min_m: 0.5,
            depth_max_m: 200.0,
            roll_deg: 10.0,
            pitch_deg: 20.0,
            span_m: 0.0,
            n_points: 100,
            noise_px: 0.0,
            seed: 0,
            intrinsics: CameraIntrinsics::new(800.0, 800.0, 960, 720).unwrap(),
        }
    }
}

impl SceneConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let fail = |reason| Err(SynthError::InvalidConfig { reason });
        if !(self.radius_m.is_finite() && self.radius_m > 0.0) {
            return fail("radius must be positive");
        }
        if !(self.depth_min_m.is_finite()
            && self.depth_max_m.is_finite()
            && self.depth_min_m > 0.0
            && self.depth_min_m <= self.depth_max_m)
        {
            return fail("depth range must satisfy 0 < min <= max");
        }
        if !(0.0..=45.0).contains(&self.roll_deg) {
            return fail("roll must be within [0, 45] degrees");
        }
        if !(0.0..=90.0).contains(&self.pitch_deg) {
            return fail("pitch must be within [0, 90] degrees");
        }
        if !(self.span_m.is_finite() && self.span_m >= 0.0) {
            return fail("span must be >= 0");
        }
        if self.n_points < 2 {
            return fail("need at least 2 points");
        }
        if !(self.noise_px.is_finite() && self.noise_px >= 0.0) {
            return fail("noise must be finite and >= 0");
        }
        Ok(())
    }

    /// Half-angles handed to the pose pair, in radians.
    pub fn half_angles(&self) -> LatitudinalPose {
        LatitudinalPose::new(
            (self.roll_deg / 2.0).to_radians(),
            (self.pitch_deg / 2.0).to_radians(),
        )
        .expect("validated angles are always in range")
    }

    fn lateral_extent_m(&self) -> Real {
        if self.span_m > 0.0 {
            self.span_m
        } else {
            0.4 * self.depth_min_m
        }
    }
}

/// One generated capture pair with its ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticPair {
    /// Projected correspondences with noise applied, centered frame.
    pub matches: MatchSet,
    /// The same correspondences before noise.
    pub clean_matches: MatchSet,
    pub true_poses: (Pose, Pose),
    pub true_homographies: (Homography, Homography),
}

/// Draw one point uniformly on a face of the box `x,y ∈ ±half`, `z ∈ [z0,z1]`
/// (radius units).
fn sample_box_face(rng: &mut ChaCha8Rng, half: Real, z0: Real, z1: Real) -> Vec3 {
    let face = rng.random_range(0..6u8);
    let (u, v) = (rng.random_range(-half..=half), rng.random_range(z0..=z1));
    match face {
        0 => Vec3::new(half, u, v),
        1 => Vec3::new(-half, u, v),
        2 => Vec3::new(u, half, v),
        3 => Vec3::new(u, -half, v),
        4 => Vec3::new(u, rng.random_range(-half..=half), z0),
        _ => Vec3::new(u, rng.random_range(-half..=half), z1),
    }
}

/// Generate a synthetic pair. Fails with [`SynthError::UnrealizableScene`]
/// when the two views share too little field of view for the box to be seen.
pub fn generate(cfg: &SceneConfig) -> Result<SyntheticPair, SynthError> {
    cfg.validate()?;
    let k = cfg.intrinsics;
    let angles = cfg.half_angles();
    let (pose1, pose2) = latitudinal_pose_pair(&angles);
    let true_homographies = crate::geometry::calibrated_rectifying_pair(&angles, &k);

    // Radius units: scene coordinates divided by the sphere radius.
    let z0 = cfg.depth_min_m / cfg.radius_m;
    let z1 = cfg.depth_max_m / cfg.radius_m;
    let half = cfg.lateral_extent_m() / cfg.radius_m / 2.0;
    let (hx, hy) = (
        (k.width as Real - 1.0) / 2.0,
        (k.height as Real - 1.0) / 2.0,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut clean = Vec::with_capacity(cfg.n_points);
    let budget = ATTEMPT_BUDGET_FACTOR * cfg.n_points;
    let mut attempts = 0;
    while clean.len() < cfg.n_points {
        if attempts >= budget {
            return Err(SynthError::UnrealizableScene {
                attempts,
                collected: clean.len(),
            });
        }
        attempts += 1;
        let p = sample_box_face(&mut rng, half, z0, z1);
        let (Ok(a), Ok(b)) = (project(&p, &pose1, &k), project(&p, &pose2, &k)) else {
            continue;
        };
        if a.x.abs() <= hx && a.y.abs() <= hy && b.x.abs() <= hx && b.y.abs() <= hy {
            clean.push(Correspondence::new(a, b));
        }
    }

    let noisy = if cfg.noise_px > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_px).expect("validated sigma");
        clean
            .iter()
            .map(|m| {
                let mut jitter = || normal.sample(&mut rng);
                Correspondence::new(
                    Point2::new(m.left.x + jitter(), m.left.y + jitter()),
                    Point2::new(m.right.x + jitter(), m.right.y + jitter()),
                )
            })
            .collect()
    } else {
        clean.clone()
    };

    Ok(SyntheticPair {
        matches: MatchSet::new(Frame::Centered, noisy),
        clean_matches: MatchSet::new(Frame::Centered, clean),
        true_poses: (pose1, pose2),
        true_homographies,
    })
}

/// Aggregate of one statistic across a cell's trials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SummaryStats {
    pub mean: Real,
    pub median: Real,
    pub min: Real,
    pub max: Real,
}

impl SummaryStats {
    /// Classical summary of a non-empty sample; median of an even count is
    /// the midpoint of the central pair.
    fn from_samples(mut xs: Vec<Real>) -> SummaryStats {
        assert!(!xs.is_empty());
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let n = xs.len();
        let median = if n % 2 == 1 {
            xs[n / 2]
        } else {
            0.5 * (xs[n / 2 - 1] + xs[n / 2])
        };
        SummaryStats {
            mean: xs.iter().sum::<Real>() / n as Real,
            median,
            min: xs[0],
            max: xs[n - 1],
        }
    }
}

/// Outcome of one sweep cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellOutcome {
    /// Index into the input grid.
    pub cell: usize,
    pub trials: usize,
    /// Trials where generation or estimation failed; such trials contribute
    /// no samples.
    pub failures: usize,
    /// Alignment-error statistics over successful trials (`None` when every
    /// trial failed).
    pub vae: Option<SummaryStats>,
    /// Distortion statistics (per-trial mean of the two images).
    pub nvd: Option<SummaryStats>,
}

/// Standard 64-bit mix (splitmix64 finalizer); used to derive independent
/// per-trial seeds.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn trial_seed(master: u64, cell: u64, trial: u64) -> u64 {
    mix64(mix64(master ^ cell.wrapping_mul(0xA24BAED4963EE407)) ^ trial)
}

/// Run the estimator over `trials` fresh scenes per grid cell and summarize.
///
/// Cells run in parallel; every trial derives its scene and estimator seeds
/// from (the cell's seed, cell index, trial index), so results are
/// independent of scheduling. Failed trials are counted per cell and never
/// abort the sweep.
pub fn sweep(grid: &[SceneConfig], trials: usize, ransac: &RansacConfig) -> Vec<CellOutcome> {
    assert!(trials >= 1, "need at least one trial per cell");
    grid.par_iter()
        .enumerate()
        .map(|(cell, cfg)| {
            let mut vaes = Vec::with_capacity(trials);
            let mut nvds = Vec::with_capacity(trials);
            let mut failures = 0usize;
            for trial in 0..trials {
                let seed = trial_seed(cfg.seed, cell as u64, trial as u64);
                let scene_cfg = SceneConfig { seed, ..*cfg };
                let est_cfg = RansacConfig {
                    seed: mix64(seed ^ 0x5851F42D4C957F2D),
                    ..*ransac
                };
                let outcome = generate(&scene_cfg).ok().and_then(|pair| {
                    pipeline::estimate(&pair.matches, cfg.intrinsics.dims(), &est_cfg).ok()
                });
                match outcome {
                    Some(r) => {
                        vaes.push(r.vae);
                        nvds.push(0.5 * (r.nvd_left + r.nvd_right));
                    }
                    None => failures += 1,
                }
            }
            CellOutcome {
                cell,
                trials,
                failures,
                vae: (!vaes.is_empty()).then(|| SummaryStats::from_samples(vaes)),
                nvd: (!nvds.is_empty()).then(|| SummaryStats::from_samples(nvds)),
            }
        })
        .collect()
}
