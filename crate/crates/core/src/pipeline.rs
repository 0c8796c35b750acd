//! Robust estimation: repeated two-point solves scored over all matches.
//!
//! Each iteration draws two distinct correspondences from a seeded generator,
//! runs the solver chain, and scores the candidate by vertical alignment
//! error over the *whole* match set; the lowest score wins. The shear is
//! computed once, for the winner — it acts on x only, so it cannot change
//! any candidate's score or ranking.

use crate::geometry::{Frame, Homography, MatchSet, Real};
use crate::metrics;
use crate::solver::{
    build_hy_pair, compose, pick_h22, shear_pair, solve_two_point, H22Mode, HyParams, Side,
    SolverError,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("need at least {need} matches, got {have}")]
    NotEnoughMatches { have: usize, need: usize },
    #[error(
        "no sample produced a usable map ({degenerate} rank-deficient, {excessive} over the perspective bound)"
    )]
    AllSamplesDegenerate { degenerate: usize, excessive: usize },
    #[error("matches must be in the centered frame")]
    FrameMismatch,
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: &'static str },
    #[error("match {index} maps to infinity")]
    MapsToInfinity { index: usize },
}

/// Estimation knobs. `Default` gives 1000 iterations, seed 0, a 0.05 px
/// early-exit score, `h23 = 0`, and the edge-sum vertical scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RansacConfig {
    pub iterations: usize,
    pub seed: u64,
    /// Stop early once the best score drops below this (set 0 to always run
    /// the full budget).
    pub early_exit_vae: Real,
    pub h23: Real,
    pub h22_mode: H22Mode,
    pub min_matches: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            iterations: 1000,
            seed: 0,
            early_exit_vae: 0.05,
            h23: 0.0,
            h22_mode: H22Mode::EdgeSum,
            min_matches: 2,
        }
    }
}

impl RansacConfig {
    fn validate(&self) -> Result<(), EstimateError> {
        let fail = |reason| Err(EstimateError::InvalidConfig { reason });
        if self.iterations < 1 {
            return fail("iterations must be >= 1");
        }
        if !(self.early_exit_vae.is_finite() && self.early_exit_vae >= 0.0) {
            return fail("early_exit_vae must be finite and >= 0");
        }
        if !self.h23.is_finite() {
            return fail("h23 must be finite");
        }
        if self.min_matches < 2 {
            return fail("min_matches must be >= 2");
        }
        Ok(())
    }
}

/// Winning rectification with its diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectificationResult {
    pub h1: Homography,
    pub h2: Homography,
    /// Mean vertical misalignment over all matches, in pixels.
    pub vae: Real,
    pub nvd_left: Real,
    pub nvd_right: Real,
    /// Iterations actually executed (≤ the configured budget).
    pub iterations_used: usize,
    /// Indices of the two matches behind the winning map.
    pub sample_indices: (usize, usize),
}

struct Candidate {
    vae: Real,
    key: Real,
    pair: (HyParams, HyParams),
    indices: (usize, usize),
}

/// Per-point cap, in source-equivalent pixels, applied when ranking
/// candidates (not when reporting the alignment error).
///
/// Capping bounds how much score a gross mismatch can contribute, so a
/// candidate fitted to mismatched points can save at most this much per
/// point while paying misalignment on the correct majority — the standard
/// way to keep a consensus loop from being captured by contamination.
const RANKING_CAP_PX: Real = 1.0;

/// Mean |Δy| over every match (the reported alignment error) together with
/// the keep-best ranking key; non-finite rows (a point on a vanishing line)
/// poison both to infinity.
///
/// The ranking key differs from the reported mean in two ways. First, it is
/// measured in source-equivalent pixels: both maps of a candidate scale
/// rectified y by the common factor h22², so raw errors of candidates with
/// different perspective strengths are not comparable — as |t1| approaches
/// the 2/W limit, h22 → 0 squashes every row toward the horizon and the raw
/// error of an arbitrarily wrong candidate drops toward zero. Dividing by
/// h22² makes the comparison gauge-free (equal to scoring with any fixed
/// h22). Second, each point's contribution saturates at [`RANKING_CAP_PX`]
/// so mismatched points cannot buy the win.
fn score(pair: &(HyParams, HyParams), matches: &MatchSet) -> (Real, Real) {
    let h22_sq = pair.0.h22 * pair.0.h22;
    let mut sum = 0.0;
    let mut capped = 0.0;
    for m in matches.iter() {
        let dy = pair.0.map_y(m.left) - pair.1.map_y(m.right);
        if !dy.is_finite() {
            return (Real::INFINITY, Real::INFINITY);
        }
        sum += dy.abs();
        capped += (dy.abs() / h22_sq).min(RANKING_CAP_PX);
    }
    let n = matches.len() as Real;
    (sum / n, capped / n)
}

/// Estimate a rectifying pair for `matches` (centered frame) on a `dims`
/// image.
///
/// Deterministic: the same matches, dims, and config always produce the same
/// result. Score ties keep the earliest iteration's candidate.
pub fn estimate(
    matches: &MatchSet,
    dims: (u32, u32),
    cfg: &RansacConfig,
) -> Result<RectificationResult, EstimateError> {
    estimate_traced(matches, dims, cfg, None)
}

/// [`estimate`], optionally recording the best ranking key after each
/// executed iteration (used to assert the keep-best loop never regresses).
pub(crate) fn estimate_traced(
    matches: &MatchSet,
    dims: (u32, u32),
    cfg: &RansacConfig,
    mut trace: Option<&mut Vec<Real>>,
) -> Result<RectificationResult, EstimateError> {
    cfg.validate()?;
    if matches.frame() != Frame::Centered {
        return Err(EstimateError::FrameMismatch);
    }
    let n = matches.len();
    if n < cfg.min_matches {
        return Err(EstimateError::NotEnoughMatches {
            have: n,
            need: cfg.min_matches,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Candidate> = None;
    let mut degenerate = 0usize;
    let mut excessive = 0usize;
    let mut iterations_used = 0usize;

    for _ in 0..cfg.iterations {
        iterations_used += 1;
        let idx = rand::seq::index::sample(&mut rng, n, 2);
        let (i, j) = (idx.index(0), idx.index(1));

        let pair =
            match solve_two_point(&matches.as_slice()[i], &matches.as_slice()[j]).and_then(|sol| {
                let h22 = pick_h22(sol.t1, dims.0, cfg.h22_mode)?;
                Ok(build_hy_pair(&sol, h22, cfg.h23))
            }) {
                Ok(pair) => pair,
                Err(SolverError::DegenerateSample) => {
                    degenerate += 1;
                    continue;
                }
                Err(SolverError::ExcessivePerspective { .. }) => {
                    excessive += 1;
                    continue;
                }
                Err(SolverError::DegenerateFrame) => unreachable!("not raised by this chain"),
            };

        let (vae, key) = score(&pair, matches);
        if key.is_finite() && best.as_ref().is_none_or(|b| key < b.key) {
            best = Some(Candidate {
                vae,
                key,
                pair,
                indices: (i, j),
            });
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(best.as_ref().map_or(Real::INFINITY, |b| b.key));
        }
        if best.as_ref().is_some_and(|b| b.vae < cfg.early_exit_vae) {
            break;
        }
    }

    let Some(winner) = best else {
        return Err(EstimateError::AllSamplesDegenerate {
            degenerate,
            excessive,
        });
    };

    // Pairs from build_hy_pair with |t1| < 2/W keep the frame's midpoint
    // axes independent, so the shear always exists for a winner.
    let (hs, _) = shear_pair(&winner.pair, dims).expect("winning pair has a non-degenerate frame");
    let h1 = compose(&hs, &winner.pair.0, Side::Left);
    let h2 = compose(&hs, &winner.pair.1, Side::Right);

    // Frame corners stay short of the vanishing line when |t1| < 2/W, so
    // the corner metric is always defined here.
    let nvd_left = metrics::nvd(&h1, dims).expect("corners are finite under the winning map");
    let nvd_right = metrics::nvd(&h2, dims).expect("corners are finite under the winning map");

    Ok(RectificationResult {
        h1,
        h2,
        vae: winner.vae,
        nvd_left,
        nvd_right,
        iterations_used,
        sample_indices: winner.indices,
    })
}

/// Push every match through its side's homography, preserving the frame tag.
pub fn apply_to_matches(
    h1: &Homography,
    h2: &Homography,
    matches: &MatchSet,
) -> Result<MatchSet, EstimateError> {
    let mut out = Vec::with_capacity(matches.len());
    for (index, m) in matches.iter().enumerate() {
        let (Some(l), Some(r)) = (h1.apply(m.left), h2.apply(m.right)) else {
            return Err(EstimateError::MapsToInfinity { index });
        };
        out.push(crate::geometry::Correspondence::new(l, r));
    }
    Ok(MatchSet::new(matches.frame(), out))
}
