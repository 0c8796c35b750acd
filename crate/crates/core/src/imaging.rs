//! Raster-side plumbing: warping images through homographies, finding a
//! shared output canvas for a rectified pair, a block-matching disparity
//! demo, and binary PGM I/O.
//!
//! Unlike the projective math (centered frame), everything here speaks the
//! raster convention: pixel `(0, 0)` is the top-left sample, and the
//! homographies passed in must already be in the top-left frame
//! (see [`Homography::to_frame_top_left`]).

use crate::geometry::{Homography, Point2, Real};
use rayon::prelude::*;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("sample buffer holds {got} values, expected {expected}")]
    InvalidDimensions { expected: usize, got: usize },
    #[error("image sizes differ: {left:?} vs {right:?}")]
    DimensionMismatch { left: (u32, u32), right: (u32, u32) },
    #[error("block size must be odd and at least 3 (got {block})")]
    InvalidBlock { block: u32 },
    #[error("an image corner maps to infinity")]
    MapsToInfinity,
    #[error("not a binary 8-bit PGM: {reason}")]
    BadFormat { reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Row-major single-channel image with `f32` samples.
///
/// 8-bit data is promoted on load; [`GrayImage::to_u8`] re-quantizes by
/// rounding half away from zero, clamped to `[0, 255]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, data: Vec<f32>) -> Result<Self, ImagingError> {
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(ImagingError::InvalidDimensions {
                expected,
                got: data.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: u32, height: u32) -> Self {
        GrayImage {
            width,
            height,
            data: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn from_u8(width: u32, height: u32, bytes: &[u8]) -> Result<Self, ImagingError> {
        Self::new(width, height, bytes.iter().map(|&b| b as f32).collect())
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| v.clamp(0.0, 255.0).round() as u8)
            .collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Bilinear sample at a fractional position; `None` outside the image.
    pub fn sample_bilinear(&self, x: Real, y: Real) -> Option<f32> {
        let (w, h) = (self.width as Real, self.height as Real);
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 || x > w - 1.0 || y > h - 1.0 {
            return None;
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = (x - x0) as f32;
        let fy = (y - y0) as f32;
        let (x0, y0) = (x0 as u32, y0 as u32);
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let top = self.get(x0, y0) * (1.0 - fx) + self.get(x1, y0) * fx;
        let bot = self.get(x0, y1) * (1.0 - fx) + self.get(x1, y1) * fx;
        Some(top * (1.0 - fy) + bot * fy)
    }

    /// Rectangular sub-image (used to score interiors, away from warp
    /// borders).
    pub fn crop(&self, x0: u32, y0: u32, width: u32, height: u32) -> GrayImage {
        assert!(x0 + width <= self.width && y0 + height <= self.height);
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in y0..y0 + height {
            let row = y as usize * self.width as usize;
            data.extend_from_slice(&self.data[row + x0 as usize..row + (x0 + width) as usize]);
        }
        GrayImage {
            width,
            height,
            data,
        }
    }
}

/// Peak signal-to-noise ratio between two equally sized images, against a
/// 255 peak; infinite for identical inputs.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<Real, ImagingError> {
    if a.dims() != b.dims() {
        return Err(ImagingError::DimensionMismatch {
            left: a.dims(),
            right: b.dims(),
        });
    }
    let mse: Real = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| ((x - y) as Real).powi(2))
        .sum::<Real>()
        / a.data.len() as Real;
    if mse == 0.0 {
        return Ok(Real::INFINITY);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Inverse-map `img` through `h` (top-left frame) onto an `out_dims` canvas.
///
/// Output pixel `q` samples the source at `h⁻¹(q − offset)` with bilinear
/// interpolation; positions outside the source fill with 0. The offset
/// places the warped quadrilateral on the canvas (see [`common_bounds`]).
pub fn warp(
    img: &GrayImage,
    h: &Homography,
    out_dims: (u32, u32),
    offset: (Real, Real),
) -> GrayImage {
    let inv = h.inverse();
    let (out_w, out_h) = out_dims;
    let mut data = vec![0.0f32; out_w as usize * out_h as usize];
    data.par_chunks_mut(out_w as usize)
        .enumerate()
        .for_each(|(qy, row)| {
            for (qx, px) in row.iter_mut().enumerate() {
                let q = Point2::new(qx as Real - offset.0, qy as Real - offset.1);
                if let Some(src) = inv.apply(q) {
                    if let Some(v) = img.sample_bilinear(src.x, src.y) {
                        *px = v;
                    }
                }
            }
        });
    GrayImage {
        width: out_w,
        height: out_h,
        data,
    }
}

/// Canvas size plus per-image `(dx, dy)` offsets for a warped pair.
pub type PairBounds = ((u32, u32), (Real, Real), (Real, Real));

/// One canvas for a warped pair: the bounding box of both images' warped
/// corners, with a *shared* offset so equal rows in the two warps stay equal
/// rows on the canvas.
///
/// Returns `(out_dims, offset_left, offset_right)`; the offsets are equal by
/// construction (a shared horizontal placement costs little and keeps the
/// pair pixel-comparable).
pub fn common_bounds(
    h1: &Homography,
    h2: &Homography,
    dims: (u32, u32),
) -> Result<PairBounds, ImagingError> {
    let (w, h) = (dims.0 as Real, dims.1 as Real);
    let corners = [
        Point2::new(0.0, 0.0),
        Point2::new(w - 1.0, 0.0),
        Point2::new(0.0, h - 1.0),
        Point2::new(w - 1.0, h - 1.0),
    ];
    let (mut x_min, mut x_max) = (Real::INFINITY, Real::NEG_INFINITY);
    let (mut y_min, mut y_max) = (Real::INFINITY, Real::NEG_INFINITY);
    for map in [h1, h2] {
        for c in corners {
            let q = map.apply(c).ok_or(ImagingError::MapsToInfinity)?;
            x_min = x_min.min(q.x);
            x_max = x_max.max(q.x);
            y_min = y_min.min(q.y);
            y_max = y_max.max(q.y);
        }
    }
    let x0 = x_min.floor();
    let y0 = y_min.floor();
    let out = (
        (x_max.ceil() - x0 + 1.0) as u32,
        (y_max.ceil() - y0 + 1.0) as u32,
    );
    Ok((out, (-x0, -y0), (-x0, -y0)))
}

/// Disparity per left-image pixel, `f32`, with NaN marking pixels that
/// failed validation (image border or left↔right inconsistency).
#[derive(Clone, Debug, PartialEq)]
pub struct DisparityMap {
    pub width: u32,
    pub height: u32,
    pub values: Vec<f32>,
}

impl DisparityMap {
    pub const INVALID: f32 = f32::NAN;

    pub fn get(&self, x: u32, y: u32) -> f32 {
        self.values[y as usize * self.width as usize + x as usize]
    }

    pub fn is_valid(&self, x: u32, y: u32) -> bool {
        self.get(x, y).is_finite()
    }
}

/// Sum of absolute differences between a block at `(x, y)` in `a` and the
/// block at `(x − d, y)` in `b`.
fn sad(a: &GrayImage, b: &GrayImage, x: u32, y: u32, d: u32, r: u32) -> f32 {
    let mut sum = 0.0;
    for dy in y - r..=y + r {
        let row_a = dy as usize * a.width as usize;
        let row_b = dy as usize * b.width as usize;
        for dx in x - r..=x + r {
            let va = a.data[row_a + dx as usize];
            let vb = b.data[row_b + (dx - d) as usize];
            sum += (va - vb).abs();
        }
    }
    sum
}

/// Winner-take-all disparity for one pixel: smallest SAD over the row, ties
/// going to the smallest displacement.
fn best_disparity(
    a: &GrayImage,
    b: &GrayImage,
    x: u32,
    y: u32,
    max_disp: u32,
    r: u32,
    reversed: bool,
) -> Option<u32> {
    // `reversed` matches right-image pixels against the left image, where
    // the correspondence sits at x + d instead of x − d.
    let reach = if reversed { a.width - 1 - r - x } else { x - r };
    let d_cap = max_disp.min(reach);
    let mut best = (f32::INFINITY, 0u32);
    for d in 0..=d_cap {
        // Right-based matching reuses the same kernel: the left block at
        // x + d, offset by −d, is centered on the right pixel x.
        let cost = if reversed {
            sad(a, b, x + d, y, d, r)
        } else {
            sad(a, b, x, y, d, r)
        };
        if cost < best.0 {
            best = (cost, d);
        }
    }
    best.0.is_finite().then_some(best.1)
}

/// Block-matching disparity on a rectified pair: per left pixel, the
/// horizontal offset `d ∈ [0, max_disp]` whose block around `(x−d, y)` in
/// the right image matches best (sum of absolute differences,
/// winner-take-all). A pixel survives only if matching right→left lands
/// back within 1 px; borders and failed pixels are NaN.
pub fn block_disparity(
    left: &GrayImage,
    right: &GrayImage,
    block: u32,
    max_disp: u32,
) -> Result<DisparityMap, ImagingError> {
    if left.dims() != right.dims() {
        return Err(ImagingError::DimensionMismatch {
            left: left.dims(),
            right: right.dims(),
        });
    }
    if block < 3 || block.is_multiple_of(2) {
        return Err(ImagingError::InvalidBlock { block });
    }
    let r = block / 2;
    let (w, h) = left.dims();
    let mut values = vec![DisparityMap::INVALID; w as usize * h as usize];
    if w <= 2 * r || h <= 2 * r {
        return Ok(DisparityMap {
            width: w,
            height: h,
            values,
        });
    }

    values
        .par_chunks_mut(w as usize)
        .enumerate()
        .skip(r as usize)
        .take((h - 2 * r) as usize)
        .for_each(|(y, row)| {
            let y = y as u32;
            // Right-image disparities for this row, for the consistency check.
            let d_right: Vec<Option<u32>> = (r..w - r)
                .map(|x| best_disparity(left, right, x, y, max_disp, r, true))
                .collect();
            for x in r..w - r {
                let Some(dl) = best_disparity(left, right, x, y, max_disp, r, false) else {
                    continue;
                };
                let rx = x - dl;
                if rx < r {
                    continue;
                }
                let Some(dr) = d_right[(rx - r) as usize] else {
                    continue;
                };
                if (dl as i64 - dr as i64).abs() <= 1 {
                    row[x as usize] = dl as f32;
                }
            }
        });

    Ok(DisparityMap {
        width: w,
        height: h,
        values,
    })
}

/// Write an 8-bit binary PGM (`P5`, maxval 255).
pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<(), ImagingError> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
    out.write_all(&img.to_u8())?;
    out.flush()?;
    Ok(())
}

/// Read an 8-bit binary PGM. Only `P5` with maxval 255 is accepted; header
/// comments (`#`) are skipped.
pub fn read_pgm(path: &Path) -> Result<GrayImage, ImagingError> {
    let mut reader = BufReader::new(std::fs::File::open(path)?);
    let bad = |reason: &str| ImagingError::BadFormat {
        reason: reason.to_string(),
    };

    // Header tokens are separated by whitespace; a '#' starts a comment that
    // runs to end of line.
    let token = |reader: &mut BufReader<std::fs::File>| -> Result<String, ImagingError> {
        let mut tok = String::new();
        loop {
            let mut byte = [0u8; 1];
            if reader.read(&mut byte)? == 0 {
                if tok.is_empty() {
                    return Err(bad("truncated header"));
                }
                return Ok(tok);
            }
            match byte[0] {
                b'#' => {
                    let mut skip = Vec::new();
                    reader.read_until(b'\n', &mut skip)?;
                }
                c if c.is_ascii_whitespace() => {
                    if !tok.is_empty() {
                        return Ok(tok);
                    }
                }
                c => tok.push(c as char),
            }
        }
    };

    if token(&mut reader)? != "P5" {
        return Err(bad("missing P5 magic"));
    }
    let parse = |s: String| {
        s.parse::<u32>()
            .map_err(|_| bad("non-numeric header field"))
    };
    let width = parse(token(&mut reader)?)?;
    let height = parse(token(&mut reader)?)?;
    let maxval = parse(token(&mut reader)?)?;
    if maxval != 255 {
        return Err(bad("maxval must be 255"));
    }
    if width == 0 || height == 0 {
        return Err(bad("zero dimension"));
    }

    let mut bytes = vec![0u8; width as usize * height as usize];
    reader
        .read_exact(&mut bytes)
        .map_err(|_| bad("truncated pixel data"))?;
    GrayImage::from_u8(width, height, &bytes)
}
