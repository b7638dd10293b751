use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::infer::probability_map;
use super::unet::UNet;
use crate::canvas::{Label, LabelMask};
use crate::error::{shape_err, Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    pub tile_size: usize,
    /// Distance between tile origins; equal to `tile_size` for
    /// non-overlapping tiles. Overlapping tiles are averaged.
    pub tile_stride: usize,
    pub n_rotations: usize,
    pub vote_threshold: f64,
    pub probability_threshold: f64,
    /// Unlabeled pixels within this many pixels (Chebyshev) of voted path
    /// stay unlabeled instead of becoming not-path.
    pub boundary_margin: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { tile_size: 64, tile_stride: 64, n_rotations: 5, vote_threshold: 0.6, probability_threshold: 0.5, boundary_margin: 2 }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_rotations == 0 || self.tile_size == 0 || self.tile_stride == 0 || self.tile_stride > self.tile_size {
            return Err(Error::Config("propagation needs rotations, a tile size and 0 < stride <= tile".into()));
        }
        if !(self.vote_threshold > 0.0 && self.vote_threshold <= 1.0) {
            return Err(Error::Config("vote threshold must lie in (0, 1]".into()));
        }
        if !(self.probability_threshold > 0.0 && self.probability_threshold < 1.0) {
            return Err(Error::Config("probability threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Random global rotation angles (radians), one per ensemble member.
pub fn rotation_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, "propagation-angles");
    (0..n).map(|_| r.random_range(0.0..2.0 * PI)).collect()
}

/// Resamples `img` rotated clockwise by `angle` about the image centre,
/// undoing a counter-clockwise rotation. Positions outside the image read
/// as `None`.
fn unrotate(img: &[f64], size: usize, angle: f64) -> Vec<Option<f64>> {
    let centre = (size as f64 - 1.0) / 2.0;
    let (s, c) = angle.sin_cos();
    let n = size as f64;
    let mut out = vec![None; size * size];
    for r in 0..size {
        for col in 0..size {
            // Image rows grow downwards, so a counter-clockwise rotation in
            // scan coordinates maps (u, v) with v = -row.
            let (u, v) = (col as f64 - centre, centre - r as f64);
            let x = c * u - s * v + centre;
            let y = centre - (s * u + c * v);
            if x < -0.5 || y < -0.5 || x > n - 0.5 || y > n - 0.5 {
                continue;
            }
            let (x, y) = (x.clamp(0.0, n - 1.0), y.clamp(0.0, n - 1.0));
            let (x0, y0) = (x.floor() as usize, y.floor() as usize);
            let (x1, y1) = ((x0 + 1).min(size - 1), (y0 + 1).min(size - 1));
            let (tx, ty) = (x - x0 as f64, y - y0 as f64);
            let top = img[y0 * size + x0] * (1.0 - tx) + img[y0 * size + x1] * tx;
            let bot = img[y1 * size + x0] * (1.0 - tx) + img[y1 * size + x1] * tx;
            out[r * size + col] = Some(top * (1.0 - ty) + bot * ty);
        }
    }
    out
}

/// Tiled inference: each tile is segmented on its own and overlapping
/// predictions are averaged.
pub fn tiled_probabilities(model: &UNet, image: &[f64], size: usize, cfg: &PropagationConfig) -> Result<Vec<f64>> {
    let t = cfg.tile_size;
    if t > size {
        return shape_err(format!("tile {} larger than scan {}", t, size));
    }
    let mut origins: Vec<usize> = (0..=size - t).step_by(cfg.tile_stride).collect();
    if *origins.last().unwrap() != size - t {
        origins.push(size - t);
    }
    let mut sum = vec![0.0; size * size];
    let mut count = vec![0u32; size * size];
    let mut tile = vec![0.0; t * t];
    for &r0 in &origins {
        for &c0 in &origins {
            for r in 0..t {
                tile[r * t..(r + 1) * t].copy_from_slice(&image[(r0 + r) * size + c0..(r0 + r) * size + c0 + t]);
            }
            let p = probability_map(model, &tile, t)?;
            for r in 0..t {
                for c in 0..t {
                    sum[(r0 + r) * size + c0 + c] += p[r * t + c];
                    count[(r0 + r) * size + c0 + c] += 1;
                }
            }
        }
    }
    Ok(sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect())
}

/// Completes a sparse label mask with the stage-1 model. For each angle,
/// `render(angle)` must return the scan rotated counter-clockwise by that
/// angle; it is segmented tile by tile and the prediction rotated back. A
/// pixel is voted path when enough rotations exceed the probability
/// threshold. Voted pixels become path, the remaining pixels inside
/// `region` become not-path unless they lie within the boundary margin of a
/// voted pixel, and original labels take precedence over both.
pub fn propagate_labels(
    model: &UNet,
    render: &dyn Fn(f64) -> Result<Vec<f64>>,
    original: &LabelMask,
    region: &[bool],
    cfg: &PropagationConfig,
    angles: &[f64],
) -> Result<LabelMask> {
    cfg.validate()?;
    let size = original.size;
    if region.len() != size * size {
        return shape_err("mask and region sizes differ");
    }
    if angles.is_empty() {
        return Err(Error::Config("at least one rotation angle is required".into()));
    }
    let mut votes = vec![0usize; size * size];
    for &a in angles {
        let rotated = render(a)?;
        if rotated.len() != size * size {
            return shape_err("rendered scan does not match the mask");
        }
        let p = tiled_probabilities(model, &rotated, size, cfg)?;
        let back: Vec<Option<f64>> = if a == 0.0 { p.into_iter().map(Some).collect() } else { unrotate(&p, size, a) };
        for (v, q) in votes.iter_mut().zip(back) {
            if q.is_some_and(|q| q > cfg.probability_threshold) {
                *v += 1;
            }
        }
    }
    let needed = cfg.vote_threshold * angles.len() as f64;
    let voted: Vec<bool> = votes.iter().map(|&v| v as f64 >= needed - 1e-9).collect();
    let near = dilate(&voted, size, cfg.boundary_margin);
    let labels = (0..size * size)
        .map(|i| match original.labels[i] {
            Label::Unlabeled if voted[i] => Label::Path,
            Label::Unlabeled if region[i] && !near[i] => Label::NotPath,
            l => l,
        })
        .collect();
    Ok(LabelMask { size, labels })
}

/// Square dilation with half-width `r`, done as two separable passes.
fn dilate(mask: &[bool], size: usize, r: usize) -> Vec<bool> {
    if r == 0 {
        return mask.to_vec();
    }
    let mut rows = vec![false; mask.len()];
    for y in 0..size {
        for x in 0..size {
            let (lo, hi) = (x.saturating_sub(r), (x + r).min(size - 1));
            rows[y * size + x] = mask[y * size + lo..=y * size + hi].iter().any(|&b| b);
        }
    }
    let mut out = vec![false; mask.len()];
    for y in 0..size {
        let (lo, hi) = (y.saturating_sub(r), (y + r).min(size - 1));
        for x in 0..size {
            out[y * size + x] = (lo..=hi).any(|yy| rows[yy * size + x]);
        }
    }
    out
}

/// Counter-clockwise rotation of a square image about its centre, bilinear,
/// zero outside. Used when no polar source is available.
pub fn rotate_image(img: &[f64], size: usize, angle: f64) -> Vec<f64> {
    unrotate(img, size, -angle).into_iter().map(|v| v.unwrap_or(0.0)).collect()
}
