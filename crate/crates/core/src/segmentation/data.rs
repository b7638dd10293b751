use rand::Rng;

use super::augment::CropSample;
use crate::canvas::{CartesianScan, Label, LabelMask};
use crate::error::{shape_err, Error, Result};
use crate::rng;

/// Offset added to power before taking decibels.
pub const POWER_EPSILON: f64 = 1e-3;

/// Standardised network input for one rendered scan, with its labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSample {
    pub size: usize,
    pub image: Vec<f64>,
    pub mask: LabelMask,
}

impl ScanSample {
    pub fn new(size: usize, image: Vec<f64>, mask: LabelMask) -> Result<Self> {
        if image.len() != size * size || mask.size != size {
            return shape_err("scan image and mask sizes differ");
        }
        Ok(Self { size, image, mask })
    }
}

/// Decibel image standardised over the in-range pixels; out-of-range pixels
/// are set to the mean (zero).
pub fn scan_input(scan: &CartesianScan, in_range: &[bool]) -> Result<Vec<f64>> {
    if in_range.len() != scan.image.len() {
        return shape_err("range mask does not match scan");
    }
    let db: Vec<f64> = scan.image.iter().map(|p| 10.0 * (p + POWER_EPSILON).log10()).collect();
    let vals: Vec<f64> = db.iter().zip(in_range).filter(|(_, &m)| m).map(|(v, _)| *v).collect();
    if vals.is_empty() {
        return Err(Error::Domain("scan has no in-range pixels".into()));
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt().max(1e-12);
    Ok(db.iter().zip(in_range).map(|(v, &m)| if m { (v - mean) / sd } else { 0.0 }).collect())
}

/// Square crops centred on labelled pixels drawn uniformly, shifted to lie
/// inside the scan.
pub fn sample_crops(sample: &ScanSample, n: usize, crop: usize, seed: u64) -> Result<Vec<CropSample>> {
    let size = sample.size;
    if crop == 0 || crop > size {
        return shape_err(format!("crop {} does not fit scan {}", crop, size));
    }
    let labeled: Vec<usize> =
        sample.mask.labels.iter().enumerate().filter(|(_, &l)| l != Label::Unlabeled).map(|(i, _)| i).collect();
    if labeled.is_empty() {
        return Err(Error::Sampling("mask has no labelled pixels".into()));
    }
    let mut r = rng::stream(seed, "crops");
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let idx = labeled[r.random_range(0..labeled.len())];
        out.push(crop_at(sample, idx / size, idx % size, crop)?);
    }
    Ok(out)
}

/// Crop of side `crop` centred as closely as possible on (row, col).
pub fn crop_at(sample: &ScanSample, row: usize, col: usize, crop: usize) -> Result<CropSample> {
    let size = sample.size;
    if crop == 0 || crop > size {
        return shape_err(format!("crop {} does not fit scan {}", crop, size));
    }
    let r0 = (row as isize - crop as isize / 2).clamp(0, (size - crop) as isize) as usize;
    let c0 = (col as isize - crop as isize / 2).clamp(0, (size - crop) as isize) as usize;
    let mut image = Vec::with_capacity(crop * crop);
    let mut mask = Vec::with_capacity(crop * crop);
    for r in r0..r0 + crop {
        image.extend_from_slice(&sample.image[r * size + c0..r * size + c0 + crop]);
        mask.extend_from_slice(&sample.mask.labels[r * size + c0..r * size + c0 + crop]);
    }
    CropSample::new(crop, image, mask)
}
