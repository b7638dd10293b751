use crate::canvas::{Label, LabelMask};
use crate::error::{shape_err, Result};
use crate::io::to_gray;

/// Greyscale of a standardised scan image, clipped at three deviations.
pub fn scan_gray(image: &[f64]) -> Vec<u8> {
    to_gray(image, -3.0, 3.0)
}

/// Scan with labels blended in: path tinted red, not-path tinted green.
pub fn overlay(gray: &[u8], mask: &LabelMask) -> Result<Vec<[u8; 3]>> {
    if gray.len() != mask.labels.len() {
        return shape_err(format!("{} pixels of scan, {} of mask", gray.len(), mask.labels.len()));
    }
    Ok(gray
        .iter()
        .zip(&mask.labels)
        .map(|(&g, l)| {
            let h = g / 2;
            match l {
                Label::Path => [128 + h, h, h],
                Label::NotPath => [h, 128 + h, h],
                Label::Unlabeled => [g, g, g],
            }
        })
        .collect())
}

/// A binary prediction as labels: path, not-path inside `in_range`,
/// unlabelled elsewhere.
pub fn prediction_mask(pred: &[bool], in_range: &[bool], size: usize) -> LabelMask {
    let labels = pred
        .iter()
        .zip(in_range)
        .map(|(&p, &r)| match (p, r) {
            (true, _) => Label::Path,
            (false, true) => Label::NotPath,
            (false, false) => Label::Unlabeled,
        })
        .collect();
    LabelMask { size, labels }
}

/// Square panels side by side with a white gutter; returns width, height
/// and pixels.
pub fn side_by_side(panels: &[Vec<[u8; 3]>], size: usize) -> Result<(usize, usize, Vec<[u8; 3]>)> {
    const GUTTER: usize = 4;
    if panels.iter().any(|p| p.len() != size * size) {
        return shape_err("panels must all be size x size");
    }
    let n = panels.len();
    let width = n * size + n.saturating_sub(1) * GUTTER;
    let mut out = vec![[255u8; 3]; width * size];
    for (i, p) in panels.iter().enumerate() {
        let x0 = i * (size + GUTTER);
        for r in 0..size {
            out[r * width + x0..r * width + x0 + size].copy_from_slice(&p[r * size..(r + 1) * size]);
        }
    }
    Ok((width, size, out))
}
