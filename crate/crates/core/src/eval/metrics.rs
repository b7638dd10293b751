use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};

/// Binary confusion counts with path as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn add(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
        self.tn += other.tn;
    }

    /// Scores from the counts. With no positives in either prediction or
    /// truth the IoU is 1 (perfect agreement on absence).
    pub fn scores(&self) -> Result<SegScores> {
        let n = self.total();
        if n == 0 {
            return Err(Error::UndefinedMetric("no pixels evaluated".into()));
        }
        let union = self.tp + self.fp + self.fn_;
        Ok(SegScores {
            pixel_accuracy: (self.tp + self.tn) as f64 / n as f64,
            iou: if union == 0 { 1.0 } else { self.tp as f64 / union as f64 },
            confusion: *self,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegScores {
    pub pixel_accuracy: f64,
    pub iou: f64,
    pub confusion: Confusion,
}

/// Counts over pixels where `include` is true.
pub fn confusion(pred: &[bool], truth: &[bool], include: &[bool]) -> Result<Confusion> {
    if pred.len() != truth.len() || pred.len() != include.len() {
        return shape_err(format!(
            "prediction {}, truth {} and mask {} lengths differ",
            pred.len(),
            truth.len(),
            include.len()
        ));
    }
    let mut c = Confusion::default();
    for ((&p, &t), &m) in pred.iter().zip(truth).zip(include) {
        if !m {
            continue;
        }
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn not(mask: &[bool]) -> Vec<bool> {
    mask.iter().map(|v| !v).collect()
}

/// Intersection over union of the path class; `ignore` pixels are skipped.
pub fn iou(pred: &[bool], truth: &[bool], ignore: &[bool]) -> Result<f64> {
    Ok(confusion(pred, truth, &not(ignore))?.scores()?.iou)
}

pub fn pixel_accuracy(pred: &[bool], truth: &[bool], ignore: &[bool]) -> Result<f64> {
    Ok(confusion(pred, truth, &not(ignore))?.scores()?.pixel_accuracy)
}

/// Scores restricted to the pixels of `region`.
pub fn region_report(pred: &[bool], truth: &[bool], region: &[bool]) -> Result<SegScores> {
    if !region.iter().any(|&v| v) {
        return Err(Error::UndefinedMetric("empty evaluation region".into()));
    }
    confusion(pred, truth, region)?.scores()
}
