use rand::Rng;
use serde::{Deserialize, Serialize};

use super::augment::{augment, AugmentationConfig, CropSample};
use super::data::{sample_crops, ScanSample};
use super::unet::{UNet, UNetConfig};
use crate::canvas::Label;
use crate::error::{Error, Result};
use crate::numeric::loss::masked_bce_with_logits;
use crate::numeric::{Adam, Parameterized, Tensor};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegTrainConfig {
    /// Optimizer steps.
    pub steps: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Side of training crops; crops are cut larger and centre-cropped after
    /// augmentation so rotations do not leave empty corners.
    pub crop_size: usize,
    pub seed: u64,
}

impl Default for SegTrainConfig {
    fn default() -> Self {
        Self { steps: 400, batch_size: 8, learning_rate: 2e-3, crop_size: 64, seed: 7 }
    }
}

impl SegTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || !(self.learning_rate > 0.0) || self.crop_size == 0 {
            return Err(Error::Config("batch size, learning rate and crop size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    /// Mean masked loss of every completed step.
    pub losses: Vec<f64>,
    /// Steps skipped because their batch had no labelled pixel.
    pub skipped: usize,
}

impl TrainLog {
    /// Moving average of the loss over `window` steps.
    pub fn smoothed(&self, window: usize) -> Vec<f64> {
        let w = window.max(1);
        self.losses.windows(w.min(self.losses.len().max(1))).map(|s| s.iter().sum::<f64>() / s.len() as f64).collect()
    }
}

fn targets_of(mask: &[Label]) -> (Vec<f64>, Vec<bool>) {
    let t = mask.iter().map(|&l| if l == Label::Path { 1.0 } else { 0.0 }).collect();
    let m = mask.iter().map(|&l| l != Label::Unlabeled).collect();
    (t, m)
}

/// One optimizer step on a batch with masked binary cross entropy averaged
/// over every labelled pixel. Returns `None` when nothing is labelled.
pub fn train_step(model: &mut UNet, opt: &mut Adam, batch: &[CropSample]) -> Result<Option<f64>> {
    let count: usize = batch.iter().map(|s| s.labeled()).sum();
    if count == 0 {
        return Ok(None);
    }
    model.zero_grads();
    let scale = 1.0 / count as f64;
    let mut total = 0.0;
    for s in batch {
        let x = Tensor::from_vec(&[1, s.size, s.size], s.image.clone())?;
        let cache = model.forward_train(&x)?;
        let (targets, mask) = targets_of(&s.mask);
        let mut grad = vec![0.0; s.size * s.size];
        let (sum, _) = masked_bce_with_logits(cache.logits().data(), &targets, &mask, scale, &mut grad)?;
        total += sum;
        model.backward(&cache, &Tensor::from_vec(&[1, s.size, s.size], grad)?)?;
    }
    let loss = total * scale;
    if !loss.is_finite() {
        return Err(Error::Numeric("non-finite segmentation loss".into()));
    }
    opt.update(model)?;
    Ok(Some(loss))
}

fn check_scans(scans: &[ScanSample]) -> Result<()> {
    if !scans.iter().any(|s| s.mask.labels.iter().any(|&l| l != Label::Unlabeled)) {
        return Err(Error::Dataset("no scan has labelled pixels".into()));
    }
    Ok(())
}

/// Stage 1: augmented crops centred on labelled pixels.
pub fn stage1_train(
    scans: &[ScanSample],
    unet: UNetConfig,
    cfg: &SegTrainConfig,
    aug: &AugmentationConfig,
) -> Result<(UNet, TrainLog)> {
    cfg.validate()?;
    check_scans(scans)?;
    let mut init = rng::stream(cfg.seed, "unet-init");
    let mut model = UNet::new(unet, &mut init)?;
    let log = train_on_crops(&mut model, scans, cfg, aug)?;
    Ok((model, log))
}

/// Continues training `model` on augmented crops.
pub fn train_on_crops(
    model: &mut UNet,
    scans: &[ScanSample],
    cfg: &SegTrainConfig,
    aug: &AugmentationConfig,
) -> Result<TrainLog> {
    let usable: Vec<&ScanSample> =
        scans.iter().filter(|s| s.mask.labels.iter().any(|&l| l != Label::Unlabeled)).collect();
    // Cut with room for a 45 degree rotation, rounded to an even size.
    let wide = ((cfg.crop_size as f64 * std::f64::consts::SQRT_2).ceil() as usize + 1) & !1;
    let mut r = rng::stream(cfg.seed, "stage1");
    let mut opt = Adam::new(cfg.learning_rate);
    let mut log = TrainLog::default();
    for step in 0..cfg.steps {
        let mut batch = Vec::with_capacity(cfg.batch_size);
        for b in 0..cfg.batch_size {
            let s = usable[r.random_range(0..usable.len())];
            let cut = wide.min(s.size);
            let seed = rng::derive_seed(cfg.seed, &format!("crop{}-{}", step, b));
            let mut crop = CropSample::new(0, Vec::new(), Vec::new())?;
            for attempt in 0..8 {
                let raw = sample_crops(s, 1, cut, rng::derive_seed(seed, &attempt.to_string()))?.remove(0);
                let a = augment(&raw, aug, &mut r)?;
                crop = a.center_crop(cfg.crop_size.min(cut))?;
                if crop.labeled() > 0 {
                    break;
                }
            }
            batch.push(crop);
        }
        match train_step(model, &mut opt, &batch)? {
            Some(l) => log.losses.push(l),
            None => log.skipped += 1,
        }
    }
    Ok(log)
}

/// Training on whole scans with flips and right-angle rotations.
pub fn train_full_scans(
    model: &mut UNet,
    scans: &[ScanSample],
    cfg: &SegTrainConfig,
    aug: &AugmentationConfig,
) -> Result<TrainLog> {
    cfg.validate()?;
    check_scans(scans)?;
    let mut r = rng::stream(cfg.seed, "full-scan");
    let mut opt = Adam::new(cfg.learning_rate);
    let mut log = TrainLog::default();
    for _ in 0..cfg.steps {
        let mut batch = Vec::with_capacity(cfg.batch_size);
        for _ in 0..cfg.batch_size {
            let s = &scans[r.random_range(0..scans.len())];
            let sample = CropSample::new(s.size, s.image.clone(), s.mask.labels.clone())?;
            batch.push(augment(&sample, aug, &mut r)?);
        }
        match train_step(model, &mut opt, &batch)? {
            Some(l) => log.losses.push(l),
            None => log.skipped += 1,
        }
    }
    Ok(log)
}

/// Stage 2: fine-tunes on whole scans with propagated labels.
pub fn stage2_finetune(
    mut model: UNet,
    scans: &[ScanSample],
    cfg: &SegTrainConfig,
    aug: &AugmentationConfig,
) -> Result<(UNet, TrainLog)> {
    let log = train_full_scans(&mut model, scans, cfg, aug)?;
    Ok((model, log))
}

/// Baseline: whole-scan training from scratch on the original labels.
pub fn train_direct(
    scans: &[ScanSample],
    unet: UNetConfig,
    cfg: &SegTrainConfig,
    aug: &AugmentationConfig,
) -> Result<(UNet, TrainLog)> {
    let mut init = rng::stream(cfg.seed, "unet-init");
    let mut model = UNet::new(unet, &mut init)?;
    let log = train_full_scans(&mut model, scans, cfg, aug)?;
    Ok((model, log))
}
