use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::world::ProcessedWorld;
use crate::audio::{
    build_dataset, evaluate, record_campaign, train_classifier, AudioClassifier, AudioEvaluation, EpochLog,
    FeatureExtractor, Split,
};
use crate::canvas::{Label, LabelMask, RadarProfile};
use crate::error::Result;
use crate::eval::{confusion, Confusion, SegScores};
use crate::rng;
use crate::segmentation::{propagate_labels, rotation_angles, segment, PropagationConfig, ScanSample, UNet};

/// Seed of the training (`role = "train"`) or held-out world of a profile.
pub fn world_seed(seed: u64, role: &str, profile: RadarProfile) -> u64 {
    rng::derive_seed(seed, &format!("{}-{}", role, profile.name()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioOutcome {
    pub train_clips_per_class: Vec<usize>,
    pub test_clips_per_class: Vec<usize>,
    pub epochs: Vec<EpochLog>,
    pub test: AudioEvaluation,
}

/// Records a labelled campaign, trains the terrain classifier and scores
/// it on an independent campaign.
pub fn train_terrain_classifier(cfg: &PipelineConfig) -> Result<(AudioClassifier, AudioOutcome)> {
    let a = &cfg.audio;
    let fs = cfg.simworld.sample_rate;
    let ex = FeatureExtractor::new(cfg.dsp.representation, fs)?;
    let train_rec = record_campaign(a.campaign.train_seconds, &a.campaign, fs, rng::derive_seed(cfg.seed, "audio-train"))?;
    let test_rec = record_campaign(a.campaign.test_seconds, &a.campaign, fs, rng::derive_seed(cfg.seed, "audio-test"))?;
    let train = build_dataset(&train_rec, &ex, a.campaign.clip_hop, Split::Train)?;
    let test = build_dataset(&test_rec, &ex, a.campaign.clip_hop, Split::Test)?;
    let (model, epochs) = train_classifier(&train, &a.classifier, &a.train, fs)?;
    let outcome = AudioOutcome {
        train_clips_per_class: train.class_counts().to_vec(),
        test_clips_per_class: test.class_counts().to_vec(),
        epochs,
        test: evaluate(&model, &test)?,
    };
    Ok((model, outcome))
}

/// Share of stream predictions matching the terrain actually driven.
pub fn stream_accuracy(world: &ProcessedWorld) -> f64 {
    let p = &world.predictions;
    if p.is_empty() {
        return 0.0;
    }
    let hits = p.iter().filter(|q| world.run.traverse.at_time(q.timestamp).terrain == q.terrain).count();
    hits as f64 / p.len() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionErrors {
    pub fused_rmse: f64,
    pub gps_rmse: f64,
    pub final_yaw_error_deg: f64,
}

pub fn fusion_errors(world: &ProcessedWorld) -> FusionErrors {
    let tr = &world.run.traverse;
    let rmse = |it: &mut dyn Iterator<Item = f64>| {
        let (s, n) = it.fold((0.0, 0usize), |(s, n), e| (s + e, n + 1));
        (s / n.max(1) as f64).sqrt()
    };
    let fused_rmse = rmse(&mut world.fused.iter().map(|f| {
        let t = tr.at_time(f.timestamp).pose;
        (f.pose.x - t.x).powi(2) + (f.pose.y - t.y).powi(2)
    }));
    let gps_rmse = rmse(&mut world.run.gps.iter().map(|g| {
        let t = tr.at_time(g.timestamp).pose;
        (g.x - t.x).powi(2) + (g.y - t.y).powi(2)
    }));
    let last = world.fused.last().expect("fused trajectory is non-empty");
    let dyaw = crate::geometry::wrap_angle(last.pose.yaw - tr.at_time(last.timestamp).pose.yaw);
    FusionErrors { fused_rmse, gps_rmse, final_yaw_error_deg: dyaw.abs().to_degrees() }
}

/// Completes the painted labels of every scan of a world.
pub fn propagate_world(model: &UNet, world: &ProcessedWorld, cfg: &PropagationConfig, seed: u64) -> Result<Vec<LabelMask>> {
    world
        .samples
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let angles = rotation_angles(cfg.n_rotations, rng::derive_seed(seed, &format!("rotations{}", k)));
            let render = |a: f64| world.render_rotated(k, a);
            propagate_labels(model, &render, &s.mask, &world.in_range, cfg, &angles)
        })
        .collect()
}

/// Quality of a set of label masks against the world's ground truth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelQuality {
    /// Ground-truth pixels of the untraversed path labelled path.
    pub side_recall: f64,
    /// In-range non-path pixels labelled path.
    pub grass_false_positive: f64,
    /// Path labels that are truly path.
    pub path_precision: f64,
    pub labeled_fraction: f64,
}

pub fn label_quality(world: &ProcessedWorld, masks: &[LabelMask]) -> LabelQuality {
    let (mut side_hit, mut side_n, mut fp, mut neg, mut tp, mut pos, mut labeled, mut total) = (0usize, 0, 0, 0, 0, 0, 0, 0);
    for ((m, truth), region) in masks.iter().zip(&world.truth).zip(&world.untraversed) {
        for i in 0..m.labels.len() {
            if !world.in_range[i] {
                continue;
            }
            let l = m.labels[i];
            let g = truth[i];
            total += 1;
            labeled += usize::from(l != Label::Unlabeled);
            if l == Label::Path {
                pos += 1;
                tp += usize::from(g);
            }
            if g && region[i] {
                side_n += 1;
                side_hit += usize::from(l == Label::Path);
            }
            if !g {
                neg += 1;
                fp += usize::from(l == Label::Path);
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    LabelQuality {
        side_recall: ratio(side_hit, side_n),
        grass_false_positive: ratio(fp, neg),
        path_precision: ratio(tp, pos),
        labeled_fraction: ratio(labeled, total),
    }
}

/// Segments every scan of a world; scores pool all in-range pixels.
pub fn evaluate_segmenter(model: &UNet, world: &ProcessedWorld) -> Result<(SegScores, Vec<Vec<bool>>)> {
    let mut total = Confusion::default();
    let mut preds = Vec::with_capacity(world.samples.len());
    for (s, t) in world.samples.iter().zip(&world.truth) {
        let p = segment(model, &s.image, s.size)?;
        total.add(&confusion(&p, t, &world.in_range)?);
        preds.push(p);
    }
    Ok((total.scores()?, preds))
}

/// Scans of a world with replacement labels.
pub fn relabel(world: &ProcessedWorld, masks: Vec<LabelMask>) -> Result<Vec<ScanSample>> {
    world.samples.iter().zip(masks).map(|(s, m)| ScanSample::new(s.size, s.image.clone(), m)).collect()
}
