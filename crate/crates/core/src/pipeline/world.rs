use crate::audio::AudioClassifier;
use crate::canvas::polar::{in_range_mask, pixel_center};
use crate::canvas::{paint_labels, polar_to_cartesian, polar_to_cartesian_rotated, LabelMask};
use crate::error::{Error, Result};
use crate::fusion::{fuse, label_trajectory, EkfConfig, FusedPose, LabeledTrajectory, TerrainPrediction};
use crate::segmentation::{scan_input, ScanSample};
use crate::simworld::{PathRole, SimRun};

/// Painted footprint: the configured radius, but never less than needed to
/// cover the pixel under the trajectory point.
pub fn effective_footprint(radius: f64, metres_per_pixel: f64) -> f64 {
    radius.max(0.75 * metres_per_pixel)
}

/// A simulated drive turned into training and evaluation material.
#[derive(Clone, Debug)]
pub struct ProcessedWorld {
    pub run: SimRun,
    pub fused: Vec<FusedPose>,
    pub predictions: Vec<TerrainPrediction>,
    pub labeled: LabeledTrajectory,
    /// Standardised scans with their painted labels.
    pub samples: Vec<ScanSample>,
    pub in_range: Vec<bool>,
    /// Ground-truth path pixels per scan.
    pub truth: Vec<Vec<bool>>,
    /// Pixels on the untraversed path per scan.
    pub untraversed: Vec<Vec<bool>>,
}

fn nearest_fused(fused: &[FusedPose], t: f64) -> &FusedPose {
    let i = fused.partition_point(|f| f.timestamp < t);
    let cand = [i.saturating_sub(1), i.min(fused.len() - 1)];
    cand.into_iter()
        .map(|k| &fused[k])
        .min_by(|a, b| (a.timestamp - t).abs().total_cmp(&(b.timestamp - t).abs()))
        .expect("non-empty trajectory")
}

impl ProcessedWorld {
    /// Standardised image of scan `k` rotated counter-clockwise by `angle`.
    pub fn render_rotated(&self, k: usize, angle: f64) -> Result<Vec<f64>> {
        let g = self.run.geometry;
        let cart = polar_to_cartesian_rotated(&self.run.scans[k], g.size, g.metres_per_pixel, angle)?;
        scan_input(&cart, &self.in_range)
    }
}

/// Fuses odometry, classifies the audio, labels the trajectory and paints
/// it into every scan of the run.
pub fn process_run(run: SimRun, classifier: &AudioClassifier, ekf: &EkfConfig, footprint: f64) -> Result<ProcessedWorld> {
    let start = run.traverse.samples[0];
    let fused = fuse(&run.vo, &run.gps, start.pose, start.t, ekf)?;
    paint_run(run, fused, classifier, footprint)
}

/// Classifies the audio of a run, attaches the predictions to an already
/// fused trajectory and paints them into every scan.
pub fn paint_run(run: SimRun, fused: Vec<FusedPose>, classifier: &AudioClassifier, footprint: f64) -> Result<ProcessedWorld> {
    if fused.is_empty() {
        return Err(Error::Input("fused trajectory is empty".into()));
    }
    let predictions = classifier.classify_stream(&run.audio, run.traverse.samples[0].t)?;
    let labeled = label_trajectory(&fused, &predictions)?;
    let geom = run.geometry;
    let radius = effective_footprint(footprint, geom.metres_per_pixel);
    let masks = run
        .scans
        .iter()
        .map(|scan| paint_labels(nearest_fused(&fused, scan.timestamp).pose, geom, &labeled.entries, radius))
        .collect::<Result<Vec<_>>>()?;
    assemble_world(run, fused, predictions, labeled, masks)
}

/// Builds a processed world from its parts, one label mask per scan.
pub fn assemble_world(
    run: SimRun,
    fused: Vec<FusedPose>,
    predictions: Vec<TerrainPrediction>,
    labeled: LabeledTrajectory,
    masks: Vec<LabelMask>,
) -> Result<ProcessedWorld> {
    if masks.len() != run.scans.len() {
        return Err(Error::Input(format!("{} label masks for {} scans", masks.len(), run.scans.len())));
    }
    let geom = run.geometry;
    let max_range = run.scans.first().map_or(0.0, |s| s.max_range());
    let in_range = in_range_mask(geom.size, geom.metres_per_pixel, max_range);
    let side = run.map.paths.iter().find(|p| p.role == PathRole::Untraversed);
    let mut samples = Vec::with_capacity(run.scans.len());
    let mut truth = Vec::with_capacity(run.scans.len());
    let mut untraversed = Vec::with_capacity(run.scans.len());
    for ((scan, gt), mask) in run.scans.iter().zip(&run.masks).zip(masks) {
        let cart = polar_to_cartesian(scan, geom.size, geom.metres_per_pixel)?;
        let image = scan_input(&cart, &in_range)?;
        samples.push(ScanSample::new(geom.size, image, mask)?);
        truth.push(gt.iter().map(|&v| v == 1).collect());
        let region = (0..geom.pixels())
            .map(|i| {
                let (lx, ly) = pixel_center(geom.size, geom.metres_per_pixel, i / geom.size, i % geom.size);
                let (gx, gy) = scan.pose.to_global(lx, ly);
                in_range[i] && side.is_some_and(|p| p.contains(gx, gy))
            })
            .collect();
        untraversed.push(region);
    }
    Ok(ProcessedWorld { run, fused, predictions, labeled, samples, in_range, truth, untraversed })
}
