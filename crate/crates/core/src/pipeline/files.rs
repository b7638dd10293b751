use std::path::Path;

use crate::canvas::{Label, LabelMask};
use crate::error::{Error, Result};
use crate::fusion::{LabeledPose, LabeledTrajectory, TerrainPrediction};
use crate::io::records::{fused_from_rows, fused_rows, prediction_rows, PoseRow, PredictionRow};
use crate::io::{create, open, read_csv, read_pgm, read_run, scan_name, write_csv, write_pgm, write_run};

use super::render::scan_gray;
use super::world::{assemble_world, ProcessedWorld};

pub fn write_label_masks(dir: &Path, masks: &[LabelMask]) -> Result<()> {
    for (k, m) in masks.iter().enumerate() {
        let px: Vec<u8> = m.labels.iter().map(|l| l.to_gray()).collect();
        write_pgm(create(dir.join(format!("{}.pgm", scan_name(k))))?, m.size, m.size, &px)?;
    }
    Ok(())
}

pub fn read_label_mask(path: &Path) -> Result<LabelMask> {
    let (w, h, px) = read_pgm(open(path)?)?;
    if w != h {
        return Err(Error::Format(format!("{} is not square", path.display())));
    }
    let labels = px.into_iter().map(Label::from_gray).collect::<Result<Vec<_>>>()?;
    Ok(LabelMask { size: w, labels })
}

pub fn read_label_masks(dir: &Path, count: usize) -> Result<Vec<LabelMask>> {
    (0..count).map(|k| read_label_mask(&dir.join(format!("{}.pgm", scan_name(k))))).collect()
}

/// Streams, fused poses, predictions, rendered scans and painted labels of
/// a processed world. Raw audio and polar scans are included when `raw`.
pub fn write_world(dir: &Path, w: &ProcessedWorld, raw: bool) -> Result<()> {
    write_run(dir, &w.run, raw)?;
    write_csv(create(dir.join("fused.csv"))?, &fused_rows(&w.fused))?;
    write_csv(create(dir.join("predictions.csv"))?, &prediction_rows(&w.predictions))?;
    write_csv(create(dir.join("labeled.csv"))?, &w.labeled.entries)?;
    for (k, s) in w.samples.iter().enumerate() {
        write_pgm(create(dir.join("scans").join(format!("{}.pgm", scan_name(k))))?, s.size, s.size, &scan_gray(&s.image))?;
    }
    let painted: Vec<LabelMask> = w.samples.iter().map(|s| s.mask.clone()).collect();
    write_label_masks(&dir.join("labels"), &painted)
}

/// Reloads a world written with raw data, taking scan labels from the
/// `labels` subdirectory (for example `labels` or `propagated`).
pub fn read_world(dir: &Path, labels: &str) -> Result<ProcessedWorld> {
    let run = read_run(dir)?;
    let fused = fused_from_rows(&read_csv::<_, PoseRow>(open(dir.join("fused.csv"))?)?);
    let predictions: Vec<TerrainPrediction> =
        read_csv::<_, PredictionRow>(open(dir.join("predictions.csv"))?)?.iter().map(TerrainPrediction::from).collect();
    let entries: Vec<LabeledPose> = read_csv(open(dir.join("labeled.csv"))?)?;
    let masks = read_label_masks(&dir.join(labels), run.scans.len())?;
    let labeled = LabeledTrajectory { dropped: predictions.len().saturating_sub(entries.len()), entries };
    assemble_world(run, fused, predictions, labeled, masks)
}
