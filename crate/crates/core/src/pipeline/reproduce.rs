use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::PipelineConfig;
use super::render::{overlay, prediction_mask, scan_gray, side_by_side};
use super::stages::{
    evaluate_segmenter, fusion_errors, label_quality, propagate_world, relabel, stream_accuracy,
    train_terrain_classifier, world_seed, AudioOutcome, FusionErrors, LabelQuality,
};
use super::files::{write_label_masks, write_world};
use super::world::{process_run, ProcessedWorld};
use crate::canvas::LabelMask;
use crate::error::{Error, Result};
use crate::eval::{compare_table, SegScores};
use crate::io::{create, write_csv, write_ppm};
use crate::rng;
use crate::segmentation::{stage1_train, stage2_finetune, train_direct, SegTrainConfig, TrainLog, UNet};
use crate::simworld::simulate;

/// Wall time of one stage, reported on the console only so output trees
/// stay byte-identical.
#[derive(Clone, Debug)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `true` when the value must be at least the threshold.
    pub at_least: bool,
    pub passed: bool,
}

impl Gate {
    fn at_least(name: String, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, at_least: true, passed: value >= threshold }
    }

    fn at_most(name: String, value: f64, threshold: f64) -> Self {
        Self { name, value, threshold, at_least: false, passed: value <= threshold }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainWorldReport {
    pub name: String,
    pub scans: usize,
    pub stream_accuracy: f64,
    pub fusion: FusionErrors,
    pub painted: LabelQuality,
    pub propagated: LabelQuality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestWorldReport {
    pub name: String,
    pub scans: usize,
    pub stream_accuracy: f64,
    pub fusion: FusionErrors,
    pub stage1: SegScores,
    pub curriculum: SegScores,
    pub direct: SegScores,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub audio: AudioOutcome,
    pub training_steps: [usize; 3],
    pub train_worlds: Vec<TrainWorldReport>,
    pub test_worlds: Vec<TestWorldReport>,
    pub gates: Vec<Gate>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    w.write_all(b"\n")?;
    Ok(())
}

fn write_loss(path: &Path, log: &TrainLog) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        step: usize,
        loss: f64,
    }
    let rows: Vec<Row> = log.losses.iter().enumerate().map(|(step, &loss)| Row { step, loss }).collect();
    write_csv(create(path)?, &rows)
}

fn save_unet(dir: &Path, name: &str, model: &UNet) -> Result<()> {
    model.save(create(dir.join(format!("{}.kowt", name)))?, create(dir.join(format!("{}.json", name)))?)
}

/// Scan of a world showing most of the untraversed path.
fn showcase_scan(w: &ProcessedWorld) -> usize {
    let count = |k: usize| w.untraversed[k].iter().zip(&w.truth[k]).filter(|(&r, &t)| r && t).count();
    (0..w.samples.len()).max_by_key(|&k| (count(k), std::cmp::Reverse(k))).unwrap_or(0)
}

/// Runs the whole pipeline from configuration and seed, writing every
/// artefact under `out`.
pub fn reproduce(cfg: &PipelineConfig, out: &Path) -> Result<(Report, Vec<Timing>)> {
    let cfg = cfg.resolved();
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &str, timings: &mut Vec<Timing>| {
        timings.push(Timing { stage: stage.into(), seconds: clock.elapsed().as_secs_f64() });
        log::info!("{} done in {:.1} s", stage, clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };
    write_json(&out.join("config.json"), &cfg)?;

    let (classifier, audio) = train_terrain_classifier(&cfg)?;
    let audio_dir = out.join("audio");
    classifier.save(create(audio_dir.join("classifier.kowt"))?, create(audio_dir.join("classifier.json"))?)?;
    write_json(&audio_dir.join("metrics.json"), &audio)?;
    lap("audio classifier", &mut timings);

    let seg = &cfg.segmentation;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for &p in &seg.profiles {
        let sim = cfg.sim_for(p);
        for (role, list) in [("train", &mut train), ("test", &mut test)] {
            let run = simulate(&sim, world_seed(cfg.seed, role, p))?;
            let w = process_run(run, &classifier, &cfg.fusion, cfg.canvas.footprint_radius)?;
            let name = format!("{}_{}", role, p.name());
            write_world(&out.join("worlds").join(&name), &w, false)?;
            list.push((name, w));
        }
    }
    lap("simulation and labelling", &mut timings);

    let samples: Vec<_> = train.iter().flat_map(|(_, w)| w.samples.iter().cloned()).collect();
    let models = out.join("models");
    let (stage1, log1) = stage1_train(&samples, seg.unet, &seg.stage1, &seg.stage1_augmentation)?;
    save_unet(&models, "stage1", &stage1)?;
    write_loss(&models.join("stage1_loss.csv"), &log1)?;
    lap("stage 1", &mut timings);

    let mut propagated = Vec::new();
    let mut prop_samples = Vec::new();
    for (name, w) in &train {
        let masks = propagate_world(&stage1, w, &seg.propagation, rng::derive_seed(cfg.seed, name))?;
        write_label_masks(&out.join("worlds").join(name).join("propagated"), &masks)?;
        prop_samples.extend(relabel(w, masks.clone())?);
        propagated.push(masks);
    }
    lap("propagation", &mut timings);

    let (curriculum, log2) = stage2_finetune(stage1.clone(), &prop_samples, &seg.stage2, &seg.stage2_augmentation)?;
    save_unet(&models, "stage2", &curriculum)?;
    write_loss(&models.join("stage2_loss.csv"), &log2)?;
    lap("stage 2", &mut timings);

    let direct_cfg = SegTrainConfig {
        steps: seg.stage1.steps + seg.stage2.steps,
        batch_size: seg.direct.batch_size,
        learning_rate: seg.direct.learning_rate,
        crop_size: seg.stage1.crop_size,
        seed: rng::derive_seed(cfg.seed, "direct"),
    };
    let (direct, logd) = train_direct(&samples, seg.unet, &direct_cfg, &seg.stage2_augmentation)?;
    save_unet(&models, "direct", &direct)?;
    write_loss(&models.join("direct_loss.csv"), &logd)?;
    lap("direct baseline", &mut timings);

    let mut train_reports = Vec::new();
    for ((name, w), masks) in train.iter().zip(&propagated) {
        let painted: Vec<LabelMask> = w.samples.iter().map(|s| s.mask.clone()).collect();
        train_reports.push(TrainWorldReport {
            name: name.clone(),
            scans: w.samples.len(),
            stream_accuracy: stream_accuracy(w),
            fusion: fusion_errors(w),
            painted: label_quality(w, &painted),
            propagated: label_quality(w, masks),
        });
        let k = showcase_scan(w);
        let s = &w.samples[k];
        let gray = scan_gray(&s.image);
        let final_pred = crate::segmentation::segment(&curriculum, &s.image, s.size)?;
        let panels = vec![
            overlay(&gray, &s.mask)?,
            overlay(&gray, &masks[k])?,
            overlay(&gray, &prediction_mask(&final_pred, &w.in_range, s.size))?,
        ];
        let (fw, fh, px) = side_by_side(&panels, s.size)?;
        write_ppm(create(out.join("figures").join(format!("triptych_{}.ppm", name)))?, fw, fh, &px)?;
    }

    let mut test_reports = Vec::new();
    for (name, w) in &test {
        let (s1, _) = evaluate_segmenter(&stage1, w)?;
        let (sc, preds) = evaluate_segmenter(&curriculum, w)?;
        let (sd, _) = evaluate_segmenter(&direct, w)?;
        let masks: Vec<LabelMask> = preds.iter().map(|p| prediction_mask(p, &w.in_range, w.samples[0].size)).collect();
        write_label_masks(&out.join("worlds").join(name).join("segmentation"), &masks)?;
        test_reports.push(TestWorldReport {
            name: name.clone(),
            scans: w.samples.len(),
            stream_accuracy: stream_accuracy(w),
            fusion: fusion_errors(w),
            stage1: s1,
            curriculum: sc,
            direct: sd,
        });
    }
    lap("evaluation", &mut timings);

    let rows = test_reports
        .iter()
        .map(|r| {
            let v = vec![
                r.stage1.pixel_accuracy,
                r.stage1.iou,
                r.curriculum.pixel_accuracy,
                r.curriculum.iou,
                r.direct.pixel_accuracy,
                r.direct.iou,
            ];
            (r.name.clone(), v)
        })
        .collect();
    let table = compare_table(
        "World",
        &["Stage 1 acc", "Stage 1 IoU", "Curriculum acc", "Curriculum IoU", "Direct acc", "Direct IoU"],
        rows,
    )?;
    fs::create_dir_all(out.join("eval"))?;
    fs::write(out.join("eval").join("segmentation.txt"), table.to_text())?;
    fs::write(out.join("eval").join("segmentation.csv"), table.to_csv()?)?;

    let e = &cfg.eval;
    let mut gates = Vec::new();
    for r in &train_reports {
        gates.push(Gate::at_least(format!("{} side path recall", r.name), r.propagated.side_recall, e.min_side_recall));
        gates.push(Gate::at_most(
            format!("{} grass false positives", r.name),
            r.propagated.grass_false_positive,
            e.max_grass_false_positive,
        ));
    }
    for r in &test_reports {
        gates.push(Gate::at_least(format!("{} pixel accuracy", r.name), r.curriculum.pixel_accuracy, e.min_pixel_accuracy));
        gates.push(Gate::at_least(format!("{} IoU", r.name), r.curriculum.iou, e.min_iou));
        let margin = r.curriculum.iou - r.direct.iou;
        gates.push(Gate { passed: margin > 0.0, ..Gate::at_least(format!("{} IoU over direct", r.name), margin, 0.0) });
    }
    let report = Report {
        seed: cfg.seed,
        audio,
        training_steps: [seg.stage1.steps, seg.stage2.steps, direct_cfg.steps],
        train_worlds: train_reports,
        test_worlds: test_reports,
        gates,
    };
    write_json(&out.join("report.json"), &report)?;
    write_manifest(out)?;
    Ok((report, timings))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let p = e.path();
        if e.file_type()?.is_dir() {
            collect_files(root, &p, out)?;
        } else {
            let rel = p.strip_prefix(root).map_err(|_| Error::Input("file outside output tree".into()))?;
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

pub fn hash_file(path: &Path) -> Result<(u64, String)> {
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
        bytes += n as u64;
    }
    let hex = h.finalize().iter().map(|b| format!("{:02x}", b)).collect();
    Ok((bytes, hex))
}

/// Hashes every file under `out` into `manifest.json`.
pub fn write_manifest(out: &Path) -> Result<Vec<ManifestEntry>> {
    let mut files = Vec::new();
    collect_files(out, out, &mut files)?;
    let mut entries = Vec::with_capacity(files.len());
    for f in files.into_iter().filter(|f| f != "manifest.json") {
        let (bytes, sha256) = hash_file(&out.join(&f))?;
        entries.push(ManifestEntry { path: f, bytes, sha256 });
    }
    write_json(&out.join("manifest.json"), &entries)?;
    Ok(entries)
}
