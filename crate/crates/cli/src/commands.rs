use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use routeseg::audio::{
    build_dataset, evaluate, record_campaign, representation_table, AudioClassifier, FeatureExtractor,
    RepresentationStudy, Split,
};
use routeseg::canvas::polar::in_range_mask;
use routeseg::canvas::{polar_to_cartesian, read_rds, ScanGeometry};
use routeseg::eval::{confusion, Confusion};
use routeseg::fusion::fuse;
use routeseg::io::records::{fused_from_rows, fused_rows, prediction_rows, traverse_from_rows, PoseRow, TruthRow};
use routeseg::io::{create, open, read_csv, read_header, read_pgm, read_run, read_wav, scan_name, write_csv, write_pgm, write_ppm, write_run};
use routeseg::pipeline::files::{read_label_mask, read_world, write_label_masks};
use routeseg::pipeline::render::{overlay, prediction_mask, scan_gray};
use routeseg::pipeline::stages::{evaluate_segmenter, label_quality, propagate_world, train_terrain_classifier};
use routeseg::pipeline::{paint_run, reproduce, PipelineConfig};
use routeseg::rng;
use routeseg::segmentation::{scan_input, stage1_train, stage2_finetune, ScanSample, TrainLog, UNet};
use routeseg::simworld::simulate;
use routeseg::{Error, Result};

use crate::{Cli, Command, Outcome};

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    if cli.threads != 1 {
        return Err(Error::Config(format!("--threads {}: every stage runs on one thread", cli.threads)));
    }
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg.resolved())
}

fn require_dir(p: &Path) -> Result<()> {
    if p.is_dir() {
        Ok(())
    } else {
        Err(Error::Input(format!("{} is not a directory", p.display())))
    }
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(create(path)?, v)?;
    Ok(())
}

fn with_ext(p: &Path, ext: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn load_unet(p: &Path) -> Result<UNet> {
    UNet::load(open(with_ext(p, "kowt"))?, open(with_ext(p, "json"))?)
}

fn save_unet(p: &Path, m: &UNet, log: &TrainLog) -> Result<()> {
    m.save(create(with_ext(p, "kowt"))?, create(with_ext(p, "json"))?)?;
    write_json(&with_ext(p, "log.json"), log)
}

fn load_classifier(dir: &Path) -> Result<AudioClassifier> {
    AudioClassifier::load(open(dir.join("classifier.kowt"))?, open(dir.join("classifier.json"))?)
}

fn gate(ok: bool) -> Outcome {
    if ok {
        Outcome::Ok
    } else {
        Outcome::GateFailed
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Simulate { out, profile } => {
            let sim = cfg.sim_for(profile.unwrap_or(cfg.simworld.radar_profile));
            let r = simulate(&sim, cfg.seed)?;
            write_run(out, &r, true)?;
            write_json(&out.join("config.json"), &cfg)?;
            println!(
                "simulated {:.0} s, {} scans, gravel fraction {:.3} -> {}",
                r.traverse.duration(),
                r.scans.len(),
                r.map.gravel_fraction(),
                out.display()
            );
            Ok(Outcome::Ok)
        }
        Command::Features { wav, out, representation } => {
            let clip = read_wav(open(wav)?)?;
            let ex = FeatureExtractor::new(representation.unwrap_or(cfg.dsp.representation), clip.sample_rate)?;
            let img = ex.extract(&clip)?;
            if out.extension().is_some_and(|e| e == "csv") {
                let mut w = csv::Writer::from_writer(create(out)?);
                for c in 0..img.channels {
                    let mut rec = vec![format!("{}", img.channel_freqs[c])];
                    rec.extend(img.row(c).iter().map(|v| v.to_string()));
                    w.write_record(&rec).map_err(Error::from)?;
                }
                w.flush()?;
            } else {
                let lo = img.values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = img.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                write_pgm(create(out)?, img.frames, img.channels, &routeseg::io::to_gray(&img.values, lo, hi))?;
                let sidecar = serde_json::json!({
                    "mapping": routeseg::io::GrayMapping { lo, hi },
                    "unit": "dB",
                    "channels": img.channels,
                    "frames": img.frames,
                    "axis_kind": img.axis_kind,
                    "channel_freqs": img.channel_freqs,
                });
                write_json(&out.with_extension("json"), &sidecar)?;
            }
            println!("{} channels x {} frames -> {}", img.channels, img.frames, out.display());
            Ok(Outcome::Ok)
        }
        Command::TrainAudio { out } => {
            let (model, outcome) = train_terrain_classifier(&cfg)?;
            model.save(create(out.join("classifier.kowt"))?, create(out.join("classifier.json"))?)?;
            write_json(&out.join("metrics.json"), &outcome)?;
            write_json(&out.join("config.json"), &cfg)?;
            println!("{} held-out accuracy {:.4}", model.representation().name(), outcome.test.accuracy);
            Ok(Outcome::Ok)
        }
        Command::EvalAudio { model, table, out, min_accuracy } => {
            let fs_ = cfg.simworld.sample_rate;
            if *table {
                let study = RepresentationStudy {
                    trials: cfg.audio.table_trials,
                    sample_rate: fs_,
                    campaign: cfg.audio.campaign,
                    spec: cfg.audio.classifier.clone(),
                    train: cfg.audio.train.clone(),
                };
                let t = representation_table(&study, cfg.seed)?;
                print!("{}", t.to_text());
                if let Some(dir) = out {
                    fs::create_dir_all(dir)?;
                    fs::write(dir.join("representations.txt"), t.to_text())?;
                    fs::write(dir.join("representations.csv"), t.to_csv()?)?;
                }
                let worst = t.rows.last().map_or(0.0, |(_, v)| v.iter().copied().fold(f64::INFINITY, f64::min));
                return Ok(gate(min_accuracy.is_none_or(|m| worst >= m)));
            }
            let dir = model.as_ref().ok_or_else(|| Error::Input("--model is required".into()))?;
            let m = load_classifier(dir)?;
            let rec = record_campaign(cfg.audio.campaign.test_seconds, &cfg.audio.campaign, fs_, rng::derive_seed(cfg.seed, "audio-eval"))?;
            let ds = build_dataset(&rec, &m.extractor, cfg.audio.campaign.clip_hop, Split::Test)?;
            let e = evaluate(&m, &ds)?;
            println!("accuracy={:.4} clips={}", e.accuracy, ds.len());
            for (row, c) in e.confusion.iter().zip(routeseg::TerrainClass::ALL) {
                println!("  {:<8} {:?}", c.name(), row);
            }
            if let Some(dir) = out {
                write_json(&dir.join("audio_eval.json"), &e)?;
            }
            Ok(gate(min_accuracy.is_none_or(|m| e.accuracy >= m)))
        }
        Command::Fuse { run } => {
            require_dir(run)?;
            let truth: Vec<TruthRow> = read_csv(open(run.join("truth.csv"))?)?;
            let start = truth.first().ok_or_else(|| Error::Input("truth.csv is empty".into()))?;
            let vo = read_csv(open(run.join("vo.csv"))?)?;
            let gps = read_csv(open(run.join("gps.csv"))?)?;
            let fused = fuse(&vo, &gps, routeseg::Pose2::new(start.x, start.y, start.yaw), start.timestamp, &cfg.fusion)?;
            write_csv(create(run.join("fused.csv"))?, &fused_rows(&fused))?;
            let tr = traverse_from_rows(&truth);
            let se: f64 = fused
                .iter()
                .map(|f| {
                    let t = tr.at_time(f.timestamp).pose;
                    (f.pose.x - t.x).powi(2) + (f.pose.y - t.y).powi(2)
                })
                .sum();
            println!("{} fused poses, position RMSE {:.3} m", fused.len(), (se / fused.len() as f64).sqrt());
            Ok(Outcome::Ok)
        }
        Command::Paint { run, model } => {
            require_dir(run)?;
            let classifier = load_classifier(model)?;
            let fused = fused_from_rows(&read_csv::<_, PoseRow>(open(run.join("fused.csv"))?)?);
            let w = paint_run(read_run(run)?, fused, &classifier, cfg.canvas.footprint_radius)?;
            write_csv(create(run.join("predictions.csv"))?, &prediction_rows(&w.predictions))?;
            write_csv(create(run.join("labeled.csv"))?, &w.labeled.entries)?;
            for (k, s) in w.samples.iter().enumerate() {
                write_pgm(create(run.join("scans").join(format!("{}.pgm", scan_name(k))))?, s.size, s.size, &scan_gray(&s.image))?;
            }
            let masks: Vec<_> = w.samples.iter().map(|s| s.mask.clone()).collect();
            write_label_masks(&run.join("labels"), &masks)?;
            let q = label_quality(&w, &masks);
            println!(
                "{} predictions, {} labelled poses, labelled fraction {:.4}, path label precision {:.3}",
                w.predictions.len(),
                w.labeled.entries.len(),
                q.labeled_fraction,
                q.path_precision
            );
            Ok(Outcome::Ok)
        }
        Command::TrainSeg { stage, runs, init, out } => {
            let labels = if *stage == 1 { "labels" } else { "propagated" };
            let mut samples: Vec<ScanSample> = Vec::new();
            for r in runs {
                require_dir(r)?;
                samples.extend(read_world(r, labels)?.samples);
            }
            let seg = &cfg.segmentation;
            let (model, log) = if *stage == 1 {
                stage1_train(&samples, seg.unet, &seg.stage1, &seg.stage1_augmentation)?
            } else {
                let init = init.as_ref().ok_or_else(|| Error::Input("stage 2 needs --init".into()))?;
                stage2_finetune(load_unet(init)?, &samples, &seg.stage2, &seg.stage2_augmentation)?
            };
            save_unet(out, &model, &log)?;
            let tail = log.losses.iter().rev().take(10).sum::<f64>() / log.losses.len().clamp(1, 10) as f64;
            println!("stage {} trained {} steps on {} scans, final loss {:.4}", stage, log.losses.len(), samples.len(), tail);
            Ok(Outcome::Ok)
        }
        Command::Propagate { model, run } => {
            require_dir(run)?;
            let m = load_unet(model)?;
            let w = read_world(run, "labels")?;
            let name = run.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let masks = propagate_world(&m, &w, &cfg.segmentation.propagation, rng::derive_seed(cfg.seed, &name))?;
            write_label_masks(&run.join("propagated"), &masks)?;
            let q = label_quality(&w, &masks);
            println!(
                "side path recall {:.3}, grass false positives {:.4}, path precision {:.3}",
                q.side_recall, q.grass_false_positive, q.path_precision
            );
            Ok(Outcome::Ok)
        }
        Command::Segment { model, run } => {
            require_dir(run)?;
            let m = load_unet(model)?;
            let w = read_world(run, "labels")?;
            let t0 = Instant::now();
            let (scores, preds) = evaluate_segmenter(&m, &w)?;
            let rate = preds.len() as f64 / t0.elapsed().as_secs_f64();
            let size = w.run.geometry.size;
            let masks: Vec<_> = preds.iter().map(|p| prediction_mask(p, &w.in_range, size)).collect();
            write_label_masks(&run.join("segmentation"), &masks)?;
            println!(
                "{} scans at {:.1} scans/s, pixel_accuracy={:.4} iou={:.4}",
                preds.len(),
                rate,
                scores.pixel_accuracy,
                scores.iou
            );
            Ok(Outcome::Ok)
        }
        Command::EvalSeg { pred, run, min_accuracy, min_iou } => {
            require_dir(pred)?;
            let h = read_header(run)?;
            let g = h.geometry;
            let in_range = in_range_mask(g.size, g.metres_per_pixel, h.max_range);
            let mut total = Confusion::default();
            for k in 0..h.scans {
                let name = format!("{}.pgm", scan_name(k));
                let (pw, ph, p) = read_pgm(open(pred.join(&name))?)?;
                let (tw, th, t) = read_pgm(open(run.join("truth_masks").join(&name))?)?;
                if (pw, ph) != (g.size, g.size) || (tw, th) != (g.size, g.size) {
                    return Err(Error::Format(format!("{} does not match the {} px scan size", name, g.size)));
                }
                // label masks store not-path as 128
                let pb: Vec<bool> = p.iter().map(|&v| v > 128).collect();
                let tb: Vec<bool> = t.iter().map(|&v| v > 127).collect();
                total.add(&confusion(&pb, &tb, &in_range)?);
            }
            let s = total.scores()?;
            println!("pixel_accuracy={:.4} iou={:.4}", s.pixel_accuracy, s.iou);
            let min_acc = min_accuracy.unwrap_or(cfg.eval.min_pixel_accuracy);
            let min_iou = min_iou.unwrap_or(cfg.eval.min_iou);
            Ok(gate(s.pixel_accuracy >= min_acc && s.iou >= min_iou))
        }
        Command::Render { scan, mask, out } => {
            let m = read_label_mask(mask)?;
            let gray = if scan.extension().is_some_and(|e| e == "rds") {
                let polar = read_rds(open(scan)?)?;
                let g = ScanGeometry::fitting(m.size, polar.max_range());
                let cart = polar_to_cartesian(&polar, g.size, g.metres_per_pixel)?;
                let in_range = in_range_mask(g.size, g.metres_per_pixel, polar.max_range());
                scan_gray(&scan_input(&cart, &in_range)?)
            } else {
                let (w, h, px) = read_pgm(open(scan)?)?;
                if w != m.size || h != m.size {
                    return Err(Error::Format(format!("scan is {}x{}, mask is {}x{}", w, h, m.size, m.size)));
                }
                px
            };
            write_ppm(create(out)?, m.size, m.size, &overlay(&gray, &m)?)?;
            println!("wrote {}", out.display());
            Ok(Outcome::Ok)
        }
        Command::Reproduce { out } => {
            let dir = out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let t0 = Instant::now();
            let (report, timings) = reproduce(&cfg, &dir)?;
            for t in &timings {
                println!("{:<26} {:>8.1} s", t.stage, t.seconds);
            }
            println!("{:<26} {:>8.1} s", "total", t0.elapsed().as_secs_f64());
            print!("{}", fs::read_to_string(dir.join("eval").join("segmentation.txt"))?);
            for g in &report.gates {
                let rel = if g.at_least { ">=" } else { "<=" };
                println!("[{}] {} = {:.4} ({} {})", if g.passed { "PASS" } else { "FAIL" }, g.name, g.value, rel, g.threshold);
            }
            Ok(gate(report.passed()))
        }
    }
}
