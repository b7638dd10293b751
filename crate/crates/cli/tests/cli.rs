use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use routeseg::canvas::{RadarProfile, ScanGeometry};
use routeseg::io::{create, scan_name, write_pgm, RunHeader};

fn routeseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_routeseg")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("routeseg-cli-{}-{}", name, std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

/// A run directory with two truth masks (a centred square) and no streams.
fn masks_only_run(dir: &Path) -> usize {
    let geometry = ScanGeometry::for_profile(RadarProfile::Short);
    let n = geometry.size;
    let header = RunHeader { geometry, scans: 2, max_range: n as f64 * geometry.metres_per_pixel, duration: 1.0, sample_rate: 44_100 };
    serde_json::to_writer(create(dir.join("run.json")).unwrap(), &header).unwrap();
    let square: Vec<u8> =
        (0..n * n).map(|i| if (i / n).abs_diff(n / 2) < 10 && (i % n).abs_diff(n / 2) < 10 { 255 } else { 0 }).collect();
    for k in 0..2 {
        write_pgm(create(dir.join("truth_masks").join(format!("{}.pgm", scan_name(k)))).unwrap(), n, n, &square).unwrap();
    }
    n
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn perfect_masks_score_one() {
    let dir = scratch("perfect");
    masks_only_run(&dir);
    let run = dir.to_str().unwrap();
    let pred = dir.join("truth_masks");
    let o = routeseg(&["eval-seg", "--pred", pred.to_str().unwrap(), "--run", run]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("iou=1.0000"), "{}", stdout(&o));
    assert!(stdout(&o).contains("pixel_accuracy=1.0000"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn empty_prediction_fails_the_gate() {
    let dir = scratch("gate");
    let n = masks_only_run(&dir);
    let pred = dir.join("pred");
    for k in 0..2 {
        write_pgm(create(pred.join(format!("{}.pgm", scan_name(k)))).unwrap(), n, n, &vec![0; n * n]).unwrap();
    }
    let o = routeseg(&["eval-seg", "--pred", pred.to_str().unwrap(), "--run", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("iou=0.0000"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn label_mask_predictions_count_not_path_as_background() {
    let dir = scratch("labels");
    let n = masks_only_run(&dir);
    let (_, _, truth) = routeseg::io::read_pgm(fs::File::open(dir.join("truth_masks").join(format!("{}.pgm", scan_name(0)))).unwrap()).unwrap();
    let labels: Vec<u8> = truth.iter().map(|&v| if v == 255 { 255 } else { 128 }).collect();
    let pred = dir.join("pred");
    for k in 0..2 {
        write_pgm(create(pred.join(format!("{}.pgm", scan_name(k)))).unwrap(), n, n, &labels).unwrap();
    }
    let o = routeseg(&["eval-seg", "--pred", pred.to_str().unwrap(), "--run", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("iou=1.0000"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn missing_inputs_exit_with_two() {
    let o = routeseg(&["fuse", "--run", "/nonexistent/routeseg-run"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));

    let dir = scratch("missing");
    let o = routeseg(&["eval-seg", "--pred", dir.to_str().unwrap(), "--run", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_flags_are_rejected() {
    assert_eq!(routeseg(&["--threads", "2", "fuse", "--run", "."]).status.code(), Some(1));
    assert_eq!(routeseg(&["train-seg", "--stage", "3", "--run", ".", "--out", "m"]).status.code(), Some(2));
    assert_eq!(routeseg(&["simulate", "--out", "x", "--profile", "medium"]).status.code(), Some(2));
    let cfg = scratch("config");
    let path = cfg.join("c.json");
    fs::write(&path, r#"{"seeds": 3}"#).unwrap();
    let o = routeseg(&["--config", path.to_str().unwrap(), "fuse", "--run", "."]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
    fs::remove_dir_all(&cfg).unwrap();
}
