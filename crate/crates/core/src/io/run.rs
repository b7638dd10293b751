use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::audio::{read_wav, write_wav};
use super::image::{read_pgm, write_pgm};
use super::records::{read_csv, traverse_from_rows, truth_rows, write_csv, TruthRow};
use super::world::{read_world_json, world_image, write_world_json};
use crate::canvas::{read_rds, write_rds, ScanGeometry};
use crate::error::{Error, Result};
use crate::simworld::SimRun;

/// Summary written as `run.json` beside the streams of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunHeader {
    pub geometry: ScanGeometry,
    pub scans: usize,
    /// Radar range in metres; pixels beyond it carry no data.
    pub max_range: f64,
    pub duration: f64,
    pub sample_rate: u32,
}

pub fn scan_name(k: usize) -> String {
    format!("scan_{:03}", k)
}

pub fn create<P: AsRef<Path>>(p: P) -> Result<BufWriter<File>> {
    if let Some(dir) = p.as_ref().parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(p)?))
}

/// Opens an input file, reporting a missing file as an input error.
pub fn open<P: AsRef<Path>>(p: P) -> Result<BufReader<File>> {
    let p = p.as_ref();
    File::open(p)
        .map(BufReader::new)
        .map_err(|e| Error::Input(format!("cannot open {}: {}", p.display(), e)))
}

/// Writes a run. Audio and polar scans are large and only written when
/// `raw` is set; without them the run cannot be read back.
pub fn write_run(dir: &Path, run: &SimRun, raw: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    let header = RunHeader {
        geometry: run.geometry,
        scans: run.scans.len(),
        max_range: run.scans.first().map_or(0.0, |s| s.max_range()),
        duration: run.traverse.duration(),
        sample_rate: run.audio.sample_rate,
    };
    serde_json::to_writer_pretty(create(dir.join("run.json"))?, &header)?;
    write_world_json(create(dir.join("world.json"))?, &run.map)?;
    write_pgm(create(dir.join("world.pgm"))?, run.map.width, run.map.height, &world_image(&run.map))?;
    write_csv(create(dir.join("truth.csv"))?, &truth_rows(&run.traverse))?;
    write_csv(create(dir.join("vo.csv"))?, &run.vo)?;
    write_csv(create(dir.join("gps.csv"))?, &run.gps)?;
    let n = run.geometry.size;
    for (k, m) in run.masks.iter().enumerate() {
        let px: Vec<u8> = m.iter().map(|&v| if v == 1 { 255 } else { 0 }).collect();
        write_pgm(create(dir.join("truth_masks").join(format!("{}.pgm", scan_name(k))))?, n, n, &px)?;
    }
    if raw {
        write_wav(create(dir.join("audio.wav"))?, &run.audio)?;
        for (k, s) in run.scans.iter().enumerate() {
            write_rds(create(dir.join("scans").join(format!("{}.rds", scan_name(k))))?, s)?;
        }
    }
    Ok(())
}

pub fn read_header(dir: &Path) -> Result<RunHeader> {
    Ok(serde_json::from_reader(open(dir.join("run.json"))?)?)
}

pub fn read_run(dir: &Path) -> Result<SimRun> {
    let header = read_header(dir)?;
    let map = read_world_json(open(dir.join("world.json"))?)?;
    let rows: Vec<TruthRow> = read_csv(open(dir.join("truth.csv"))?)?;
    let traverse = traverse_from_rows(&rows);
    let vo = read_csv(open(dir.join("vo.csv"))?)?;
    let gps = read_csv(open(dir.join("gps.csv"))?)?;
    let audio = read_wav(open(dir.join("audio.wav"))?)?;
    let mut scans = Vec::with_capacity(header.scans);
    let mut masks = Vec::with_capacity(header.scans);
    let n = header.geometry.size;
    for k in 0..header.scans {
        scans.push(read_rds(open(dir.join("scans").join(format!("{}.rds", scan_name(k))))?)?);
        let (w, h, px) = read_pgm(open(dir.join("truth_masks").join(format!("{}.pgm", scan_name(k))))?)?;
        if w != n || h != n {
            return Err(Error::Format(format!("truth mask {} is {}x{}, expected {}", k, w, h, n)));
        }
        masks.push(px.iter().map(|&v| u8::from(v > 127)).collect());
    }
    Ok(SimRun { map, traverse, vo, gps, audio, scans, masks, geometry: header.geometry })
}
