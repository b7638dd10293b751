//! Synthetic worlds, traverses and sensor streams with known ground truth.

pub mod audio;
pub mod config;
pub mod odometry;
pub mod radar;
pub mod traverse;
pub mod world;

pub use audio::{synth_audio, synth_stream};
pub use config::{Reflectivity, SimConfig, WorldParams};
pub use odometry::{synth_gps, synth_vo};
pub use radar::synth_radar;
pub use traverse::{plan_traverse, Traverse, TruthSample};
pub use world::{generate_world, PathPolyline, PathRole, Scatterer, TerrainMap};

use crate::canvas::{PolarScan, ScanGeometry};
use crate::dsp::AudioClip;
use crate::error::Result;
use crate::fusion::{GpsFix, VoIncrement};
use crate::geometry::Pose2;
use crate::rng;
use crate::terrain::TerrainClass;

/// 1 where the map cell under a pixel centre is gravel, else 0. Row-major,
/// same layout as the rendered scan.
pub fn ground_truth_mask(map: &TerrainMap, pose: Pose2, geom: ScanGeometry) -> Vec<u8> {
    let n = geom.size;
    let mut mask = vec![0u8; n * n];
    for row in 0..n {
        for col in 0..n {
            let (lx, ly) = crate::canvas::polar::pixel_center(n, geom.metres_per_pixel, row, col);
            let (gx, gy) = pose.to_global(lx, ly);
            mask[row * n + col] = u8::from(map.lookup(gx, gy) == TerrainClass::Gravel);
        }
    }
    mask
}

/// Everything recorded on one simulated drive.
#[derive(Clone, Debug)]
pub struct SimRun {
    pub map: TerrainMap,
    pub traverse: Traverse,
    pub vo: Vec<VoIncrement>,
    pub gps: Vec<GpsFix>,
    pub audio: AudioClip,
    pub scans: Vec<PolarScan>,
    /// Ground-truth path mask per scan, for evaluation only.
    pub masks: Vec<Vec<u8>>,
    pub geometry: ScanGeometry,
}

/// Times at which scans are taken along a traverse.
pub fn scan_times(traverse: &Traverse, interval: f64) -> Vec<f64> {
    let end = traverse.duration();
    (0..).map(|k| k as f64 * interval).take_while(|&t| t <= end + 1e-9).collect()
}

/// Generates a world and drives it, recording every sensor stream.
pub fn simulate(cfg: &SimConfig, seed: u64) -> Result<SimRun> {
    cfg.validate()?;
    let map = generate_world(rng::derive_seed(seed, "world"), cfg)?;
    let traverse = plan_traverse(&map, cfg, rng::derive_seed(seed, "traverse"))?;
    let vo = synth_vo(&traverse, cfg, rng::derive_seed(seed, "vo"))?;
    let gps = synth_gps(&traverse, cfg, rng::derive_seed(seed, "gps"))?;
    let audio = synth_stream(&traverse, cfg.sample_rate, rng::derive_seed(seed, "audio"))?;
    let geometry = ScanGeometry::for_profile(cfg.radar_profile);
    let mut scans = Vec::new();
    let mut masks = Vec::new();
    for (i, t) in scan_times(&traverse, cfg.scan_interval).into_iter().enumerate() {
        let s = traverse.at_time(t);
        let scan_seed = rng::derive_seed(seed, &format!("scan{}", i));
        scans.push(synth_radar(&map, s.pose, cfg, s.t, scan_seed)?);
        masks.push(ground_truth_mask(&map, s.pose, geometry));
    }
    Ok(SimRun { map, traverse, vo, gps, audio, scans, masks, geometry })
}
