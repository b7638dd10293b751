use std::io::{Read, Write};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::Result;
use crate::fusion::{FusedPose, TerrainPrediction};
use crate::geometry::Pose2;
use crate::simworld::{Traverse, TruthSample};
use crate::terrain::TerrainClass;

/// Header row plus one row per record; VO, GPS and labelled trajectories
/// serialise directly.
pub fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read, T: DeserializeOwned>(r: R) -> Result<Vec<T>> {
    let mut rd = csv::Reader::from_reader(r);
    rd.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// `timestamp,x,y,yaw,terrain`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub terrain: TerrainClass,
}

impl From<&TruthSample> for TruthRow {
    fn from(s: &TruthSample) -> Self {
        Self { timestamp: s.t, x: s.pose.x, y: s.pose.y, yaw: s.pose.yaw, terrain: s.terrain }
    }
}

pub fn truth_rows(t: &Traverse) -> Vec<TruthRow> {
    t.samples.iter().map(TruthRow::from).collect()
}

pub fn traverse_from_rows(rows: &[TruthRow]) -> Traverse {
    let dt = if rows.len() > 1 { rows[1].timestamp - rows[0].timestamp } else { 0.1 };
    Traverse {
        dt,
        samples: rows
            .iter()
            .map(|r| TruthSample { t: r.timestamp, pose: Pose2::new(r.x, r.y, r.yaw), terrain: r.terrain })
            .collect(),
    }
}

/// `timestamp,x,y,yaw`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseRow {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

pub fn fused_rows(f: &[FusedPose]) -> Vec<PoseRow> {
    f.iter().map(|p| PoseRow { timestamp: p.timestamp, x: p.pose.x, y: p.pose.y, yaw: p.pose.yaw }).collect()
}

pub fn fused_from_rows(rows: &[PoseRow]) -> Vec<FusedPose> {
    rows.iter()
        .map(|r| FusedPose { timestamp: r.timestamp, pose: Pose2::new(r.x, r.y, r.yaw), position_trace: 0.0 })
        .collect()
}

/// `timestamp,class,p_grass,p_gravel,p_asphalt`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub timestamp: f64,
    pub class: TerrainClass,
    pub p_grass: f64,
    pub p_gravel: f64,
    pub p_asphalt: f64,
}

impl From<&TerrainPrediction> for PredictionRow {
    fn from(p: &TerrainPrediction) -> Self {
        let [p_grass, p_gravel, p_asphalt] = p.probabilities;
        Self { timestamp: p.timestamp, class: p.terrain, p_grass, p_gravel, p_asphalt }
    }
}

impl From<&PredictionRow> for TerrainPrediction {
    fn from(r: &PredictionRow) -> Self {
        Self { timestamp: r.timestamp, terrain: r.class, probabilities: [r.p_grass, r.p_gravel, r.p_asphalt] }
    }
}

pub fn prediction_rows(p: &[TerrainPrediction]) -> Vec<PredictionRow> {
    p.iter().map(PredictionRow::from).collect()
}
