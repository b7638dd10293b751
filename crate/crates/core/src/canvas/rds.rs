use std::io::{Read, Write};

use super::polar::PolarScan;
use crate::error::{Error, Result};
use crate::geometry::Pose2;

const MAGIC: &[u8; 4] = b"RDS1";

/// Writes a scan as `RDS1`: magic, u32 azimuths, u32 bins, f32 range
/// resolution, f64 timestamp, f64 x, y, yaw, then f32 power, all little-endian.
pub fn write_rds<W: Write>(mut w: W, scan: &PolarScan) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(scan.azimuths as u32).to_le_bytes())?;
    w.write_all(&(scan.bins as u32).to_le_bytes())?;
    w.write_all(&scan.range_resolution.to_le_bytes())?;
    for v in [scan.timestamp, scan.pose.x, scan.pose.y, scan.pose.yaw] {
        w.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(scan.power.len() * 4);
    for p in &scan.power {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_rds<R: Read>(mut r: R) -> Result<PolarScan> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let header = 4 + 4 + 4 + 4 + 32;
    if bytes.len() < header || &bytes[..4] != MAGIC {
        return Err(Error::Format("not an RDS1 scan".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let azimuths = u32_at(4);
    let bins = u32_at(8);
    let res = f32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let (timestamp, x, y, yaw) = (f64_at(16), f64_at(24), f64_at(32), f64_at(40));
    let expected = azimuths
        .checked_mul(bins)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("RDS1 dimensions overflow".into()))?;
    if bytes.len() - header != expected {
        return Err(Error::Format(format!(
            "RDS1 payload is {} bytes, expected {}",
            bytes.len() - header,
            expected
        )));
    }
    let power = bytes[header..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    PolarScan::new(azimuths, bins, res, timestamp, Pose2 { x, y, yaw }, power)
}
