use serde::{Deserialize, Serialize};

use crate::canvas::polar::RadarProfile;
use crate::error::{Error, Result};
use crate::terrain::TerrainClass;

/// Mean radar power per terrain class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reflectivity {
    pub grass: f64,
    pub gravel: f64,
    pub asphalt: f64,
}

impl Default for Reflectivity {
    fn default() -> Self {
        Self { grass: 1.0, gravel: 0.2, asphalt: 0.1 }
    }
}

impl Reflectivity {
    pub fn of(&self, c: TerrainClass) -> f64 {
        match c {
            TerrainClass::Grass => self.grass,
            TerrainClass::Gravel => self.gravel,
            TerrainClass::Asphalt => self.asphalt,
        }
    }
}

/// Layout of a generated world. Defaults depend on the radar profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldParams {
    pub extent_m: f64,
    pub cell_size: f64,
    pub path_width: (f64, f64),
    pub side_offset: (f64, f64),
    pub meander_amplitude: (f64, f64),
    pub meander_wavelength: (f64, f64),
    /// Portion of the main path (by x extent, centred) that is driven.
    pub traverse_span: f64,
    pub excursions: usize,
    pub excursion_offset: (f64, f64),
    pub excursion_length: f64,
    pub scatterer_radius: (f64, f64),
    pub shadow_length: f64,
    pub shadow_attenuation: f64,
    pub scatterer_reflectivity: f64,
}

impl WorldParams {
    pub fn for_profile(p: RadarProfile) -> Self {
        match p {
            RadarProfile::Short => Self {
                extent_m: 200.0,
                cell_size: 0.25,
                path_width: (3.0, 5.0),
                side_offset: (18.0, 28.0),
                meander_amplitude: (6.0, 14.0),
                meander_wavelength: (120.0, 200.0),
                traverse_span: 0.85,
                excursions: 3,
                excursion_offset: (6.0, 10.0),
                excursion_length: 24.0,
                scatterer_radius: (0.6, 1.2),
                shadow_length: 20.0,
                shadow_attenuation: 0.4,
                scatterer_reflectivity: 8.0,
            },
            RadarProfile::Long => Self {
                extent_m: 720.0,
                cell_size: 0.5,
                path_width: (8.0, 12.0),
                side_offset: (60.0, 100.0),
                meander_amplitude: (20.0, 50.0),
                meander_wavelength: (400.0, 700.0),
                traverse_span: 0.35,
                excursions: 3,
                excursion_offset: (15.0, 25.0),
                excursion_length: 50.0,
                scatterer_radius: (0.6, 1.2),
                shadow_length: 20.0,
                shadow_attenuation: 0.4,
                scatterer_reflectivity: 8.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_range = |r: (f64, f64)| r.0 > 0.0 && r.1 >= r.0;
        let cells = (self.extent_m / self.cell_size).round();
        if !(self.cell_size > 0.0) || cells < 64.0 {
            return Err(Error::Config(format!(
                "world of {} m at {} m/cell is below 64x64 cells",
                self.extent_m, self.cell_size
            )));
        }
        if !ok_range(self.path_width) || !ok_range(self.side_offset) || !ok_range(self.meander_wavelength) {
            return Err(Error::Config("path width, side offset and meander ranges must be positive".into()));
        }
        if self.meander_amplitude.0 < 0.0 || self.meander_amplitude.1 < self.meander_amplitude.0 {
            return Err(Error::Config("bad meander amplitude range".into()));
        }
        if !(self.traverse_span > 0.0 && self.traverse_span <= 1.0) {
            return Err(Error::Config("traverse_span must lie in (0, 1]".into()));
        }
        if self.side_offset.0 <= self.path_width.1 + 2.0 {
            return Err(Error::Config("side path would touch the main path".into()));
        }
        if !(self.shadow_attenuation >= 0.0 && self.shadow_attenuation <= 1.0) {
            return Err(Error::Config("shadow attenuation must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub seed: u64,
    pub radar_profile: RadarProfile,
    pub gps_sigma: f64,
    pub gps_rate: f64,
    pub vo_rate: f64,
    pub vo_trans_sigma: f64,
    pub vo_yaw_sigma: f64,
    /// Constant yaw bias of the odometry, rad/s.
    pub vo_yaw_drift: f64,
    pub speed: f64,
    pub terrain_reflectivity: Reflectivity,
    pub speckle_on: bool,
    /// Point scatterers (trees) per square kilometre.
    pub scatterer_density: f64,
    pub sample_rate: u32,
    /// Seconds between radar scans along the traverse.
    pub scan_interval: f64,
    pub world: Option<WorldParams>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            radar_profile: RadarProfile::Short,
            gps_sigma: 2.0,
            gps_rate: 1.0,
            vo_rate: 10.0,
            vo_trans_sigma: 0.01,
            vo_yaw_sigma: 1e-4,
            vo_yaw_drift: 0.5f64.to_radians(),
            speed: 1.0,
            terrain_reflectivity: Reflectivity::default(),
            speckle_on: true,
            scatterer_density: 300.0,
            sample_rate: 44_100,
            scan_interval: 8.0,
            world: None,
        }
    }
}

impl SimConfig {
    pub fn world_params(&self) -> WorldParams {
        self.world.unwrap_or_else(|| WorldParams::for_profile(self.radar_profile))
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.vo_rate
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{} must be positive, got {}", name, v)))
            }
        };
        pos(self.gps_sigma, "gps_sigma")?;
        pos(self.gps_rate, "gps_rate")?;
        pos(self.vo_rate, "vo_rate")?;
        pos(self.speed, "speed")?;
        pos(self.scan_interval, "scan_interval")?;
        if self.sample_rate < 8000 {
            return Err(Error::Config("sample_rate below 8 kHz".into()));
        }
        if self.vo_trans_sigma < 0.0 || self.vo_yaw_sigma < 0.0 || self.scatterer_density < 0.0 {
            return Err(Error::Config("noise magnitudes and densities must be non-negative".into()));
        }
        let r = self.terrain_reflectivity;
        if r.grass < 0.0 || r.gravel < 0.0 || r.asphalt < 0.0 {
            return Err(Error::Config("reflectivities must be non-negative".into()));
        }
        self.world_params().validate()
    }
}
