use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface type under the robot. The enum order is the class order used by
/// classifiers and by argmax tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerrainClass {
    Grass = 0,
    Gravel = 1,
    Asphalt = 2,
}

impl TerrainClass {
    pub const ALL: [TerrainClass; 3] = [TerrainClass::Grass, TerrainClass::Gravel, TerrainClass::Asphalt];
    pub const COUNT: usize = 3;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::Domain(format!("unknown terrain index {}", i)))
    }

    pub fn name(self) -> &'static str {
        match self {
            TerrainClass::Grass => "grass",
            TerrainClass::Gravel => "gravel",
            TerrainClass::Asphalt => "asphalt",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "grass" => Ok(TerrainClass::Grass),
            "gravel" => Ok(TerrainClass::Gravel),
            "asphalt" => Ok(TerrainClass::Asphalt),
            other => Err(Error::Domain(format!("unknown terrain {:?}", other))),
        }
    }

    /// Drivable routes are gravel.
    pub fn is_path(self) -> bool {
        self == TerrainClass::Gravel
    }
}

impl std::fmt::Display for TerrainClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
