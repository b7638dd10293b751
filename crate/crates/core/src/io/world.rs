use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::simworld::world::world_from_parts;
use crate::simworld::{PathPolyline, Scatterer, TerrainMap};

/// Vector description of a world. The class grid is rebuilt on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldFile {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub excursion_side: f64,
    pub paths: Vec<PathPolyline>,
    pub scatterers: Vec<Scatterer>,
}

impl From<&TerrainMap> for WorldFile {
    fn from(m: &TerrainMap) -> Self {
        Self {
            width: m.width,
            height: m.height,
            cell_size: m.cell_size,
            excursion_side: m.excursion_side,
            paths: m.paths.clone(),
            scatterers: m.scatterers.clone(),
        }
    }
}

pub fn write_world_json<W: Write>(w: W, map: &TerrainMap) -> Result<()> {
    serde_json::to_writer(w, &WorldFile::from(map))?;
    Ok(())
}

pub fn read_world_json<R: Read>(r: R) -> Result<TerrainMap> {
    let f: WorldFile = serde_json::from_reader(r)?;
    world_from_parts(f.width, f.height, f.cell_size, f.paths, f.scatterers, f.excursion_side)
}

/// Class grid as a greymap of class indices, row `r` of the grid on
/// image row `r`.
pub fn world_image(map: &TerrainMap) -> Vec<u8> {
    map.grid.clone()
}
