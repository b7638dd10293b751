use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng;
use crate::terrain::TerrainClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathRole {
    /// The path the robot drives along.
    Main,
    /// Never driven; scored separately to measure generalisation.
    Untraversed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPolyline {
    pub vertices: Vec<(f64, f64)>,
    pub width: f64,
    pub role: PathRole,
}

impl PathPolyline {
    /// Distance from `(x, y)` to the centreline.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        self.vertices
            .windows(2)
            .map(|s| segment_distance(s[0], s[1], x, y))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.distance(x, y) <= self.width / 2.0
    }
}

pub fn segment_distance(a: (f64, f64), b: (f64, f64), x: f64, y: f64) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((x - a.0) * dx + (y - a.1) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (x - a.0 - t * dx).hypot(y - a.1 - t * dy)
}

/// Point reflector (a tree trunk) that shadows the ground behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Class grid over `[0, width * cell] x [0, height * cell]`; row `r` spans
/// `y in [r * cell, (r + 1) * cell)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TerrainMap {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    pub grid: Vec<u8>,
    pub paths: Vec<PathPolyline>,
    pub scatterers: Vec<Scatterer>,
    /// +1 or -1: the side of the main path (along its left normal) away
    /// from the untraversed path, where grass excursions are driven.
    pub excursion_side: f64,
}

impl TerrainMap {
    pub fn extent(&self) -> (f64, f64) {
        (self.width as f64 * self.cell_size, self.height as f64 * self.cell_size)
    }

    pub fn in_bounds(&self, x: f64, y: f64) -> bool {
        let (w, h) = self.extent();
        x >= 0.0 && y >= 0.0 && x < w && y < h
    }

    /// Terrain at a point; everything outside the grid is grass.
    pub fn lookup(&self, x: f64, y: f64) -> TerrainClass {
        if !self.in_bounds(x, y) {
            return TerrainClass::Grass;
        }
        let c = (x / self.cell_size) as usize;
        let r = (y / self.cell_size) as usize;
        TerrainClass::from_index(self.grid[r * self.width + c] as usize).unwrap_or(TerrainClass::Grass)
    }

    pub fn cell_center(&self, r: usize, c: usize) -> (f64, f64) {
        ((c as f64 + 0.5) * self.cell_size, (r as f64 + 0.5) * self.cell_size)
    }

    pub fn main_path(&self) -> &PathPolyline {
        self.paths.iter().find(|p| p.role == PathRole::Main).expect("world has a main path")
    }

    pub fn untraversed_path(&self) -> &PathPolyline {
        self.paths
            .iter()
            .find(|p| p.role == PathRole::Untraversed)
            .expect("world has an untraversed path")
    }

    pub fn gravel_fraction(&self) -> f64 {
        let g = TerrainClass::Gravel as u8;
        self.grid.iter().filter(|&&v| v == g).count() as f64 / self.grid.len() as f64
    }

    fn rasterize(&mut self) {
        let cs = self.cell_size;
        let g = TerrainClass::Gravel as u8;
        for path in &self.paths {
            let hw = path.width / 2.0;
            for s in path.vertices.windows(2) {
                let (a, b) = (s[0], s[1]);
                let c0 = (((a.0.min(b.0) - hw) / cs).floor().max(0.0)) as usize;
                let c1 = ((((a.0.max(b.0) + hw) / cs).ceil()) as usize).min(self.width);
                let r0 = (((a.1.min(b.1) - hw) / cs).floor().max(0.0)) as usize;
                let r1 = ((((a.1.max(b.1) + hw) / cs).ceil()) as usize).min(self.height);
                for r in r0..r1 {
                    for c in c0..c1 {
                        let (x, y) = ((c as f64 + 0.5) * cs, (r as f64 + 0.5) * cs);
                        if segment_distance(a, b, x, y) <= hw {
                            self.grid[r * self.width + c] = g;
                        }
                    }
                }
            }
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: (f64, f64)) -> f64 {
    if r.1 > r.0 {
        rng.random_range(r.0..r.1)
    } else {
        r.0
    }
}

fn min_distance(a: &PathPolyline, b: &PathPolyline) -> f64 {
    a.vertices.iter().map(|&(x, y)| b.distance(x, y)).fold(f64::INFINITY, f64::min)
}

/// Builds a grass world with a meandering main path and an untraversed side
/// path running alongside it, plus scattered trees.
pub fn generate_world(seed: u64, cfg: &SimConfig) -> Result<TerrainMap> {
    cfg.validate()?;
    let p = cfg.world_params();
    let mut rng = rng::stream(seed, "world");
    let extent = p.extent_m;
    let n = (extent / p.cell_size).round() as usize;
    let margin = 0.05 * extent;
    let step = (extent / 200.0).max(0.5);
    let centre = extent / 2.0;

    let mut attempt = 0;
    let (main, side, side_sign) = loop {
        attempt += 1;
        if attempt > 200 {
            return Err(Error::Config("could not place two separated paths in the world".into()));
        }
        let amp = uniform(&mut rng, p.meander_amplitude);
        let lambda = uniform(&mut rng, p.meander_wavelength);
        let phase = rng.random_range(0.0..2.0 * PI);
        let y_main = |x: f64| centre + amp * (2.0 * PI * x / lambda + phase).sin();
        let xs: Vec<f64> = {
            let k = ((extent - 2.0 * margin) / step).floor() as usize;
            (0..=k).map(|i| margin + i as f64 * step).collect()
        };
        let main = PathPolyline {
            vertices: xs.iter().map(|&x| (x, y_main(x))).collect(),
            width: uniform(&mut rng, p.path_width),
            role: PathRole::Main,
        };
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let d0 = uniform(&mut rng, p.side_offset);
        let slope = rng.random_range(-0.06..0.06);
        let x_lo = extent * rng.random_range(0.08..0.2);
        let x_hi = extent * rng.random_range(0.8..0.92);
        let side = PathPolyline {
            vertices: xs
                .iter()
                .filter(|&&x| x >= x_lo && x <= x_hi)
                .map(|&x| {
                    let off = (d0 + slope * (x - centre)).max(p.side_offset.0);
                    (x, y_main(x) + sign * off)
                })
                .collect(),
            width: uniform(&mut rng, p.path_width),
            role: PathRole::Untraversed,
        };
        let inside = side.vertices.iter().all(|&(_, y)| y > margin && y < extent - margin);
        let gap = min_distance(&side, &main) - (main.width + side.width) / 2.0;
        if side.vertices.len() >= 2 && inside && gap >= 0.5 * p.side_offset.0 {
            break (main, side, sign);
        }
    };

    // The main path's left normal is +y for a path running along +x, so the
    // side path lies at `side_sign` and excursions go the other way.
    let excursion_side = -side_sign;
    let keep_clear = p.excursion_offset.1 + 6.0;
    let area_km2 = extent * extent / 1e6;
    let count = (cfg.scatterer_density * area_km2).round() as usize;
    let mut scatterers = Vec::with_capacity(count);
    let mut tries = 0;
    while scatterers.len() < count && tries < count * 50 {
        tries += 1;
        let x = rng.random_range(0.0..extent);
        let y = rng.random_range(0.0..extent);
        let radius = uniform(&mut rng, p.scatterer_radius);
        if main.distance(x, y) < keep_clear || side.distance(x, y) < side.width / 2.0 + radius + 3.0 {
            continue;
        }
        scatterers.push(Scatterer { x, y, radius });
    }

    let mut map = TerrainMap {
        width: n,
        height: n,
        cell_size: p.cell_size,
        grid: vec![TerrainClass::Grass as u8; n * n],
        paths: vec![main, side],
        scatterers,
        excursion_side,
    };
    map.rasterize();
    Ok(map)
}

/// Builds a world from explicit parts (used by tests and file loading).
pub fn world_from_parts(
    width: usize,
    height: usize,
    cell_size: f64,
    paths: Vec<PathPolyline>,
    scatterers: Vec<Scatterer>,
    excursion_side: f64,
) -> Result<TerrainMap> {
    if width < 64 || height < 64 || !(cell_size > 0.0) {
        return Err(Error::Config(format!("world {}x{} cells at {} m is too small", width, height, cell_size)));
    }
    for role in [PathRole::Main, PathRole::Untraversed] {
        if !paths.iter().any(|p| p.role == role && p.vertices.len() >= 2) {
            return Err(Error::Config(format!("world needs a {:?} path polyline", role).to_lowercase()));
        }
    }
    let mut map = TerrainMap {
        width,
        height,
        cell_size,
        grid: vec![TerrainClass::Grass as u8; width * height],
        paths,
        scatterers,
        excursion_side,
    };
    map.rasterize();
    Ok(map)
}
