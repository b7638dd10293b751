use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::canvas::Label;
use crate::error::{shape_err, Error, Result};

/// Square image with aligned labels. Images are standardised scan values.
#[derive(Clone, Debug, PartialEq)]
pub struct CropSample {
    pub size: usize,
    pub image: Vec<f64>,
    pub mask: Vec<Label>,
}

impl CropSample {
    pub fn new(size: usize, image: Vec<f64>, mask: Vec<Label>) -> Result<Self> {
        if image.len() != size * size || mask.len() != size * size {
            return shape_err(format!("crop of size {} has {} pixels and {} labels", size, image.len(), mask.len()));
        }
        Ok(Self { size, image, mask })
    }

    pub fn labeled(&self) -> usize {
        self.mask.iter().filter(|&&l| l != Label::Unlabeled).count()
    }

    /// Centre `size x size` window.
    pub fn center_crop(&self, size: usize) -> Result<CropSample> {
        if size > self.size {
            return shape_err(format!("cannot crop {} out of {}", size, self.size));
        }
        let off = (self.size - size) / 2;
        let mut image = Vec::with_capacity(size * size);
        let mut mask = Vec::with_capacity(size * size);
        for r in 0..size {
            let src = (r + off) * self.size + off;
            image.extend_from_slice(&self.image[src..src + size]);
            mask.extend_from_slice(&self.mask[src..src + size]);
        }
        Ok(CropSample { size, image, mask })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentationConfig {
    /// Random horizontal flip.
    pub flip: bool,
    /// Random multiple of 90 degrees (exact pixel permutation).
    pub right_angles: bool,
    /// Uniform rotation range in degrees; (0, 0) disables it.
    pub rotation_degrees: (f64, f64),
    /// Elastic displacement: coarse grid spacing (px) and magnitude sigma
    /// (px); a zero magnitude disables it.
    pub elastic: (f64, f64),
    /// Uniform scale range; (1, 1) disables it.
    pub rescale: (f64, f64),
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self { flip: true, right_angles: true, rotation_degrees: (-45.0, 45.0), elastic: (16.0, 2.0), rescale: (0.8, 1.25) }
    }
}

impl AugmentationConfig {
    pub fn none() -> Self {
        Self { flip: false, right_angles: false, rotation_degrees: (0.0, 0.0), elastic: (16.0, 0.0), rescale: (1.0, 1.0) }
    }

    /// Flips and right-angle rotations only.
    pub fn dihedral() -> Self {
        Self { flip: true, right_angles: true, ..Self::none() }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.rescale;
        if !(a > 0.0 && b >= a) {
            return Err(Error::Config(format!("rescale range ({}, {}) must be positive and ordered", a, b)));
        }
        if !(self.elastic.1 >= 0.0) || !(self.elastic.0 > 0.0) {
            return Err(Error::Config("elastic grid spacing must be positive and magnitude non-negative".into()));
        }
        if !(self.rotation_degrees.1 >= self.rotation_degrees.0) {
            return Err(Error::Config("rotation range must be ordered".into()));
        }
        Ok(())
    }
}

/// Mirrors columns.
pub fn flip_horizontal<T: Copy>(v: &[T], size: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(v.len());
    for r in 0..size {
        out.extend(v[r * size..(r + 1) * size].iter().rev());
    }
    out
}

/// Rotates counter-clockwise by `quarter_turns * 90` degrees.
pub fn rotate90<T: Copy>(v: &[T], size: usize, quarter_turns: usize) -> Vec<T> {
    let mut cur = v.to_vec();
    for _ in 0..quarter_turns % 4 {
        let mut next = cur.clone();
        for r in 0..size {
            for c in 0..size {
                // destination (size-1-c, r) takes source (r, c)
                next[(size - 1 - c) * size + r] = cur[r * size + c];
            }
        }
        cur = next;
    }
    cur
}

fn bilinear(img: &[f64], size: usize, y: f64, x: f64) -> f64 {
    let n = size as f64;
    if !(y > -1.0 && x > -1.0 && y < n && x < n) {
        return 0.0;
    }
    let (y0, x0) = (y.floor(), x.floor());
    let (ty, tx) = (y - y0, x - x0);
    let at = |r: f64, c: f64| {
        if r < 0.0 || c < 0.0 || r >= n || c >= n {
            0.0
        } else {
            img[r as usize * size + c as usize]
        }
    };
    let top = at(y0, x0) * (1.0 - tx) + at(y0, x0 + 1.0) * tx;
    let bot = at(y0 + 1.0, x0) * (1.0 - tx) + at(y0 + 1.0, x0 + 1.0) * tx;
    top * (1.0 - ty) + bot * ty
}

fn nearest<T: Copy>(v: &[T], size: usize, y: f64, x: f64, outside: T) -> T {
    let (r, c) = (y.round(), x.round());
    if r < 0.0 || c < 0.0 || r >= size as f64 || c >= size as f64 {
        outside
    } else {
        v[r as usize * size + c as usize]
    }
}

fn gaussian_blur(field: &mut [f64], size: usize, sigma: f64) {
    if sigma <= 0.0 {
        return;
    }
    let rad = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-rad..=rad).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let ks: f64 = k.iter().sum();
    let k: Vec<f64> = k.iter().map(|v| v / ks).collect();
    let n = size as isize;
    let mut tmp = vec![0.0; field.len()];
    for r in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for (j, w) in k.iter().enumerate() {
                let cc = (c + j as isize - rad).clamp(0, n - 1);
                s += w * field[(r * n + cc) as usize];
            }
            tmp[(r * n + c) as usize] = s;
        }
    }
    for r in 0..n {
        for c in 0..n {
            let mut s = 0.0;
            for (j, w) in k.iter().enumerate() {
                let rr = (r + j as isize - rad).clamp(0, n - 1);
                s += w * tmp[(rr * n + c) as usize];
            }
            field[(r * n + c) as usize] = s;
        }
    }
}

/// Smooth random displacement: Gaussian values on a coarse grid, bilinearly
/// upsampled and then Gaussian-smoothed.
fn elastic_field<R: Rng + ?Sized>(size: usize, spacing: f64, sigma: f64, rng: &mut R) -> Vec<f64> {
    let g = (size as f64 / spacing).ceil() as usize + 2;
    let coarse: Vec<f64> = (0..g * g).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut field = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let (y, x) = (r as f64 / spacing, c as f64 / spacing);
            let (y0, x0) = (y.floor() as usize, x.floor() as usize);
            let (ty, tx) = (y - y0 as f64, x - x0 as f64);
            let at = |a: usize, b: usize| coarse[a.min(g - 1) * g + b.min(g - 1)];
            field[r * size + c] = (at(y0, x0) * (1.0 - tx) + at(y0, x0 + 1) * tx) * (1.0 - ty)
                + (at(y0 + 1, x0) * (1.0 - tx) + at(y0 + 1, x0 + 1) * tx) * ty;
        }
    }
    gaussian_blur(&mut field, size, spacing / 4.0);
    field
}

/// Applies one random geometric transform to image and mask together.
/// Images are resampled bilinearly, labels by nearest neighbour; pixels
/// mapped from outside the crop become 0 / unlabeled.
pub fn augment<R: Rng + ?Sized>(sample: &CropSample, cfg: &AugmentationConfig, rng: &mut R) -> Result<CropSample> {
    cfg.validate()?;
    let n = sample.size;
    let mut image = sample.image.clone();
    let mut mask = sample.mask.clone();
    if cfg.flip && rng.random_bool(0.5) {
        image = flip_horizontal(&image, n);
        mask = flip_horizontal(&mask, n);
    }
    if cfg.right_angles {
        let q = rng.random_range(0..4usize);
        image = rotate90(&image, n, q);
        mask = rotate90(&mask, n, q);
    }
    let (ra, rb) = cfg.rotation_degrees;
    let angle = if rb > ra { rng.random_range(ra..rb) * PI / 180.0 } else { ra * PI / 180.0 };
    let (sa, sb) = cfg.rescale;
    let scale = if sb > sa { rng.random_range(sa..sb) } else { sa };
    let elastic = cfg.elastic.1 > 0.0;
    if angle == 0.0 && scale == 1.0 && !elastic {
        return CropSample::new(n, image, mask);
    }
    let (dy, dx) = if elastic {
        (elastic_field(n, cfg.elastic.0, cfg.elastic.1, rng), elastic_field(n, cfg.elastic.0, cfg.elastic.1, rng))
    } else {
        (vec![0.0; n * n], vec![0.0; n * n])
    };
    let centre = (n as f64 - 1.0) / 2.0;
    let (s, c) = angle.sin_cos();
    let mut out_img = vec![0.0; n * n];
    let mut out_mask = vec![Label::Unlabeled; n * n];
    for r in 0..n {
        for col in 0..n {
            let i = r * n + col;
            // Inverse map: output pixel -> source position.
            let (u, v) = ((col as f64 - centre) / scale, (r as f64 - centre) / scale);
            let x = c * u + s * v + centre + dx[i];
            let y = -s * u + c * v + centre + dy[i];
            out_img[i] = bilinear(&image, n, y, x);
            out_mask[i] = nearest(&mask, n, y, x, Label::Unlabeled);
        }
    }
    CropSample::new(n, out_img, out_mask)
}
