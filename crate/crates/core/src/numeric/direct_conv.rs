//! Direct stride-1 convolution kernels on a zero-padded input copy.
//!
//! Output pixels are computed in register tiles of `TILE` columns and `CO`
//! output channels. Every output value is `bias + sum` over (ci, ky, kx) in
//! the same order on every code path. Accumulation uses `mul_add`, which is
//! correctly rounded both in hardware and in the scalar fallback, so results
//! are bit-identical whether or not a SIMD path is selected.

const TILE: usize = 16;
const CO: usize = 4;

/// Geometry of one stride-1 convolution.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Geom {
    pub cin: usize,
    pub cout: usize,
    pub h: usize,
    pub w: usize,
    pub k: usize,
    pub pad: usize,
}

impl Geom {
    pub fn ho(&self) -> usize {
        self.h + 2 * self.pad + 1 - self.k
    }
    pub fn wo(&self) -> usize {
        self.w + 2 * self.pad + 1 - self.k
    }
    fn hp(&self) -> usize {
        self.h + 2 * self.pad
    }
    fn wp(&self) -> usize {
        self.w + 2 * self.pad
    }
}

/// Copies `[C,H,W]` into a zero-bordered `[C,H+2p,W+2p]` buffer.
pub(crate) fn pad_input(x: &[f64], c: usize, h: usize, w: usize, pad: usize) -> Vec<f64> {
    let (hp, wp) = (h + 2 * pad, w + 2 * pad);
    let mut out = vec![0.0; c * hp * wp];
    for ci in 0..c {
        for y in 0..h {
            let src = &x[(ci * h + y) * w..(ci * h + y + 1) * w];
            let d0 = (ci * hp + y + pad) * wp + pad;
            out[d0..d0 + w].copy_from_slice(src);
        }
    }
    out
}

/// `[cout, cin, k, k]` weights reordered to `[cin, k, k, cout]`.
fn weights_by_tap(wt: &[f64], g: &Geom) -> Vec<f64> {
    let kk = g.k * g.k;
    let mut out = vec![0.0; wt.len()];
    for co in 0..g.cout {
        for ci in 0..g.cin {
            for t in 0..kk {
                out[(ci * kk + t) * g.cout + co] = wt[(co * g.cin + ci) * kk + t];
            }
        }
    }
    out
}

#[inline(always)]
fn forward_body(xp: &[f64], wt_tap: &[f64], bias: &[f64], g: &Geom, out: &mut [f64]) {
    let (ho, wo, hp, wp, k) = (g.ho(), g.wo(), g.hp(), g.wp(), g.k);
    let kk = k * k;
    let plane = ho * wo;
    let full_tiles = wo / TILE;
    let mut co0 = 0;
    while co0 < g.cout {
        let nco = CO.min(g.cout - co0);
        for y in 0..ho {
            for tx in 0..full_tiles {
                let x0 = tx * TILE;
                let mut acc = [[0.0f64; TILE]; CO];
                for ci in 0..g.cin {
                    for ky in 0..k {
                        let row = &xp[(ci * hp + y + ky) * wp..(ci * hp + y + ky + 1) * wp];
                        for kx in 0..k {
                            let src: &[f64; TILE] = row[x0 + kx..x0 + kx + TILE].try_into().unwrap();
                            let wbase = (ci * kk + ky * k + kx) * g.cout + co0;
                            if nco == CO {
                                let ws: &[f64; CO] = wt_tap[wbase..wbase + CO].try_into().unwrap();
                                for c in 0..CO {
                                    for l in 0..TILE {
                                        acc[c][l] = ws[c].mul_add(src[l], acc[c][l]);
                                    }
                                }
                            } else {
                                for c in 0..nco {
                                    let wv = wt_tap[wbase + c];
                                    for l in 0..TILE {
                                        acc[c][l] = wv.mul_add(src[l], acc[c][l]);
                                    }
                                }
                            }
                        }
                    }
                }
                for c in 0..nco {
                    let b = bias[co0 + c];
                    let dst = &mut out[(co0 + c) * plane + y * wo + x0..(co0 + c) * plane + y * wo + x0 + TILE];
                    for l in 0..TILE {
                        dst[l] = b + acc[c][l];
                    }
                }
            }
            for x in full_tiles * TILE..wo {
                for c in 0..nco {
                    let mut s = 0.0;
                    for ci in 0..g.cin {
                        for ky in 0..k {
                            let row = (ci * hp + y + ky) * wp + x;
                            for kx in 0..k {
                                s = wt_tap[(ci * kk + ky * k + kx) * g.cout + co0 + c].mul_add(xp[row + kx], s);
                            }
                        }
                    }
                    out[(co0 + c) * plane + y * wo + x] = bias[co0 + c] + s;
                }
            }
        }
        co0 += nco;
    }
}

#[inline(always)]
fn weight_grad_body(xp: &[f64], gout: &[f64], g: &Geom, dw: &mut [f64]) {
    let (ho, wo, hp, wp, k) = (g.ho(), g.wo(), g.hp(), g.wp(), g.k);
    let kk = k * k;
    let full = wo / TILE * TILE;
    for co in 0..g.cout {
        let gp = &gout[co * ho * wo..(co + 1) * ho * wo];
        for ci in 0..g.cin {
            for ky in 0..k {
                for kx in 0..k {
                    let mut lanes = [0.0f64; TILE];
                    let mut tail = 0.0;
                    for y in 0..ho {
                        let grow = &gp[y * wo..(y + 1) * wo];
                        let xrow = &xp[(ci * hp + y + ky) * wp + kx..(ci * hp + y + ky) * wp + kx + wo];
                        for (gc, xc) in grow[..full].chunks_exact(TILE).zip(xrow[..full].chunks_exact(TILE)) {
                            for l in 0..TILE {
                                lanes[l] = gc[l].mul_add(xc[l], lanes[l]);
                            }
                        }
                        for x in full..wo {
                            tail = grow[x].mul_add(xrow[x], tail);
                        }
                    }
                    let mut s = 0.0;
                    for v in lanes {
                        s += v;
                    }
                    dw[(co * g.cin + ci) * kk + ky * k + kx] += s + tail;
                }
            }
        }
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f,fma")]
unsafe fn forward_avx512(xp: &[f64], wt: &[f64], b: &[f64], g: &Geom, out: &mut [f64]) {
    forward_body(xp, wt, b, g, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn forward_avx2(xp: &[f64], wt: &[f64], b: &[f64], g: &Geom, out: &mut [f64]) {
    forward_body(xp, wt, b, g, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f,fma")]
unsafe fn weight_grad_avx512(xp: &[f64], gout: &[f64], g: &Geom, dw: &mut [f64]) {
    weight_grad_body(xp, gout, g, dw)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn weight_grad_avx2(xp: &[f64], gout: &[f64], g: &Geom, dw: &mut [f64]) {
    weight_grad_body(xp, gout, g, dw)
}

fn run_forward(xp: &[f64], wt_tap: &[f64], bias: &[f64], g: &Geom, out: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx512f") && std::is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { forward_avx512(xp, wt_tap, bias, g, out) };
        }
        if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
            // SAFETY: as above.
            return unsafe { forward_avx2(xp, wt_tap, bias, g, out) };
        }
    }
    forward_body(xp, wt_tap, bias, g, out)
}

/// Stride-1 convolution of `x` (`[cin,h,w]`) with `[cout,cin,k,k]` weights.
pub(crate) fn forward(x: &[f64], weight: &[f64], bias: &[f64], g: &Geom) -> Vec<f64> {
    let xp = pad_input(x, g.cin, g.h, g.w, g.pad);
    let wt = weights_by_tap(weight, g);
    let mut out = vec![0.0; g.cout * g.ho() * g.wo()];
    run_forward(&xp, &wt, bias, g, &mut out);
    out
}

/// Gradient with respect to the input: a full correlation of `gout` with the
/// spatially flipped, channel-transposed kernel.
pub(crate) fn input_grad(gout: &[f64], weight: &[f64], g: &Geom) -> Vec<f64> {
    let kk = g.k * g.k;
    let gt = Geom {
        cin: g.cout,
        cout: g.cin,
        h: g.ho(),
        w: g.wo(),
        k: g.k,
        pad: g.k - 1 - g.pad,
    };
    let mut flipped = vec![0.0; weight.len()];
    for co in 0..g.cout {
        for ci in 0..g.cin {
            for t in 0..kk {
                flipped[(ci * g.cout + co) * kk + (kk - 1 - t)] = weight[(co * g.cin + ci) * kk + t];
            }
        }
    }
    let zero = vec![0.0; g.cin];
    forward(gout, &flipped, &zero, &gt)
}

/// Accumulates the weight gradient into `dw` (`[cout,cin,k,k]`).
pub(crate) fn weight_grad(x: &[f64], gout: &[f64], g: &Geom, dw: &mut [f64]) {
    let xp = pad_input(x, g.cin, g.h, g.w, g.pad);
    #[cfg(target_arch = "x86_64")]
    {
        if std::is_x86_feature_detected!("avx512f") && std::is_x86_feature_detected!("fma") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { weight_grad_avx512(&xp, gout, g, dw) };
        }
        if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
            // SAFETY: as above.
            return unsafe { weight_grad_avx2(&xp, gout, g, dw) };
        }
    }
    weight_grad_body(&xp, gout, g, dw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[f64], wt: &[f64], b: &[f64], g: &Geom) -> Vec<f64> {
        let (ho, wo) = (g.ho(), g.wo());
        let mut out = vec![0.0; g.cout * ho * wo];
        for co in 0..g.cout {
            for y in 0..ho {
                for xx in 0..wo {
                    let mut s = b[co];
                    for ci in 0..g.cin {
                        for ky in 0..g.k {
                            for kx in 0..g.k {
                                let iy = (y + ky) as isize - g.pad as isize;
                                let ix = (xx + kx) as isize - g.pad as isize;
                                if iy >= 0 && ix >= 0 && (iy as usize) < g.h && (ix as usize) < g.w {
                                    s += wt[((co * g.cin + ci) * g.k + ky) * g.k + kx]
                                        * x[(ci * g.h + iy as usize) * g.w + ix as usize];
                                }
                            }
                        }
                    }
                    out[(co * ho + y) * wo + xx] = s;
                }
            }
        }
        out
    }

    fn vals(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed.wrapping_mul(0x9E3779B97F4A7C15) | 1;
        (0..n)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s % 2001) as f64 / 1000.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn matches_naive_on_ragged_shapes() {
        for (i, &(cin, cout, h, w, k, pad)) in [(3, 5, 7, 13, 3, 1), (2, 9, 16, 16, 3, 1), (1, 3, 5, 11, 3, 0), (4, 2, 9, 20, 1, 0)]
            .iter()
            .enumerate()
        {
            let g = Geom { cin, cout, h, w, k, pad };
            let x = vals(cin * h * w, i as u64 + 1);
            let wt = vals(cout * cin * k * k, i as u64 + 11);
            let b = vals(cout, i as u64 + 21);
            let fast = forward(&x, &wt, &b, &g);
            let slow = naive(&x, &wt, &b, &g);
            for (a, c) in fast.iter().zip(&slow) {
                assert!((a - c).abs() < 1e-12);
            }
        }
    }
}
