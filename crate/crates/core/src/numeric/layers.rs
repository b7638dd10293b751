//! Layer primitives with explicit forward and backward passes.
//!
//! Every layer works on a single sample. Backward functions take the layer
//! input that was seen during the forward pass (not a cached intermediate),
//! return the gradient with respect to that input and accumulate parameter
//! gradients into the parameter tensors.

use rand::Rng;

use super::direct_conv;
use super::tensor::Tensor;
use crate::error::{shape_err, Result};

/// `c[m,n] = a[m,k] * b[k,n] + beta * c`, with optional transposed storage.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_trans: bool,
    b: &[f64],
    b_trans: bool,
    beta: f64,
    c: &mut [f64],
) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_trans { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if b_trans { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: slice lengths checked above; strides describe in-bounds layouts.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn glorot<R: Rng + ?Sized>(rng: &mut R, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-limit..=limit)).collect()
}

/// 2-D convolution, weights `[out, in, k, k]`.
#[derive(Clone, Debug)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Conv2d {
    pub fn new<R: Rng + ?Sized>(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        rng: &mut R,
    ) -> Self {
        let kk = kernel * kernel;
        let w = glorot(
            rng,
            out_channels * in_channels * kk,
            in_channels * kk,
            out_channels * kk,
        );
        Self::with_weights(in_channels, out_channels, kernel, stride, pad, w)
    }

    /// Convolution with all-zero weights and bias.
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, pad: usize) -> Self {
        let n = out_channels * in_channels * kernel * kernel;
        Self::with_weights(in_channels, out_channels, kernel, stride, pad, vec![0.0; n])
    }

    fn with_weights(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        w: Vec<f64>,
    ) -> Self {
        let weight = Tensor::param(&[out_channels, in_channels, kernel, kernel], w)
            .expect("weight length matches shape");
        let bias = Tensor::param(&[out_channels], vec![0.0; out_channels]).expect("bias shape");
        Self {
            in_channels,
            out_channels,
            kernel,
            stride: stride.max(1),
            pad,
            weight,
            bias,
        }
    }

    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let hp = h + 2 * self.pad;
        let wp = w + 2 * self.pad;
        if hp < self.kernel || wp < self.kernel {
            return shape_err(format!(
                "input {}x{} too small for kernel {} with pad {}",
                h, w, self.kernel, self.pad
            ));
        }
        Ok((
            (hp - self.kernel) / self.stride + 1,
            (wp - self.kernel) / self.stride + 1,
        ))
    }

    fn check_input(&self, x: &Tensor) -> Result<(usize, usize, usize, usize)> {
        let (c, h, w) = x.chw()?;
        if c != self.in_channels {
            return shape_err(format!(
                "conv expects {} input channels, got {}",
                self.in_channels, c
            ));
        }
        let (ho, wo) = self.output_size(h, w)?;
        Ok((h, w, ho, wo))
    }

    fn geom(&self, h: usize, w: usize) -> direct_conv::Geom {
        direct_conv::Geom {
            cin: self.in_channels,
            cout: self.out_channels,
            h,
            w,
            k: self.kernel,
            pad: self.pad,
        }
    }

    fn is_pointwise(&self) -> bool {
        self.kernel == 1 && self.stride == 1 && self.pad == 0
    }

    fn im2col(&self, x: &[f64], h: usize, w: usize, ho: usize, wo: usize) -> Vec<f64> {
        let (k, s, p) = (self.kernel, self.stride, self.pad as isize);
        let npix = ho * wo;
        let mut col = vec![0.0; self.in_channels * k * k * npix];
        for ci in 0..self.in_channels {
            let plane = &x[ci * h * w..(ci + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = ((ci * k + ky) * k + kx) * npix;
                    let dst_row = &mut col[row..row + npix];
                    for oy in 0..ho {
                        let iy = (oy * s) as isize + ky as isize - p;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                        let dst = &mut dst_row[oy * wo..(oy + 1) * wo];
                        if s == 1 {
                            // valid ox range: 0 <= ox + kx - p < w
                            let off = kx as isize - p;
                            let lo = (-off).max(0) as usize;
                            let hi = ((w as isize - off).min(wo as isize)).max(0) as usize;
                            if lo < hi {
                                let a = (lo as isize + off) as usize;
                                dst[lo..hi].copy_from_slice(&src[a..a + (hi - lo)]);
                            }
                        } else {
                            for (ox, d) in dst.iter_mut().enumerate() {
                                let ix = (ox * s) as isize + kx as isize - p;
                                if ix >= 0 && ix < w as isize {
                                    *d = src[ix as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
        col
    }

    fn col2im(&self, col: &[f64], h: usize, w: usize, ho: usize, wo: usize) -> Vec<f64> {
        let (k, s, p) = (self.kernel, self.stride, self.pad as isize);
        let npix = ho * wo;
        let mut dx = vec![0.0; self.in_channels * h * w];
        for ci in 0..self.in_channels {
            let plane = &mut dx[ci * h * w..(ci + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = ((ci * k + ky) * k + kx) * npix;
                    let src_row = &col[row..row + npix];
                    for oy in 0..ho {
                        let iy = (oy * s) as isize + ky as isize - p;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                        let src = &src_row[oy * wo..(oy + 1) * wo];
                        if s == 1 {
                            let off = kx as isize - p;
                            let lo = (-off).max(0) as usize;
                            let hi = ((w as isize - off).min(wo as isize)).max(0) as usize;
                            if lo < hi {
                                let a = (lo as isize + off) as usize;
                                for (d, v) in dst[a..a + (hi - lo)].iter_mut().zip(&src[lo..hi]) {
                                    *d += v;
                                }
                            }
                        } else {
                            for (ox, v) in src.iter().enumerate() {
                                let ix = (ox * s) as isize + kx as isize - p;
                                if ix >= 0 && ix < w as isize {
                                    dst[ix as usize] += v;
                                }
                            }
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (h, w, ho, wo) = self.check_input(x)?;
        let npix = ho * wo;
        let kdim = self.in_channels * self.kernel * self.kernel;
        let mut out = vec![0.0; self.out_channels * npix];
        for (co, row) in out.chunks_mut(npix).enumerate() {
            row.iter_mut().for_each(|v| *v = self.bias.data()[co]);
        }
        if self.stride == 1 && !self.is_pointwise() {
            let out = direct_conv::forward(x.data(), self.weight.data(), self.bias.data(), &self.geom(h, w));
            return Tensor::from_vec(&[self.out_channels, ho, wo], out);
        }
        if self.is_pointwise() {
            gemm(self.out_channels, kdim, npix, self.weight.data(), false, x.data(), false, 1.0, &mut out);
        } else {
            let col = self.im2col(x.data(), h, w, ho, wo);
            gemm(self.out_channels, kdim, npix, self.weight.data(), false, &col, false, 1.0, &mut out);
        }
        Tensor::from_vec(&[self.out_channels, ho, wo], out)
    }

    pub fn backward(&mut self, x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        let (h, w, ho, wo) = self.check_input(x)?;
        if grad_out.shape() != [self.out_channels, ho, wo] {
            return shape_err(format!(
                "conv grad shape {:?} != [{}, {}, {}]",
                grad_out.shape(),
                self.out_channels,
                ho,
                wo
            ));
        }
        let npix = ho * wo;
        let kdim = self.in_channels * self.kernel * self.kernel;
        let g = grad_out.data();
        {
            let gb = self.bias.grad_mut();
            for (co, row) in g.chunks(npix).enumerate() {
                gb[co] += row.iter().sum::<f64>();
            }
        }
        if self.stride == 1 && !self.is_pointwise() {
            let geom = self.geom(h, w);
            direct_conv::weight_grad(x.data(), g, &geom, self.weight.grad_mut());
            let dx = direct_conv::input_grad(g, self.weight.data(), &geom);
            return Tensor::from_vec(x.shape(), dx);
        }
        let owned_col;
        let col: &[f64] = if self.is_pointwise() {
            x.data()
        } else {
            owned_col = self.im2col(x.data(), h, w, ho, wo);
            &owned_col
        };
        gemm(self.out_channels, npix, kdim, g, false, col, true, 1.0, self.weight.grad_mut());
        let mut dcol = vec![0.0; kdim * npix];
        gemm(kdim, self.out_channels, npix, self.weight.data(), true, g, false, 0.0, &mut dcol);
        let dx = if self.is_pointwise() {
            dcol
        } else {
            self.col2im(&dcol, h, w, ho, wo)
        };
        Tensor::from_vec(x.shape(), dx)
    }
}

/// Non-overlapping max pooling with window and stride `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxPool2d {
    pub k: usize,
}

impl MaxPool2d {
    pub fn new(k: usize) -> Self {
        Self { k: k.max(1) }
    }

    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        if h < self.k || w < self.k {
            return shape_err(format!("input {}x{} smaller than pool {}", h, w, self.k));
        }
        Ok((h / self.k, w / self.k))
    }

    fn argmax(&self, plane: &[f64], w: usize, oy: usize, ox: usize) -> usize {
        let mut best = (oy * self.k) * w + ox * self.k;
        for dy in 0..self.k {
            for dx in 0..self.k {
                let i = (oy * self.k + dy) * w + ox * self.k + dx;
                if plane[i] > plane[best] {
                    best = i;
                }
            }
        }
        best
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.chw()?;
        let (ho, wo) = self.output_size(h, w)?;
        let mut out = Vec::with_capacity(c * ho * wo);
        for plane in x.data().chunks(h * w) {
            for oy in 0..ho {
                for ox in 0..wo {
                    out.push(plane[self.argmax(plane, w, oy, ox)]);
                }
            }
        }
        Tensor::from_vec(&[c, ho, wo], out)
    }

    pub fn backward(&self, x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        let (c, h, w) = x.chw()?;
        let (ho, wo) = self.output_size(h, w)?;
        if grad_out.shape() != [c, ho, wo] {
            return shape_err("maxpool grad shape mismatch");
        }
        let mut dx = vec![0.0; x.len()];
        for ci in 0..c {
            let plane = &x.data()[ci * h * w..(ci + 1) * h * w];
            let g = &grad_out.data()[ci * ho * wo..(ci + 1) * ho * wo];
            for oy in 0..ho {
                for ox in 0..wo {
                    let i = self.argmax(plane, w, oy, ox);
                    dx[ci * h * w + i] += g[oy * wo + ox];
                }
            }
        }
        Tensor::from_vec(x.shape(), dx)
    }
}

pub fn relu_forward(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if !x.same_shape(grad_out) {
        return shape_err("relu grad shape mismatch");
    }
    let data = x
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::from_vec(x.shape(), data)
}

/// In-place ReLU, for inference paths that do not need the pre-activation.
pub fn relu_inplace(x: &mut Tensor) {
    x.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid_forward(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| sigmoid(v)).collect();
    Tensor::from_vec(x.shape(), data).expect("same shape")
}

pub fn sigmoid_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if !x.same_shape(grad_out) {
        return shape_err("sigmoid grad shape mismatch");
    }
    let data = x
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&v, &g)| {
            let s = sigmoid(v);
            g * s * (1.0 - s)
        })
        .collect();
    Tensor::from_vec(x.shape(), data)
}

/// Numerically stable softmax over a flat vector.
pub fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn softmax_forward(x: &Tensor) -> Tensor {
    Tensor::from_vec(x.shape(), softmax(x.data())).expect("same shape")
}

pub fn softmax_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if !x.same_shape(grad_out) {
        return shape_err("softmax grad shape mismatch");
    }
    let y = softmax(x.data());
    let dot: f64 = y.iter().zip(grad_out.data()).map(|(a, b)| a * b).sum();
    let data = y
        .iter()
        .zip(grad_out.data())
        .map(|(&yi, &gi)| yi * (gi - dot))
        .collect();
    Tensor::from_vec(x.shape(), data)
}

/// Fully connected layer; the input is flattened.
#[derive(Clone, Debug)]
pub struct Dense {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(in_features: usize, out_features: usize, rng: &mut R) -> Self {
        let w = glorot(rng, in_features * out_features, in_features, out_features);
        Self {
            in_features,
            out_features,
            weight: Tensor::param(&[out_features, in_features], w).expect("dense weight"),
            bias: Tensor::param(&[out_features], vec![0.0; out_features]).expect("dense bias"),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        if x.len() != self.in_features {
            return shape_err(format!(
                "dense expects {} inputs, got {}",
                self.in_features,
                x.len()
            ));
        }
        let mut out = self.bias.data().to_vec();
        gemm(self.out_features, self.in_features, 1, self.weight.data(), false, x.data(), false, 1.0, &mut out);
        Tensor::from_vec(&[self.out_features], out)
    }

    pub fn backward(&mut self, x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        if x.len() != self.in_features || grad_out.len() != self.out_features {
            return shape_err("dense grad shape mismatch");
        }
        let g = grad_out.data();
        for (b, gi) in self.bias.grad_mut().iter_mut().zip(g) {
            *b += gi;
        }
        gemm(self.out_features, 1, self.in_features, g, false, x.data(), false, 1.0, self.weight.grad_mut());
        let mut dx = vec![0.0; self.in_features];
        gemm(self.in_features, self.out_features, 1, self.weight.data(), true, g, false, 0.0, &mut dx);
        Tensor::from_vec(x.shape(), dx)
    }
}

/// Nearest-neighbour 2x upsampling of a `[C,H,W]` tensor.
pub fn upsample2x_forward(x: &Tensor) -> Result<Tensor> {
    let (c, h, w) = x.chw()?;
    let (h2, w2) = (2 * h, 2 * w);
    let mut out = vec![0.0; c * h2 * w2];
    for ci in 0..c {
        let src = &x.data()[ci * h * w..(ci + 1) * h * w];
        let dst = &mut out[ci * h2 * w2..(ci + 1) * h2 * w2];
        for y in 0..h2 {
            let srow = &src[(y / 2) * w..(y / 2 + 1) * w];
            let drow = &mut dst[y * w2..(y + 1) * w2];
            for (x2, d) in drow.iter_mut().enumerate() {
                *d = srow[x2 / 2];
            }
        }
    }
    Tensor::from_vec(&[c, h2, w2], out)
}

pub fn upsample2x_backward(grad_out: &Tensor) -> Result<Tensor> {
    let (c, h2, w2) = grad_out.chw()?;
    if h2 % 2 != 0 || w2 % 2 != 0 {
        return shape_err("upsample grad must have even spatial size");
    }
    let (h, w) = (h2 / 2, w2 / 2);
    let mut dx = vec![0.0; c * h * w];
    for ci in 0..c {
        let g = &grad_out.data()[ci * h2 * w2..(ci + 1) * h2 * w2];
        let d = &mut dx[ci * h * w..(ci + 1) * h * w];
        for y in 0..h2 {
            for x2 in 0..w2 {
                d[(y / 2) * w + x2 / 2] += g[y * w2 + x2];
            }
        }
    }
    Tensor::from_vec(&[c, h, w], dx)
}

/// Channel concatenation of two `[C,H,W]` tensors with equal spatial size.
pub fn concat_forward(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (ca, ha, wa) = a.chw()?;
    let (cb, hb, wb) = b.chw()?;
    if (ha, wa) != (hb, wb) {
        return shape_err(format!(
            "concat spatial mismatch: {}x{} vs {}x{}",
            ha, wa, hb, wb
        ));
    }
    let mut data = Vec::with_capacity(a.len() + b.len());
    data.extend_from_slice(a.data());
    data.extend_from_slice(b.data());
    Tensor::from_vec(&[ca + cb, ha, wa], data)
}

/// Splits a concat gradient back into the two input gradients.
pub fn concat_backward(grad_out: &Tensor, channels_a: usize) -> Result<(Tensor, Tensor)> {
    let (c, h, w) = grad_out.chw()?;
    if channels_a > c {
        return shape_err("concat split exceeds channel count");
    }
    let (ga, gb) = grad_out.data().split_at(channels_a * h * w);
    Ok((
        Tensor::from_vec(&[channels_a, h, w], ga.to_vec())?,
        Tensor::from_vec(&[c - channels_a, h, w], gb.to_vec())?,
    ))
}
