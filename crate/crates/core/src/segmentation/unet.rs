//! Encoder/decoder segmenter with skip connections and a 1-channel sigmoid head.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::numeric::layers::{self, Conv2d, MaxPool2d};
use crate::numeric::weights::{read_weights, write_weights};
use crate::numeric::{Parameterized, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UNetConfig {
    pub depth: usize,
    pub base_channels: usize,
}

impl Default for UNetConfig {
    fn default() -> Self {
        Self { depth: 3, base_channels: 8 }
    }
}

impl UNetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.depth > 6 || self.base_channels == 0 {
            return Err(Error::Config(format!(
                "unet depth {} / channels {} out of range",
                self.depth, self.base_channels
            )));
        }
        Ok(())
    }

    pub fn channels(&self, level: usize) -> usize {
        self.base_channels << level
    }
}

#[derive(Clone, Debug)]
struct DoubleConv {
    a: Conv2d,
    b: Conv2d,
}

impl DoubleConv {
    fn new<R: Rng + ?Sized>(cin: usize, cout: usize, rng: &mut R) -> Self {
        Self {
            a: Conv2d::new(cin, cout, 3, 1, 1, rng),
            b: Conv2d::new(cout, cout, 3, 1, 1, rng),
        }
    }

    /// Returns `(relu(a(x)), relu(b(relu(a(x)))))`.
    fn forward(&self, x: &Tensor) -> Result<(Tensor, Tensor)> {
        let mut h = self.a.forward(x)?;
        layers::relu_inplace(&mut h);
        let mut y = self.b.forward(&h)?;
        layers::relu_inplace(&mut y);
        Ok((h, y))
    }

    fn backward(&mut self, x: &Tensor, h: &Tensor, y: &Tensor, g: &Tensor) -> Result<Tensor> {
        // Post-activation values are positive exactly where the pre-activation was.
        let g = layers::relu_backward(y, g)?;
        let g = self.b.backward(h, &g)?;
        let g = layers::relu_backward(h, &g)?;
        self.a.backward(x, &g)
    }
}

/// U-Net of configurable depth. Input is `[1, H, W]` with H and W divisible
/// by `2^depth`; output is one logit per pixel.
#[derive(Clone, Debug)]
pub struct UNet {
    cfg: UNetConfig,
    enc: Vec<DoubleConv>,
    bottleneck: DoubleConv,
    dec: Vec<DoubleConv>,
    head: Conv2d,
}

/// Activations kept from a training forward pass.
pub struct UNetCache {
    input: Tensor,
    enc: Vec<(Tensor, Tensor, Tensor)>,
    bottleneck: (Tensor, Tensor, Tensor),
    dec: Vec<(Tensor, Tensor, Tensor)>,
    logits: Tensor,
}

impl UNetCache {
    pub fn logits(&self) -> &Tensor {
        &self.logits
    }
}

impl UNet {
    /// Convolutions get uniform Glorot weights; the 1x1 head starts at zero
    /// so an untrained model predicts 0.5 everywhere.
    pub fn new<R: Rng + ?Sized>(cfg: UNetConfig, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.depth;
        let mut enc = Vec::with_capacity(d);
        let mut cin = 1;
        for level in 0..d {
            enc.push(DoubleConv::new(cin, cfg.channels(level), rng));
            cin = cfg.channels(level);
        }
        let deep = cfg.channels(d - 1);
        let bottleneck = DoubleConv::new(deep, deep, rng);
        // Stored shallow-to-deep so dec[level] pairs with enc[level].
        let mut dec: Vec<DoubleConv> = Vec::with_capacity(d);
        let mut dec_rev = Vec::with_capacity(d);
        let mut below = deep;
        for level in (0..d).rev() {
            let c = cfg.channels(level);
            dec_rev.push(DoubleConv::new(below + c, c, rng));
            below = c;
        }
        dec.extend(dec_rev.into_iter().rev());
        let head = Conv2d::zeros(cfg.base_channels, 1, 1, 1, 0);
        Ok(Self { cfg, enc, bottleneck, dec, head })
    }

    pub fn config(&self) -> UNetConfig {
        self.cfg
    }

    /// Writes the weights and a JSON header holding the configuration.
    pub fn save<W1: Write, W2: Write>(&self, weights: W1, header: W2) -> Result<()> {
        write_weights(weights, &self.named_params())?;
        serde_json::to_writer_pretty(header, &self.cfg)?;
        Ok(())
    }

    pub fn load<R1: Read, R2: Read>(weights: R1, header: R2) -> Result<Self> {
        let cfg: UNetConfig = serde_json::from_reader(header)?;
        let mut model = Self::new(cfg, &mut crate::rng::stream(0, "unet-load"))?;
        model.load_named_params(&read_weights(weights)?)?;
        Ok(model)
    }

    pub fn check_input(&self, x: &Tensor) -> Result<(usize, usize)> {
        let (c, h, w) = x.chw()?;
        let m = 1usize << self.cfg.depth;
        if c != 1 || h == 0 || w == 0 || h % m != 0 || w % m != 0 {
            return shape_err(format!(
                "unet input must be [1,H,W] with H, W multiples of {}, got {:?}",
                m,
                x.shape()
            ));
        }
        Ok((h, w))
    }

    /// Per-pixel logits, shape `[1, H, W]`.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let pool = MaxPool2d::new(2);
        let mut skips = Vec::with_capacity(self.cfg.depth);
        let mut cur = x.clone();
        for stage in &self.enc {
            let (_, y) = stage.forward(&cur)?;
            cur = pool.forward(&y)?;
            skips.push(y);
        }
        let (_, mut cur) = self.bottleneck.forward(&cur)?;
        for (stage, skip) in self.dec.iter().zip(&skips).rev() {
            let up = layers::upsample2x_forward(&cur)?;
            let cat = layers::concat_forward(&up, skip)?;
            cur = stage.forward(&cat)?.1;
        }
        self.head.forward(&cur)
    }

    /// Per-pixel path probabilities.
    pub fn predict_proba(&self, x: &Tensor) -> Result<Tensor> {
        Ok(layers::sigmoid_forward(&self.forward(x)?))
    }

    pub fn forward_train(&self, x: &Tensor) -> Result<UNetCache> {
        self.check_input(x)?;
        let pool = MaxPool2d::new(2);
        let mut enc = Vec::with_capacity(self.cfg.depth);
        let mut cur = x.clone();
        for stage in &self.enc {
            let (h, y) = stage.forward(&cur)?;
            let next = pool.forward(&y)?;
            enc.push((cur, h, y));
            cur = next;
        }
        let (bh, by) = self.bottleneck.forward(&cur)?;
        let bottleneck = (cur, bh, by.clone());
        let mut cur = by;
        let mut dec_rev = Vec::with_capacity(self.cfg.depth);
        for (stage, (_, _, skip)) in self.dec.iter().zip(&enc).rev() {
            let up = layers::upsample2x_forward(&cur)?;
            let cat = layers::concat_forward(&up, skip)?;
            let (h, y) = stage.forward(&cat)?;
            cur = y.clone();
            dec_rev.push((cat, h, y));
        }
        dec_rev.reverse();
        let logits = self.head.forward(&cur)?;
        Ok(UNetCache {
            input: x.clone(),
            enc,
            bottleneck,
            dec: dec_rev,
            logits,
        })
    }

    /// Accumulates parameter gradients for `d loss / d logits = grad_logits`
    /// and returns the gradient with respect to the input.
    pub fn backward(&mut self, cache: &UNetCache, grad_logits: &Tensor) -> Result<Tensor> {
        if grad_logits.shape() != cache.logits.shape() {
            return shape_err("logit gradient shape mismatch");
        }
        let pool = MaxPool2d::new(2);
        let d = self.cfg.depth;
        let top = &cache.dec[0].2;
        let mut g = self.head.backward(top, grad_logits)?;
        let mut skip_grads: Vec<Option<Tensor>> = vec![None; d];
        for level in 0..d {
            let (cat, h, y) = &cache.dec[level];
            let gcat = self.dec[level].backward(cat, h, y, &g)?;
            let c_up = cat.shape()[0] - self.cfg.channels(level);
            let (gup, gskip) = layers::concat_backward(&gcat, c_up)?;
            skip_grads[level] = Some(gskip);
            g = layers::upsample2x_backward(&gup)?;
        }
        let (bx, bh, by) = &cache.bottleneck;
        g = self.bottleneck.backward(bx, bh, by, &g)?;
        for level in (0..d).rev() {
            let (x, h, y) = &cache.enc[level];
            let mut gy = pool.backward(y, &g)?;
            let gs = skip_grads[level].take().expect("decoder filled every skip");
            for (a, b) in gy.data_mut().iter_mut().zip(gs.data()) {
                *a += b;
            }
            g = self.enc[level].backward(x, h, y, &gy)?;
        }
        debug_assert_eq!(g.shape(), cache.input.shape());
        Ok(g)
    }
}

impl Parameterized for UNet {
    fn visit_params(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        let mut conv = |name: String, c: &Conv2d| {
            f(&format!("{}.weight", name), &c.weight);
            f(&format!("{}.bias", name), &c.bias);
        };
        for (i, s) in self.enc.iter().enumerate() {
            conv(format!("enc{}.conv1", i), &s.a);
            conv(format!("enc{}.conv2", i), &s.b);
        }
        conv("mid.conv1".into(), &self.bottleneck.a);
        conv("mid.conv2".into(), &self.bottleneck.b);
        for (i, s) in self.dec.iter().enumerate() {
            conv(format!("dec{}.conv1", i), &s.a);
            conv(format!("dec{}.conv2", i), &s.b);
        }
        conv("head".into(), &self.head);
    }

    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        let mut conv = |name: String, c: &mut Conv2d| {
            f(&format!("{}.weight", name), &mut c.weight);
            f(&format!("{}.bias", name), &mut c.bias);
        };
        for (i, s) in self.enc.iter_mut().enumerate() {
            conv(format!("enc{}.conv1", i), &mut s.a);
            conv(format!("enc{}.conv2", i), &mut s.b);
        }
        conv("mid.conv1".into(), &mut self.bottleneck.a);
        conv("mid.conv2".into(), &mut self.bottleneck.b);
        for (i, s) in self.dec.iter_mut().enumerate() {
            conv(format!("dec{}.conv1", i), &mut s.a);
            conv(format!("dec{}.conv2", i), &mut s.b);
        }
        conv("head".into(), &mut self.head);
    }
}
