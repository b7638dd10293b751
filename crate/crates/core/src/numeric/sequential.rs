use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{self, Conv2d, Dense, MaxPool2d};
use super::params::Parameterized;
use super::tensor::Tensor;
use crate::error::{shape_err, Result};

/// Declarative description of one layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv2d { out_channels: usize, kernel: usize, stride: usize, pad: usize },
    MaxPool2d { k: usize },
    Relu,
    Dense { out_features: usize },
    Softmax,
    Sigmoid,
    Upsample2x,
    /// Channel concatenation with an earlier feature map. Only meaningful in
    /// encoder/decoder graphs; a plain stack rejects it.
    Concat,
}

#[derive(Clone, Debug)]
enum Layer {
    Conv(Conv2d),
    Pool(MaxPool2d),
    Relu,
    Dense(Dense),
    Softmax,
    Sigmoid,
    Upsample,
}

/// A straight stack of layers applied to one `[C,H,W]` sample at a time.
#[derive(Clone, Debug)]
pub struct Sequential {
    input_shape: [usize; 3],
    specs: Vec<LayerSpec>,
    layers: Vec<Layer>,
    output_len: usize,
}

impl Sequential {
    /// Builds the stack, validating shapes layer by layer.
    pub fn new<R: Rng + ?Sized>(input_shape: [usize; 3], specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        let [mut c, mut h, mut w] = input_shape;
        if specs.is_empty() || c * h * w == 0 {
            return shape_err("empty network or input");
        }
        let mut flat: Option<usize> = None;
        let mut layers = Vec::with_capacity(specs.len());
        for (i, spec) in specs.iter().enumerate() {
            let layer = match *spec {
                LayerSpec::Conv2d { out_channels, kernel, stride, pad } => {
                    if flat.is_some() {
                        return shape_err(format!("layer {}: conv after dense", i));
                    }
                    if kernel == 0 || stride == 0 || out_channels == 0 {
                        return shape_err(format!("layer {}: zero-sized conv", i));
                    }
                    let conv = Conv2d::new(c, out_channels, kernel, stride, pad, rng);
                    let (oh, ow) = conv.output_size(h, w)?;
                    c = out_channels;
                    h = oh;
                    w = ow;
                    Layer::Conv(conv)
                }
                LayerSpec::MaxPool2d { k } => {
                    if flat.is_some() {
                        return shape_err(format!("layer {}: pool after dense", i));
                    }
                    if k == 0 {
                        return shape_err(format!("layer {}: zero pool window", i));
                    }
                    let p = MaxPool2d::new(k);
                    let (oh, ow) = p.output_size(h, w)?;
                    h = oh;
                    w = ow;
                    Layer::Pool(p)
                }
                LayerSpec::Upsample2x => {
                    if flat.is_some() {
                        return shape_err(format!("layer {}: upsample after dense", i));
                    }
                    h *= 2;
                    w *= 2;
                    Layer::Upsample
                }
                LayerSpec::Dense { out_features } => {
                    let n_in = flat.unwrap_or(c * h * w);
                    if n_in == 0 || out_features == 0 {
                        return shape_err(format!("layer {}: empty dense layer", i));
                    }
                    flat = Some(out_features);
                    Layer::Dense(Dense::new(n_in, out_features, rng))
                }
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::Softmax => Layer::Softmax,
                LayerSpec::Sigmoid => Layer::Sigmoid,
                LayerSpec::Concat => {
                    return shape_err(format!("layer {}: concat has no skip source in a plain stack", i))
                }
            };
            layers.push(layer);
        }
        Ok(Self {
            input_shape,
            specs: specs.to_vec(),
            layers,
            output_len: flat.unwrap_or(c * h * w),
        })
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape() != self.input_shape {
            return shape_err(format!("expected input {:?}, got {:?}", self.input_shape, x.shape()));
        }
        Ok(())
    }

    fn apply(layer: &Layer, x: &Tensor) -> Result<Tensor> {
        match layer {
            Layer::Conv(c) => c.forward(x),
            Layer::Pool(p) => p.forward(x),
            Layer::Relu => Ok(layers::relu_forward(x)),
            Layer::Dense(d) => d.forward(x),
            Layer::Softmax => Ok(layers::softmax_forward(x)),
            Layer::Sigmoid => Ok(layers::sigmoid_forward(x)),
            Layer::Upsample => layers::upsample2x_forward(x),
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut cur = Self::apply(&self.layers[0], x)?;
        for layer in &self.layers[1..] {
            cur = Self::apply(layer, &cur)?;
        }
        Ok(cur)
    }

    /// Forward pass through the first `end` layers, keeping every layer input
    /// for a later backward pass. Returns `(output, inputs)`.
    pub fn forward_train(&self, x: &Tensor, end: usize) -> Result<(Tensor, Vec<Tensor>)> {
        self.check_input(x)?;
        let end = end.min(self.layers.len());
        let mut inputs = Vec::with_capacity(end);
        let mut cur = x.clone();
        for layer in &self.layers[..end] {
            let next = Self::apply(layer, &cur)?;
            inputs.push(cur);
            cur = next;
        }
        Ok((cur, inputs))
    }

    /// Backpropagates `grad` through the layers whose inputs were recorded by
    /// [`forward_train`](Self::forward_train), accumulating parameter
    /// gradients. Returns the gradient with respect to the network input.
    pub fn backward(&mut self, inputs: &[Tensor], grad: Tensor) -> Result<Tensor> {
        if inputs.len() > self.layers.len() {
            return shape_err("more recorded inputs than layers");
        }
        let mut g = grad;
        for (layer, x) in self.layers[..inputs.len()].iter_mut().zip(inputs).rev() {
            g = match layer {
                Layer::Conv(c) => c.backward(x, &g)?,
                Layer::Pool(p) => p.backward(x, &g)?,
                Layer::Relu => layers::relu_backward(x, &g)?,
                Layer::Dense(d) => d.backward(x, &g)?,
                Layer::Softmax => layers::softmax_backward(x, &g)?,
                Layer::Sigmoid => layers::sigmoid_backward(x, &g)?,
                Layer::Upsample => layers::upsample2x_backward(&g)?,
            };
        }
        Ok(g)
    }
}

impl Parameterized for Sequential {
    fn visit_params(&self, f: &mut dyn FnMut(&str, &Tensor)) {
        for (i, layer) in self.layers.iter().enumerate() {
            let (w, b) = match layer {
                Layer::Conv(c) => (&c.weight, &c.bias),
                Layer::Dense(d) => (&d.weight, &d.bias),
                _ => continue,
            };
            f(&format!("layer{}.weight", i), w);
            f(&format!("layer{}.bias", i), b);
        }
    }

    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor)) {
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let (w, b) = match layer {
                Layer::Conv(c) => (&mut c.weight, &mut c.bias),
                Layer::Dense(d) => (&mut d.weight, &mut d.bias),
                _ => continue,
            };
            f(&format!("layer{}.weight", i), w);
            f(&format!("layer{}.bias", i), b);
        }
    }
}
