use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::dataset::AudioDataset;
use super::features::{FeatureExtractor, Representation, CLIP_SECONDS};
use crate::dsp::AudioClip;
use crate::error::{Error, Result};
use crate::fusion::TerrainPrediction;
use crate::numeric::layers::softmax;
use crate::numeric::weights::{read_weights, write_weights};
use crate::numeric::{Adam, LayerSpec, Parameterized, Sequential, Tensor};
use crate::rng;
use crate::terrain::TerrainClass;

/// Convolutional stack: per entry a 3x3 convolution, ReLU and 2x2 max pool,
/// then a dense layer and softmax over the terrain classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierSpec {
    pub conv_channels: Vec<usize>,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self { conv_channels: vec![8, 16, 16] }
    }
}

impl ClassifierSpec {
    pub fn layers(&self) -> Vec<LayerSpec> {
        let mut v = Vec::new();
        for &c in &self.conv_channels {
            v.push(LayerSpec::Conv2d { out_channels: c, kernel: 3, stride: 1, pad: 1 });
            v.push(LayerSpec::Relu);
            v.push(LayerSpec::MaxPool2d { k: 2 });
        }
        v.push(LayerSpec::Dense { out_features: TerrainClass::COUNT });
        v.push(LayerSpec::Softmax);
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AudioTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AudioTrainConfig {
    fn default() -> Self {
        Self { epochs: 2, batch_size: 16, learning_rate: 2e-3, seed: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

/// Header stored beside the weights of a saved classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierHeader {
    pub representation: Representation,
    pub sample_rate: u32,
    pub input_shape: [usize; 3],
    pub classes: Vec<TerrainClass>,
    pub spec: ClassifierSpec,
}

#[derive(Clone, Debug)]
pub struct AudioClassifier {
    pub spec: ClassifierSpec,
    pub net: Sequential,
    pub extractor: FeatureExtractor,
}

/// Index of the largest value; the earliest wins ties.
fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

impl AudioClassifier {
    pub fn new(representation: Representation, sample_rate: u32, spec: ClassifierSpec, seed: u64) -> Result<Self> {
        let extractor = FeatureExtractor::new(representation, sample_rate)?;
        let mut r = rng::stream(seed, "audio-init");
        let net = Sequential::new(extractor.input_shape()?, &spec.layers(), &mut r)?;
        Ok(Self { spec, net, extractor })
    }

    pub fn representation(&self) -> Representation {
        self.extractor.representation
    }

    /// Class probabilities for a standardised image.
    pub fn probabilities(&self, image: &Tensor) -> Result<[f64; TerrainClass::COUNT]> {
        let out = self.net.forward(image)?;
        let mut p = [0.0; TerrainClass::COUNT];
        p.copy_from_slice(out.data());
        Ok(p)
    }

    pub fn classify_image(&self, image: &Tensor) -> Result<TerrainClass> {
        TerrainClass::from_index(argmax(&self.probabilities(image)?))
    }

    /// Classifies the first 0.5 s of `clip`.
    pub fn predict(&self, clip: &AudioClip, timestamp: f64) -> Result<TerrainPrediction> {
        let n = self.extractor.clip_samples();
        if clip.len() < n {
            return Err(Error::Domain(format!("clip of {} samples is shorter than {} s", clip.len(), CLIP_SECONDS)));
        }
        let window = if clip.len() == n { clip.clone() } else { clip.window(0, n)? };
        let probabilities = self.probabilities(&self.extractor.tensor(&window)?)?;
        Ok(TerrainPrediction { timestamp, terrain: TerrainClass::from_index(argmax(&probabilities))?, probabilities })
    }

    /// One prediction per consecutive 0.5 s window, stamped at the window
    /// centre relative to `start`.
    pub fn classify_stream(&self, stream: &AudioClip, start: f64) -> Result<Vec<TerrainPrediction>> {
        let n = self.extractor.clip_samples();
        let count = stream.len() / n;
        (0..count)
            .map(|i| self.predict(&stream.window(i * n, n)?, start + (i as f64 + 0.5) * CLIP_SECONDS))
            .collect()
    }

    pub fn header(&self) -> Result<ClassifierHeader> {
        Ok(ClassifierHeader {
            representation: self.representation(),
            sample_rate: self.extractor.sample_rate,
            input_shape: self.extractor.input_shape()?,
            classes: TerrainClass::ALL.to_vec(),
            spec: self.spec.clone(),
        })
    }

    pub fn save<W1: Write, W2: Write>(&self, weights: W1, header: W2) -> Result<()> {
        write_weights(weights, &self.net.named_params())?;
        serde_json::to_writer_pretty(header, &self.header()?)?;
        Ok(())
    }

    pub fn load<R1: Read, R2: Read>(weights: R1, header: R2) -> Result<Self> {
        let h: ClassifierHeader = serde_json::from_reader(header)?;
        if h.classes != TerrainClass::ALL {
            return Err(Error::Format("classifier class order differs from grass, gravel, asphalt".into()));
        }
        let mut model = Self::new(h.representation, h.sample_rate, h.spec, 0)?;
        if model.extractor.input_shape()? != h.input_shape {
            return Err(Error::Format("classifier input shape does not match its representation".into()));
        }
        model.net.load_named_params(&read_weights(weights)?)?;
        Ok(model)
    }
}

/// Minibatch training with Adam on softmax cross entropy.
pub fn train_classifier(
    dataset: &AudioDataset,
    spec: &ClassifierSpec,
    cfg: &AudioTrainConfig,
    sample_rate: u32,
) -> Result<(AudioClassifier, Vec<EpochLog>)> {
    if dataset.is_empty() {
        return Err(Error::Dataset("empty training set".into()));
    }
    if cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::Config("batch size and learning rate must be positive".into()));
    }
    let mut model = AudioClassifier::new(dataset.representation, sample_rate, spec.clone(), cfg.seed)?;
    let mut opt = Adam::new(cfg.learning_rate);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut shuffle = rng::stream(cfg.seed, "audio-shuffle");
    let last = model.net.num_layers() - 1;
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            model.net.zero_grads();
            for &i in batch {
                let (logits, inputs) = model.net.forward_train(&dataset.images[i], last)?;
                let p = softmax(logits.data());
                let t = dataset.labels[i].index();
                let l = -p[t].max(f64::MIN_POSITIVE).ln();
                if !l.is_finite() {
                    return Err(Error::Numeric(format!("non-finite loss in epoch {}", epoch)));
                }
                loss_sum += l;
                correct += usize::from(argmax(&p) == t);
                let scale = 1.0 / batch.len() as f64;
                let g: Vec<f64> = p.iter().enumerate().map(|(k, &pk)| (pk - f64::from(u8::from(k == t))) * scale).collect();
                model.net.backward(&inputs, Tensor::from_vec(logits.shape(), g)?)?;
            }
            opt.update(&mut model.net)?;
        }
        let n = dataset.len() as f64;
        log.push(EpochLog { epoch, loss: loss_sum / n, accuracy: correct as f64 / n });
        log::info!("audio epoch {} loss {:.4} acc {:.4}", epoch, loss_sum / n, correct as f64 / n);
    }
    Ok((model, log))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioEvaluation {
    pub accuracy: f64,
    /// `confusion[truth][predicted]` in `TerrainClass::ALL` order.
    pub confusion: [[u64; TerrainClass::COUNT]; TerrainClass::COUNT],
}

pub fn score_predictions(truth: &[TerrainClass], predicted: &[TerrainClass]) -> Result<AudioEvaluation> {
    if truth.len() != predicted.len() || truth.is_empty() {
        return Err(Error::Dataset(format!("{} labels but {} predictions", truth.len(), predicted.len())));
    }
    let mut confusion = [[0u64; TerrainClass::COUNT]; TerrainClass::COUNT];
    for (t, p) in truth.iter().zip(predicted) {
        confusion[t.index()][p.index()] += 1;
    }
    let correct: u64 = (0..TerrainClass::COUNT).map(|i| confusion[i][i]).sum();
    Ok(AudioEvaluation { accuracy: correct as f64 / truth.len() as f64, confusion })
}

pub fn evaluate(model: &AudioClassifier, dataset: &AudioDataset) -> Result<AudioEvaluation> {
    if dataset.is_empty() {
        return Err(Error::Dataset("empty evaluation set".into()));
    }
    if dataset.representation != model.representation() {
        return Err(Error::Dataset("dataset and model use different representations".into()));
    }
    let predicted = dataset.images.iter().map(|x| model.classify_image(x)).collect::<Result<Vec<_>>>()?;
    score_predictions(&dataset.labels, &predicted)
}
