use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{AudioTrainConfig, CampaignConfig, ClassifierSpec, Representation};
use crate::canvas::{RadarProfile, FOOTPRINT_RADIUS};
use crate::error::{Error, Result};
use crate::fusion::EkfConfig;
use crate::io::open;
use crate::segmentation::{AugmentationConfig, PropagationConfig, SegTrainConfig, UNetConfig};
use crate::simworld::SimConfig;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DspSection {
    /// Time-frequency image fed to the terrain classifier.
    pub representation: Representation,
}

impl Default for DspSection {
    fn default() -> Self {
        Self { representation: Representation::Mel }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AudioSection {
    pub campaign: CampaignConfig,
    pub classifier: ClassifierSpec,
    pub train: AudioTrainConfig,
    /// Trials of the representation comparison table.
    pub table_trials: usize,
}

impl Default for AudioSection {
    fn default() -> Self {
        Self {
            campaign: CampaignConfig::default(),
            classifier: ClassifierSpec::default(),
            train: AudioTrainConfig::default(),
            table_trials: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CanvasSection {
    pub footprint_radius: f64,
}

impl Default for CanvasSection {
    fn default() -> Self {
        Self { footprint_radius: FOOTPRINT_RADIUS }
    }
}

/// Whole-scan baseline. It runs as many optimizer steps as both curriculum
/// stages together.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectSection {
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for DirectSection {
    fn default() -> Self {
        Self { batch_size: 1, learning_rate: 2e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationSection {
    pub unet: UNetConfig,
    pub stage1: SegTrainConfig,
    pub stage1_augmentation: AugmentationConfig,
    pub propagation: PropagationConfig,
    pub stage2: SegTrainConfig,
    pub stage2_augmentation: AugmentationConfig,
    pub direct: DirectSection,
    /// One training and one held-out world per profile.
    pub profiles: Vec<RadarProfile>,
}

impl Default for SegmentationSection {
    fn default() -> Self {
        Self {
            unet: UNetConfig::default(),
            stage1: SegTrainConfig { steps: 300, batch_size: 8, learning_rate: 2e-3, crop_size: 64, seed: 7 },
            stage1_augmentation: AugmentationConfig::default(),
            propagation: PropagationConfig::default(),
            stage2: SegTrainConfig { steps: 200, batch_size: 1, learning_rate: 3e-4, crop_size: 64, seed: 8 },
            stage2_augmentation: AugmentationConfig::dihedral(),
            direct: DirectSection::default(),
            profiles: vec![RadarProfile::Short, RadarProfile::Long],
        }
    }
}

/// Pass thresholds checked at the end of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    pub min_pixel_accuracy: f64,
    pub min_iou: f64,
    pub min_side_recall: f64,
    pub max_grass_false_positive: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { min_pixel_accuracy: 0.98, min_iou: 0.40, min_side_recall: 0.5, max_grass_false_positive: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub output_dir: String,
    pub simworld: SimConfig,
    pub dsp: DspSection,
    pub audio: AudioSection,
    pub fusion: EkfConfig,
    pub canvas: CanvasSection,
    pub segmentation: SegmentationSection,
    pub eval: EvalSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            output_dir: "out".into(),
            simworld: SimConfig::default(),
            dsp: DspSection::default(),
            audio: AudioSection::default(),
            fusion: EkfConfig::default(),
            canvas: CanvasSection::default(),
            segmentation: SegmentationSection::default(),
            eval: EvalSection::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_reader(open(path)?)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e)))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.simworld.validate()?;
        self.fusion.validate()?;
        let s = &self.segmentation;
        s.unet.validate()?;
        s.stage1.validate()?;
        s.stage2.validate()?;
        s.stage1_augmentation.validate()?;
        s.stage2_augmentation.validate()?;
        s.propagation.validate()?;
        if s.profiles.is_empty() {
            return Err(Error::Config("at least one radar profile is needed".into()));
        }
        if s.direct.batch_size == 0 || !(s.direct.learning_rate > 0.0) {
            return Err(Error::Config("direct baseline needs a positive batch size and learning rate".into()));
        }
        if !(self.canvas.footprint_radius > 0.0) {
            return Err(Error::Config("footprint radius must be positive".into()));
        }
        if self.audio.table_trials == 0 {
            return Err(Error::Config("table_trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Copy with every component seed derived from the global seed.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.simworld.seed = c.seed;
        c.audio.train.seed = crate::rng::derive_seed(c.seed, "audio-classifier");
        c.segmentation.stage1.seed = crate::rng::derive_seed(c.seed, "stage1");
        c.segmentation.stage2.seed = crate::rng::derive_seed(c.seed, "stage2");
        c
    }

    /// Simulation settings for one profile, keeping every other field.
    pub fn sim_for(&self, profile: RadarProfile) -> SimConfig {
        let world = if profile == self.simworld.radar_profile { self.simworld.world } else { None };
        SimConfig { radar_profile: profile, world, ..self.simworld.clone() }
    }
}
