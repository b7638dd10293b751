use serde::{Deserialize, Serialize};

use super::classifier::{evaluate, train_classifier, AudioTrainConfig, ClassifierSpec};
use super::dataset::{build_dataset, record_campaign, CampaignConfig, Split};
use super::features::{FeatureExtractor, Representation};
use crate::error::Result;
use crate::eval::{compare_table, ScoreTable};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RepresentationStudy {
    pub trials: usize,
    pub sample_rate: u32,
    pub campaign: CampaignConfig,
    pub spec: ClassifierSpec,
    pub train: AudioTrainConfig,
}

impl Default for RepresentationStudy {
    fn default() -> Self {
        Self {
            trials: 3,
            sample_rate: 44_100,
            campaign: CampaignConfig::default(),
            spec: ClassifierSpec::default(),
            train: AudioTrainConfig::default(),
        }
    }
}

/// Held-out accuracy of every representation over independent trials, as
/// a table with one row per trial and an average row.
pub fn representation_table(study: &RepresentationStudy, seed: u64) -> Result<ScoreTable> {
    let mut rows = Vec::with_capacity(study.trials);
    for trial in 0..study.trials {
        let tseed = rng::derive_seed(seed, &format!("trial{}", trial));
        let train_rec = record_campaign(study.campaign.train_seconds, &study.campaign, study.sample_rate, rng::derive_seed(tseed, "train"))?;
        let test_rec = record_campaign(study.campaign.test_seconds, &study.campaign, study.sample_rate, rng::derive_seed(tseed, "test"))?;
        let mut accs = Vec::with_capacity(Representation::ALL.len());
        for rep in Representation::ALL {
            let ex = FeatureExtractor::new(rep, study.sample_rate)?;
            let train = build_dataset(&train_rec, &ex, study.campaign.clip_hop, Split::Train)?;
            let test = build_dataset(&test_rec, &ex, study.campaign.clip_hop, Split::Test)?;
            let cfg = AudioTrainConfig { seed: rng::derive_seed(tseed, rep.name()), ..study.train.clone() };
            let (model, _) = train_classifier(&train, &study.spec, &cfg, study.sample_rate)?;
            let acc = evaluate(&model, &test)?.accuracy;
            log::info!("trial {} {} accuracy {:.4}", trial + 1, rep.name(), acc);
            accs.push(acc);
        }
        rows.push((format!("Trial {}", trial + 1), accs));
    }
    let cols: Vec<&str> = Representation::ALL.iter().map(|r| r.name()).collect();
    compare_table("Trial", &cols, rows)
}
