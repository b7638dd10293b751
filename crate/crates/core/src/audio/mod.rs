//! Terrain classification from wheel audio.

pub mod classifier;
pub mod dataset;
pub mod features;
pub mod table;

pub use classifier::{
    evaluate, score_predictions, train_classifier, AudioClassifier, AudioEvaluation, AudioTrainConfig, ClassifierSpec,
    EpochLog,
};
pub use dataset::{build_dataset, record_campaign, AudioDataset, CampaignConfig, Recording, Split};
pub use features::{standardize, FeatureExtractor, Representation, CLIP_SECONDS};
pub use table::{representation_table, RepresentationStudy};
