//! U-Net route segmenter and its two-stage training curriculum.

pub mod augment;
pub mod data;
pub mod infer;
pub mod propagate;
pub mod train;
pub mod unet;

pub use augment::{augment, AugmentationConfig, CropSample};
pub use data::{sample_crops, scan_input, ScanSample};
pub use infer::{probability_map, segment};
pub use propagate::{propagate_labels, rotate_image, rotation_angles, tiled_probabilities, PropagationConfig};
pub use train::{stage1_train, stage2_finetune, train_direct, SegTrainConfig, TrainLog};
pub use unet::{UNet, UNetConfig};
