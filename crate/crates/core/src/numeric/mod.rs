//! Tensors, layers with hand-written gradients, losses and training helpers.

mod direct_conv;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod optim;
pub mod params;
pub mod sequential;
pub mod tensor;
pub mod weights;

pub use optim::Adam;
pub use params::Parameterized;
pub use sequential::{LayerSpec, Sequential};
pub use tensor::Tensor;
