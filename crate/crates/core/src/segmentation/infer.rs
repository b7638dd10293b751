use crate::error::Result;
use crate::numeric::layers::sigmoid;
use crate::numeric::Tensor;

use super::unet::UNet;

/// Per-pixel path probability for a square standardised image.
pub fn probability_map(model: &UNet, image: &[f64], size: usize) -> Result<Vec<f64>> {
    let x = Tensor::from_vec(&[1, size, size], image.to_vec())?;
    Ok(model.forward(&x)?.data().iter().map(|&z| sigmoid(z)).collect())
}

/// Path where the probability is strictly above 0.5.
pub fn segment(model: &UNet, image: &[f64], size: usize) -> Result<Vec<bool>> {
    Ok(probability_map(model, image, size)?.into_iter().map(|p| p > 0.5).collect())
}
