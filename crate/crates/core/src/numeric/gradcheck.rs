//! Central-difference gradient checking.

use super::params::Parameterized;
use crate::error::{Error, Result};

/// Denominator floor for the relative error, so that gradients that are
/// zero on both sides do not divide by zero.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Central differences of `f` at `x` for the coordinates in `indices`.
pub fn central_differences(
    x: &mut [f64],
    indices: &[usize],
    eps: f64,
    mut f: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(indices.len());
    for &i in indices {
        let orig = x[i];
        x[i] = orig + eps;
        let plus = f(x)?;
        x[i] = orig - eps;
        let minus = f(x)?;
        x[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Numeric(format!("non-finite objective at coordinate {}", i)));
        }
        out.push((plus - minus) / (2.0 * eps));
    }
    Ok(out)
}

/// Compares the analytic parameter gradient of `model` against central
/// differences and returns the maximum relative error.
///
/// `objective` evaluates the scalar loss; `backward` must zero and then fill
/// the parameter gradients for the same loss. When `indices` is `None` every
/// parameter is checked.
pub fn gradcheck<M: Parameterized>(
    model: &mut M,
    eps: f64,
    indices: Option<&[usize]>,
    objective: impl Fn(&M) -> Result<f64>,
    backward: impl Fn(&mut M) -> Result<()>,
) -> Result<f64> {
    model.zero_grads();
    backward(model)?;
    let analytic = model.flat_grads();
    if analytic.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite analytic gradient".into()));
    }
    let all: Vec<usize>;
    let idx = match indices {
        Some(i) => i,
        None => {
            all = (0..analytic.len()).collect();
            &all
        }
    };
    let mut params = model.flat_params();
    let numeric = {
        let m = &mut *model;
        central_differences(&mut params, idx, eps, |p| {
            m.set_flat_params(p)?;
            objective(m)
        })?
    };
    model.set_flat_params(&params)?;
    Ok(idx
        .iter()
        .zip(&numeric)
        .map(|(&i, &n)| relative_error(analytic[i], n))
        .fold(0.0, f64::max))
}
