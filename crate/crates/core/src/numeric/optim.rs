use super::params::Parameterized;
use crate::error::{Error, Result};

/// Plain gradient descent: `w <- w - lr * g`.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
    if params.len() != grads.len() {
        return Err(Error::Shape(format!(
            "{} parameters but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    for (w, g) in params.iter_mut().zip(grads) {
        *w -= lr * g;
    }
    Ok(())
}

/// Applies one SGD step to every parameter of `model` using its stored
/// gradients. Nothing is modified if any gradient is non-finite.
pub fn sgd_update<M: Parameterized + ?Sized>(model: &mut M, lr: f64) -> Result<()> {
    let mut bad = false;
    model.visit_params(&mut |_, t| {
        if let Some(g) = t.grad() {
            bad |= g.iter().any(|v| !v.is_finite());
        }
    });
    if bad {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    model.visit_params_mut(&mut |_, t| {
        let g = t.grad().map(|g| g.to_vec());
        if let Some(g) = g {
            for (w, gi) in t.data_mut().iter_mut().zip(&g) {
                *w -= lr * gi;
            }
        }
    });
    Ok(())
}

/// Adam with bias correction. Moment buffers follow the model's parameter
/// visiting order and are created on the first step.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Updates every parameter from its stored gradient. Nothing is modified
    /// if any gradient is non-finite.
    pub fn update<M: Parameterized + ?Sized>(&mut self, model: &mut M) -> Result<()> {
        let mut bad = false;
        let mut sizes = Vec::new();
        model.visit_params(&mut |_, t| {
            if let Some(g) = t.grad() {
                bad |= g.iter().any(|v| !v.is_finite());
            }
            sizes.push(t.len());
        });
        if bad {
            return Err(Error::Numeric("non-finite gradient".into()));
        }
        if self.m.is_empty() {
            self.m = sizes.iter().map(|&n| vec![0.0; n]).collect();
            self.v = self.m.clone();
        } else if self.m.len() != sizes.len() || self.m.iter().zip(&sizes).any(|(m, &n)| m.len() != n) {
            return Err(Error::Shape("optimizer state does not match the model".into()));
        }
        self.step += 1;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = 1.0 - b1.powi(self.step as i32);
        let c2 = 1.0 - b2.powi(self.step as i32);
        let (lr, eps) = (self.lr, self.eps);
        let mut k = 0;
        let (ms, vs) = (&mut self.m, &mut self.v);
        model.visit_params_mut(&mut |_, t| {
            let g = t.grad().map(|g| g.to_vec());
            if let Some(g) = g {
                let (m, v) = (&mut ms[k], &mut vs[k]);
                for (i, w) in t.data_mut().iter_mut().enumerate() {
                    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                    *w -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                }
            }
            k += 1;
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let mut p = vec![0.1, -0.2, 3.0];
        let before = p.clone();
        sgd_step(&mut p, &[1.0, 2.0, -5.0], 0.0).unwrap();
        assert_eq!(p, before);
    }

    #[test]
    fn descends_along_gradient() {
        let mut p = vec![1.0];
        sgd_step(&mut p, &[2.0], 0.25).unwrap();
        assert_eq!(p, vec![0.5]);
    }

    #[test]
    fn rejects_nan_gradient() {
        let mut p = vec![1.0];
        assert!(matches!(sgd_step(&mut p, &[f64::NAN], 0.1), Err(Error::Numeric(_))));
    }
}
