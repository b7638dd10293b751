use super::tensor::Tensor;
use crate::error::{shape_err, Error, Result};

/// Anything that owns named parameter tensors.
pub trait Parameterized {
    fn visit_params(&self, f: &mut dyn FnMut(&str, &Tensor));
    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&str, &mut Tensor));

    fn zero_grads(&mut self) {
        self.visit_params_mut(&mut |_, t| t.zero_grad());
    }

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit_params(&mut |_, t| n += t.len());
        n
    }

    fn flat_params(&self) -> Vec<f64> {
        let mut v = Vec::new();
        self.visit_params(&mut |_, t| v.extend_from_slice(t.data()));
        v
    }

    fn flat_grads(&self) -> Vec<f64> {
        let mut v = Vec::new();
        self.visit_params(&mut |_, t| match t.grad() {
            Some(g) => v.extend_from_slice(g),
            None => v.extend(std::iter::repeat_n(0.0, t.len())),
        });
        v
    }

    fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return shape_err(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                values.len()
            ));
        }
        let mut off = 0;
        self.visit_params_mut(&mut |_, t| {
            let n = t.len();
            t.data_mut().copy_from_slice(&values[off..off + n]);
            off += n;
        });
        Ok(())
    }

    /// Named copies of every parameter, in visit order.
    fn named_params(&self) -> Vec<(String, Tensor)> {
        let mut v = Vec::new();
        self.visit_params(&mut |name, t| {
            let copy = Tensor::from_vec(t.shape(), t.data().to_vec()).expect("valid tensor");
            v.push((name.to_string(), copy));
        });
        v
    }

    /// Overwrites parameters from a named list; names and shapes must match.
    fn load_named_params(&mut self, tensors: &[(String, Tensor)]) -> Result<()> {
        let mut err: Option<Error> = None;
        let mut idx = 0;
        self.visit_params_mut(&mut |name, t| {
            if err.is_some() {
                return;
            }
            match tensors.get(idx) {
                Some((n, src)) if n == name && src.shape() == t.shape() => {
                    t.data_mut().copy_from_slice(src.data());
                }
                Some((n, src)) => {
                    err = Some(Error::Shape(format!(
                        "parameter {} {:?} does not match stored {} {:?}",
                        name,
                        t.shape(),
                        n,
                        src.shape()
                    )));
                }
                None => err = Some(Error::Shape(format!("missing stored parameter {}", name))),
            }
            idx += 1;
        });
        if let Some(e) = err {
            return Err(e);
        }
        if idx != tensors.len() {
            return shape_err(format!("{} stored tensors, model has {}", tensors.len(), idx));
        }
        Ok(())
    }
}
