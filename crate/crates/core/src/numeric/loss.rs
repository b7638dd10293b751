use crate::error::{shape_err, Error, Result};

/// Mean negative log-likelihood of the target class over rows of
/// probabilities. `probs` is row-major `targets.len() x classes`.
pub fn cross_entropy(probs: &[f64], classes: usize, targets: &[usize]) -> Result<f64> {
    masked_cross_entropy(probs, classes, targets, &vec![true; targets.len()])
}

/// Cross entropy where only rows with `contributing[i]` count.
pub fn masked_cross_entropy(
    probs: &[f64],
    classes: usize,
    targets: &[usize],
    contributing: &[bool],
) -> Result<f64> {
    if classes == 0 || probs.len() != classes * targets.len() || contributing.len() != targets.len() {
        return shape_err(format!(
            "{} probabilities do not form {} rows of {} classes",
            probs.len(),
            targets.len(),
            classes
        ));
    }
    let mut total = 0.0;
    let mut n = 0usize;
    for ((row, &t), &c) in probs.chunks(classes).zip(targets).zip(contributing) {
        if !c {
            continue;
        }
        if t >= classes {
            return shape_err(format!("target class {} out of range", t));
        }
        total -= row[t].ln();
        n += 1;
    }
    if n == 0 {
        return Err(Error::DegenerateBatch("no labelled elements".into()));
    }
    Ok(total / n as f64)
}

/// Binary cross entropy on logits, summed over contributing elements.
///
/// Returns `(sum_loss, count)` and writes `d(sum_loss)/d(logit) * scale` into
/// `grad`. Non-contributing elements get an exact zero gradient and their
/// target value is never read.
pub fn masked_bce_with_logits(
    logits: &[f64],
    targets: &[f64],
    contributing: &[bool],
    scale: f64,
    grad: &mut [f64],
) -> Result<(f64, usize)> {
    let n = logits.len();
    if targets.len() != n || contributing.len() != n || grad.len() != n {
        return shape_err("bce logits/targets/mask/grad length mismatch");
    }
    let mut total = 0.0;
    let mut count = 0;
    for i in 0..n {
        if !contributing[i] {
            grad[i] = 0.0;
            continue;
        }
        let z = logits[i];
        let y = targets[i];
        // max(z,0) - z*y + ln(1 + e^{-|z|})
        total += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        grad[i] = (super::layers::sigmoid(z) - y) * scale;
        count += 1;
    }
    Ok((total, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_prediction_has_zero_loss() {
        let p = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(cross_entropy(&p, 3, &[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn uniform_three_class_is_ln3() {
        let p = [1.0 / 3.0; 3];
        let l = cross_entropy(&p, 3, &[2]).unwrap();
        assert!((l - 3f64.ln()).abs() < 1e-12);
        assert!((l - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn flipping_masked_targets_leaves_loss_bit_identical() {
        let p = [0.2, 0.5, 0.3, 0.6, 0.3, 0.1, 0.1, 0.1, 0.8];
        let mask = [true, false, true];
        let a = masked_cross_entropy(&p, 3, &[1, 0, 2], &mask).unwrap();
        let b = masked_cross_entropy(&p, 3, &[1, 2, 2], &mask).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());

        let logits = [0.3, -2.0, 1.5];
        let bmask = [true, false, true];
        let mut g1 = [0.0; 3];
        let mut g2 = [0.0; 3];
        let (l1, n1) = masked_bce_with_logits(&logits, &[1.0, 0.0, 0.0], &bmask, 1.0, &mut g1).unwrap();
        let (l2, _) = masked_bce_with_logits(&logits, &[1.0, 1.0, 0.0], &bmask, 1.0, &mut g2).unwrap();
        assert_eq!(n1, 2);
        assert_eq!(l1.to_bits(), l2.to_bits());
        assert_eq!(g1, g2);
        assert_eq!(g1[1], 0.0);
    }

    #[test]
    fn empty_contributing_set_is_degenerate() {
        let p = [0.5, 0.5];
        assert!(matches!(
            masked_cross_entropy(&p, 2, &[0], &[false]),
            Err(Error::DegenerateBatch(_))
        ));
    }

    #[test]
    fn bce_matches_naive_formula() {
        let z: f64 = 0.7;
        let mut g = [0.0];
        let (l, _) = masked_bce_with_logits(&[z], &[1.0], &[true], 1.0, &mut g).unwrap();
        let p = 1.0 / (1.0 + (-z).exp());
        assert!((l + p.ln()).abs() < 1e-12);
        assert!((g[0] - (p - 1.0)).abs() < 1e-12);
    }
}
