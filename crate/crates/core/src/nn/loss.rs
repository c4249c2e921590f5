use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy on logits and its gradient per logit.
///
/// Each term is `max(z, 0) - z·y + ln(1 + e^{-|z|})`.
pub fn bce_with_logits(logits: &[f64], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.len() != labels.len() || logits.is_empty() {
        return Err(Error::Shape(format!(
            "{} logits for {} labels",
            logits.len(),
            labels.len()
        )));
    }
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (&z, &y) in logits.iter().zip(labels) {
        loss += z.max(0.0) - z * y + (-z.abs()).exp().ln_1p();
        grad.push((sigmoid(z) - y) / n);
    }
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logit_is_ln2() {
        let (l, g) = bce_with_logits(&[0.0], &[1.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((g[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn confident_correct_logits_vanish() {
        let (l, g) = bce_with_logits(&[40.0, -40.0], &[1.0, 0.0]).unwrap();
        assert!(l < 1e-15);
        assert!(g.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let z = [0.3, -1.7, 2.2];
        let y = [1.0, 0.0, 0.0];
        let (_, g) = bce_with_logits(&z, &y).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut p = z;
            p[i] += h;
            let mut m = z;
            m[i] -= h;
            let fd = (bce_with_logits(&p, &y).unwrap().0 - bce_with_logits(&m, &y).unwrap().0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let (l, _) = bce_with_logits(&[1000.0, -1000.0], &[0.0, 1.0]).unwrap();
        assert!((l - 1000.0).abs() < 1e-9);
    }
}
