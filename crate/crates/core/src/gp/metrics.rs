use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    /// Mean negative log predictive density in observation space.
    pub nlpd: f64,
}

/// RMSE of `mean` against `y`, and the Gaussian NLPD with per-point
/// variance `latent_var + noise_var`.
pub fn metrics(mean: &[f64], latent_var: &[f64], noise_var: f64, y: &[f64]) -> Result<Metrics> {
    if mean.len() != y.len() || latent_var.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            found: mean.len().min(latent_var.len()),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if noise_var < 0.0 || latent_var.iter().any(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::InvalidParameter("predictive variances must be nonnegative".into()));
    }
    let n = y.len() as f64;
    let mut sq = 0.0;
    let mut nlpd = 0.0;
    for ((&m, &v), &t) in mean.iter().zip(latent_var).zip(y) {
        let var = v + noise_var;
        if var <= 0.0 {
            return Err(Error::InvalidParameter("total predictive variance must be positive".into()));
        }
        let d = m - t;
        sq += d * d;
        nlpd += 0.5 * ((2.0 * PI * var).ln() + d * d / var);
    }
    Ok(Metrics {
        rmse: (sq / n).sqrt(),
        nlpd: nlpd / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn perfect_predictions() {
        let m = metrics(&[1.0, 2.0], &[0.5, 0.5], 0.5, &[1.0, 2.0]).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_relative_eq!(m.nlpd, 0.5 * (2.0 * PI).ln(), max_relative = 1e-15);
        assert!((m.nlpd - 0.9189).abs() < 1e-4);
    }

    #[test]
    fn single_miss() {
        let m = metrics(&[0.0], &[1.0], 0.0, &[1.0]).unwrap();
        assert_eq!(m.rmse, 1.0);
        assert_relative_eq!(m.nlpd, 0.5 * (1.0 + (2.0 * PI).ln()), max_relative = 1e-15);
    }

    #[test]
    fn batch_by_hand() {
        let mean = [0.1, -0.3, 2.0, 0.0, 1.5];
        let var = [0.2, 0.1, 0.5, 1.0, 0.05];
        let y = [0.0, 0.0, 1.0, 0.5, 1.4];
        let noise = 0.1;
        let m = metrics(&mean, &var, noise, &y).unwrap();
        let mut sq = 0.0;
        let mut nl = 0.0;
        for k in 0..5 {
            let d: f64 = mean[k] - y[k];
            let s = var[k] + noise;
            sq += d * d;
            nl += -(-(d * d) / (2.0 * s)).exp().ln() + 0.5 * (2.0 * PI * s).ln();
        }
        assert!((m.rmse - (sq / 5.0f64).sqrt()).abs() < 1e-12);
        assert!((m.nlpd - nl / 5.0).abs() < 1e-12);
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(metrics(&[0.0], &[-0.1], 0.05, &[0.0]).is_err());
        assert!(metrics(&[0.0], &[0.1], 0.05, &[0.0, 1.0]).is_err());
    }
}
