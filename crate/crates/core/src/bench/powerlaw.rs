use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Least-squares fit of `y = a · N^b` in log-log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub b: f64,
    /// Two-sided 95% interval for `b` from the t distribution with
    /// `points − 2` degrees of freedom.
    pub b_ci95: (f64, f64),
    pub r2: f64,
    /// Smallest `N` included.
    pub min_n: f64,
    pub points: usize,
}

/// Fit the points with `N ≥ min_n`. Needs at least three of them, all with
/// positive `N` and `y`, and at least two distinct `N`.
pub fn fit_power_law(points: &[(f64, f64)], min_n: f64) -> Result<PowerLawFit> {
    let kept: Vec<(f64, f64)> = points.iter().copied().filter(|&(n, _)| n >= min_n).collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs >= 3 points with N >= {min_n}, got {}",
            kept.len()
        )));
    }
    if kept.iter().any(|&(n, y)| !(n > 0.0 && y > 0.0 && y.is_finite())) {
        return Err(Error::InvalidParameter("power-law fit needs positive N and y".into()));
    }
    let xs: Vec<f64> = kept.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let m = kept.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("power-law fit needs distinct N values".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let intercept = my - b * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - b * x).powi(2)).sum();
    let sst: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 1.0 };
    let dof = m - 2.0;
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Numerical(e.to_string()))?
        .inverse_cdf(0.975);
    let half = t * (sse / dof / sxx).sqrt();
    Ok(PowerLawFit {
        a: intercept.exp(),
        b,
        b_ci95: (b - half, b + half),
        r2,
        min_n,
        points: kept.len(),
    })
}
