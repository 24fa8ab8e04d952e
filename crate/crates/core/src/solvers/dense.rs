//! Dense reference computations used to check the sparse estimators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::graph::{laplacian, normalized_laplacian, Graph, WalkMatrixKind};
use crate::{Error, Result};

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Closed-form graph kernels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExactKernel {
    /// `variance · exp(−β L)` with `L` normalised or combinatorial.
    Diffusion {
        beta: f64,
        #[serde(default = "one")]
        variance: f64,
        #[serde(default = "yes")]
        normalized: bool,
    },
    /// `variance · (2ν/κ² I + L)^{−ν}`.
    Matern {
        nu: f64,
        kappa: f64,
        #[serde(default = "one")]
        variance: f64,
        #[serde(default = "yes")]
        normalized: bool,
    },
    /// `Σ_r coeffs[r] · walk^r`.
    PowerSeries {
        coeffs: Vec<f64>,
        #[serde(default)]
        walk: WalkMatrixKind,
    },
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::DenseCapExceeded { requested: n, cap })
    } else {
        Ok(())
    }
}

/// `V diag(f(λ)) Vᵀ` for symmetric `a`.
pub fn spectral_map(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(a.clone());
    let mapped = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| f(l)));
    let scaled = &eig.eigenvectors * DMatrix::from_diagonal(&mapped);
    let out = scaled * eig.eigenvectors.transpose();
    // symmetrise away rounding
    (&out + out.transpose()) * 0.5
}

/// `Σ_l coeffs[l] · w^l` by Horner's rule.
pub fn power_series_matrix(w: &DMatrix<f64>, coeffs: &[f64]) -> DMatrix<f64> {
    let n = w.nrows();
    let mut acc = DMatrix::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = &acc * w;
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

pub fn exact_kernel(g: &Graph, kind: &ExactKernel, cap: usize) -> Result<DMatrix<f64>> {
    check_cap(g.num_nodes(), cap)?;
    let lap = |normalized: bool| {
        if normalized {
            normalized_laplacian(g)
        } else {
            Ok(laplacian(g))
        }
    };
    match kind {
        ExactKernel::Diffusion {
            beta,
            variance,
            normalized,
        } => {
            let l = lap(*normalized)?;
            Ok(spectral_map(&l, |x| variance * (-beta * x).exp()))
        }
        ExactKernel::Matern {
            nu,
            kappa,
            variance,
            normalized,
        } => {
            if !(*nu > 0.0 && *kappa > 0.0) {
                return Err(Error::InvalidParameter("Matérn needs nu > 0 and kappa > 0".into()));
            }
            let l = lap(*normalized)?;
            let shift = 2.0 * nu / (kappa * kappa);
            Ok(spectral_map(&l, |x| variance * (shift + x.max(0.0)).powf(-nu)))
        }
        ExactKernel::PowerSeries { coeffs, walk } => {
            let w = walk.build(g)?.to_dense(g);
            Ok(power_series_matrix(&w, coeffs))
        }
    }
}

/// Solve `a x = b` for symmetric positive definite `a`.
pub fn cholesky_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("dense Cholesky failed".into()))?;
    Ok(chol.solve(b))
}

/// Ratio of extreme eigenvalues of a symmetric positive definite matrix.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let eig = a.symmetric_eigenvalues();
    eig.max() / eig.min()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    /// Exact `κ(K̂ + σ² I)`.
    pub kappa: f64,
    /// `1 + N c² / σ²`.
    pub bound: f64,
    pub spectral_norm: f64,
    pub frobenius_norm: f64,
    /// `N · max_ij |K̂_ij|`.
    pub entry_bound: f64,
}

impl ConditionReport {
    pub fn bound_holds(&self) -> bool {
        self.kappa <= self.bound
    }

    /// `‖K̂‖₂ ≤ ‖K̂‖_F ≤ N max|K̂_ij|` with a relative rounding slack.
    pub fn norm_chain_holds(&self) -> bool {
        let slack = 1e-12 * self.entry_bound.max(1e-300);
        self.spectral_norm <= self.frobenius_norm + slack && self.frobenius_norm <= self.entry_bound + slack
    }
}

/// Exact conditioning of `k_hat + σ² I` against the `c`-based bound.
pub fn condition_number_report(k_hat: &DMatrix<f64>, noise_var: f64, c: f64) -> ConditionReport {
    let n = k_hat.nrows();
    let eig = k_hat.symmetric_eigenvalues();
    let spectral_norm = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (lo, hi) = (eig.min() + noise_var, eig.max() + noise_var);
    ConditionReport {
        kappa: hi / lo,
        bound: 1.0 + n as f64 * c * c / noise_var,
        spectral_norm,
        frobenius_norm: k_hat.norm(),
        entry_bound: n as f64 * k_hat.amax(),
    }
}
