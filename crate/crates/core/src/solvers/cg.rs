use serde::{Deserialize, Serialize};

use super::LinearOperator;
use crate::{exec, Error, Result};

fn default_tol() -> f64 {
    1e-6
}

/// Stopping rule for conjugate gradients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgSettings {
    /// Relative residual `‖Av − b‖ / ‖b‖` to reach.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Iteration cap; `None` means `2⌈√N⌉ + 50`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iters: None,
        }
    }
}

impl CgSettings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, max_iters: None }
    }

    pub fn default_max_iters(dim: usize) -> usize {
        2 * (dim as f64).sqrt().ceil() as usize + 50
    }

    pub fn max_iters_for(&self, dim: usize) -> usize {
        self.max_iters.unwrap_or_else(|| Self::default_max_iters(dim))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == Some(0) {
            return Err(Error::InvalidParameter(format!(
                "CG needs tol > 0 and max_iters >= 1, got {:?}",
                self
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// Relative residual of the last iterate (recursively updated).
    pub relative_residual: f64,
    /// False when the iteration cap was hit first.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unpreconditioned conjugate gradients for `A v = b`, starting from zero.
pub fn cg_solve(a: &dyn LinearOperator, b: &[f64], settings: &CgSettings) -> Result<CgResult> {
    settings.validate()?;
    a.check_dim(b)?;
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if !b_norm.is_finite() {
        return Err(Error::Numerical("right-hand side is not finite".into()));
    }
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgResult {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let max_iters = settings.max_iters_for(n);
    let target = settings.tol * b_norm;
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while iterations < max_iters && rr.sqrt() > target {
        let ap = a.apply(&p)?;
        let pap = dot(&p, &ap);
        if pap.is_nan() || rr.is_nan() {
            return Err(Error::Numerical(format!("NaN in CG at iteration {iterations}")));
        }
        if pap <= 0.0 {
            return Err(Error::NotPositiveDefinite(format!(
                "pᵀAp = {pap:e} at iteration {iterations}; increase the noise variance"
            )));
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
        iterations += 1;
    }
    if !rr.is_finite() {
        return Err(Error::Numerical("CG residual is not finite".into()));
    }
    let relative_residual = rr.sqrt() / b_norm;
    Ok(CgResult {
        solution: x,
        iterations,
        relative_residual,
        converged: relative_residual <= settings.tol,
    })
}

/// Solve `A V = [b_0, .., b_S]` column by column.
pub fn cg_solve_batch(a: &dyn LinearOperator, rhs: &[Vec<f64>], settings: &CgSettings) -> Result<Vec<CgResult>> {
    exec::map_indices(rhs.len(), |k| cg_solve(a, &rhs[k], settings))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{DenseOperator, ScaledIdentity};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn scaled_identity_in_one_step() {
        let a = ScaledIdentity { dim: 4, scale: 0.5 };
        let b = [1.0, -2.0, 3.0, 0.25];
        let res = cg_solve(&a, &b, &CgSettings::default()).unwrap();
        assert_eq!(res.iterations, 1);
        for (x, b) in res.solution.iter().zip(b) {
            assert!((x - b / 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_needs_no_iterations() {
        let a = ScaledIdentity { dim: 3, scale: 2.0 };
        let res = cg_solve(&a, &[0.0; 3], &CgSettings::default()).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.solution, vec![0.0; 3]);
    }

    #[test]
    fn indefinite_operator_is_rejected() {
        let a = DenseOperator(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(matches!(
            cg_solve(&a, &[0.0, 1.0], &CgSettings::default()),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn nan_is_an_error() {
        let a = ScaledIdentity { dim: 2, scale: 1.0 };
        assert!(cg_solve(&a, &[f64::NAN, 1.0], &CgSettings::default()).is_err());
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let m = DMatrix::from_fn(30, 30, |i, j| if i == j { 1.0 + i as f64 * 10.0 } else { 0.0 });
        let a = DenseOperator(m);
        let s = CgSettings {
            tol: 1e-14,
            max_iters: Some(3),
        };
        let res = cg_solve(&a, &[1.0; 30], &s).unwrap();
        assert_eq!(res.iterations, 3);
        assert!(!res.converged);
    }

    #[test]
    fn batch_with_identity_rhs_inverts() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let a = DenseOperator(m.clone());
        let rhs: Vec<Vec<f64>> = (0..3).map(|k| (0..3).map(|i| (i == k) as u8 as f64).collect()).collect();
        let sols = cg_solve_batch(&a, &rhs, &CgSettings::with_tol(1e-12)).unwrap();
        let inv = DMatrix::from_fn(3, 3, |i, j| sols[j].solution[i]);
        assert!((&m * inv - DMatrix::identity(3, 3)).amax() < 1e-10);
        let dup = cg_solve_batch(&a, &[rhs[0].clone(), rhs[0].clone()], &CgSettings::default()).unwrap();
        assert_eq!(dup[0], dup[1]);
    }

    proptest! {
        #[test]
        fn matches_dense_solve(seed in 0u64..1000, n in 2usize..25) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let m = &g * g.transpose() + DMatrix::identity(n, n) * 0.5;
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = CgSettings { tol: 1e-12, max_iters: Some(10 * n) };
            let res = cg_solve(&DenseOperator(m.clone()), &b, &s).unwrap();
            let exact = m.cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b));
            let err = (nalgebra::DVector::from_vec(res.solution) - &exact).norm() / exact.norm();
            prop_assert!(err < 1e-8);
        }
    }
}
