use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::grf::{FeatureMatrix, Modulation, WalkCache, DEFAULT_DENSE_CAP};
use crate::solvers::{cg_solve_batch, CgSettings, KernelOperator};
use crate::{Error, Result};

/// How systems in `K̂_xx + σ² I` are solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Matrix-free conjugate gradients.
    #[default]
    Cg,
    /// Materialise `K̂_xx` and factorise it.
    DenseCholesky,
}

/// GP prior `h ~ GP(mean, K̂)` with `K̂ = ΦΦᵀ` built from cached walks.
#[derive(Clone, Debug)]
pub struct GpModel {
    cache: Arc<WalkCache>,
    modulation: Modulation,
    noise_var: f64,
    mean: f64,
    cg: CgSettings,
    solver: SolverKind,
    features: FeatureMatrix,
}

impl GpModel {
    pub fn new(cache: Arc<WalkCache>, modulation: Modulation, noise_var: f64) -> Result<Self> {
        check_noise(noise_var)?;
        let features = cache.features(&modulation)?;
        Ok(Self {
            cache,
            modulation,
            noise_var,
            mean: 0.0,
            cg: CgSettings::default(),
            solver: SolverKind::Cg,
            features,
        })
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn with_cg(mut self, cg: CgSettings) -> Self {
        self.cg = cg;
        self
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn cache(&self) -> &Arc<WalkCache> {
        &self.cache
    }

    pub fn modulation(&self) -> &Modulation {
        &self.modulation
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn cg(&self) -> &CgSettings {
        &self.cg
    }

    pub fn solver(&self) -> SolverKind {
        self.solver
    }

    /// Features on all nodes for the current modulation.
    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn num_nodes(&self) -> usize {
        self.features.num_rows()
    }

    /// Replace hyperparameters and re-deposit features along the cached walks.
    pub fn set_hyperparameters(&mut self, modulation: Modulation, noise_var: f64) -> Result<()> {
        check_noise(noise_var)?;
        self.features = self.cache.features(&modulation)?;
        self.modulation = modulation;
        self.noise_var = noise_var;
        Ok(())
    }
}

fn check_noise(noise_var: f64) -> Result<()> {
    if noise_var.is_finite() && noise_var > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("noise variance must be positive, got {noise_var}")))
    }
}

/// Solver for `H = Φ_x Φ_xᵀ + σ² I` that owns the training-row features.
pub(crate) enum SystemSolver {
    Cg {
        op: KernelOperator<'static>,
        cg: CgSettings,
    },
    Dense {
        features: FeatureMatrix,
        chol: Cholesky<f64, Dyn>,
    },
}

impl SystemSolver {
    pub(crate) fn new(features_x: FeatureMatrix, noise_var: f64, kind: SolverKind, cg: CgSettings) -> Result<Self> {
        match kind {
            SolverKind::Cg => Ok(Self::Cg {
                op: KernelOperator::owned(features_x, noise_var),
                cg,
            }),
            SolverKind::DenseCholesky => {
                let h = dense_system(&features_x, noise_var)?;
                let chol = h.cholesky().ok_or_else(|| {
                    Error::NotPositiveDefinite("K̂_xx + σ²I is not numerically positive definite".into())
                })?;
                Ok(Self::Dense {
                    features: features_x,
                    chol,
                })
            }
        }
    }

    pub(crate) fn features(&self) -> &FeatureMatrix {
        match self {
            Self::Cg { op, .. } => op.features(),
            Self::Dense { features, .. } => features,
        }
    }

    /// Solutions and whether every solve converged.
    pub(crate) fn solve_many(&self, rhs: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, bool)> {
        match self {
            Self::Cg { op, cg } => {
                let res = cg_solve_batch(op, rhs, cg)?;
                let ok = res.iter().all(|r| r.converged);
                Ok((res.into_iter().map(|r| r.solution).collect(), ok))
            }
            Self::Dense { chol, .. } => Ok((
                rhs.iter()
                    .map(|b| chol.solve(&DVector::from_column_slice(b)).data.into())
                    .collect(),
                true,
            )),
        }
    }

    pub(crate) fn solve(&self, rhs: &[f64]) -> Result<(Vec<f64>, bool)> {
        let (mut v, ok) = self.solve_many(std::slice::from_ref(&rhs.to_vec()))?;
        Ok((v.pop().expect("one solution"), ok))
    }

    /// `log det H`, known only after a factorisation.
    pub(crate) fn log_det(&self) -> Option<f64> {
        match self {
            Self::Dense { chol, .. } => Some(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()),
            Self::Cg { .. } => None,
        }
    }
}

/// Dense `Φ_x Φ_xᵀ + σ² I`.
pub(crate) fn dense_system(features_x: &FeatureMatrix, noise_var: f64) -> Result<DMatrix<f64>> {
    let mut h = features_x.dense_kernel(DEFAULT_DENSE_CAP)?;
    for i in 0..h.nrows() {
        h[(i, i)] += noise_var;
    }
    Ok(h)
}
