use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};

use crate::grf::FeatureMatrix;
use crate::{Error, Result};

/// A symmetric linear map on `R^dim`, applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, v: &[f64]) -> Result<Vec<f64>>;

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            })
        }
    }
}

/// `H = Φ_x Φ_xᵀ + σ² I` where `Φ_x` holds the feature rows of a node subset.
#[derive(Clone, Debug)]
pub struct KernelOperator<'a> {
    features: Cow<'a, FeatureMatrix>,
    noise_var: f64,
}

impl<'a> KernelOperator<'a> {
    /// Operator over all rows of `features`.
    pub fn new(features: &'a FeatureMatrix, noise_var: f64) -> Self {
        Self {
            features: Cow::Borrowed(features),
            noise_var,
        }
    }

    /// Operator restricted to `rows` (e.g. the training nodes).
    pub fn restricted(features: &FeatureMatrix, rows: &[usize], noise_var: f64) -> KernelOperator<'static> {
        KernelOperator {
            features: Cow::Owned(features.restrict(rows)),
            noise_var,
        }
    }

    /// Operator that owns its features.
    pub fn owned(features: FeatureMatrix, noise_var: f64) -> KernelOperator<'static> {
        KernelOperator {
            features: Cow::Owned(features),
            noise_var,
        }
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

impl LinearOperator for KernelOperator<'_> {
    fn dim(&self) -> usize {
        self.features.num_rows()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        let mut out = self.features.kernel_matvec(v)?;
        for (o, &x) in out.iter_mut().zip(v) {
            *o += self.noise_var * x;
        }
        Ok(out)
    }
}

/// Explicit dense matrix.
#[derive(Clone, Debug)]
pub struct DenseOperator(pub DMatrix<f64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok((&self.0 * DVector::from_column_slice(v)).data.into())
    }
}

/// `scale · I`.
#[derive(Clone, Copy, Debug)]
pub struct ScaledIdentity {
    pub dim: usize,
    pub scale: f64,
}

impl LinearOperator for ScaledIdentity {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok(v.iter().map(|x| self.scale * x).collect())
    }
}
