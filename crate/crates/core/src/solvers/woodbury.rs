//! Low-rank solves through a Gaussian projection of the features.
//!
//! With `K₁ = Φ G / √m` (`G` an `N × m` standard normal matrix),
//! `E[K₁K₁ᵀ] = ΦΦᵀ`, and `(K₁K₁ᵀ + σ² I)⁻¹` follows from the Woodbury
//! identity with one `m × m` factorisation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::grf::FeatureMatrix;
use crate::seed::serde_seed;
use crate::{exec, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JltSettings {
    /// Projection dimension `m`.
    pub dim: usize,
    #[serde(with = "serde_seed")]
    pub seed: u64,
}

/// Gaussian matrix `G` of shape `rows × cols`, filled row by row.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &data)
}

/// `K₁ = Φ G / √m`, shape `rows(Φ) × m`.
pub fn jlt_projection(features: &FeatureMatrix, settings: &JltSettings) -> Result<DMatrix<f64>> {
    let m = settings.dim;
    if m == 0 {
        return Err(Error::InvalidParameter("projection dimension must be >= 1".into()));
    }
    let g = gaussian_matrix(features.num_nodes(), m, settings.seed);
    let scale = 1.0 / (m as f64).sqrt();
    let phi = features.phi();
    let rows = exec::map_indices(phi.nrows(), |i| {
        let mut out = vec![0.0; m];
        let (cols, vals) = phi.row(i);
        for (&k, &v) in cols.iter().zip(vals) {
            for (o, gk) in out.iter_mut().zip(g.row(k as usize).iter()) {
                *o += v * gk;
            }
        }
        out
    });
    Ok(DMatrix::from_fn(phi.nrows(), m, |i, j| rows[i][j] * scale))
}

/// `(I + UUᵀ)⁻¹ b = b − U (I + UᵀU)⁻¹ Uᵀ b`.
pub fn woodbury_apply(u: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let m = u.ncols();
    let inner = DMatrix::identity(m, m) + u.transpose() * u;
    let chol = inner.cholesky().ok_or_else(|| {
        Error::NotPositiveDefinite(
            "I + UᵀU is numerically singular; increase the noise variance (jitter)".into(),
        )
    })?;
    let utb = u.transpose() * b;
    Ok(b - u * chol.solve(&utb))
}

/// Approximate `(ΦΦᵀ + σ² I)⁻¹ b` through the projected features.
pub fn woodbury_jlt_solve(
    features: &FeatureMatrix,
    noise_var: f64,
    b: &[f64],
    settings: &JltSettings,
) -> Result<Vec<f64>> {
    if b.len() != features.num_rows() {
        return Err(Error::DimensionMismatch {
            expected: features.num_rows(),
            found: b.len(),
        });
    }
    if !(noise_var > 0.0) {
        return Err(Error::InvalidParameter("noise variance must be positive".into()));
    }
    let u = jlt_projection(features, settings)? / noise_var.sqrt();
    let v = woodbury_apply(&u, &DVector::from_column_slice(b))? / noise_var;
    Ok(v.data.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grf::CsrMatrix;
    use crate::grf::WalkConfig;

    fn cfg() -> WalkConfig {
        WalkConfig::new(1, 0.5, 0, 0).unwrap()
    }

    #[test]
    fn zero_features_divide_by_noise() {
        let phi = FeatureMatrix::new(CsrMatrix::zeros(4, 4), cfg());
        let s = JltSettings { dim: 3, seed: 1 };
        let v = woodbury_jlt_solve(&phi, 0.5, &[1.0, 2.0, 3.0, 4.0], &s).unwrap();
        assert_eq!(v, vec![2.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn identity_holds_for_explicit_u() {
        let u = gaussian_matrix(8, 3, 4);
        let lhs = (DMatrix::identity(8, 8) + &u * u.transpose()).try_inverse().unwrap();
        let rhs = DMatrix::identity(8, 8)
            - &u * (DMatrix::identity(3, 3) + u.transpose() * &u).try_inverse().unwrap() * u.transpose();
        assert!((lhs - rhs).amax() < 1e-10);
        let b = DVector::from_fn(8, |i, _| i as f64 - 3.0);
        let direct = (DMatrix::identity(8, 8) + &u * u.transpose()).lu().solve(&b).unwrap();
        assert!((woodbury_apply(&u, &b).unwrap() - direct).amax() < 1e-10);
    }

    #[test]
    fn projection_shape_and_seed() {
        let dense = DMatrix::from_fn(5, 5, |i, j| if (i + j) % 3 == 0 { 1.0 + i as f64 } else { 0.0 });
        let phi = FeatureMatrix::new(CsrMatrix::from_dense(&dense), cfg());
        let s = JltSettings { dim: 7, seed: 9 };
        let k1 = jlt_projection(&phi, &s).unwrap();
        assert_eq!(k1.shape(), (5, 7));
        assert_eq!(k1, jlt_projection(&phi, &s).unwrap());
        let expect = &dense * gaussian_matrix(5, 7, 9) / 7f64.sqrt();
        assert!((k1 - expect).amax() < 1e-12);
    }
}
