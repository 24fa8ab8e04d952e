use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Modulation function `f_l`, the per-walk-length coefficient. The kernel's
/// power-series coefficients are its self-convolution
/// `α_r = Σ_{l ≤ r} f_l f_{r−l}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulation {
    /// `f_l = σ_f · e^{−β/2} · (β/2)^l / l!` for `l ≤ l_max`. Walking on the
    /// normalised adjacency `W̃`, the untruncated kernel is
    /// `σ_f² · exp(−β L̃)`.
    DiffusionShape { beta: f64, sigma_f: f64, l_max: usize },
    /// `f_l = coeffs[l]`, `l_max = coeffs.len() − 1`.
    Free { coeffs: Vec<f64> },
}

impl Modulation {
    pub fn diffusion_shape(beta: f64, sigma_f: f64, l_max: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) || !(sigma_f.is_finite() && sigma_f > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion shape needs beta > 0 and sigma_f > 0, got {beta}, {sigma_f}"
            )));
        }
        Ok(Self::DiffusionShape { beta, sigma_f, l_max })
    }

    pub fn free(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "free modulation needs at least one finite coefficient".into(),
            ));
        }
        Ok(Self::Free { coeffs })
    }

    /// Random initialisation `coeffs[l] ~ N(0, 0.5^l)`.
    pub fn free_random(l_max: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..=l_max)
            .map(|l| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * 0.5f64.powi(l as i32).sqrt()
            })
            .collect();
        Self::Free { coeffs }
    }

    pub fn l_max(&self) -> usize {
        match self {
            Self::DiffusionShape { l_max, .. } => *l_max,
            Self::Free { coeffs } => coeffs.len() - 1,
        }
    }

    pub fn coefficient(&self, l: usize) -> f64 {
        match self {
            Self::DiffusionShape { beta, sigma_f, l_max } => {
                if l > *l_max {
                    return 0.0;
                }
                diffusion_coefficient(*beta, *sigma_f, l)
            }
            Self::Free { coeffs } => coeffs.get(l).copied().unwrap_or(0.0),
        }
    }

    /// `f_0 ..= f_{l_max}`.
    pub fn coefficients(&self) -> Vec<f64> {
        (0..=self.l_max()).map(|l| self.coefficient(l)).collect()
    }

    /// Power-series coefficients `α_0 ..= α_{2 l_max}` of the kernel the
    /// features estimate.
    pub fn kernel_series(&self) -> Vec<f64> {
        let f = self.coefficients();
        let m = f.len();
        (0..2 * m - 1)
            .map(|r| {
                let lo = r.saturating_sub(m - 1);
                (lo..=r.min(m - 1)).map(|l| f[l] * f[r - l]).sum()
            })
            .collect()
    }

    /// Unconstrained parameters: `[ln β, ln σ_f]` or the raw coefficients.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::DiffusionShape { beta, sigma_f, .. } => vec![beta.ln(), sigma_f.ln()],
            Self::Free { coeffs } => coeffs.clone(),
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            Self::DiffusionShape { .. } => 2,
            Self::Free { coeffs } => coeffs.len(),
        }
    }

    /// Same kind and `l_max` with new unconstrained parameters.
    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        if params.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: params.len(),
            });
        }
        match self {
            Self::DiffusionShape { l_max, .. } => {
                Self::diffusion_shape(params[0].exp(), params[1].exp(), *l_max)
            }
            Self::Free { .. } => Self::free(params.to_vec()),
        }
    }

    /// `jac[p][l] = ∂f_l / ∂params[p]`.
    pub fn coefficient_jacobian(&self) -> Vec<Vec<f64>> {
        match self {
            Self::DiffusionShape { beta, .. } => {
                let f = self.coefficients();
                // f_l ∝ exp(−β/2) β^l: ∂/∂ln β = (l − β/2) f_l, ∂/∂ln σ_f = f_l.
                let d_beta = f
                    .iter()
                    .enumerate()
                    .map(|(l, &fl)| (l as f64 - beta / 2.0) * fl)
                    .collect();
                vec![d_beta, f]
            }
            Self::Free { coeffs } => (0..coeffs.len())
                .map(|p| (0..coeffs.len()).map(|l| if l == p { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }
}

fn diffusion_coefficient(beta: f64, sigma_f: f64, l: usize) -> f64 {
    if l == 0 {
        return sigma_f * (-beta / 2.0).exp();
    }
    if beta == 0.0 {
        return 0.0;
    }
    let ln_fact: f64 = (1..=l).map(|k| (k as f64).ln()).sum();
    sigma_f * (-beta / 2.0 + l as f64 * (beta / 2.0).ln() - ln_fact).exp()
}
