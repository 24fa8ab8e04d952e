use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{cg_solve_batch, CgSettings, LinearOperator};
use crate::{Error, Result};

/// Distribution of probe entries; both satisfy `E[z zᵀ] = I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    #[default]
    Rademacher,
    Gaussian,
}

/// `count` probe vectors of length `dim`, seeded.
pub fn hutchinson_probes(count: usize, dim: usize, kind: ProbeKind, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| match kind {
                    ProbeKind::Rademacher => {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    ProbeKind::Gaussian => rng.sample(StandardNormal),
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEstimate {
    /// `(1/S) Σ_s z_sᵀ A⁻¹ dA z_s`.
    pub value: f64,
    /// Standard error across probes (zero for a single probe).
    pub std_error: f64,
    /// Whether every inner CG solve converged.
    pub converged: bool,
}

/// Hutchinson estimate of `tr(A⁻¹ dA)` using CG for `A⁻¹`.
pub fn estimate_trace_term(
    a: &dyn LinearOperator,
    da: &dyn LinearOperator,
    probes: &[Vec<f64>],
    cg: &CgSettings,
) -> Result<TraceEstimate> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("at least one probe is required".into()));
    }
    if da.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: da.dim(),
        });
    }
    // zᵀ A⁻¹ dA z = (A⁻¹ z)ᵀ (dA z) since A is symmetric
    let solved = cg_solve_batch(a, probes, cg)?;
    let mut samples = Vec::with_capacity(probes.len());
    for (z, w) in probes.iter().zip(&solved) {
        let dz = da.apply(z)?;
        samples.push(w.solution.iter().zip(&dz).map(|(x, y)| x * y).sum::<f64>());
    }
    let s = samples.len() as f64;
    let value = samples.iter().sum::<f64>() / s;
    let std_error = if samples.len() > 1 {
        let var = samples.iter().map(|x| (x - value).powi(2)).sum::<f64>() / (s - 1.0);
        (var / s).sqrt()
    } else {
        0.0
    };
    Ok(TraceEstimate {
        value,
        std_error,
        converged: solved.iter().all(|r| r.converged),
    })
}
