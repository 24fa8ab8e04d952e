//! Concentration, sparsity and row-norm bounds for GRF estimates.

use serde::{Deserialize, Serialize};

use super::Modulation;
use crate::graph::{Graph, WalkMatrix};

/// Largest single-step load multiplier `max_ij walk[i,j] · d_i / (1 − p)`.
pub fn max_step_multiplier(g: &Graph, walk: &WalkMatrix, p_halt: f64) -> f64 {
    (0..g.num_nodes())
        .flat_map(|i| {
            let d = g.degree(i) as f64;
            walk.row(g, i).iter().map(move |&w| w.abs() * d)
        })
        .fold(0.0, f64::max)
        / (1.0 - p_halt)
}

/// `c = Σ_{r ≤ l_max} |f_r| · x^r` with `x` from [`max_step_multiplier`].
/// Bounds `‖φ(i)‖₁` and hence every `|K̂_ij| ≤ c²`.
pub fn bound_constant_c(g: &Graph, walk: &WalkMatrix, modulation: &Modulation, p_halt: f64) -> f64 {
    let x = max_step_multiplier(g, walk, p_halt);
    modulation
        .coefficients()
        .iter()
        .enumerate()
        .map(|(r, f)| f.abs() * x.powi(r as i32))
        .sum()
}

/// Number of nonzeros per feature exceeded with probability at most `delta`:
/// `n · ln(1 − (1 − δ)^{1/n}) / ln(1 − p)`.
pub fn sparsity_bound(num_walkers: usize, p_halt: f64, delta: f64) -> f64 {
    let n = num_walkers as f64;
    n * (1.0 - (1.0 - delta).powf(1.0 / n)).ln() / (1.0 - p_halt).ln()
}

/// Raw tail bound `2 exp(−t² n³ / (2 (2n − 1)² c⁴))` on
/// `P(|φ(i)ᵀφ(j) − K_ij| > t)`. May exceed 1.
pub fn concentration_bound(num_walkers: usize, c: f64, t: f64) -> f64 {
    let n = num_walkers as f64;
    2.0 * (-(t * t) * n.powi(3) / (2.0 * (2.0 * n - 1.0).powi(2) * c.powi(4))).exp()
}

/// [`concentration_bound`] clamped to a probability.
pub fn concentration_probability(num_walkers: usize, c: f64, t: f64) -> f64 {
    concentration_bound(num_walkers, c, t).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrfBoundConstants {
    pub c: f64,
    /// Deviation for the concentration bound.
    pub t: f64,
    /// Failure probability for the sparsity bound.
    pub delta: f64,
}

impl GrfBoundConstants {
    pub fn new(g: &Graph, walk: &WalkMatrix, modulation: &Modulation, p_halt: f64, t: f64, delta: f64) -> Self {
        Self {
            c: bound_constant_c(g, walk, modulation, p_halt),
            t,
            delta,
        }
    }

    pub fn tail_probability(&self, num_walkers: usize) -> f64 {
        concentration_probability(num_walkers, self.c, self.t)
    }

    pub fn max_nonzeros(&self, num_walkers: usize, p_halt: f64) -> f64 {
        sparsity_bound(num_walkers, p_halt, self.delta)
    }

    /// Upper bound on `κ(K̂ + σ² I)` for `n_nodes` rows.
    pub fn condition_bound(&self, n_nodes: usize, noise_var: f64) -> f64 {
        1.0 + n_nodes as f64 * self.c * self.c / noise_var
    }
}
