//! Log marginal likelihood and its gradient with respect to the modulation
//! parameters and `ln σ²`.
//!
//! Because every deposit is linear in `f_l`, `∂Φ/∂θ_p = Σ_l (∂f_l/∂θ_p) Φ_l`
//! is assembled from the same walk cache, and
//! `∂H/∂θ_p = D_p Φ_xᵀ + Φ_x D_pᵀ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::model::{dense_system, SystemSolver};
use super::{Dataset, GpModel, SolverKind};
use crate::grf::{CsrMatrix, FeatureMatrix, Modulation, WalkCache};
use crate::solvers::{hutchinson_probes, CgSettings, ProbeKind};
use crate::{Error, Result};

/// How `tr(H⁻¹ ∂H)` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceMode {
    /// Dense inverse; for small training sets and testing.
    Exact,
    /// Stochastic probes solved alongside `H⁻¹ y` in one batch.
    Hutchinson { probes: usize, probe_kind: ProbeKind, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmlGradient {
    /// `∂L/∂θ` for the modulation parameters.
    pub modulation: Vec<f64>,
    /// `∂L/∂ ln σ²`.
    pub log_noise: f64,
    /// `−½ (y − m)ᵀ H⁻¹ (y − m)`.
    pub data_fit: f64,
    /// Full log marginal likelihood, when a factorisation was available.
    pub log_marginal: Option<f64>,
    /// Whether every CG solve met its tolerance.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exact `L = −½ rᵀH⁻¹r − ½ log det H − (T/2) log 2π` by dense Cholesky,
/// `r = y − mean`, `T` the number of observations.
pub fn log_marginal_likelihood(model: &GpModel, data: &Dataset) -> Result<f64> {
    let phi_x = model.features().restrict(data.nodes());
    let h = dense_system(&phi_x, model.noise_var())?;
    let chol = h
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite("K̂_xx + σ²I is not positive definite".into()))?;
    let r = nalgebra::DVector::from_iterator(data.len(), data.targets().iter().map(|y| y - model.mean()));
    let v = chol.solve(&r);
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let t = data.len() as f64;
    Ok(-0.5 * r.dot(&v) - 0.5 * log_det - 0.5 * t * (2.0 * PI).ln())
}

/// Gradient for the model's current hyperparameters.
pub fn lml_gradient(model: &GpModel, data: &Dataset, mode: &TraceMode) -> Result<LmlGradient> {
    gradient_at(
        model.cache(),
        model.modulation(),
        model.noise_var(),
        model.mean(),
        model.solver(),
        model.cg(),
        data,
        mode,
    )
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn gradient_at(
    cache: &WalkCache,
    modulation: &Modulation,
    noise_var: f64,
    mean: f64,
    solver: SolverKind,
    cg: &CgSettings,
    data: &Dataset,
    mode: &TraceMode,
) -> Result<LmlGradient> {
    let x = data.nodes();
    let t = x.len();
    let phi_x = FeatureMatrix::new(cache.assemble_rows(&modulation.coefficients(), x)?, *cache.config());
    let d_t: Vec<CsrMatrix> = modulation
        .coefficient_jacobian()
        .iter()
        .map(|j| cache.assemble_rows(j, x).map(|d| d.transpose()))
        .collect::<Result<_>>()?;
    let r: Vec<f64> = data.targets().iter().map(|y| y - mean).collect();
    let sys = SystemSolver::new(phi_x, noise_var, solver, *cg)?;
    let phi_x = sys.features();

    let (v, converged, trace_terms, noise_trace) = match mode {
        TraceMode::Hutchinson {
            probes,
            probe_kind,
            seed,
        } => {
            if *probes == 0 {
                return Err(Error::InvalidParameter("at least one probe is required".into()));
            }
            let z = hutchinson_probes(*probes, t, *probe_kind, *seed);
            let mut rhs = Vec::with_capacity(probes + 1);
            rhs.push(r.clone());
            rhs.extend(z.iter().cloned());
            let (mut sols, converged) = sys.solve_many(&rhs)?;
            let w = sols.split_off(1);
            let v = sols.pop().expect("data solve");
            let s = *probes as f64;
            let phi_t_z: Vec<Vec<f64>> = z.iter().map(|zs| phi_x.phi_t_mul(zs)).collect::<Result<_>>()?;
            let phi_t_w: Vec<Vec<f64>> = w.iter().map(|ws| phi_x.phi_t_mul(ws)).collect::<Result<_>>()?;
            let mut traces = Vec::with_capacity(d_t.len());
            for dp in &d_t {
                let mut acc = 0.0;
                for k in 0..z.len() {
                    acc += dot(&dp.mul_vec(&w[k])?, &phi_t_z[k]) + dot(&phi_t_w[k], &dp.mul_vec(&z[k])?);
                }
                traces.push(acc / s);
            }
            let noise_trace = w.iter().zip(&z).map(|(a, b)| dot(a, b)).sum::<f64>() / s;
            (v, converged, traces, noise_trace)
        }
        TraceMode::Exact => {
            let (v, converged) = sys.solve(&r)?;
            let h_inv = match &sys {
                SystemSolver::Dense { chol, .. } => chol.inverse(),
                SystemSolver::Cg { .. } => dense_system(phi_x, noise_var)?
                    .cholesky()
                    .ok_or_else(|| Error::NotPositiveDefinite("K̂_xx + σ²I is not positive definite".into()))?
                    .inverse(),
            };
            let traces = d_t
                .iter()
                .map(|dp| 2.0 * h_inv.component_mul(&phi_x.phi().gram_with(dp)).sum())
                .collect();
            (v, converged, traces, h_inv.trace())
        }
    };

    let phi_t_v = phi_x.phi_t_mul(&v)?;
    let mut grad = Vec::with_capacity(d_t.len());
    for (dp, tr) in d_t.iter().zip(trace_terms) {
        // ½ vᵀ(DΦᵀ + ΦDᵀ)v = (Dᵀv)·(Φᵀv)
        grad.push(dot(&dp.mul_vec(&v)?, &phi_t_v) - 0.5 * tr);
    }
    let log_noise = noise_var * (0.5 * dot(&v, &v) - 0.5 * noise_trace);
    let data_fit = -0.5 * dot(&r, &v);
    let log_marginal = sys
        .log_det()
        .map(|ld| data_fit - 0.5 * ld - 0.5 * t as f64 * (2.0 * PI).ln());
    Ok(LmlGradient {
        modulation: grad,
        log_noise,
        data_fit,
        log_marginal,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Graph, GeneratorKind, WalkMatrix};
    use crate::grf::{LoadRule, WalkConfig};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn cache_for(g: &Graph, seed: u64) -> Arc<WalkCache> {
        let w = WalkMatrix::normalized_adjacency(g).unwrap();
        let cfg = WalkConfig::new(6, 0.2, 4, seed).unwrap();
        Arc::new(WalkCache::sample(g, &w, &cfg, LoadRule::ImportanceWeighted).unwrap())
    }

    fn grid() -> Graph {
        generate(&GeneratorKind::Grid { rows: 5, cols: 6 }, 0).unwrap().graph
    }

    #[test]
    fn scalar_lml_closed_form() {
        let g = grid();
        let m = Modulation::diffusion_shape(1.0, 1.0, 4).unwrap();
        let model = GpModel::new(cache_for(&g, 1), m, 0.3).unwrap();
        let data = Dataset::new(vec![7], vec![0.8], 30).unwrap();
        let k = model.features().kernel_entry(7, 7) + 0.3;
        let expect = -0.64 / (2.0 * k) - 0.5 * k.ln() - 0.5 * (2.0 * PI).ln();
        assert_relative_eq!(log_marginal_likelihood(&model, &data).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn zero_features_noise_gradient_is_closed_form() {
        let g = grid();
        let m = Modulation::free(vec![0.0; 3]).unwrap();
        let model = GpModel::new(cache_for(&g, 2), m, 0.5).unwrap();
        let data = Dataset::new(vec![0, 4, 9], vec![1.0, -2.0, 0.5], 30).unwrap();
        assert_relative_eq!(
            log_marginal_likelihood(&model, &data).unwrap(),
            -5.25 / 1.0 - 1.5 * 0.5f64.ln() - 1.5 * (2.0 * PI).ln(),
            max_relative = 1e-12
        );
        let mode = TraceMode::Hutchinson {
            probes: 4,
            probe_kind: ProbeKind::Rademacher,
            seed: 0,
        };
        let grad = lml_gradient(&model, &data, &mode).unwrap();
        // ∂L/∂σ² = ½‖y‖²/σ⁴ − T/(2σ²), times σ² for the log parameter
        let d_noise = 0.5 * 5.25 / 0.25 - 3.0 / 1.0;
        assert_relative_eq!(grad.log_noise, 0.5 * d_noise, max_relative = 1e-10);
        assert!(grad.modulation.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn hutchinson_matches_exact_on_average() {
        let g = grid();
        let m = Modulation::diffusion_shape(2.0, 1.2, 4).unwrap();
        let model = GpModel::new(cache_for(&g, 3), m, 0.2)
            .unwrap()
            .with_cg(CgSettings::with_tol(1e-10));
        let nodes: Vec<usize> = (0..30).step_by(2).collect();
        let y: Vec<f64> = nodes.iter().map(|&i| (i as f64 * 0.4).sin()).collect();
        let data = Dataset::new(nodes, y, 30).unwrap();
        let exact = lml_gradient(&model, &data, &TraceMode::Exact).unwrap();
        let reps = 200;
        let mut samples = vec![Vec::new(); 3];
        for s in 0..reps {
            let mode = TraceMode::Hutchinson {
                probes: 4,
                probe_kind: ProbeKind::Rademacher,
                seed: s,
            };
            let g = lml_gradient(&model, &data, &mode).unwrap();
            samples[0].push(g.modulation[0]);
            samples[1].push(g.modulation[1]);
            samples[2].push(g.log_noise);
        }
        let targets = [exact.modulation[0], exact.modulation[1], exact.log_noise];
        for (xs, target) in samples.iter().zip(targets) {
            let mean = xs.iter().sum::<f64>() / reps as f64;
            let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
            assert!((mean - target).abs() <= 3.0 * sd / (reps as f64).sqrt() + 1e-9, "{mean} vs {target}");
        }
    }

    #[test]
    fn dense_solver_reports_exact_lml() {
        let g = grid();
        let m = Modulation::diffusion_shape(1.5, 0.9, 4).unwrap();
        let model = GpModel::new(cache_for(&g, 5), m, 0.4)
            .unwrap()
            .with_solver(SolverKind::DenseCholesky);
        let data = Dataset::new(vec![1, 5, 8, 20], vec![0.3, -0.1, 1.2, 0.0], 30).unwrap();
        let grad = lml_gradient(&model, &data, &TraceMode::Exact).unwrap();
        assert_relative_eq!(
            grad.log_marginal.unwrap(),
            log_marginal_likelihood(&model, &data).unwrap(),
            max_relative = 1e-12
        );
    }
}
