use serde::{Deserialize, Serialize};

use super::lml::{gradient_at, TraceMode};
use super::{log_marginal_likelihood, Dataset, GpModel};
use crate::seed::{serde_seed, stream_seed};
use crate::solvers::ProbeKind;
use crate::{Error, Result};

/// Adaptive-moment ascent on the log marginal likelihood.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub learning_rate: f64,
    pub iterations: usize,
    /// Hutchinson probes per gradient.
    pub probes: usize,
    pub probe_kind: ProbeKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Use the dense trace instead of probes (small training sets only).
    pub exact_trace: bool,
    pub learn_noise: bool,
    pub learn_modulation: bool,
    /// Floor on `σ²` to keep the system well conditioned.
    pub min_noise_var: f64,
    /// Also record the exact dense log marginal likelihood each iteration.
    pub record_exact_lml: bool,
    /// Probe stream seed.
    #[serde(with = "serde_seed")]
    pub seed: u64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            iterations: 1000,
            probes: 10,
            probe_kind: ProbeKind::Rademacher,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            exact_trace: false,
            learn_noise: true,
            learn_modulation: true,
            min_noise_var: 1e-4,
            record_exact_lml: false,
            seed: 0,
        }
    }
}

impl TrainSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.learning_rate, self.epsilon, self.min_noise_var];
        if positive.iter().any(|v| !(*v > 0.0))
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
            || (!self.exact_trace && self.probes == 0)
        {
            return Err(Error::InvalidParameter(format!("invalid training settings {self:?}")));
        }
        Ok(())
    }

    fn trace_mode(&self, iteration: usize) -> TraceMode {
        if self.exact_trace {
            TraceMode::Exact
        } else {
            TraceMode::Hutchinson {
                probes: self.probes,
                probe_kind: self.probe_kind,
                seed: stream_seed(self.seed, iteration as u64, 0x7072),
            }
        }
    }
}

/// Adam state for maximisation.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(dim: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
        }
    }

    pub fn from_settings(dim: usize, s: &TrainSettings) -> Self {
        Self::new(dim, s.learning_rate, s.beta1, s.beta2, s.epsilon)
    }

    /// One ascent step `θ ← θ + lr · m̂ / (√v̂ + ε)`.
    pub fn ascend(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for k in 0..params.len() {
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * grad[k];
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * grad[k] * grad[k];
            params[k] += self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + self.eps);
        }
    }
}

/// One row of the optimisation history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainStep {
    pub iteration: usize,
    /// `−½ rᵀH⁻¹r` before the step.
    pub data_fit: f64,
    /// Exact log marginal likelihood when available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_marginal: Option<f64>,
}

/// Maximise the marginal likelihood. The walks stay fixed; only their
/// deposits change with the modulation.
pub fn train(model: &GpModel, data: &Dataset, settings: &TrainSettings) -> Result<(GpModel, Vec<TrainStep>)> {
    settings.validate()?;
    let cache = model.cache().clone();
    let mut modulation = model.modulation().clone();
    let nm = modulation.num_params();
    let mut params = modulation.params();
    params.push(model.noise_var().max(settings.min_noise_var).ln());
    let log_floor = settings.min_noise_var.ln();
    let mut adam = Adam::from_settings(params.len(), settings);
    let mut history = Vec::with_capacity(settings.iterations);
    let mut scratch = model.clone();
    for it in 0..settings.iterations {
        let noise_var = params[nm].exp();
        let grad = gradient_at(
            &cache,
            &modulation,
            noise_var,
            model.mean(),
            model.solver(),
            model.cg(),
            data,
            &settings.trace_mode(it),
        )?;
        let mut log_marginal = grad.log_marginal;
        if settings.record_exact_lml && log_marginal.is_none() {
            scratch.set_hyperparameters(modulation.clone(), noise_var)?;
            log_marginal = Some(log_marginal_likelihood(&scratch, data)?);
        }
        let mut g: Vec<f64> = grad.modulation.clone();
        g.push(grad.log_noise);
        if !settings.learn_modulation {
            g[..nm].iter_mut().for_each(|x| *x = 0.0);
        }
        if !settings.learn_noise {
            g[nm] = 0.0;
        }
        if !grad.data_fit.is_finite() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergence { iteration: it });
        }
        history.push(TrainStep {
            iteration: it,
            data_fit: grad.data_fit,
            log_marginal,
        });
        adam.ascend(&mut params, &g);
        params[nm] = params[nm].max(log_floor);
        modulation = modulation
            .with_params(&params[..nm])
            .map_err(|_| Error::Divergence { iteration: it })?;
    }
    let mut out = model.clone();
    out.set_hyperparameters(modulation, params[nm].exp())?;
    Ok((out, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind, WalkMatrix};
    use crate::grf::{LoadRule, Modulation, WalkCache, WalkConfig};
    use std::sync::Arc;

    fn setup(modulation: Modulation) -> GpModel {
        let g = generate(&GeneratorKind::Grid { rows: 6, cols: 6 }, 0).unwrap().graph;
        let w = WalkMatrix::normalized_adjacency(&g).unwrap();
        let cfg = WalkConfig::new(8, 0.2, 4, 1).unwrap();
        let cache = Arc::new(WalkCache::sample(&g, &w, &cfg, LoadRule::ImportanceWeighted).unwrap());
        GpModel::new(cache, modulation, 1.0).unwrap()
    }

    #[test]
    fn zero_iterations_leave_model_unchanged() {
        let model = setup(Modulation::diffusion_shape(2.0, 1.0, 4).unwrap());
        let data = Dataset::new(vec![0, 1], vec![0.5, -0.5], 36).unwrap();
        let s = TrainSettings {
            iterations: 0,
            ..Default::default()
        };
        let (out, hist) = train(&model, &data, &s).unwrap();
        assert!(hist.is_empty());
        assert_eq!(out.modulation(), model.modulation());
        assert_eq!(out.noise_var(), model.noise_var());
    }

    #[test]
    fn noise_only_data_recovers_second_moment() {
        let model = setup(Modulation::free(vec![0.0; 3]).unwrap());
        let nodes: Vec<usize> = (0..36).collect();
        let y: Vec<f64> = nodes.iter().map(|&i| 1.5 * ((i * 7 % 11) as f64 / 5.0 - 1.0)).collect();
        let second = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64;
        let data = Dataset::new(nodes, y, 36).unwrap();
        let s = TrainSettings {
            iterations: 500,
            ..Default::default()
        };
        let (out, _) = train(&model, &data, &s).unwrap();
        assert!((out.noise_var() - second).abs() < 0.05 * second, "{} vs {second}", out.noise_var());
        assert_eq!(out.modulation(), model.modulation());
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        let mut adam = Adam::new(2, 0.1, 0.9, 0.999, 1e-8);
        let mut p = vec![0.0, 0.0];
        adam.ascend(&mut p, &[3.0, -0.5]);
        assert!((p[0] - 0.1).abs() < 1e-6 && (p[1] + 0.1).abs() < 1e-6);
    }

    #[test]
    fn settings_round_trip_toml() {
        let s = TrainSettings {
            seed: u64::MAX,
            ..Default::default()
        };
        let text = toml::to_string(&s).unwrap();
        assert_eq!(toml::from_str::<TrainSettings>(&text).unwrap(), s);
    }
}
