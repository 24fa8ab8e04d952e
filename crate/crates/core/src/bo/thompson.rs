use serde::{Deserialize, Serialize};

use super::search::initialise;
use super::{BoTrace, Objective};
use crate::gp::{train, Dataset, GpModel, Standardizer, TrainSettings};
use crate::seed::stream_seed;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThompsonSettings {
    /// Retrain the hyperparameters every this many steps, warm-started
    /// from the previous fit. `1` retrains at every step.
    pub retrain_every: usize,
    /// Optimiser settings for each retrain. The probe seed is replaced per
    /// step.
    pub train: TrainSettings,
}

impl Default for ThompsonSettings {
    fn default() -> Self {
        Self {
            retrain_every: 10,
            train: TrainSettings {
                learning_rate: 0.05,
                iterations: 50,
                ..TrainSettings::default()
            },
        }
    }
}

/// GRF Thompson sampling. Each step draws one pathwise posterior sample
/// over all nodes and queries its maximiser among the unobserved nodes.
/// Targets are standardised before every fit.
pub fn thompson_sampling(
    template: &GpModel,
    objective: &Objective,
    n0: usize,
    steps: usize,
    settings: &ThompsonSettings,
    seed: u64,
) -> Result<BoTrace> {
    let n = objective.len();
    if template.num_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: template.num_nodes(),
        });
    }
    if n0 == 0 || n0 + steps > n || settings.retrain_every == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N0, N0 + T <= N and retrain_every >= 1, got N0 = {n0}, T = {steps}, N = {n}"
        )));
    }
    let mut trace = initialise(objective, n0, seed);
    let mut model = template.clone();
    for t in 1..=steps {
        let y = trace.observations();
        let scaler = Standardizer::fit(&y);
        let data = Dataset::new(trace.nodes(), y.iter().map(|&v| scaler.forward(v)).collect(), n)?;
        if (t - 1) % settings.retrain_every == 0 && settings.train.iterations > 0 {
            let s = TrainSettings {
                seed: stream_seed(seed, t as u64, 0x7472),
                ..settings.train.clone()
            };
            model = train(&model, &data, &s)?.0;
        }
        let mut post = model.condition(&data)?;
        let sample = post.sample(stream_seed(seed, t as u64, 0x7473))?;
        let next = sample
            .iter()
            .enumerate()
            .filter(|&(i, _)| !trace.is_observed(i))
            .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            });
        match next {
            Some((node, _)) => {
                trace.query(objective, t as i64, node);
            }
            None => break,
        }
    }
    Ok(trace)
}
