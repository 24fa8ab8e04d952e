//! End-to-end regression: standardise, train, condition, predict, score.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::gp::{
    metrics, train, Dataset, ExactDiffusionGp, GpModel, LaplacianEigen, Metrics, Standardizer,
    TrainSettings, TrainStep,
};
use crate::graph::{Graph, WalkMatrixKind};
use crate::grf::{LoadRule, Modulation, WalkCache, WalkConfig, DEFAULT_DENSE_CAP};
use crate::seed::{derive_seed, serde_seed};
use crate::solvers::CgSettings;
use crate::{Error, Result};

/// Which kernel family to fit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    /// Dense `σ_f² exp(−β L̃)` through an eigendecomposition.
    ExactDiffusion,
    /// GRFs with the diffusion-shape modulation, learning `β` and `σ_f`.
    #[default]
    DiffusionShape,
    /// GRFs with every modulation coefficient learned.
    Free,
    /// Diffusion-shape modulation on walks without importance weights.
    AdHoc,
}

impl KernelChoice {
    pub fn label(self) -> &'static str {
        match self {
            Self::ExactDiffusion => "exact_diffusion",
            Self::DiffusionShape => "diffusion_shape",
            Self::Free => "free",
            Self::AdHoc => "ad_hoc",
        }
    }
}

/// Walk sampling parameters without the seed, which is derived per run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSpec {
    pub num_walkers: usize,
    pub p_halt: f64,
    pub l_max: usize,
}

impl Default for WalkSpec {
    fn default() -> Self {
        Self {
            num_walkers: 100,
            p_halt: 0.1,
            l_max: 10,
        }
    }
}

impl WalkSpec {
    pub fn with_seed(&self, seed: u64) -> Result<WalkConfig> {
        WalkConfig::new(self.num_walkers, self.p_halt, self.l_max, seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionConfig {
    pub kernel: KernelChoice,
    pub walk: WalkSpec,
    pub walk_matrix: WalkMatrixKind,
    pub init_beta: f64,
    pub init_sigma_f: f64,
    pub init_noise_var: f64,
    pub train: TrainSettings,
    pub cg: CgSettings,
    /// Largest graph the exact kernel accepts.
    pub dense_cap: usize,
    /// Seed for the walks, the free-coefficient initialisation and the probes.
    #[serde(with = "serde_seed")]
    pub seed: u64,
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            kernel: KernelChoice::default(),
            walk: WalkSpec::default(),
            walk_matrix: WalkMatrixKind::NormalizedAdjacency,
            init_beta: 1.0,
            init_sigma_f: 1.0,
            init_noise_var: 0.1,
            train: TrainSettings::default(),
            cg: CgSettings::default(),
            dense_cap: DEFAULT_DENSE_CAP,
            seed: 0,
        }
    }
}

/// Held-out nodes and their observed values.
#[derive(Clone, Debug)]
pub struct TestSet {
    pub nodes: Vec<usize>,
    pub targets: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RegressionOutput {
    pub kernel: KernelChoice,
    pub metrics: Metrics,
    /// Predictive mean at every node, in target units.
    pub mean: Vec<f64>,
    /// Latent predictive standard deviation at every node, in target units.
    pub std: Vec<f64>,
    /// Learned observation noise variance in target units.
    pub noise_var: f64,
    pub history: Vec<TrainStep>,
    /// Trained GRF model, in standardised units. `None` for the exact kernel.
    pub model: Option<GpModel>,
}

/// Fit `config.kernel` to `train_data` and score it on `test`.
pub fn run_regression(
    g: &Graph,
    train_data: &Dataset,
    test: &TestSet,
    config: &RegressionConfig,
) -> Result<RegressionOutput> {
    if test.nodes.len() != test.targets.len() {
        return Err(Error::DimensionMismatch {
            expected: test.nodes.len(),
            found: test.targets.len(),
        });
    }
    if test.nodes.iter().any(|&i| i >= g.num_nodes()) {
        return Err(Error::InvalidParameter("test node outside the graph".into()));
    }
    let scaler = Standardizer::fit(train_data.targets());
    let data = train_data.map_targets(|y| scaler.forward(y));
    let all: Vec<usize> = (0..g.num_nodes()).collect();
    let mut settings = config.train.clone();
    settings.seed = derive_seed(config.seed, "probes");

    let (mean, var, noise_var, history, model) = match config.kernel {
        KernelChoice::ExactDiffusion => {
            let eigen = Arc::new(LaplacianEigen::new(g, config.dense_cap)?);
            let gp = ExactDiffusionGp::new(eigen, config.init_beta, config.init_sigma_f, config.init_noise_var)?;
            let (gp, history) = gp.train(&data, &settings)?;
            let (mean, var) = gp.predict(&data, &all)?;
            (mean, var, gp.noise_var, history, None)
        }
        kind => {
            let walk = config.walk.with_seed(derive_seed(config.seed, "walks"))?;
            let matrix = config.walk_matrix.build(g)?;
            let rule = if kind == KernelChoice::AdHoc {
                LoadRule::AdHoc
            } else {
                LoadRule::ImportanceWeighted
            };
            let cache = Arc::new(WalkCache::sample(g, &matrix, &walk, rule)?);
            let modulation = match kind {
                KernelChoice::Free => Modulation::free_random(walk.l_max, derive_seed(config.seed, "modulation")),
                _ => Modulation::diffusion_shape(config.init_beta, config.init_sigma_f, walk.l_max)?,
            };
            let model = GpModel::new(cache, modulation, config.init_noise_var)?.with_cg(config.cg);
            let (model, history) = train(&model, &data, &settings)?;
            let mut post = model.condition(&data)?;
            let mean = post.mean_all()?;
            let var = post.variances(&all)?;
            let noise = model.noise_var();
            (mean, var, noise, history, Some(model))
        }
    };

    let mean: Vec<f64> = mean.iter().map(|&m| scaler.inverse(m)).collect();
    let var: Vec<f64> = var.iter().map(|&v| scaler.inverse_variance(v)).collect();
    let noise_var = scaler.inverse_variance(noise_var);
    let test_mean: Vec<f64> = test.nodes.iter().map(|&i| mean[i]).collect();
    let test_var: Vec<f64> = test.nodes.iter().map(|&i| var[i]).collect();
    let metrics = metrics(&test_mean, &test_var, noise_var, &test.targets)?;
    Ok(RegressionOutput {
        kernel: config.kernel,
        metrics,
        mean,
        std: var.iter().map(|v| v.sqrt()).collect(),
        noise_var,
        history,
        model,
    })
}
