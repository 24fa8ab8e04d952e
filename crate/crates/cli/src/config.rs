//! Run configuration read from a TOML file.

use std::path::{Path, PathBuf};

use grfgp::bench::{AblationConfig, ScalingConfig};
use grfgp::bo::{Strategy, ThompsonSettings};
use grfgp::graph::{GeneratorKind, WalkMatrixKind};
use grfgp::grf::DEFAULT_DENSE_CAP;
use grfgp::gp::TrainSettings;
use grfgp::regression::{KernelChoice, WalkSpec};
use grfgp::seed::serde_seed;
use grfgp::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed. Every component seed is derived from it by label.
    #[serde(default, with = "serde_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub graph: GraphSource,
    #[serde(default)]
    pub walk: WalkSpec,
    #[serde(default)]
    pub modulation: ModulationSpec,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default)]
    pub regress: RegressSettings,
    #[serde(default)]
    pub bo: BoSettings,
    #[serde(default)]
    pub bench: BenchSettings,
}

/// Exactly one of `generator` and `edge_list` must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<PathBuf>,
    /// Read a third column of edge weights.
    #[serde(default)]
    pub weighted: bool,
    /// `node,value` CSV keyed by the ids used in the edge list.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationSpec {
    pub kernel: KernelChoice,
    pub walk_matrix: WalkMatrixKind,
    pub init_beta: f64,
    pub init_sigma_f: f64,
    pub init_noise_var: f64,
}

impl Default for ModulationSpec {
    fn default() -> Self {
        Self {
            kernel: KernelChoice::DiffusionShape,
            walk_matrix: WalkMatrixKind::NormalizedAdjacency,
            init_beta: 1.0,
            init_sigma_f: 1.0,
            init_noise_var: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressSettings {
    /// Fraction of nodes observed for training; the rest are the test set.
    pub train_fraction: f64,
    /// Noise variance added to generator objectives to form observations.
    pub noise_var: f64,
    /// Walks per node to sweep over. Empty uses `walk.num_walkers` only.
    pub walks: Vec<usize>,
    /// Independent splits, each run at every sweep point.
    pub repeats: usize,
    pub dense_cap: usize,
}

impl Default for RegressSettings {
    fn default() -> Self {
        Self {
            train_fraction: 0.5,
            noise_var: 0.01,
            walks: Vec::new(),
            repeats: 1,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

/// What the BO strategies maximise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoTarget {
    /// The generator objective or the objective file.
    #[default]
    Graph,
    /// Node degree.
    Degree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoSettings {
    pub target: BoTarget,
    pub noise_var: f64,
    pub initial: usize,
    pub steps: usize,
    pub repeats: usize,
    pub strategies: Vec<Strategy>,
    pub thompson: ThompsonSettings,
}

impl Default for BoSettings {
    fn default() -> Self {
        Self {
            target: BoTarget::Graph,
            noise_var: 0.1,
            initial: 20,
            steps: 100,
            repeats: 5,
            strategies: Strategy::ALL.to_vec(),
            thompson: ThompsonSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub scaling: ScalingConfig,
    pub scaling_repeats: usize,
    pub ablation: AblationConfig,
    pub ablation_repeats: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            scaling: ScalingConfig::default(),
            scaling_repeats: 3,
            ablation: AblationConfig::default(),
            ablation_repeats: 5,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate_shape()?;
        Ok(cfg)
    }

    /// Parse `path`, resolve relative paths against its directory and check
    /// that every referenced file exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.graph.edge_list, &mut cfg.graph.objective].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn validate_shape(&self) -> Result<()> {
        match (&self.graph.generator, &self.graph.edge_list) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(Error::Config(
                    "graph needs exactly one of `generator` and `edge_list`".into(),
                ))
            }
        }
        if self.graph.generator.is_some() && self.graph.objective.is_some() {
            return Err(Error::Config("`objective` only applies to `edge_list` graphs".into()));
        }
        if self.regress.repeats == 0 || self.bo.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.bench.scaling_repeats == 0 || self.bench.ablation_repeats == 0 {
            return Err(Error::Config("bench repeats must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
seed = 7
out_dir = "results"

[graph.generator]
kind = "unimodal_grid"
rows = 10
cols = 12

[walk]
num_walkers = 50
p_halt = 0.2
l_max = 6

[modulation]
kernel = "free"

[train]
iterations = 30
learning_rate = 0.05

[regress]
walks = [1, 4, 16]
repeats = 2

[bo]
target = "degree"
strategies = ["thompson", "random"]

[bo.thompson]
retrain_every = 5
"#;

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::parse(FULL).unwrap();
        assert_eq!(cfg.walk.num_walkers, 50);
        assert_eq!(cfg.modulation.kernel, KernelChoice::Free);
        assert_eq!(cfg.bo.thompson.retrain_every, 5);
        let again = RunConfig::parse(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn shipped_configs_parse() {
        for text in [
            include_str!("../../../configs/mesh_regress.toml"),
            include_str!("../../../configs/grid_bo.toml"),
            include_str!("../../../configs/benches.toml"),
        ] {
            let cfg = RunConfig::parse(text).unwrap();
            assert_eq!(RunConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
        }
    }

    #[test]
    fn large_seed_round_trips() {
        let mut cfg = RunConfig::parse(FULL).unwrap();
        cfg.seed = u64::MAX;
        assert_eq!(RunConfig::parse(&cfg.to_toml().unwrap()).unwrap().seed, u64::MAX);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = "[graph.generator]\nkind = \"grid\"\nrows = 2\ncols = 2\n[walk]\nnum_walkers = 1\np_halt = 0.5\nl_max = 2\nwalkers = 3\n";
        assert!(matches!(RunConfig::parse(text), Err(Error::Config(_))));
        assert!(RunConfig::parse("colour = 1\n[graph]\nedge_list = \"x\"\n").is_err());
    }

    #[test]
    fn needs_exactly_one_source() {
        assert!(RunConfig::parse("[graph]\n").is_err());
        let both = "[graph]\nedge_list = \"e.txt\"\n[graph.generator]\nkind = \"grid\"\nrows = 2\ncols = 2\n";
        assert!(RunConfig::parse(both).is_err());
    }

    #[test]
    fn missing_paths_fail_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[graph]\nedge_list = \"missing.txt\"\n").unwrap();
        let err = RunConfig::load(&path).unwrap_err();
        assert!(err.to_string().contains("missing.txt"));
        std::fs::write(dir.path().join("missing.txt"), "0 1\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.graph.edge_list.unwrap(), dir.path().join("missing.txt"));
    }
}
