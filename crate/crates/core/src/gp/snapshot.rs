use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{GpModel, SolverKind, TrainStep};
use crate::graph::{Graph, WalkMatrixKind};
use crate::grf::{LoadRule, Modulation, WalkCache, WalkConfig};
use crate::solvers::CgSettings;
use crate::{Error, Result};

/// Everything needed to rebuild a trained model on the same graph. The walks
/// are resampled from their seed, which reproduces them exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSnapshot {
    pub modulation: Modulation,
    pub noise_var: f64,
    pub mean: f64,
    pub walk: WalkConfig,
    pub walk_matrix: WalkMatrixKind,
    pub load_rule: LoadRule,
    pub cg: CgSettings,
    pub solver: SolverKind,
    #[serde(default)]
    pub history: Vec<TrainStep>,
}

impl GpModel {
    pub fn snapshot(&self, walk_matrix: WalkMatrixKind, history: Vec<TrainStep>) -> ModelSnapshot {
        ModelSnapshot {
            modulation: self.modulation().clone(),
            noise_var: self.noise_var(),
            mean: self.mean(),
            walk: *self.cache().config(),
            walk_matrix,
            load_rule: self.cache().rule(),
            cg: *self.cg(),
            solver: self.solver(),
            history,
        }
    }
}

impl ModelSnapshot {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Resample the walks on `g` and rebuild the model.
    pub fn restore(&self, g: &Graph) -> Result<GpModel> {
        let walk = self.walk_matrix.build(g)?;
        let cache = Arc::new(WalkCache::sample(g, &walk, &self.walk, self.load_rule)?);
        Ok(GpModel::new(cache, self.modulation.clone(), self.noise_var)?
            .with_mean(self.mean)
            .with_cg(self.cg)
            .with_solver(self.solver))
    }
}
