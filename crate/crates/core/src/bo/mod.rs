//! Bayesian optimisation over graph nodes: GRF Thompson sampling and the
//! random, breadth-first and depth-first search baselines.

mod objective;
mod search;
mod thompson;
mod trace;

pub use objective::{degree_objective, Objective};
pub use search::{bfs_order, bfs_search, dfs_order, dfs_search, initial_nodes, random_search};
pub use thompson::{thompson_sampling, ThompsonSettings};
pub use trace::{BoRecord, BoTrace};

use serde::{Deserialize, Serialize};

/// The four acquisition strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Thompson,
    Random,
    Bfs,
    Dfs,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Thompson, Strategy::Random, Strategy::Bfs, Strategy::Dfs];

    pub fn label(self) -> &'static str {
        match self {
            Self::Thompson => "thompson",
            Self::Random => "random",
            Self::Bfs => "bfs",
            Self::Dfs => "dfs",
        }
    }
}
