use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::graph::Graph;
use crate::seed::stream_seed;
use crate::{Error, Result};

/// Ground-truth node values with Gaussian observation noise. The noise on
/// node `i` depends only on `(seed, i)`, so every strategy querying `i`
/// sees the same observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Objective {
    values: Vec<f64>,
    noise_var: f64,
    seed: u64,
    best_node: usize,
}

impl Objective {
    pub fn new(values: Vec<f64>, noise_var: f64, seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("objective values must be finite".into()));
        }
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance must be >= 0, got {noise_var}")));
        }
        // first maximiser wins ties
        let best_node = values
            .iter()
            .enumerate()
            .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
        Ok(Self {
            values,
            noise_var,
            seed,
            best_node,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Lowest-id maximiser.
    pub fn argmax(&self) -> usize {
        self.best_node
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.best_node]
    }

    /// Noisy observation at `node`.
    pub fn observe(&self, node: usize) -> f64 {
        if self.noise_var == 0.0 {
            return self.values[node];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.seed, node as u64, 0x6f62));
        let eps: f64 = rng.sample(StandardNormal);
        self.values[node] + self.noise_var.sqrt() * eps
    }
}

/// Unweighted degree of every node as the objective.
pub fn degree_objective(g: &Graph, noise_var: f64, seed: u64) -> Result<Objective> {
    Objective::new(g.degrees().into_iter().map(|d| d as f64).collect(), noise_var, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind};

    #[test]
    fn star_hub_is_the_argmax() {
        let g = Graph::from_edges(6, (1..6).map(|i| (0, i, 1.0))).unwrap();
        let obj = degree_objective(&g, 0.0, 0).unwrap();
        assert_eq!(obj.argmax(), 0);
        assert_eq!(obj.max_value(), 5.0);
    }

    #[test]
    fn ring_ties_break_to_node_zero() {
        let g = generate(&GeneratorKind::Ring { nodes: 9, k: 2, frequency: 1 }, 0).unwrap().graph;
        let obj = degree_objective(&g, 0.0, 0).unwrap();
        assert!(obj.values().iter().all(|&v| v == 2.0));
        assert_eq!(obj.argmax(), 0);
    }

    #[test]
    fn observations_are_repeatable() {
        let obj = Objective::new(vec![0.0, 1.0, 2.0], 0.1, 4).unwrap();
        assert_eq!(obj.observe(1), obj.observe(1));
        assert_ne!(obj.observe(1), 1.0);
        assert_eq!(Objective::new(vec![3.0], 0.0, 0).unwrap().observe(0), 3.0);
        assert!(Objective::new(vec![f64::NAN], 0.0, 0).is_err());
    }
}
