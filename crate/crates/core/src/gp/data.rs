use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Observations `y_t` at distinct nodes `x_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    nodes: Vec<usize>,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(nodes: Vec<usize>, targets: Vec<f64>, num_nodes: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InsufficientData("a dataset needs at least one observation".into()));
        }
        if nodes.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: targets.len(),
            });
        }
        let mut seen = vec![false; num_nodes];
        for &i in &nodes {
            if i >= num_nodes {
                return Err(Error::InvalidParameter(format!("node {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidParameter(format!("node {i} observed twice")));
            }
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter("targets must be finite".into()));
        }
        Ok(Self { nodes, targets })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Same nodes with transformed targets.
    pub fn map_targets(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            targets: self.targets.iter().map(|&y| f(y)).collect(),
        }
    }
}

/// Affine map to zero mean and unit variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: f64,
    pub scale: f64,
}

impl Standardizer {
    /// Fit to `y`; a constant `y` keeps unit scale.
    pub fn fit(y: &[f64]) -> Self {
        let n = y.len().max(1) as f64;
        let mean = y.iter().sum::<f64>() / n;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        Self { mean, scale }
    }

    pub fn forward(&self, y: f64) -> f64 {
        (y - self.mean) / self.scale
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.scale + self.mean
    }

    pub fn inverse_variance(&self, v: f64) -> f64 {
        v * self.scale * self.scale
    }
}

/// Split `0..num_nodes` into sorted train and test node lists with
/// `round(fraction · N)` (at least one) training nodes.
pub fn train_test_split(num_nodes: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("train fraction {fraction} not in (0, 1]")));
    }
    let mut order: Vec<usize> = (0..num_nodes).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let t = ((fraction * num_nodes as f64).round() as usize).clamp(1, num_nodes);
    let mut train = order[..t].to_vec();
    let mut test = order[t..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(vec![0, 2], vec![1.0, 2.0], 3).is_ok());
        assert!(Dataset::new(vec![0, 0], vec![1.0, 2.0], 3).is_err());
        assert!(Dataset::new(vec![3], vec![1.0], 3).is_err());
        assert!(Dataset::new(vec![0], vec![1.0, 2.0], 3).is_err());
        assert!(Dataset::new(vec![], vec![], 3).is_err());
    }

    #[test]
    fn standardizer_round_trip() {
        let y = [1.0, 2.0, 4.0, 9.0];
        let s = Standardizer::fit(&y);
        let z: Vec<f64> = y.iter().map(|&v| s.forward(v)).collect();
        assert!(z.iter().sum::<f64>().abs() < 1e-12);
        assert!((z.iter().map(|v| v * v).sum::<f64>() / 4.0 - 1.0).abs() < 1e-12);
        for (a, b) in y.iter().zip(&z) {
            assert!((s.inverse(*b) - a).abs() < 1e-12);
        }
        assert_eq!(Standardizer::fit(&[3.0, 3.0]).scale, 1.0);
    }

    #[test]
    fn split_partitions_nodes() {
        let (tr, te) = train_test_split(100, 0.1, 4).unwrap();
        assert_eq!(tr.len(), 10);
        assert_eq!(te.len(), 90);
        let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(train_test_split(100, 0.1, 4).unwrap().0, tr);
    }
}
