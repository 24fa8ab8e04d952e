//! Synthetic benchmark graphs with a ground-truth function on the nodes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::{Error, Result};

fn default_ring_k() -> usize {
    2
}

fn default_frequency() -> u32 {
    1
}

/// Generator family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorKind {
    /// Cycle on `nodes` nodes; each node links to its `k / 2` nearest
    /// neighbours on either side (`k = 2` is the plain cycle). Objective
    /// `sin(2π · frequency · i / nodes)`.
    Ring {
        nodes: usize,
        #[serde(default = "default_ring_k")]
        k: usize,
        #[serde(default = "default_frequency")]
        frequency: u32,
    },
    /// 4-connected `rows × cols` mesh with a zero objective.
    Grid { rows: usize, cols: usize },
    /// Mesh with one Gaussian bump at the centre. `width` defaults to
    /// `min(rows, cols) / 4`.
    UnimodalGrid {
        rows: usize,
        cols: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
    },
    /// Mesh with `peaks` Gaussian bumps at random centres with heights in
    /// `[0.5, 1)`. `width` defaults to `min(rows, cols) / 10`.
    MultimodalGrid {
        rows: usize,
        cols: usize,
        peaks: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        width: Option<f64>,
    },
    /// Stochastic block model. `p_in` holds one within-block probability
    /// per block, or a single value for all. Node scores in block `b` are
    /// drawn from `N(score_means[b], score_stds[b]²)`.
    Sbm {
        block_sizes: Vec<usize>,
        p_in: Vec<f64>,
        p_out: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        score_means: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        score_stds: Option<Vec<f64>>,
    },
}

/// A generated graph with its noiseless objective.
#[derive(Clone, Debug)]
pub struct Generated {
    pub graph: Graph,
    pub objective: Vec<f64>,
    /// Grid coordinates `(row, col)` for mesh kinds.
    pub positions: Option<Vec<(usize, usize)>>,
    /// Block label per node for SBM.
    pub blocks: Option<Vec<usize>>,
}

impl Generated {
    /// Observations `objective[i] + ε`, `ε ~ N(0, noise_var)`, for the given
    /// nodes. The noise stream depends only on `seed`.
    pub fn noisy_observations(&self, nodes: &[usize], noise_var: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = noise_var.max(0.0).sqrt();
        nodes
            .iter()
            .map(|&i| self.objective[i] + sd * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect()
    }
}

fn grid_graph(rows: usize, cols: usize) -> Result<(Graph, Vec<(usize, usize)>)> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid sides must be >= 2, got {rows}x{cols}"
        )));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c), 1.0));
            }
        }
    }
    let positions = (0..rows * cols).map(|i| (i / cols, i % cols)).collect();
    Ok((Graph::from_edges(rows * cols, edges)?, positions))
}

fn bump(pos: (usize, usize), center: (f64, f64), width: f64) -> f64 {
    let dr = pos.0 as f64 - center.0;
    let dc = pos.1 as f64 - center.1;
    (-(dr * dr + dc * dc) / (2.0 * width * width)).exp()
}

fn check_width(width: f64) -> Result<f64> {
    if width.is_finite() && width > 0.0 {
        Ok(width)
    } else {
        Err(Error::InvalidParameter(format!("bump width must be positive, got {width}")))
    }
}

/// Build the graph and objective for `kind`. Deterministic given `seed`.
pub fn generate(kind: &GeneratorKind, seed: u64) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GeneratorKind::Ring { nodes, k, frequency } => {
            let n = *nodes;
            if n < 3 {
                return Err(Error::InvalidParameter(format!("ring needs >= 3 nodes, got {n}")));
            }
            if *k < 2 || k % 2 != 0 || *k >= n {
                return Err(Error::InvalidParameter(format!(
                    "ring k must be even, >= 2 and < nodes, got {k}"
                )));
            }
            let edges = (0..n).flat_map(|i| (1..=k / 2).map(move |s| (i, (i + s) % n, 1.0)));
            let graph = Graph::from_edges(n, edges)?;
            let objective = (0..n)
                .map(|i| (std::f64::consts::TAU * f64::from(*frequency) * i as f64 / n as f64).sin())
                .collect();
            Ok(Generated {
                graph,
                objective,
                positions: None,
                blocks: None,
            })
        }
        GeneratorKind::Grid { rows, cols } => {
            let (graph, positions) = grid_graph(*rows, *cols)?;
            Ok(Generated {
                objective: vec![0.0; graph.num_nodes()],
                graph,
                positions: Some(positions),
                blocks: None,
            })
        }
        GeneratorKind::UnimodalGrid { rows, cols, width } => {
            let (graph, positions) = grid_graph(*rows, *cols)?;
            let width = check_width(width.unwrap_or((*rows).min(*cols) as f64 / 4.0))?;
            let center = ((*rows as f64 - 1.0) / 2.0, (*cols as f64 - 1.0) / 2.0);
            let objective = positions.iter().map(|&p| bump(p, center, width)).collect();
            Ok(Generated {
                graph,
                objective,
                positions: Some(positions),
                blocks: None,
            })
        }
        GeneratorKind::MultimodalGrid {
            rows,
            cols,
            peaks,
            width,
        } => {
            if *peaks == 0 {
                return Err(Error::InvalidParameter("multimodal grid needs >= 1 peak".into()));
            }
            let (graph, positions) = grid_graph(*rows, *cols)?;
            let width = check_width(width.unwrap_or((*rows).min(*cols) as f64 / 10.0))?;
            let bumps: Vec<((f64, f64), f64)> = (0..*peaks)
                .map(|_| {
                    let c = (
                        rng.random_range(0.0..(*rows - 1) as f64),
                        rng.random_range(0.0..(*cols - 1) as f64),
                    );
                    (c, rng.random_range(0.5..1.0))
                })
                .collect();
            let objective = positions
                .iter()
                .map(|&p| bumps.iter().map(|&(c, h)| h * bump(p, c, width)).sum())
                .collect();
            Ok(Generated {
                graph,
                objective,
                positions: Some(positions),
                blocks: None,
            })
        }
        GeneratorKind::Sbm {
            block_sizes,
            p_in,
            p_out,
            score_means,
            score_stds,
        } => {
            let nb = block_sizes.len();
            if nb == 0 || block_sizes.contains(&0) {
                return Err(Error::InvalidParameter("SBM block sizes must be >= 1".into()));
            }
            if p_in.len() != 1 && p_in.len() != nb {
                return Err(Error::InvalidParameter(format!(
                    "p_in must have 1 or {nb} entries, got {}",
                    p_in.len()
                )));
            }
            let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
            if !p_in.iter().all(|&p| prob_ok(p)) || !prob_ok(*p_out) {
                return Err(Error::InvalidParameter("SBM probabilities must lie in [0, 1]".into()));
            }
            let means = score_means.clone().unwrap_or_else(|| (0..nb).map(|b| b as f64).collect());
            let stds = score_stds.clone().unwrap_or_else(|| vec![0.1; nb]);
            if means.len() != nb || stds.len() != nb || stds.iter().any(|&s| !(s >= 0.0)) {
                return Err(Error::InvalidParameter(
                    "SBM score means/stds must have one nonnegative entry per block".into(),
                ));
            }
            let blocks: Vec<usize> = block_sizes
                .iter()
                .enumerate()
                .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
                .collect();
            let n = blocks.len();
            let pin = |b: usize| if p_in.len() == 1 { p_in[0] } else { p_in[b] };
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let p = if blocks[i] == blocks[j] { pin(blocks[i]) } else { *p_out };
                    // Draw for every pair so the stream layout is independent of p.
                    let u: f64 = rng.random();
                    if u < p {
                        edges.push((i, j, 1.0));
                    }
                }
            }
            let graph = Graph::from_edges(n, edges)?;
            let objective = blocks
                .iter()
                .map(|&b| {
                    let d = Normal::new(means[b], stds[b]).expect("validated std");
                    d.sample(&mut rng)
                })
                .collect();
            Ok(Generated {
                graph,
                objective,
                positions: None,
                blocks: Some(blocks),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_30_by_30() {
        let g = generate(&GeneratorKind::Grid { rows: 30, cols: 30 }, 0).unwrap();
        assert_eq!(g.graph.num_nodes(), 900);
        assert_eq!(g.graph.num_edges(), 2 * 30 * 29);
        assert!(g.graph.degrees().iter().all(|&d| (2..=4).contains(&d)));
    }

    #[test]
    fn ring_degrees() {
        let g = generate(&GeneratorKind::Ring { nodes: 10, k: 2, frequency: 1 }, 0).unwrap();
        assert!(g.graph.degrees().iter().all(|&d| d == 2));
        assert_eq!(g.graph.num_edges(), 10);
        let g4 = generate(&GeneratorKind::Ring { nodes: 10, k: 4, frequency: 1 }, 0).unwrap();
        assert!(g4.graph.degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn sbm_degenerate_probabilities_give_cliques() {
        let kind = GeneratorKind::Sbm {
            block_sizes: vec![5, 5],
            p_in: vec![1.0],
            p_out: 0.0,
            score_means: None,
            score_stds: None,
        };
        let g = generate(&kind, 3).unwrap();
        assert_eq!(g.graph.num_edges(), 2 * 10);
        for (i, j, _) in g.graph.edges() {
            assert_eq!(i / 5, j / 5);
        }
        assert!(g.graph.degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn generation_is_reproducible() {
        let kind = GeneratorKind::Sbm {
            block_sizes: vec![20, 30],
            p_in: vec![0.3, 0.2],
            p_out: 0.02,
            score_means: Some(vec![0.0, 1.0]),
            score_stds: Some(vec![0.5, 0.5]),
        };
        let a = generate(&kind, 11).unwrap();
        let b = generate(&kind, 11).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.objective, b.objective);
        let c = generate(&kind, 12).unwrap();
        assert_ne!(a.objective, c.objective);

        let mm = GeneratorKind::MultimodalGrid { rows: 10, cols: 12, peaks: 3, width: None };
        assert_eq!(generate(&mm, 5).unwrap().objective, generate(&mm, 5).unwrap().objective);
    }

    #[test]
    fn unimodal_peak_is_central() {
        let g = generate(&GeneratorKind::UnimodalGrid { rows: 5, cols: 5, width: None }, 0).unwrap();
        let (argmax, _) = g
            .objective
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert_eq!(argmax, 12);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(generate(&GeneratorKind::Grid { rows: 1, cols: 5 }, 0).is_err());
        assert!(generate(&GeneratorKind::Ring { nodes: 2, k: 2, frequency: 1 }, 0).is_err());
        assert!(generate(&GeneratorKind::Ring { nodes: 9, k: 3, frequency: 1 }, 0).is_err());
        let bad = GeneratorKind::Sbm {
            block_sizes: vec![3, 0],
            p_in: vec![0.5],
            p_out: 0.1,
            score_means: None,
            score_stds: None,
        };
        assert!(generate(&bad, 0).is_err());
        let bad_p = GeneratorKind::Sbm {
            block_sizes: vec![3, 3],
            p_in: vec![1.5],
            p_out: 0.1,
            score_means: None,
            score_stds: None,
        };
        assert!(generate(&bad_p, 0).is_err());
    }
}
