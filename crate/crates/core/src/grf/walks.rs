//! Importance-sampled random walks and the deposits they leave.
//!
//! A walker starts at node `i` with load 1. At each visit it deposits
//! `load · f(length)` at the current node, then steps to a uniformly chosen
//! neighbour, multiplying the load by `deg(current) / (1 − p_halt) · W[current, next]`
//! (the inverse probability of the step times the traversed weight), and
//! halts with probability `p_halt`. A prefix of length `l` is therefore
//! deposited with probability `(1 − p_halt)^l` and carries exactly the
//! reciprocal of that probability, which makes `E[φ(i)]` the `i`-th row of
//! `Σ_l f_l W^l`.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use super::{FeatureMatrix, Modulation};
use crate::graph::{Graph, WalkMatrix};
use crate::seed::{serde_seed, stream_seed};
use crate::{exec, Error, Result};

/// Walk sampler settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkConfig {
    /// Walkers per node, `n`.
    pub num_walkers: usize,
    pub p_halt: f64,
    /// Walks are cut after this many steps.
    pub l_max: usize,
    #[serde(with = "serde_seed")]
    pub seed: u64,
}

impl WalkConfig {
    pub fn new(num_walkers: usize, p_halt: f64, l_max: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            num_walkers,
            p_halt,
            l_max,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_walkers == 0 {
            return Err(Error::InvalidParameter("num_walkers must be >= 1".into()));
        }
        if !(self.p_halt > 0.0 && self.p_halt < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p_halt must lie in (0, 1), got {}",
                self.p_halt
            )));
        }
        if self.l_max > u8::MAX as usize {
            return Err(Error::InvalidParameter(format!("l_max {} exceeds 255", self.l_max)));
        }
        Ok(())
    }

    /// Practical defaults: `n = ⌈4 × average degree⌉`, `p_halt = 0.1`,
    /// `l_max = max(3, ⌈diameter / 10⌉)` capped at 10.
    pub fn recommended(g: &Graph, seed: u64) -> Self {
        let n = (4.0 * g.average_degree()).ceil().max(1.0) as usize;
        let diameter = g.approximate_diameter();
        let l_max = diameter.div_ceil(10).clamp(3, 10);
        Self {
            num_walkers: n,
            p_halt: 0.1,
            l_max,
            seed,
        }
    }
}

/// How the load is updated on each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadRule {
    /// `load ← load · deg / (1 − p_halt) · W[cur, next]`; unbiased.
    #[default]
    ImportanceWeighted,
    /// `load ← load · W[cur, next]`; drops the inverse-probability factor.
    /// Still positive semidefinite, but biased.
    AdHoc,
}

fn check_inputs(g: &Graph, walk: &WalkMatrix, cfg: &WalkConfig) -> Result<()> {
    cfg.validate()?;
    if !walk.is_compatible(g) {
        return Err(Error::DimensionMismatch {
            expected: g.num_entries(),
            found: walk.values().len(),
        });
    }
    Ok(())
}

/// Run the `n` walks out of `node`, calling `deposit(col, length, load)` at
/// every visit. Each walker has its own stream keyed by `(seed, node, walker)`.
fn simulate_node<F>(
    g: &Graph,
    walk: &WalkMatrix,
    cfg: &WalkConfig,
    rule: LoadRule,
    l_max: usize,
    node: usize,
    mut deposit: F,
) -> Result<()>
where
    F: FnMut(usize, usize, f64),
{
    let inv_keep = 1.0 / (1.0 - cfg.p_halt);
    for walker in 0..cfg.num_walkers {
        let mut rng =
            Xoshiro256PlusPlus::seed_from_u64(stream_seed(cfg.seed, node as u64, walker as u64));
        let mut current = node;
        let mut load = 1.0f64;
        let mut length = 0usize;
        loop {
            deposit(current, length, load);
            if length == l_max {
                break;
            }
            let nbrs = g.neighbors(current);
            if nbrs.is_empty() {
                break;
            }
            let k = rng.random_range(0..nbrs.len());
            let w = walk.row(g, current)[k];
            load *= match rule {
                LoadRule::ImportanceWeighted => nbrs.len() as f64 * inv_keep * w,
                LoadRule::AdHoc => w,
            };
            if !load.is_finite() {
                return Err(Error::NonFiniteLoad { node, walker });
            }
            current = nbrs[k] as usize;
            length += 1;
            if rng.random::<f64>() < cfg.p_halt {
                break;
            }
        }
    }
    Ok(())
}

/// Sparse accumulator over `slots` positions with generation stamps, so a
/// row can be reset in time proportional to what it touched.
struct Accumulator {
    values: Vec<f64>,
    stamps: Vec<u32>,
    generation: u32,
    touched: Vec<usize>,
}

impl Accumulator {
    fn new(slots: usize) -> Self {
        Self {
            values: vec![0.0; slots],
            stamps: vec![0; slots],
            generation: 0,
            touched: Vec::new(),
        }
    }

    fn begin(&mut self) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamps.fill(0);
            self.generation = 1;
        }
        self.touched.clear();
    }

    #[inline]
    fn add(&mut self, slot: usize, v: f64) {
        if self.stamps[slot] != self.generation {
            self.stamps[slot] = self.generation;
            self.values[slot] = v;
            self.touched.push(slot);
        } else {
            self.values[slot] += v;
        }
    }

    /// Touched slots in increasing order with `value × scale`.
    fn drain_sorted(&mut self, scale: f64) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.touched.sort_unstable();
        let values = &self.values;
        self.touched.iter().map(move |&s| (s, values[s] * scale))
    }
}

fn sample_with_rule(
    g: &Graph,
    walk: &WalkMatrix,
    modulation: &Modulation,
    cfg: &WalkConfig,
    rule: LoadRule,
) -> Result<FeatureMatrix> {
    check_inputs(g, walk, cfg)?;
    let n = g.num_nodes();
    let l_max = cfg.l_max.min(modulation.l_max());
    let f = modulation.coefficients();
    let scale = 1.0 / cfg.num_walkers as f64;
    let rows = exec::map_indices_with(
        n,
        || Accumulator::new(n),
        |acc, node| -> Result<Vec<(u32, f64)>> {
            acc.begin();
            simulate_node(g, walk, cfg, rule, l_max, node, |col, len, load| {
                let fl = f[len];
                if fl != 0.0 {
                    acc.add(col, fl * load);
                }
            })?;
            Ok(acc.drain_sorted(scale).map(|(c, v)| (c as u32, v)).collect())
        },
    );
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(FeatureMatrix::new(CsrMatrix::from_sorted_rows(n, rows)?, *cfg))
}

/// GRFs `φ(i)` for every node, with `E[φ(i)ᵀφ(j)] = [ΨᵀΨ]_ij` for `i ≠ j`
/// where `Ψ = Σ_{l ≤ l_max} f_l · walk^l`.
pub fn sample_features(
    g: &Graph,
    walk: &WalkMatrix,
    modulation: &Modulation,
    cfg: &WalkConfig,
) -> Result<FeatureMatrix> {
    sample_with_rule(g, walk, modulation, cfg, LoadRule::ImportanceWeighted)
}

/// Same walks as [`sample_features`] without inverse-probability weighting.
pub fn sample_features_adhoc(
    g: &Graph,
    walk: &WalkMatrix,
    modulation: &Modulation,
    cfg: &WalkConfig,
) -> Result<FeatureMatrix> {
    sample_with_rule(g, walk, modulation, cfg, LoadRule::AdHoc)
}

/// Walk deposits grouped by `(node, column, length)` with the modulation
/// left out, so features for any `f` are a weighted sum over lengths.
///
/// Since the walk law does not depend on `f`, training reuses one cache:
/// `Φ(f) = Σ_l f_l Φ_l` and `∂Φ/∂f_l = Φ_l` exactly.
#[derive(Clone, Debug)]
pub struct WalkCache {
    config: WalkConfig,
    rule: LoadRule,
    num_nodes: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    lengths: Vec<u8>,
    loads: Vec<f64>,
}

impl WalkCache {
    pub fn sample(g: &Graph, walk: &WalkMatrix, cfg: &WalkConfig, rule: LoadRule) -> Result<Self> {
        check_inputs(g, walk, cfg)?;
        let n = g.num_nodes();
        let span = cfg.l_max + 1;
        let scale = 1.0 / cfg.num_walkers as f64;
        let rows = exec::map_indices_with(
            n,
            || Accumulator::new(n * span),
            |acc, node| -> Result<Vec<(u32, u8, f64)>> {
                acc.begin();
                simulate_node(g, walk, cfg, rule, cfg.l_max, node, |col, len, load| {
                    acc.add(col * span + len, load);
                })?;
                Ok(acc
                    .drain_sorted(scale)
                    .map(|(s, v)| ((s / span) as u32, (s % span) as u8, v))
                    .collect())
            },
        );
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut lengths = Vec::new();
        let mut loads = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (c, l, v) in row? {
                cols.push(c);
                lengths.push(l);
                loads.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            config: *cfg,
            rule,
            num_nodes: n,
            row_ptr,
            cols,
            lengths,
            loads,
        })
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    pub fn rule(&self) -> LoadRule {
        self.rule
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn l_max(&self) -> usize {
        self.config.l_max
    }

    /// Stored `(node, column, length)` entries.
    pub fn num_entries(&self) -> usize {
        self.cols.len()
    }

    fn assemble_row(&self, coeffs: &[f64], node: usize) -> Vec<(u32, f64)> {
        let r = self.row_ptr[node]..self.row_ptr[node + 1];
        let (cols, lens, loads) = (&self.cols[r.clone()], &self.lengths[r.clone()], &self.loads[r]);
        let mut out = Vec::new();
        let mut k = 0;
        while k < cols.len() {
            let c = cols[k];
            let mut acc = 0.0;
            let mut any = false;
            while k < cols.len() && cols[k] == c {
                let fl = coeffs.get(lens[k] as usize).copied().unwrap_or(0.0);
                if fl != 0.0 {
                    acc += fl * loads[k];
                    any = true;
                }
                k += 1;
            }
            if any {
                out.push((c, acc));
            }
        }
        out
    }

    /// Rows `Σ_l coeffs[l] Φ_l` for the listed nodes (in order); columns span
    /// all nodes. Lengths beyond `coeffs.len()` contribute nothing.
    pub fn assemble_rows(&self, coeffs: &[f64], nodes: &[usize]) -> Result<CsrMatrix> {
        if let Some(&bad) = nodes.iter().find(|&&i| i >= self.num_nodes) {
            return Err(Error::InvalidParameter(format!("node {bad} out of range")));
        }
        let rows = exec::map_indices(nodes.len(), |k| self.assemble_row(coeffs, nodes[k]));
        CsrMatrix::from_sorted_rows(self.num_nodes, rows)
    }

    /// Full feature matrix for `modulation`.
    pub fn features(&self, modulation: &Modulation) -> Result<FeatureMatrix> {
        let all: Vec<usize> = (0..self.num_nodes).collect();
        let phi = self.assemble_rows(&modulation.coefficients(), &all)?;
        Ok(FeatureMatrix::new(phi, self.config))
    }

    /// Feature rows for `modulation` restricted to `nodes`.
    pub fn features_for(&self, modulation: &Modulation, nodes: &[usize]) -> Result<FeatureMatrix> {
        let phi = self.assemble_rows(&modulation.coefficients(), nodes)?;
        Ok(FeatureMatrix::new(phi, self.config))
    }
}
