use std::collections::BTreeMap;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{fit_power_law, PowerLawFit};
use crate::gp::{train, train_test_split, Dataset, GpModel, SolverKind, TrainSettings};
use crate::graph::{generate, GeneratorKind, WalkMatrixKind};
use crate::grf::{LoadRule, Modulation, WalkCache, WalkConfig};
use crate::seed::{derive_seed, stream_seed};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Implementation {
    /// Materialised `N × N` kernel, Cholesky solves.
    Dense,
    /// Sparse features, CG solves.
    Sparse,
}

impl Implementation {
    pub fn label(self) -> &'static str {
        match self {
            Self::Dense => "dense",
            Self::Sparse => "sparse",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub sparse_ladder: Vec<usize>,
    pub dense_ladder: Vec<usize>,
    /// Dense runs above this size are skipped and flagged.
    pub dense_cap: usize,
    pub num_walkers: usize,
    pub p_halt: f64,
    pub l_max: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub probes: usize,
    pub noise_var: f64,
    pub train_fraction: f64,
    /// Pathwise samples drawn for sparse predictive variances.
    pub posterior_samples: usize,
    pub sparse_min_n: usize,
    pub dense_min_n: usize,
}

fn powers(lo: i32, hi: i32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sparse_ladder: powers(5, 16),
            dense_ladder: powers(5, 12),
            dense_cap: 1 << 13,
            num_walkers: 100,
            p_halt: 0.1,
            l_max: 3,
            epochs: 50,
            learning_rate: 0.01,
            probes: 10,
            noise_var: 0.1,
            train_fraction: 0.5,
            posterior_samples: 16,
            sparse_min_n: 1 << 12,
            dense_min_n: 1 << 9,
        }
    }
}

impl ScalingConfig {
    /// Sparse ladder up to `2^20`.
    pub fn full_ladder(mut self) -> Self {
        self.sparse_ladder = powers(5, 20);
        self
    }

    fn min_n(&self, imp: Implementation) -> usize {
        match imp {
            Implementation::Dense => self.dense_min_n,
            Implementation::Sparse => self.sparse_min_n,
        }
    }
}

/// One measurement. Memory is storage accounting: `nnz × 12` bytes for
/// sparse features, `N² × 8` for a dense kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRecord {
    pub n: usize,
    pub implementation: Implementation,
    pub seed: u64,
    pub memory_bytes: u64,
    pub init_s: f64,
    pub train_s: f64,
    pub infer_s: f64,
    /// Set when the dense cap stopped the run; the times are then NaN.
    pub skipped: bool,
}

/// Run every ladder size for every seed, sequentially. One discarded
/// warm-up run per implementation precedes the measurements.
pub fn run_scaling(config: &ScalingConfig, seeds: &[u64]) -> Result<Vec<ScalingRecord>> {
    let mut out = Vec::new();
    for (imp, ladder) in [
        (Implementation::Sparse, &config.sparse_ladder),
        (Implementation::Dense, &config.dense_ladder),
    ] {
        if let (Some(&n), Some(&seed)) = (ladder.first(), seeds.first()) {
            if imp == Implementation::Sparse || n <= config.dense_cap {
                measure(config, imp, n, seed)?;
            }
        }
        for &n in ladder {
            for &seed in seeds {
                out.push(measure(config, imp, n, seed)?);
            }
        }
    }
    Ok(out)
}

fn measure(config: &ScalingConfig, imp: Implementation, n: usize, seed: u64) -> Result<ScalingRecord> {
    if imp == Implementation::Dense && n > config.dense_cap {
        return Ok(ScalingRecord {
            n,
            implementation: imp,
            seed,
            memory_bytes: (n * n * 8) as u64,
            init_s: f64::NAN,
            train_s: f64::NAN,
            infer_s: f64::NAN,
            skipped: true,
        });
    }
    let run_seed = stream_seed(seed, n as u64, 0);
    // smooth periodic signal sin(2π k i / N), k ∈ [1, 5]
    let frequency = 1 + (derive_seed(run_seed, "frequency") % 5) as u32;
    let gen = generate(
        &GeneratorKind::Ring {
            nodes: n,
            k: 2,
            frequency,
        },
        run_seed,
    )?;
    let (train_nodes, test_nodes) = train_test_split(n, config.train_fraction, derive_seed(run_seed, "split"))?;
    let y = gen.noisy_observations(&train_nodes, config.noise_var, derive_seed(run_seed, "noise"));
    let data = Dataset::new(train_nodes, y, n)?;
    let walk = WalkConfig::new(config.num_walkers, config.p_halt, config.l_max, derive_seed(run_seed, "walks"))?;
    let modulation = Modulation::diffusion_shape(1.0, 1.0, config.l_max)?;

    let start = Instant::now();
    let matrix = WalkMatrixKind::NormalizedAdjacency.build(&gen.graph)?;
    let cache = Arc::new(WalkCache::sample(&gen.graph, &matrix, &walk, LoadRule::ImportanceWeighted)?);
    let solver = match imp {
        Implementation::Sparse => SolverKind::Cg,
        Implementation::Dense => SolverKind::DenseCholesky,
    };
    let model = GpModel::new(cache, modulation, config.noise_var)?.with_solver(solver);
    let memory_bytes = match imp {
        Implementation::Sparse => model.features().memory_bytes() as u64,
        Implementation::Dense => {
            let k = model.features().dense_kernel(config.dense_cap)?;
            std::hint::black_box(&k);
            (k.len() * std::mem::size_of::<f64>()) as u64
        }
    };
    let init_s = start.elapsed().as_secs_f64();

    let settings = TrainSettings {
        learning_rate: config.learning_rate,
        iterations: config.epochs,
        probes: config.probes,
        seed: derive_seed(run_seed, "probes"),
        ..TrainSettings::default()
    };
    let start = Instant::now();
    let (model, _) = train(&model, &data, &settings)?;
    let train_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let mut post = model.condition(&data)?;
    let mean = post.mean(&test_nodes)?;
    match imp {
        Implementation::Sparse => {
            let samples = post.samples(config.posterior_samples, derive_seed(run_seed, "samples"))?;
            let var: Vec<f64> = test_nodes
                .iter()
                .map(|&q| {
                    let s = samples.len() as f64;
                    let m = samples.iter().map(|x| x[q]).sum::<f64>() / s;
                    samples.iter().map(|x| (x[q] - m).powi(2)).sum::<f64>() / (s - 1.0).max(1.0)
                })
                .collect();
            std::hint::black_box((&mean, &var));
        }
        Implementation::Dense => {
            let cov = post.covariance(&test_nodes, config.dense_cap)?;
            std::hint::black_box((&mean, &cov));
        }
    }
    let infer_s = start.elapsed().as_secs_f64();

    Ok(ScalingRecord {
        n,
        implementation: imp,
        seed,
        memory_bytes,
        init_s,
        train_s,
        infer_s,
        skipped: false,
    })
}

#[derive(Serialize)]
struct CsvRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "impl")]
    implementation: &'static str,
    seed: u64,
    memory_bytes: u64,
    init_s: Option<f64>,
    train_s: Option<f64>,
    infer_s: Option<f64>,
}

/// CSV `N,impl,seed,memory_bytes,init_s,train_s,infer_s`; skipped runs
/// leave the time fields empty.
pub fn write_records_csv<W: Write>(records: &[ScalingRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let time = |r: &ScalingRecord, v: f64| (!r.skipped).then_some(v);
    for r in records {
        w.serialize(CsvRow {
            n: r.n,
            implementation: r.implementation.label(),
            seed: r.seed,
            memory_bytes: r.memory_bytes,
            init_s: time(r, r.init_s),
            train_s: time(r, r.train_s),
            infer_s: time(r, r.infer_s),
        })?;
    }
    w.flush()?;
    Ok(())
}

/// The measured series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Memory,
    Init,
    Train,
    Infer,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Memory, Metric::Init, Metric::Train, Metric::Infer];

    pub fn label(self) -> &'static str {
        match self {
            Self::Memory => "memory_bytes",
            Self::Init => "init_s",
            Self::Train => "train_s",
            Self::Infer => "infer_s",
        }
    }

    fn of(self, r: &ScalingRecord) -> f64 {
        match self {
            Self::Memory => r.memory_bytes as f64,
            Self::Init => r.init_s,
            Self::Train => r.train_s,
            Self::Infer => r.infer_s,
        }
    }
}

/// Per-`N` medians over seeds of one series, skipping flagged runs.
pub fn medians(records: &[ScalingRecord], imp: Implementation, metric: Metric) -> Vec<(f64, f64)> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.implementation == imp && !r.skipped) {
        by_n.entry(r.n).or_default().push(metric.of(r));
    }
    by_n.into_iter()
        .map(|(n, mut v)| {
            v.sort_by(f64::total_cmp);
            let k = v.len();
            let med = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
            (n as f64, med)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit {
    pub metric: Metric,
    pub implementation: Implementation,
    pub fit: PowerLawFit,
}

/// Power-law fits of the medians of every series with enough points.
pub fn fit_scaling(records: &[ScalingRecord], config: &ScalingConfig) -> Vec<ScalingFit> {
    let mut fits = Vec::new();
    for metric in Metric::ALL {
        for imp in [Implementation::Sparse, Implementation::Dense] {
            let pts = medians(records, imp, metric);
            if let Ok(fit) = fit_power_law(&pts, config.min_n(imp) as f64) {
                fits.push(ScalingFit {
                    metric,
                    implementation: imp,
                    fit,
                });
            }
        }
    }
    fits
}

/// One line per series: `metric,impl,a,b,ci_low,ci_high,r2,min_n,points`.
pub fn write_fit_report<W: Write>(fits: &[ScalingFit], mut out: W) -> Result<()> {
    writeln!(out, "metric,impl,a,b,ci_low,ci_high,r2,min_n,points")?;
    for f in fits {
        writeln!(
            out,
            "{},{},{:.6e},{:.4},{:.4},{:.4},{:.4},{},{}",
            f.metric.label(),
            f.implementation.label(),
            f.fit.a,
            f.fit.b,
            f.fit.b_ci95.0,
            f.fit.b_ci95.1,
            f.fit.r2,
            f.fit.min_n,
            f.fit.points
        )?;
    }
    Ok(())
}
