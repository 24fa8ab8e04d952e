use std::io::Write;

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::gp::{train_test_split, Dataset, Metrics, TrainSettings};
use crate::graph::{generate, laplacian, GeneratorKind, Graph};
use crate::regression::{run_regression, KernelChoice, RegressionConfig, TestSet, WalkSpec};
use crate::seed::derive_seed;
use crate::Result;

/// A mesh with a function drawn from a diffusion-kernel GP and noisy
/// observations split into training and test nodes.
#[derive(Clone, Debug)]
pub struct DiffusionTask {
    pub graph: Graph,
    pub truth: Vec<f64>,
    pub train: Dataset,
    pub test: TestSet,
}

/// Draw `h ~ N(0, c · exp(−β L))` on a `rows × cols` mesh, `L` the
/// combinatorial Laplacian and `c` chosen for unit average prior variance,
/// then observe `h + ε` at every node and split off `train_fraction` of them
/// for training.
pub fn diffusion_task(
    rows: usize,
    cols: usize,
    beta: f64,
    noise_var: f64,
    train_fraction: f64,
    seed: u64,
) -> Result<DiffusionTask> {
    let graph = generate(&GeneratorKind::Grid { rows, cols }, 0)?.graph;
    let n = graph.num_nodes();
    let eig = SymmetricEigen::new(laplacian(&graph));
    let spectrum = eig.eigenvalues.map(|l| (-beta * l).exp());
    let c = n as f64 / spectrum.sum();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "truth"));
    let z = DVector::from_fn(n, |i, _| (c * spectrum[i]).sqrt() * rng.sample::<f64, _>(StandardNormal));
    let truth: Vec<f64> = (&eig.eigenvectors * z).iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "noise"));
    let sd = noise_var.sqrt();
    let observed: Vec<f64> = truth.iter().map(|h| h + sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let (train_nodes, test_nodes) = train_test_split(n, train_fraction, derive_seed(seed, "split"))?;
    let train_y = train_nodes.iter().map(|&i| observed[i]).collect();
    let test_y = test_nodes.iter().map(|&i| observed[i]).collect();
    Ok(DiffusionTask {
        train: Dataset::new(train_nodes, train_y, n)?,
        test: TestSet {
            nodes: test_nodes,
            targets: test_y,
        },
        graph,
        truth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AblationConfig {
    pub rows: usize,
    pub cols: usize,
    /// Lengthscale of the ground-truth kernel, hidden from the models.
    pub beta: f64,
    pub noise_var: f64,
    pub train_fraction: f64,
    pub walk: WalkSpec,
    pub train: TrainSettings,
    pub init_beta: f64,
    pub init_noise_var: f64,
    pub kernels: Vec<KernelChoice>,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            rows: 30,
            cols: 30,
            beta: 10.0,
            noise_var: 0.01,
            train_fraction: 0.1,
            walk: WalkSpec {
                num_walkers: 10_000,
                p_halt: 0.1,
                l_max: 10,
            },
            train: TrainSettings::default(),
            init_beta: 1.0,
            init_noise_var: 0.1,
            kernels: vec![KernelChoice::ExactDiffusion, KernelChoice::DiffusionShape, KernelChoice::AdHoc],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub seed: u64,
    pub kernel: KernelChoice,
    pub rmse: f64,
    pub nlpd: f64,
}

/// One row per kernel per seed. Every kernel sees the same task for a
/// given seed.
pub fn run_ablation(config: &AblationConfig, seeds: &[u64]) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for &seed in seeds {
        let task = diffusion_task(
            config.rows,
            config.cols,
            config.beta,
            config.noise_var,
            config.train_fraction,
            seed,
        )?;
        for &kernel in &config.kernels {
            let reg = RegressionConfig {
                kernel,
                walk: config.walk,
                init_beta: config.init_beta,
                init_noise_var: config.init_noise_var,
                train: config.train.clone(),
                seed: derive_seed(seed, "models"),
                ..RegressionConfig::default()
            };
            let Metrics { rmse, nlpd } = run_regression(&task.graph, &task.train, &task.test, &reg)?.metrics;
            rows.push(AblationRow {
                seed,
                kernel,
                rmse,
                nlpd,
            });
        }
    }
    Ok(rows)
}

/// Seed-averaged metrics for one kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationSummary {
    pub kernel: KernelChoice,
    pub rmse: f64,
    pub nlpd: f64,
    pub rmse_sd: f64,
    pub nlpd_sd: f64,
    pub seeds: usize,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

/// Means and standard deviations per kernel, in first-seen kernel order.
pub fn ablation_summary(rows: &[AblationRow]) -> Vec<AblationSummary> {
    let mut kernels: Vec<KernelChoice> = Vec::new();
    for r in rows {
        if !kernels.contains(&r.kernel) {
            kernels.push(r.kernel);
        }
    }
    kernels
        .into_iter()
        .map(|kernel| {
            let rmse: Vec<f64> = rows.iter().filter(|r| r.kernel == kernel).map(|r| r.rmse).collect();
            let nlpd: Vec<f64> = rows.iter().filter(|r| r.kernel == kernel).map(|r| r.nlpd).collect();
            let (rmse, rmse_sd) = mean_sd(&rmse);
            let (nlpd, nlpd_sd) = mean_sd(&nlpd);
            AblationSummary {
                kernel,
                rmse,
                nlpd,
                rmse_sd,
                nlpd_sd,
                seeds: rows.iter().filter(|r| r.kernel == kernel).count(),
            }
        })
        .collect()
}

/// CSV `seed,kernel,rmse,nlpd`.
pub fn write_ablation_csv<W: Write>(rows: &[AblationRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_has_unit_scale_and_disjoint_split() {
        let t = diffusion_task(12, 12, 2.0, 0.01, 0.25, 3).unwrap();
        assert_eq!(t.train.len(), 36);
        assert_eq!(t.test.nodes.len(), 108);
        assert!(t.train.nodes().iter().all(|i| !t.test.nodes.contains(i)));
        let var = t.truth.iter().map(|h| h * h).sum::<f64>() / 144.0;
        assert!(var > 0.05 && var < 5.0, "{var}");
        let again = diffusion_task(12, 12, 2.0, 0.01, 0.25, 3).unwrap();
        assert_eq!(again.truth, t.truth);
    }

    #[test]
    fn small_ablation_has_one_row_per_kernel_and_seed() {
        let cfg = AblationConfig {
            rows: 6,
            cols: 6,
            beta: 1.0,
            train_fraction: 0.3,
            walk: WalkSpec {
                num_walkers: 50,
                p_halt: 0.2,
                l_max: 4,
            },
            train: TrainSettings {
                iterations: 20,
                ..Default::default()
            },
            ..Default::default()
        };
        let rows = run_ablation(&cfg, &[0, 1]).unwrap();
        assert_eq!(rows.len(), 6);
        let summary = ablation_summary(&rows);
        assert_eq!(summary.len(), 3);
        assert_eq!(summary[0].kernel, KernelChoice::ExactDiffusion);
        assert!(summary.iter().all(|s| s.seeds == 2 && s.rmse.is_finite()));
        let mut buf = Vec::new();
        write_ablation_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("seed,kernel,rmse,nlpd\n0,exact_diffusion,"));
    }
}
