//! Subcommand bodies. Each one reads a resolved [`RunConfig`] and writes CSV
//! files into the output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use grfgp::bench::{
    ablation_summary, fit_scaling, run_ablation, run_scaling, write_ablation_csv, write_fit_report,
    write_records_csv,
};
use grfgp::bo::{
    bfs_search, degree_objective, dfs_search, random_search, thompson_sampling, BoTrace, Objective, Strategy,
};
use grfgp::gp::{train_test_split, Dataset, GpModel};
use grfgp::graph::{generate, load_edge_list, write_edge_list, write_objective, Generated};
use grfgp::grf::{LoadRule, Modulation, WalkCache};
use grfgp::regression::{run_regression, KernelChoice, RegressionConfig, TestSet, WalkSpec};
use grfgp::seed::{derive_seed, stream_seed};
use grfgp::{Error, Result};

use crate::config::{BoTarget, RunConfig};

/// A graph with its objective (empty when none was given) and the external
/// id of every node.
pub struct LoadedGraph {
    pub generated: Generated,
    pub ids: Vec<u64>,
}

impl LoadedGraph {
    fn objective(&self) -> Result<&[f64]> {
        if self.generated.objective.is_empty() {
            return Err(Error::Config("this command needs an objective; set `graph.objective`".into()));
        }
        Ok(&self.generated.objective)
    }
}

pub fn load_graph(cfg: &RunConfig) -> Result<LoadedGraph> {
    if let Some(kind) = &cfg.graph.generator {
        let generated = generate(kind, derive_seed(cfg.seed, "graph"))?;
        let ids = (0..generated.graph.num_nodes() as u64).collect();
        return Ok(LoadedGraph { generated, ids });
    }
    let path = cfg.graph.edge_list.as_ref().expect("validated graph source");
    let loaded = load_edge_list(path, cfg.graph.weighted)?;
    let objective = match &cfg.graph.objective {
        Some(p) => read_objective(p, &loaded.original_ids)?,
        None => Vec::new(),
    };
    Ok(LoadedGraph {
        generated: Generated {
            graph: loaded.graph,
            objective,
            positions: None,
            blocks: None,
        },
        ids: loaded.original_ids,
    })
}

/// Read `node,value` rows; every node of the graph needs exactly one value.
fn read_objective(path: &Path, ids: &[u64]) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; ids.len()];
    let mut reader = csv::Reader::from_path(path)?;
    for row in reader.deserialize() {
        let (id, value): (u64, f64) = row?;
        let k = ids
            .binary_search(&id)
            .map_err(|_| Error::Config(format!("objective names node {id}, which has no edges")))?;
        values[k] = value;
    }
    if let Some(k) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Config(format!("objective has no value for node {}", ids[k])));
    }
    Ok(values)
}

fn create(out: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

pub fn gen_graph(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let loaded = load_graph(cfg)?;
    write_edge_list(&loaded.generated.graph, create(out, "graph.edges")?)?;
    let mut files = vec![out.join("graph.edges")];
    if !loaded.generated.objective.is_empty() {
        write_objective(&loaded.generated.objective, create(out, "objective.csv")?)?;
        files.push(out.join("objective.csv"));
    }
    println!(
        "graph: {} nodes, {} edges, average degree {:.2}",
        loaded.generated.graph.num_nodes(),
        loaded.generated.graph.num_edges(),
        loaded.generated.graph.average_degree()
    );
    Ok(files)
}

pub fn regress(cfg: &RunConfig, out: &Path) -> Result<()> {
    let loaded = load_graph(cfg)?;
    loaded.objective()?;
    let n = loaded.generated.graph.num_nodes();
    let sweep = if cfg.regress.walks.is_empty() {
        vec![cfg.walk.num_walkers]
    } else {
        cfg.regress.walks.clone()
    };
    let master = derive_seed(cfg.seed, "regress");
    let mut metrics = csv::Writer::from_writer(create(out, "regress_metrics.csv")?);
    metrics.write_record(["walks", "repeat", "seed", "kernel", "rmse", "nlpd", "noise_var"])?;
    let mut predictions = csv::Writer::from_writer(create(out, "predictions.csv")?);
    predictions.write_record(["walks", "repeat", "node", "mean", "std"])?;

    for repeat in 0..cfg.regress.repeats {
        let seed = stream_seed(master, repeat as u64, 0);
        let (train_nodes, test_nodes) = train_test_split(n, cfg.regress.train_fraction, derive_seed(seed, "split"))?;
        let noise = cfg.regress.noise_var;
        let train_y = loaded.generated.noisy_observations(&train_nodes, noise, derive_seed(seed, "train_noise"));
        let test_y = loaded.generated.noisy_observations(&test_nodes, noise, derive_seed(seed, "test_noise"));
        let data = Dataset::new(train_nodes, train_y, n)?;
        let test = TestSet {
            nodes: test_nodes,
            targets: test_y,
        };
        for &walks in &sweep {
            let run = RegressionConfig {
                kernel: cfg.modulation.kernel,
                walk: WalkSpec {
                    num_walkers: walks,
                    ..cfg.walk
                },
                walk_matrix: cfg.modulation.walk_matrix,
                init_beta: cfg.modulation.init_beta,
                init_sigma_f: cfg.modulation.init_sigma_f,
                init_noise_var: cfg.modulation.init_noise_var,
                train: cfg.train.clone(),
                dense_cap: cfg.regress.dense_cap,
                seed: derive_seed(seed, "model"),
                ..RegressionConfig::default()
            };
            let result = run_regression(&loaded.generated.graph, &data, &test, &run)?;
            metrics.write_record([
                walks.to_string(),
                repeat.to_string(),
                seed.to_string(),
                result.kernel.label().to_string(),
                format!("{:.6e}", result.metrics.rmse),
                format!("{:.6e}", result.metrics.nlpd),
                format!("{:.6e}", result.noise_var),
            ])?;
            for (node, (m, s)) in result.mean.iter().zip(&result.std).enumerate() {
                predictions.write_record([
                    walks.to_string(),
                    repeat.to_string(),
                    loaded.ids[node].to_string(),
                    format!("{m:.6e}"),
                    format!("{s:.6e}"),
                ])?;
            }
            println!(
                "{} walks={walks} repeat={repeat}: rmse {:.4} nlpd {:.4}",
                result.kernel.label(),
                result.metrics.rmse,
                result.metrics.nlpd
            );
        }
    }
    metrics.flush()?;
    predictions.flush()?;
    Ok(())
}

/// Untrained GRF model used as the Thompson-sampling starting point.
fn grf_template(cfg: &RunConfig, loaded: &LoadedGraph, seed: u64) -> Result<GpModel> {
    let g = &loaded.generated.graph;
    let rule = match cfg.modulation.kernel {
        KernelChoice::ExactDiffusion => {
            return Err(Error::Config("bo needs a GRF kernel, not exact_diffusion".into()))
        }
        KernelChoice::AdHoc => LoadRule::AdHoc,
        _ => LoadRule::ImportanceWeighted,
    };
    let walk = cfg.walk.with_seed(derive_seed(seed, "walks"))?;
    let matrix = cfg.modulation.walk_matrix.build(g)?;
    let cache = Arc::new(WalkCache::sample(g, &matrix, &walk, rule)?);
    let modulation = match cfg.modulation.kernel {
        KernelChoice::Free => Modulation::free_random(walk.l_max, derive_seed(seed, "modulation")),
        _ => Modulation::diffusion_shape(cfg.modulation.init_beta, cfg.modulation.init_sigma_f, walk.l_max)?,
    };
    GpModel::new(cache, modulation, cfg.modulation.init_noise_var)
}

pub fn bo(cfg: &RunConfig, out: &Path) -> Result<()> {
    let loaded = load_graph(cfg)?;
    let g = &loaded.generated.graph;
    let objective_seed = derive_seed(cfg.seed, "objective");
    let objective = match cfg.bo.target {
        BoTarget::Graph => Objective::new(loaded.objective()?.to_vec(), cfg.bo.noise_var, objective_seed)?,
        BoTarget::Degree => degree_objective(g, cfg.bo.noise_var, objective_seed)?,
    };
    let master = derive_seed(cfg.seed, "bo");
    let (n0, steps) = (cfg.bo.initial, cfg.bo.steps);
    let mut regrets: Vec<(Strategy, Vec<f64>)> = cfg.bo.strategies.iter().map(|&s| (s, Vec::new())).collect();
    for repeat in 0..cfg.bo.repeats {
        let seed = stream_seed(master, repeat as u64, 0);
        for (strategy, finals) in regrets.iter_mut() {
            let trace: BoTrace = match strategy {
                Strategy::Thompson => {
                    let template = grf_template(cfg, &loaded, seed)?;
                    thompson_sampling(&template, &objective, n0, steps, &cfg.bo.thompson, seed)?
                }
                Strategy::Random => random_search(&objective, n0, steps, seed)?,
                Strategy::Bfs => bfs_search(g, &objective, n0, steps, seed)?,
                Strategy::Dfs => dfs_search(g, &objective, n0, steps, seed)?,
            };
            trace.write_csv(create(out, &format!("bo_{}_r{repeat}.csv", strategy.label()))?)?;
            finals.push(trace.final_regret());
        }
    }
    let mut summary = csv::Writer::from_writer(create(out, "bo_summary.csv")?);
    summary.write_record(["strategy", "runs", "mean_final_regret", "sd_final_regret"])?;
    for (strategy, finals) in &regrets {
        let (mean, sd) = mean_sd(finals);
        summary.write_record([
            strategy.label().to_string(),
            finals.len().to_string(),
            format!("{mean:.6e}"),
            format!("{sd:.6e}"),
        ])?;
        println!("{}: mean final regret {mean:.4} (sd {sd:.4})", strategy.label());
    }
    summary.flush()?;
    Ok(())
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

fn repeat_seeds(master: u64, label: &str, count: usize) -> Vec<u64> {
    let base = derive_seed(master, label);
    (0..count as u64).map(|r| stream_seed(base, r, 0)).collect()
}

pub fn bench_scaling(cfg: &RunConfig, out: &Path, full_ladder: bool) -> Result<()> {
    let mut scaling = cfg.bench.scaling.clone();
    if full_ladder {
        scaling = scaling.full_ladder();
    }
    let seeds = repeat_seeds(cfg.seed, "scaling", cfg.bench.scaling_repeats);
    let records = run_scaling(&scaling, &seeds)?;
    write_records_csv(&records, create(out, "scaling.csv")?)?;
    let fits = fit_scaling(&records, &scaling);
    write_fit_report(&fits, create(out, "scaling_fit.csv")?)?;
    for f in &fits {
        println!(
            "{} {}: b = {:.3} [{:.3}, {:.3}], R² = {:.3}",
            f.metric.label(),
            f.implementation.label(),
            f.fit.b,
            f.fit.b_ci95.0,
            f.fit.b_ci95.1,
            f.fit.r2
        );
    }
    Ok(())
}

pub fn ablation(cfg: &RunConfig, out: &Path) -> Result<()> {
    let seeds = repeat_seeds(cfg.seed, "ablation", cfg.bench.ablation_repeats);
    let rows = run_ablation(&cfg.bench.ablation, &seeds)?;
    write_ablation_csv(&rows, create(out, "ablation.csv")?)?;
    let mut summary = csv::Writer::from_writer(create(out, "ablation_summary.csv")?);
    for s in ablation_summary(&rows) {
        summary.serialize(s)?;
        println!(
            "{}: rmse {:.4} ± {:.4}, nlpd {:.4} ± {:.4}",
            s.kernel.label(),
            s.rmse,
            s.rmse_sd,
            s.nlpd,
            s.nlpd_sd
        );
    }
    summary.flush()?;
    Ok(())
}
