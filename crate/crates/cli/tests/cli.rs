use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_grfgp"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn ok(dir: &Path, config: &str, args: &[&str]) -> PathBuf {
    let out = run(dir, config, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    dir.join("out")
}

fn lines(path: PathBuf) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_owned).collect()
}

const GRID: &str = "[graph.generator]\nkind = \"unimodal_grid\"\nrows = 30\ncols = 30\n";

#[test]
fn gen_graph_writes_objective_and_edges() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), GRID, &["gen-graph"]);
    let objective = lines(out.join("objective.csv"));
    assert_eq!(objective[0], "node,value");
    assert_eq!(objective.len(), 901);
    assert_eq!(lines(out.join("graph.edges")).len(), 2 * 30 * 29);

    let ring = "[graph.generator]\nkind = \"ring\"\nnodes = 10\n";
    let out = ok(dir.path(), ring, &["gen-graph"]);
    assert_eq!(lines(out.join("graph.edges")).len(), 10);
}

#[test]
fn gen_graph_is_deterministic() {
    let sbm = "seed = 3\n[graph.generator]\nkind = \"sbm\"\nblock_sizes = [30, 30]\np_in = [0.3]\np_out = 0.02\n";
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let out_a = ok(a.path(), sbm, &["gen-graph"]);
    let out_b = ok(b.path(), sbm, &["gen-graph", "--strict-sequential"]);
    for name in ["graph.edges", "objective.csv"] {
        assert_eq!(fs::read(out_a.join(name)).unwrap(), fs::read(out_b.join(name)).unwrap());
    }
}

#[test]
fn edge_list_with_objective_round_trips() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("g.txt"), "10 20\n20 30\n30 10\n30 40\n").unwrap();
    fs::write(dir.path().join("f.csv"), "node,value\n10,1.0\n20,2.0\n30,3.0\n40,4.0\n").unwrap();
    let cfg = "[graph]\nedge_list = \"g.txt\"\nobjective = \"f.csv\"\n";
    let out = ok(dir.path(), cfg, &["gen-graph"]);
    assert_eq!(lines(out.join("graph.edges")).len(), 4);
    assert_eq!(lines(out.join("objective.csv"))[4], "3,4.0000000000000000e0");
}

const SMALL_REGRESS: &str = r#"
[graph.generator]
kind = "unimodal_grid"
rows = 8
cols = 8

[walk]
num_walkers = 20
p_halt = 0.2
l_max = 4

[train]
iterations = 20
learning_rate = 0.05

[regress]
walks = [2, 8, 32]
repeats = 2
"#;

#[test]
fn regress_sweep_has_one_row_per_walks_and_repeat() {
    let dir = TempDir::new().unwrap();
    let out = ok(dir.path(), SMALL_REGRESS, &["regress", "--seed", "4"]);
    let rows = lines(out.join("regress_metrics.csv"));
    assert_eq!(rows[0], "walks,repeat,seed,kernel,rmse,nlpd,noise_var");
    assert_eq!(rows.len(), 1 + 3 * 2);
    let predictions = lines(out.join("predictions.csv"));
    assert_eq!(predictions.len(), 1 + 3 * 2 * 64);
    let saved = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(saved.contains("seed = 4"));
}

#[test]
fn regress_is_deterministic_across_thread_counts() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let out_a = ok(a.path(), SMALL_REGRESS, &["regress"]);
    let out_b = ok(b.path(), SMALL_REGRESS, &["regress", "--threads", "3"]);
    for name in ["regress_metrics.csv", "predictions.csv"] {
        assert_eq!(fs::read(out_a.join(name)).unwrap(), fs::read(out_b.join(name)).unwrap());
    }
}

#[test]
fn exact_kernel_above_cap_fails_with_cap_in_message() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{GRID}[modulation]\nkernel = \"exact_diffusion\"\n[regress]\ndense_cap = 100\n");
    let out = run(dir.path(), &cfg, &["regress"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("100"), "{err}");
}

#[test]
fn bo_writes_four_traces_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[graph.generator]
kind = "unimodal_grid"
rows = 10
cols = 10

[walk]
num_walkers = 20
p_halt = 0.2
l_max = 4

[bo]
initial = 5
steps = 15
repeats = 2

[bo.thompson]
retrain_every = 5

[bo.thompson.train]
iterations = 10
"#;
    let out = ok(dir.path(), cfg, &["bo"]);
    let summary = lines(out.join("bo_summary.csv"));
    assert_eq!(summary[0], "strategy,runs,mean_final_regret,sd_final_regret");
    assert_eq!(summary.len(), 5);
    for strategy in ["thompson", "random", "bfs", "dfs"] {
        for r in 0..2 {
            let trace = lines(out.join(format!("bo_{strategy}_r{r}.csv")));
            assert_eq!(trace[0], "t,node,y,best,regret");
            assert_eq!(trace.len(), 1 + 5 + 15);
        }
    }
}

#[test]
fn bench_scaling_writes_schema_and_fits() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{GRID}[bench]\nscaling_repeats = 1\n[bench.scaling]\nsparse_ladder = [32, 64, 128]\ndense_ladder = [32, 64, 128]\nepochs = 2\nnum_walkers = 10\nsparse_min_n = 32\ndense_min_n = 32\n"
    );
    let out = ok(dir.path(), &cfg, &["bench-scaling"]);
    let rows = lines(out.join("scaling.csv"));
    assert_eq!(rows[0], "N,impl,seed,memory_bytes,init_s,train_s,infer_s");
    assert_eq!(rows.len(), 1 + 6);
    let fits = lines(out.join("scaling_fit.csv"));
    assert_eq!(fits[0], "metric,impl,a,b,ci_low,ci_high,r2,min_n,points");
    assert_eq!(fits.len(), 1 + 8);
}

#[test]
fn ablation_reports_three_kernels() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "{GRID}[bench]\nablation_repeats = 2\n[bench.ablation]\nrows = 8\ncols = 8\ntrain_fraction = 0.3\n[bench.ablation.walk]\nnum_walkers = 50\np_halt = 0.2\nl_max = 4\n[bench.ablation.train]\niterations = 10\n"
    );
    let out = ok(dir.path(), &cfg, &["ablation"]);
    assert_eq!(lines(out.join("ablation.csv")).len(), 1 + 2 * 3);
    let summary = lines(out.join("ablation_summary.csv"));
    assert_eq!(summary.len(), 1 + 3);
    assert!(summary[1].starts_with("exact_diffusion,"));
    assert!(summary[3].starts_with("ad_hoc,"));
}

#[test]
fn config_errors_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "[graph]\n", &["gen-graph"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = run(dir.path(), &format!("{GRID}bogus = 1\n"), &["gen-graph"]);
    assert!(!out.status.success());
}
