use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{BoTrace, Objective};
use crate::graph::Graph;
use crate::seed::stream_seed;
use crate::{Error, Result};

fn check_budget(num_nodes: usize, n0: usize, steps: usize) -> Result<()> {
    if n0 == 0 || n0 + steps > num_nodes {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N0 and N0 + T <= N, got N0 = {n0}, T = {steps}, N = {num_nodes}"
        )));
    }
    Ok(())
}

/// `n0` distinct uniform nodes. Every strategy run with the same seed
/// starts from the same set.
pub fn initial_nodes(num_nodes: usize, n0: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0, 0x696e));
    rand::seq::index::sample(&mut rng, num_nodes, n0.min(num_nodes)).into_vec()
}

/// Observe the initial nodes at `t = 1 − N0, …, 0`.
pub(crate) fn initialise(objective: &Objective, n0: usize, seed: u64) -> BoTrace {
    let mut trace = BoTrace::new(objective.len(), objective.max_value());
    for (k, node) in initial_nodes(objective.len(), n0, seed).into_iter().enumerate() {
        trace.query(objective, k as i64 + 1 - n0 as i64, node);
    }
    trace
}

/// Uniform sampling without replacement.
pub fn random_search(objective: &Objective, n0: usize, steps: usize, seed: u64) -> Result<BoTrace> {
    check_budget(objective.len(), n0, steps)?;
    let mut trace = initialise(objective, n0, seed);
    let mut rest: Vec<usize> = (0..objective.len()).filter(|&i| !trace.is_observed(i)).collect();
    rest.shuffle(&mut ChaCha8Rng::seed_from_u64(stream_seed(seed, 1, 0x7273)));
    for (t, node) in rest.into_iter().take(steps).enumerate() {
        trace.query(objective, t as i64 + 1, node);
    }
    Ok(trace)
}

/// Hands out fresh uniform unvisited nodes for traversal restarts.
struct Restarts {
    order: Vec<usize>,
    next: usize,
}

impl Restarts {
    fn new(n: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self { order, next: 0 }
    }

    fn pick(&mut self, visited: &[bool]) -> Option<usize> {
        while self.next < self.order.len() {
            let v = self.order[self.next];
            self.next += 1;
            if !visited[v] {
                return Some(v);
            }
        }
        None
    }
}

/// Breadth-first visit order over all nodes from `start`, neighbours in
/// ascending id, restarting from a random unvisited node whenever the
/// frontier empties.
pub fn bfs_order(g: &Graph, start: usize, seed: u64) -> Vec<usize> {
    let n = g.num_nodes();
    let mut visited = vec![false; n];
    let mut restarts = Restarts::new(n, seed);
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut root = Some(start);
    while let Some(r) = root {
        visited[r] = true;
        queue.push_back(r);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in g.neighbors(v) {
                let u = u as usize;
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
        root = restarts.pick(&visited);
    }
    order
}

/// Depth-first preorder over all nodes from `start`, neighbours in
/// ascending id, with the same restart rule as [`bfs_order`].
pub fn dfs_order(g: &Graph, start: usize, seed: u64) -> Vec<usize> {
    let n = g.num_nodes();
    let mut visited = vec![false; n];
    let mut restarts = Restarts::new(n, seed);
    let mut order = Vec::with_capacity(n);
    // (node, index of the next neighbour to try)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut root = Some(start);
    while let Some(r) = root {
        visited[r] = true;
        order.push(r);
        stack.push((r, 0));
        while let Some((v, k)) = stack.last_mut() {
            let nbrs = g.neighbors(*v);
            match nbrs.get(*k) {
                None => {
                    stack.pop();
                }
                Some(&u) => {
                    *k += 1;
                    let u = u as usize;
                    if !visited[u] {
                        visited[u] = true;
                        order.push(u);
                        stack.push((u, 0));
                    }
                }
            }
        }
        root = restarts.pick(&visited);
    }
    order
}

fn traversal_search(
    g: &Graph,
    objective: &Objective,
    n0: usize,
    steps: usize,
    seed: u64,
    order: fn(&Graph, usize, u64) -> Vec<usize>,
) -> Result<BoTrace> {
    if g.num_nodes() != objective.len() {
        return Err(Error::DimensionMismatch {
            expected: g.num_nodes(),
            found: objective.len(),
        });
    }
    check_budget(objective.len(), n0, steps)?;
    let mut trace = initialise(objective, n0, seed);
    let start = trace.records()[0].node;
    let mut t = 0;
    for node in order(g, start, stream_seed(seed, 2, 0x7472)) {
        if t == steps {
            break;
        }
        if !trace.is_observed(node) {
            t += 1;
            trace.query(objective, t as i64, node);
        }
    }
    Ok(trace)
}

/// Walk outward from the first initial node in breadth-first order,
/// querying each node not yet observed.
pub fn bfs_search(g: &Graph, objective: &Objective, n0: usize, steps: usize, seed: u64) -> Result<BoTrace> {
    traversal_search(g, objective, n0, steps, seed, bfs_order)
}

/// As [`bfs_search`] in depth-first order.
pub fn dfs_search(g: &Graph, objective: &Objective, n0: usize, steps: usize, seed: u64) -> Result<BoTrace> {
    traversal_search(g, objective, n0, steps, seed, dfs_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GeneratorKind};
    use proptest::prelude::*;

    fn path4() -> Graph {
        Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap()
    }

    #[test]
    fn path_orders_from_node_one() {
        assert_eq!(bfs_order(&path4(), 1, 0), vec![1, 0, 2, 3]);
        assert_eq!(dfs_order(&path4(), 1, 0), vec![1, 0, 2, 3]);
    }

    #[test]
    fn bfs_and_dfs_differ_on_a_tree() {
        // 0 - 1 - 3, 0 - 2
        let g = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0)]).unwrap();
        assert_eq!(bfs_order(&g, 0, 0), vec![0, 1, 2, 3]);
        assert_eq!(dfs_order(&g, 0, 0), vec![0, 1, 3, 2]);
    }

    #[test]
    fn traversals_restart_on_disconnected_graphs() {
        let g = Graph::from_edges(6, [(0, 1, 1.0), (2, 3, 1.0), (4, 5, 1.0)]).unwrap();
        for order in [bfs_order(&g, 0, 3), dfs_order(&g, 0, 3)] {
            assert_eq!(&order[..2], &[0, 1]);
            let mut sorted = order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn exhaustive_random_search_reaches_zero_regret() {
        let obj = Objective::new((0..20).map(|i| ((i * 7) % 20) as f64).collect(), 0.3, 1).unwrap();
        let tr = random_search(&obj, 1, 19, 5).unwrap();
        assert_eq!(tr.final_regret(), 0.0);
        assert_eq!(tr.len(), 20);
    }

    #[test]
    fn zero_steps_keep_only_the_initial_draws() {
        let obj = Objective::new((0..30).map(|i| i as f64).collect(), 0.0, 1).unwrap();
        let tr = random_search(&obj, 4, 0, 9).unwrap();
        assert_eq!(tr.len(), 4);
        assert!(tr.records().iter().all(|r| r.t <= 0));
        let best = tr.nodes().iter().map(|&i| i as f64).fold(f64::MIN, f64::max);
        assert_eq!(tr.final_regret(), 29.0 - best);
    }

    #[test]
    fn budget_is_checked() {
        let obj = Objective::new(vec![0.0; 5], 0.0, 1).unwrap();
        assert!(random_search(&obj, 0, 1, 0).is_err());
        assert!(random_search(&obj, 3, 3, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn traces_are_monotone_and_never_requery(seed in any::<u64>(), n0 in 1usize..5, steps in 0usize..20) {
            let gen = generate(&GeneratorKind::Sbm {
                block_sizes: vec![10, 8, 6],
                p_in: vec![0.4],
                p_out: 0.02,
                score_means: None,
                score_stds: None,
            }, seed).unwrap();
            let obj = Objective::new(gen.objective.clone(), 0.1, seed).unwrap();
            let traces = [
                random_search(&obj, n0, steps, seed).unwrap(),
                bfs_search(&gen.graph, &obj, n0, steps, seed).unwrap(),
                dfs_search(&gen.graph, &obj, n0, steps, seed).unwrap(),
            ];
            for tr in &traces {
                prop_assert_eq!(tr.len(), n0 + steps);
                let mut nodes = tr.nodes();
                nodes.sort_unstable();
                nodes.dedup();
                prop_assert_eq!(nodes.len(), tr.len());
                for w in tr.records().windows(2) {
                    prop_assert!(w[1].best >= w[0].best);
                    prop_assert!(w[1].regret <= w[0].regret);
                }
                prop_assert_eq!(tr.nodes()[..n0].to_vec(), traces[0].nodes()[..n0].to_vec());
            }
            prop_assert_eq!(&traces[1], &bfs_search(&gen.graph, &obj, n0, steps, seed).unwrap());
        }

        #[test]
        fn full_budget_finds_the_optimum(seed in any::<u64>()) {
            let gen = generate(&GeneratorKind::Grid { rows: 3, cols: 4 }, 0).unwrap();
            let obj = Objective::new((0..12).map(|i| ((i * 5) % 12) as f64).collect(), 0.0, seed).unwrap();
            prop_assert_eq!(random_search(&obj, 2, 10, seed).unwrap().final_regret(), 0.0);
            prop_assert_eq!(bfs_search(&gen.graph, &obj, 2, 10, seed).unwrap().final_regret(), 0.0);
            prop_assert_eq!(dfs_search(&gen.graph, &obj, 2, 10, seed).unwrap().final_regret(), 0.0);
        }
    }
}
