//! Weighted undirected graphs in compressed-row form.

mod generate;
mod io;

pub use generate::{generate, GeneratorKind, Generated};
pub use io::{load_edge_list, parse_edge_list, write_edge_list, write_objective, LoadedGraph};

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Undirected graph with symmetric nonnegative weights and no self-loops.
///
/// Both orientations of every edge are stored. Neighbour lists are sorted by
/// node id, which fixes the order walks and searches enumerate neighbours.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    row_ptr: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    weighted_degrees: Vec<f64>,
}

impl Graph {
    /// Build from undirected edges `(i, j, w)`. Each edge may be given in
    /// either orientation; repeated edges have their weights summed.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if num_nodes == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        if num_nodes > u32::MAX as usize {
            return Err(Error::InvalidGraph(format!("{num_nodes} nodes exceeds u32 ids")));
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {num_nodes} nodes"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has non-positive or non-finite weight {w}"
                )));
            }
            *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
        }

        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); num_nodes];
        for (&(a, b), &w) in &merged {
            rows[b].push((a as u32, w));
        }
        for (&(a, b), &w) in &merged {
            rows[a].push((b as u32, w));
        }
        let mut row_ptr = Vec::with_capacity(num_nodes + 1);
        let mut neighbors = Vec::with_capacity(2 * merged.len());
        let mut weights = Vec::with_capacity(2 * merged.len());
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            for &(j, w) in row.iter() {
                neighbors.push(j);
                weights.push(w);
            }
            row_ptr.push(neighbors.len());
        }
        let weighted_degrees = (0..num_nodes)
            .map(|i| weights[row_ptr[i]..row_ptr[i + 1]].iter().sum())
            .collect();
        Ok(Self {
            row_ptr,
            neighbors,
            weights,
            weighted_degrees,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Number of stored (directed) adjacency entries, `2 × num_edges`.
    pub fn num_entries(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn neighbor_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Offset of row `i` in the flat entry arrays.
    pub fn row_offset(&self, i: usize) -> usize {
        self.row_ptr[i]
    }

    /// Unweighted degree (neighbour count).
    pub fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|i| self.degree(i)).collect()
    }

    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.weighted_degrees[i]
    }

    pub fn weighted_degrees(&self) -> &[f64] {
        &self.weighted_degrees
    }

    pub fn average_degree(&self) -> f64 {
        self.num_entries() as f64 / self.num_nodes() as f64
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let row = self.neighbors(i);
        row.binary_search(&(j as u32))
            .ok()
            .map(|k| self.weights[self.row_ptr[i] + k])
    }

    /// Undirected edges with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.num_nodes()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .zip(self.neighbor_weights(i))
                .filter(move |(&j, _)| (j as usize) > i)
                .map(move |(&j, &w)| (i, j as usize, w))
        })
    }

    /// Entry-by-entry symmetry and structural checks.
    pub fn validate(&self) -> Result<()> {
        for i in 0..self.num_nodes() {
            let row = self.neighbors(i);
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidGraph(format!("row {i} not strictly sorted")));
            }
            for (&j, &w) in row.iter().zip(self.neighbor_weights(i)) {
                let j = j as usize;
                if j == i {
                    return Err(Error::InvalidGraph(format!("self-loop at {i}")));
                }
                if !(w > 0.0) {
                    return Err(Error::InvalidGraph(format!("weight ({i},{j}) = {w}")));
                }
                if self.weight(j, i) != Some(w) {
                    return Err(Error::InvalidGraph(format!("({i},{j}) has no mirror entry")));
                }
            }
        }
        Ok(())
    }

    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        let n = self.num_nodes();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for (&j, &w) in self.neighbors(i).iter().zip(self.neighbor_weights(i)) {
                a[(i, j as usize)] = w;
            }
        }
        a
    }

    fn bfs_distances(&self, start: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_nodes()];
        let mut queue = VecDeque::from([start]);
        dist[start] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                let v = v as usize;
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Diameter estimate by double-sweep BFS from node 0 (a lower bound,
    /// exact on trees). Only the component of node 0 is considered.
    pub fn approximate_diameter(&self) -> usize {
        let far = |d: &[usize]| {
            d.iter()
                .enumerate()
                .filter(|(_, &x)| x != usize::MAX)
                .max_by_key(|(_, &x)| x)
                .map(|(i, &x)| (i, x))
                .unwrap_or((0, 0))
        };
        let (u, _) = far(&self.bfs_distances(0));
        far(&self.bfs_distances(u)).1
    }
}

/// The symmetric matrix whose power series the features estimate. Shares the
/// sparsity pattern (and entry order) of its [`Graph`].
#[derive(Clone, Debug, PartialEq)]
pub struct WalkMatrix {
    values: Vec<f64>,
}

impl WalkMatrix {
    /// The weighted adjacency `W` itself.
    pub fn adjacency(g: &Graph) -> Self {
        Self {
            values: g.weights.clone(),
        }
    }

    /// `D^{-1/2} W D^{-1/2}` with weighted degrees; spectrum in `[-1, 1]`.
    pub fn normalized_adjacency(g: &Graph) -> Result<Self> {
        let inv_sqrt = inverse_sqrt_degrees(g)?;
        let mut values = Vec::with_capacity(g.num_entries());
        for i in 0..g.num_nodes() {
            for (&j, &w) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
                values.push(w * inv_sqrt[i] * inv_sqrt[j as usize]);
            }
        }
        Ok(Self { values })
    }

    /// Values aligned with `g`'s entry order. Must be symmetric.
    pub fn from_values(g: &Graph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.num_entries() {
            return Err(Error::DimensionMismatch {
                expected: g.num_entries(),
                found: values.len(),
            });
        }
        let m = Self { values };
        for i in 0..g.num_nodes() {
            for (k, &j) in g.neighbors(i).iter().enumerate() {
                let j = j as usize;
                let back = g.neighbors(j).binary_search(&(i as u32)).unwrap();
                let (a, b) = (m.values[g.row_ptr[i] + k], m.values[g.row_ptr[j] + back]);
                if a != b || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "walk matrix not symmetric/finite at ({i},{j})"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row `i` values, aligned with `g.neighbors(i)`.
    pub fn row<'a>(&'a self, g: &Graph, i: usize) -> &'a [f64] {
        &self.values[g.row_ptr[i]..g.row_ptr[i + 1]]
    }

    pub fn is_compatible(&self, g: &Graph) -> bool {
        self.values.len() == g.num_entries()
    }

    pub fn to_dense(&self, g: &Graph) -> DMatrix<f64> {
        let n = g.num_nodes();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for (&j, &w) in g.neighbors(i).iter().zip(self.row(g, i)) {
                a[(i, j as usize)] = w;
            }
        }
        a
    }
}

/// Which walk matrix a kernel's power series is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkMatrixKind {
    Adjacency,
    #[default]
    NormalizedAdjacency,
}

impl WalkMatrixKind {
    pub fn build(self, g: &Graph) -> Result<WalkMatrix> {
        match self {
            Self::Adjacency => Ok(WalkMatrix::adjacency(g)),
            Self::NormalizedAdjacency => WalkMatrix::normalized_adjacency(g),
        }
    }
}

fn inverse_sqrt_degrees(g: &Graph) -> Result<Vec<f64>> {
    g.weighted_degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d > 0.0 {
                Ok(1.0 / d.sqrt())
            } else {
                Err(Error::IsolatedNode { node: i })
            }
        })
        .collect()
}

/// Combinatorial Laplacian `L = D − W`.
pub fn laplacian(g: &Graph) -> DMatrix<f64> {
    let mut l = -g.adjacency_dense();
    for i in 0..g.num_nodes() {
        l[(i, i)] = g.weighted_degree(i);
    }
    l
}

/// Symmetric normalised Laplacian `D^{-1/2} L D^{-1/2}`, spectrum in `[0, 2]`.
pub fn normalized_laplacian(g: &Graph) -> Result<DMatrix<f64>> {
    let inv_sqrt = inverse_sqrt_degrees(g)?;
    let n = g.num_nodes();
    let mut l = DMatrix::identity(n, n);
    for i in 0..n {
        for (&j, &w) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
            l[(i, j as usize)] = -w * inv_sqrt[i] * inv_sqrt[j as usize];
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap()
    }

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn laplacian_of_single_edge() {
        let g = path(2);
        let l = laplacian(&g);
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn laplacian_of_edgeless_graph_is_zero() {
        let g = Graph::from_edges(3, []).unwrap();
        assert_eq!(laplacian(&g), DMatrix::zeros(3, 3));
    }

    #[test]
    fn triangle_laplacian_spectrum() {
        let l = laplacian(&triangle());
        let expected = DMatrix::from_row_slice(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.]);
        assert_eq!(l, expected);
        let ev = sorted_eigenvalues(l);
        for (a, b) in ev.iter().zip([0.0, 3.0, 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn normalized_laplacian_of_pair() {
        let l = normalized_laplacian(&path(2)).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        let ev = sorted_eigenvalues(l);
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn normalized_laplacian_ring_spectrum() {
        let g = Graph::from_edges(8, (0..8).map(|i| (i, (i + 1) % 8, 1.0))).unwrap();
        let ev = sorted_eigenvalues(normalized_laplacian(&g).unwrap());
        assert_abs_diff_eq!(ev[0], 0.0, epsilon = 1e-12);
        assert!(ev.iter().all(|&x| x > -1e-12 && x < 2.0 + 1e-12));
        // even cycle is bipartite
        assert_abs_diff_eq!(ev[7], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn isolated_node_is_reported() {
        let g = Graph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        match normalized_laplacian(&g) {
            Err(Error::IsolatedNode { node }) => assert_eq!(node, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(WalkMatrix::normalized_adjacency(&g).is_err());
    }

    #[test]
    fn normalized_adjacency_examples() {
        let w = WalkMatrix::normalized_adjacency(&path(2)).unwrap();
        assert_eq!(w.to_dense(&path(2)), DMatrix::from_row_slice(2, 2, &[0., 1., 1., 0.]));

        let t = triangle();
        let w = WalkMatrix::normalized_adjacency(&t).unwrap();
        assert!(w.values().iter().all(|&v| (v - 0.5).abs() < 1e-15));

        let star = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let w = WalkMatrix::normalized_adjacency(&star).unwrap().to_dense(&star);
        for leaf in 1..4 {
            assert_abs_diff_eq!(w[(0, leaf)], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn weights_are_summed_for_repeated_edges() {
        let g = Graph::from_edges(2, [(0, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.weight(0, 1), Some(3.0));
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(2, [(0, 0, 1.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, 0.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 2, 1.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn diameter_of_path() {
        assert_eq!(path(7).approximate_diameter(), 6);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (2usize..25).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.1f64..3.0), 1..60).prop_map(move |es| {
                let edges: Vec<_> = es.into_iter().filter(|(a, b, _)| a != b).collect();
                Graph::from_edges(n, edges).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn graphs_are_symmetric(g in arb_graph()) {
            prop_assert!(g.validate().is_ok());
            let a = g.adjacency_dense();
            prop_assert_eq!(a.transpose(), a);
        }

        #[test]
        fn laplacian_rows_sum_to_zero(g in arb_graph()) {
            let l = laplacian(&g);
            for i in 0..g.num_nodes() {
                let s: f64 = l.row(i).iter().sum();
                prop_assert!(s.abs() <= 1e-12 * (1.0 + g.weighted_degree(i)));
            }
        }

        #[test]
        fn normalized_laplacian_spectrum_in_range(g in arb_graph()) {
            if let Ok(l) = normalized_laplacian(&g) {
                for ev in l.symmetric_eigenvalues().iter() {
                    prop_assert!(*ev >= -1e-9 && *ev <= 2.0 + 1e-9);
                }
                let w = WalkMatrix::normalized_adjacency(&g).unwrap().to_dense(&g);
                let n = g.num_nodes();
                let diff = DMatrix::<f64>::identity(n, n) - l - w;
                prop_assert!(diff.amax() <= 1e-12);
            }
        }
    }
}
