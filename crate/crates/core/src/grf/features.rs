use std::io::{BufRead, BufReader, Read, Write};

use nalgebra::DMatrix;

use super::sparse::{sparse_dot, CsrMatrix};
use super::WalkConfig;
use crate::{Error, Result};

/// Largest node count for which dense kernels are formed.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Bytes per stored feature entry: an `f64` value and a `u32` column.
pub const ENTRY_BYTES: usize = 8 + 4;

/// Sparse GRF matrix `Φ`, row `i` being `φ(i)`. The transpose is kept so both
/// `Φw` and `Φᵀv` are row gathers.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    phi: CsrMatrix,
    phi_t: CsrMatrix,
    config: WalkConfig,
}

impl FeatureMatrix {
    pub fn new(phi: CsrMatrix, config: WalkConfig) -> Self {
        let phi_t = phi.transpose();
        Self { phi, phi_t, config }
    }

    pub fn phi(&self) -> &CsrMatrix {
        &self.phi
    }

    pub fn phi_t(&self) -> &CsrMatrix {
        &self.phi_t
    }

    pub fn config(&self) -> &WalkConfig {
        &self.config
    }

    /// Rows of `Φ` (nodes the features describe).
    pub fn num_rows(&self) -> usize {
        self.phi.nrows()
    }

    /// Columns of `Φ` (all graph nodes).
    pub fn num_nodes(&self) -> usize {
        self.phi.ncols()
    }

    pub fn nnz(&self) -> usize {
        self.phi.nnz()
    }

    /// Storage of `Φ` alone (the transpose is a cache).
    pub fn memory_bytes(&self) -> usize {
        self.nnz() * ENTRY_BYTES
    }

    /// `Φw` for `w` over all nodes.
    pub fn phi_mul(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.phi.mul_vec(w)
    }

    /// `Φᵀv` for `v` over the rows.
    pub fn phi_t_mul(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.phi_t.mul_vec(v)
    }

    /// `Φ(Φᵀv)`.
    pub fn kernel_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.phi_mul(&self.phi_t_mul(v)?)
    }

    /// `φ(i)ᵀφ(j)`.
    pub fn kernel_entry(&self, i: usize, j: usize) -> f64 {
        sparse_dot(self.phi.row(i), self.phi.row(j))
    }

    /// `‖φ(i)‖₁`.
    pub fn row_l1(&self, i: usize) -> f64 {
        self.phi.row(i).1.iter().map(|v| v.abs()).sum()
    }

    /// Dense `K̂ = ΦΦᵀ`, refused above `cap` rows.
    pub fn dense_kernel(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.num_rows();
        if n > cap {
            return Err(Error::DenseCapExceeded { requested: n, cap });
        }
        Ok(self.phi.gram_with(&self.phi_t))
    }

    /// Features of the listed nodes only, for solves on a node subset.
    pub fn restrict(&self, rows: &[usize]) -> Self {
        Self::new(self.phi.select_rows(rows), self.config)
    }

    /// Text triplets: a header `N n p_halt l_max seed`, then `row col value`
    /// sorted by `(row, col)`. Values use the shortest exact decimal form.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        if self.num_rows() != self.num_nodes() {
            return Err(Error::InvalidParameter(
                "only square feature matrices are serialised".into(),
            ));
        }
        let c = &self.config;
        writeln!(out, "{} {} {} {} {}", self.num_nodes(), c.num_walkers, c.p_halt, c.l_max, c.seed)?;
        for i in 0..self.num_rows() {
            let (cols, vals) = self.phi.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                writeln!(out, "{i} {j} {v}")?;
            }
        }
        Ok(())
    }

    pub fn read_text<R: Read>(reader: R) -> Result<Self> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines.next().ok_or(Error::EmptyInput)??;
        let h: Vec<&str> = header.split_whitespace().collect();
        let bad = |line: usize, what: &str| Error::Parse {
            line,
            message: what.to_string(),
        };
        if h.len() != 5 {
            return Err(bad(1, "header must be `N n p_halt l_max seed`"));
        }
        let n: usize = h[0].parse().map_err(|_| bad(1, "bad N"))?;
        let config = WalkConfig::new(
            h[1].parse().map_err(|_| bad(1, "bad n"))?,
            h[2].parse().map_err(|_| bad(1, "bad p_halt"))?,
            h[3].parse().map_err(|_| bad(1, "bad l_max"))?,
            h[4].parse().map_err(|_| bad(1, "bad seed"))?,
        )?;
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (k, line) in lines.enumerate() {
            let line_no = k + 2;
            let line = line?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.is_empty() {
                continue;
            }
            if f.len() != 3 {
                return Err(bad(line_no, "expected `row col value`"));
            }
            let i: usize = f[0].parse().map_err(|_| bad(line_no, "bad row"))?;
            let j: u32 = f[1].parse().map_err(|_| bad(line_no, "bad col"))?;
            let v: f64 = f[2].parse().map_err(|_| bad(line_no, "bad value"))?;
            if i >= n {
                return Err(bad(line_no, "row out of range"));
            }
            rows[i].push((j, v));
        }
        Ok(Self::new(CsrMatrix::from_sorted_rows(n, rows)?, config))
    }
}
