use nalgebra::DMatrix;

use crate::exec;
use crate::{Error, Result};

/// Compressed sparse rows with `u32` column ids. Columns within a row are
/// strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Build from per-row `(col, value)` lists already sorted by column.
    pub fn from_sorted_rows(ncols: usize, rows: Vec<Vec<(u32, f64)>>) -> Result<Self> {
        let nnz = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (i, row) in rows.into_iter().enumerate() {
            let mut prev: Option<u32> = None;
            for (c, v) in row {
                if c as usize >= ncols || prev.is_some_and(|p| p >= c) {
                    return Err(Error::InvalidParameter(format!(
                        "row {i}: column {c} out of order or out of range"
                    )));
                }
                prev = Some(c);
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(Self {
            ncols,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j as u32, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self::from_sorted_rows(m.ncols(), rows).expect("dense rows are sorted")
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Transpose by counting sort; rows of the result list source rows in
    /// increasing order.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for k in 0..self.ncols {
            counts[k + 1] += counts[k];
        }
        let row_ptr = counts.clone();
        let mut cursor = counts;
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.nrows() {
            let (rc, rv) = self.row(i);
            for (&c, &v) in rc.iter().zip(rv) {
                let slot = &mut cursor[c as usize];
                cols[*slot] = i as u32;
                vals[*slot] = v;
                *slot += 1;
            }
        }
        Self {
            ncols: self.nrows(),
            row_ptr,
            cols,
            vals,
        }
    }

    /// `A x`, one gather per row.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.nrows()];
        exec::fill_indices(&mut out, |i| {
            let (c, v) = self.row(i);
            c.iter().zip(v).map(|(&c, &v)| v * x[c as usize]).sum()
        });
        Ok(out)
    }

    /// Sub-matrix made of the listed rows, in the listed order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let nnz: usize = rows.iter().map(|&r| self.row_nnz(r)).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for &r in rows {
            let (c, v) = self.row(r);
            cols.extend_from_slice(c);
            vals.extend_from_slice(v);
            row_ptr.push(cols.len());
        }
        Self {
            ncols: self.ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Dense `A Bᵀ` given `b_t = Bᵀ` in CSR form.
    pub fn gram_with(&self, b_t: &CsrMatrix) -> DMatrix<f64> {
        let (n, m) = (self.nrows(), b_t.ncols());
        let rows = exec::map_indices(n, |i| {
            let mut row = vec![0.0; m];
            let (cols, vals) = self.row(i);
            for (&k, &a) in cols.iter().zip(vals) {
                let (bc, bv) = b_t.row(k as usize);
                for (&j, &b) in bc.iter().zip(bv) {
                    row[j as usize] += a * b;
                }
            }
            row
        });
        DMatrix::from_fn(n, m, |i, j| rows[i][j])
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows(), self.ncols);
        for i in 0..self.nrows() {
            let (c, v) = self.row(i);
            for (&c, &v) in c.iter().zip(v) {
                m[(i, c as usize)] = v;
            }
        }
        m
    }
}

/// Dot product of two sorted sparse rows.
pub fn sparse_dot(a: (&[u32], &[f64]), b: (&[u32], &[f64])) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < a.0.len() && j < b.0.len() {
        match a.0[i].cmp(&b.0[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a.1[i] * b.1[j];
                i += 1;
                j += 1;
            }
        }
    }
    acc
}
