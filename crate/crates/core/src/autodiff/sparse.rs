use super::Tensor;
use crate::error::{Error, Result};

/// Compressed-row sparse matrix with unique coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets. Rejects out-of-range and
    /// duplicated coordinates.
    pub fn new(rows: usize, cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &entries {
            if r >= rows || c >= cols {
                return Err(Error::InvalidSparse(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
            if last == Some((r, c)) {
                return Err(Error::InvalidSparse(format!("duplicate entry ({r}, {c})")));
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            col_idx.push(c);
            values.push(v);
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.values[k]))
        })
    }

    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Tensor {
        let mut out = Tensor::zeros(self.rows, self.cols);
        for (r, c, v) in self.entries() {
            out.set(r, c, v);
        }
        out
    }

    /// `self · dense`. Accumulates over the inner index in ascending order,
    /// so the result is bitwise equal to the dense product.
    pub fn spmm(&self, dense: &Tensor) -> Result<Tensor> {
        if self.cols != dense.rows() {
            return Err(Error::ShapeMismatch {
                op: "spmm",
                lhs: self.shape(),
                rhs: dense.shape(),
            });
        }
        let m = dense.cols();
        let mut out = Tensor::zeros(self.rows, m);
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let d_row = dense.row(self.col_idx[k]);
                for (o, &b) in out_row.iter_mut().zip(d_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · dense`, used by the backward pass of [`spmm`](Self::spmm).
    pub fn spmm_t(&self, dense: &Tensor) -> Result<Tensor> {
        if self.rows != dense.rows() {
            return Err(Error::ShapeMismatch {
                op: "spmm_t",
                lhs: self.shape(),
                rhs: dense.shape(),
            });
        }
        let m = dense.cols();
        let mut out = Tensor::zeros(self.cols, m);
        for r in 0..self.rows {
            let d_row = dense.row(r);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = self.values[k];
                let out_row = out.row_mut(self.col_idx[k]);
                for (o, &b) in out_row.iter_mut().zip(d_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.entries().all(|(r, c, v)| self.get(c, r) == v)
    }
}
