//! Compressed sparse row matrices.
//!
//! This is the storage behind every linear operator in the crate. Rows keep
//! their column indices sorted and duplicate-free, which makes the
//! coordinate-list export and the dense realization used in tests
//! deterministic.

use crate::par::{self, prelude::*};

#[derive(Debug, Clone)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, col, value) triplets. Duplicate entries
    /// are summed; explicit zeros are kept out of the structure.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        assert!(cols <= u32::MAX as usize, "column index overflow");
        let mut counts = vec![0usize; rows];
        for &(r, c, _) in triplets {
            assert!(r < rows && c < cols, "triplet out of bounds");
            counts[r] += 1;
        }
        let mut indptr = Vec::with_capacity(rows + 1);
        indptr.push(0);
        for r in 0..rows {
            indptr.push(indptr[r] + counts[r]);
        }
        let nnz = indptr[rows];
        let mut indices = vec![0u32; nnz];
        let mut values = vec![0.0; nnz];
        let mut next = indptr.clone();
        for &(r, c, v) in triplets {
            let k = next[r];
            indices[k] = c as u32;
            values[k] = v;
            next[r] += 1;
        }
        let mut m = SparseMatrix { rows, cols, indptr, indices, values };
        m.sort_and_merge_rows();
        m
    }

    /// All-zero matrix (no stored entries).
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: vec![1.0; n],
        }
    }

    fn sort_and_merge_rows(&mut self) {
        let mut new_indptr = vec![0usize; self.rows + 1];
        let mut new_indices = Vec::with_capacity(self.indices.len());
        let mut new_values = Vec::with_capacity(self.values.len());
        let mut row_buf: Vec<(u32, f64)> = Vec::new();
        for r in 0..self.rows {
            row_buf.clear();
            for k in self.indptr[r]..self.indptr[r + 1] {
                row_buf.push((self.indices[k], self.values[k]));
            }
            row_buf.sort_by_key(|&(c, _)| c);
            for &(c, v) in row_buf.iter() {
                if let Some(last) = new_indices.last() {
                    if *last == c && new_indptr[r] < new_values.len() {
                        let lv: &mut f64 = new_values.last_mut().unwrap();
                        *lv += v;
                        continue;
                    }
                }
                new_indices.push(c);
                new_values.push(v);
            }
            new_indptr[r + 1] = new_indices.len();
        }
        // Drop entries that merged to exact zero only if they were never
        // nonzero; keeping merged zeros is harmless, so we keep structure
        // simple and leave them in place.
        self.indptr = new_indptr;
        self.indices = new_indices;
        self.values = new_values;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.indptr[r]..self.indptr[r + 1]
    }

    /// y = A x, overwriting `y`. Parallel over output rows.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        let row_chunk = 512;
        par::chunks_mut(y, row_chunk).enumerate().for_each(|(ci, chunk)| {
            let base = ci * row_chunk;
            for (i, out) in chunk.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in self.row_range(base + i) {
                    acc += self.values[k] * x[self.indices[k] as usize];
                }
                *out = acc;
            }
        });
    }

    /// y += coef * A x. Parallel over output rows.
    pub fn apply_scaled_add(&self, coef: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        let row_chunk = 512;
        par::chunks_mut(y, row_chunk).enumerate().for_each(|(ci, chunk)| {
            let base = ci * row_chunk;
            for (i, out) in chunk.iter_mut().enumerate() {
                let mut acc = 0.0;
                for k in self.row_range(base + i) {
                    acc += self.values[k] * x[self.indices[k] as usize];
                }
                *out += coef * acc;
            }
        });
    }

    /// Explicit transpose with sorted rows.
    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols];
        for &c in &self.indices {
            counts[c as usize] += 1;
        }
        let mut indptr = Vec::with_capacity(self.cols + 1);
        indptr.push(0);
        for c in 0..self.cols {
            indptr.push(indptr[c] + counts[c]);
        }
        let mut indices = vec![0u32; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = indptr.clone();
        for r in 0..self.rows {
            for k in self.row_range(r) {
                let c = self.indices[k] as usize;
                let p = next[c];
                indices[p] = r as u32;
                values[p] = self.values[k];
                next[c] += 1;
            }
        }
        // Row-major scan of the source keeps each transposed row sorted.
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    /// C = self * other.
    pub fn matmul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut indptr = Vec::with_capacity(self.rows + 1);
        indptr.push(0usize);
        let mut indices: Vec<u32> = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut acc = vec![0.0f64; other.cols];
        let mut touched: Vec<u32> = Vec::new();
        for r in 0..self.rows {
            touched.clear();
            for k in self.row_range(r) {
                let a = self.values[k];
                let rk = self.indices[k] as usize;
                for j in other.row_range(rk) {
                    let c = other.indices[j] as usize;
                    if acc[c] == 0.0 && !touched.contains(&(c as u32)) {
                        touched.push(c as u32);
                    }
                    acc[c] += a * other.values[j];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                values.push(acc[c as usize]);
                acc[c as usize] = 0.0;
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn row_abs_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            out[r] = self.row_range(r).map(|k| self.values[k].abs()).sum();
        }
        out
    }

    pub fn col_abs_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for k in 0..self.nnz() {
            out[self.indices[k] as usize] += self.values[k].abs();
        }
        out
    }

    /// Scales all stored values by `s`.
    pub fn scaled(mut self, s: f64) -> SparseMatrix {
        for v in &mut self.values {
            *v *= s;
        }
        self
    }

    /// Entries in (row, col) order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for r in 0..self.rows {
            for k in self.row_range(r) {
                out.push((r, self.indices[k] as usize, self.values[k]));
            }
        }
        out
    }

    /// Dense realization; intended for small test instances only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for r in 0..self.rows {
            for k in self.row_range(r) {
                d[r][self.indices[k] as usize] += self.values[k];
            }
        }
        d
    }
}
