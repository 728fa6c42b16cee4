//! Compressed sparse row matrices and a banded Cholesky factorization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Triplet accumulator; duplicate entries are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct CooBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        CooBuilder { rows, cols, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        if value != 0.0 {
            self.entries.push((i, j, value));
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry present") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { rows: self.rows, cols: self.cols, row_ptr, col_idx, values }
    }
}

/// Sparse matrix in compressed row storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CooBuilder::new(rows, cols).build()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (i, self.col_idx[p], self.values[p]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    /// `y += alpha * A x`.
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.rows) {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi += alpha * s;
        }
    }

    /// `Aᵀ x`.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate().take(self.rows) {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[p]] += self.values[p] * xi;
            }
        }
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            let mut row = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                row += self.values[p] * x[self.col_idx[p]];
            }
            s += x[i] * row;
        }
        s
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = CooBuilder::new(self.cols, self.rows);
        for (i, j, v) in self.triplets() {
            b.push(j, i, v);
        }
        b.build()
    }

    /// `Σ_k weights_k · A_k` for matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        let (rows, cols) = terms.first().map(|t| (t.1.rows, t.1.cols)).unwrap_or((0, 0));
        let mut b = CooBuilder::new(rows, cols);
        for &(w, m) in terms {
            debug_assert_eq!((m.rows, m.cols), (rows, cols));
            if w == 0.0 {
                continue;
            }
            for (i, j, v) in m.triplets() {
                b.push(i, j, w * v);
            }
        }
        b.build()
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        self.triplets()
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm of the entries selected by `keep(i, j)`.
    pub fn block_norm(&self, keep: impl Fn(usize, usize) -> bool) -> f64 {
        libm::sqrt(
            self.triplets()
                .filter(|&(i, j, _)| keep(i, j))
                .map(|(_, _, v)| v * v)
                .sum::<f64>(),
        )
    }

    /// Row-major dense copy (intended for small matrices in tests).
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for (i, j, v) in self.triplets() {
            d[i * self.cols + j] += v;
        }
        d
    }
}

/// Injection between a full dof vector and the subset of free dofs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofSubset {
    full_to_sub: Vec<Option<usize>>,
    sub_to_full: Vec<usize>,
}

impl DofSubset {
    pub fn from_mask(free: &[bool]) -> Self {
        let mut full_to_sub = vec![None; free.len()];
        let mut sub_to_full = Vec::new();
        for (i, &f) in free.iter().enumerate() {
            if f {
                full_to_sub[i] = Some(sub_to_full.len());
                sub_to_full.push(i);
            }
        }
        DofSubset { full_to_sub, sub_to_full }
    }

    pub fn len(&self) -> usize {
        self.sub_to_full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub_to_full.is_empty()
    }

    pub fn full_len(&self) -> usize {
        self.full_to_sub.len()
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.sub_to_full.iter().map(|&i| full[i]).collect()
    }

    /// Full-length vector with zeros outside the subset.
    pub fn extend(&self, sub: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.full_to_sub.len()];
        for (k, &i) in self.sub_to_full.iter().enumerate() {
            full[i] = sub[k];
        }
        full
    }

    pub fn sub_index(&self, full: usize) -> Option<usize> {
        self.full_to_sub[full]
    }

    /// Principal submatrix on the subset.
    pub fn restrict_matrix(&self, a: &CsrMatrix) -> CsrMatrix {
        let mut b = CooBuilder::new(self.len(), self.len());
        for (i, j, v) in a.triplets() {
            if let (Some(p), Some(q)) = (self.full_to_sub[i], self.full_to_sub[j]) {
                b.push(p, q, v);
            }
        }
        b.build()
    }
}

/// Cholesky factor `L Lᵀ` of a symmetric positive definite band matrix.
///
/// Storage is row-wise: row `i` keeps columns `i - bandwidth ..= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bandwidth: usize,
    lower: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::Singular(format!("{}x{} matrix is not square", a.rows, a.cols)));
        }
        let n = a.rows;
        let bandwidth = a.triplets().map(|(i, j, _)| i.abs_diff(j)).max().unwrap_or(0);
        let w = bandwidth + 1;
        let mut lower = vec![0.0; n * w];
        for (i, j, v) in a.triplets() {
            if j <= i {
                lower[i * w + (j + bandwidth - i)] = v;
            }
        }
        // Row-oriented band Cholesky: L_ij = (A_ij − Σ_k L_ik L_jk) / L_jj.
        for i in 0..n {
            let j0 = i.saturating_sub(bandwidth);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bandwidth));
                let mut s = lower[i * w + (j + bandwidth - i)];
                for k in k0..j {
                    s -= lower[i * w + (k + bandwidth - i)] * lower[j * w + (k + bandwidth - j)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::Singular(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    lower[i * w + bandwidth] = libm::sqrt(s);
                } else {
                    lower[i * w + (j + bandwidth - i)] = s / lower[j * w + bandwidth];
                }
            }
        }
        Ok(BandedCholesky { n, bandwidth, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bandwidth, self.bandwidth + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.lower[i * w + (k + bw - i)] * y[k];
            }
            y[i] = s / self.lower[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= self.lower[k * w + (i + bw - k)] * y[k];
            }
            y[i] = s / self.lower[i * w + bw];
        }
        y
    }
}
