use alloc::vec;
use alloc::vec::Vec;

use super::{norm2, CMatrix, LinalgError, C64};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut trips: Vec<(usize, usize, C64)> = (0..n).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self::from_triplets(n, n, &mut trips)
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// exact zeros dropped. The triplet buffer is sorted in place.
    pub fn from_triplets(nrows: usize, ncols: usize, trips: &mut [(usize, usize, C64)]) -> Self {
        trips.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut values: Vec<C64> = Vec::with_capacity(trips.len());
        let mut rows_of: Vec<usize> = Vec::with_capacity(trips.len());
        for &(r, c, v) in trips.iter() {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            if let (Some(&lr), Some(&lc)) = (rows_of.last(), indices.last()) {
                if lr == r && lc == c {
                    *values.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows_of.push(r);
            indices.push(c);
            values.push(v);
        }
        let mut keep_idx = Vec::with_capacity(indices.len());
        let mut keep_val = Vec::with_capacity(values.len());
        for ((r, c), v) in rows_of.into_iter().zip(indices).zip(values) {
            if v.re != 0.0 || v.im != 0.0 {
                indptr[r + 1] += 1;
                keep_idx.push(c);
                keep_val.push(v);
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self {
            nrows,
            ncols,
            indptr,
            indices: keep_idx,
            values: keep_val,
        }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut trips = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    trips.push((i, j, v));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), &mut trips)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                out.push((i, j, v));
            }
        }
        out
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` over row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[s..e]
            .iter()
            .copied()
            .zip(self.values[s..e].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (s, e) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[s..e].binary_search(&j) {
            Ok(k) => self.values[s + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.ncols, "matvec length mismatch");
        assert_eq!(y.len(), self.nrows, "matvec output length mismatch");
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.indptr[i], self.indptr[i + 1]);
            let mut acc = C64::new(0.0, 0.0);
            for k in s..e {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut trips: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &mut trips)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        if (self.nrows, self.ncols) != (other.nrows, other.ncols) {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.nrows, self.ncols),
                found: (other.nrows, other.ncols),
            });
        }
        let mut trips = self.triplets();
        trips.extend(other.triplets());
        Ok(Self::from_triplets(self.nrows, self.ncols, &mut trips))
    }

    /// Kronecker product `a ⊗ b`.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let mut trips = Vec::with_capacity(a.nnz() * b.nnz());
        for (i, j, x) in a.triplets() {
            for (k, l, y) in b.triplets() {
                trips.push((i * b.nrows + k, j * b.ncols + l, x * y));
            }
        }
        Self::from_triplets(a.nrows * b.nrows, a.ncols * b.ncols, &mut trips)
    }

    /// Replaces row `i` with the given `(col, value)` entries.
    pub fn replace_row(&self, i: usize, entries: &[(usize, C64)]) -> Self {
        let mut trips: Vec<_> = self.triplets().into_iter().filter(|t| t.0 != i).collect();
        trips.extend(entries.iter().map(|&(j, v)| (i, j, v)));
        Self::from_triplets(self.nrows, self.ncols, &mut trips)
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale_rows_cols(&self, left: &[C64], right: &[C64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                out.values[k] = left[i] * self.values[k] * right[self.indices[k]];
            }
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        norm2(&self.values)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let mut t = vec![(0, 1, re(1.0)), (0, 1, re(2.0)), (1, 0, re(0.0)), (1, 1, re(-1.0))];
        let m = CsrMatrix::from_triplets(2, 2, &mut t);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 1), re(3.0));
        assert_eq!(m.get(1, 0), re(0.0));
    }

    #[test]
    fn kron_matches_dense() {
        let a = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = CMatrix::from_fn(3, 2, |i, j| C64::new(j as f64, 2.0 - i as f64));
        let s = CsrMatrix::kron(&CsrMatrix::from_dense(&a), &CsrMatrix::from_dense(&b));
        assert_eq!(s.to_dense(), a.kron(&b));
    }

    #[test]
    fn matvec_matches_dense() {
        let a = CMatrix::from_fn(4, 4, |i, j| C64::new((i * j) as f64 - 2.0, i as f64));
        let s = CsrMatrix::from_dense(&a);
        let x: Vec<C64> = (0..4).map(|k| C64::new(k as f64, -1.0)).collect();
        assert_eq!(s.matvec(&x), a.matvec(&x));
    }

    #[test]
    fn replace_row_and_transpose() {
        let s = CsrMatrix::identity(3).replace_row(1, &[(0, re(5.0)), (2, re(7.0))]);
        assert_eq!(s.get(1, 1), re(0.0));
        assert_eq!(s.get(1, 2), re(7.0));
        assert_eq!(s.transpose().get(2, 1), re(7.0));
    }
}
