use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use super::{norm2, LinalgError, C64};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_slice(rows: usize, cols: usize, data: &[C64]) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(Self {
            rows,
            cols,
            data: data.to_vec(),
        })
    }

    /// Reshapes a column-major vector (the vec of a matrix) into an n x n matrix.
    pub fn from_column_major(n: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), n * n);
        Self::from_fn(n, n, |i, j| v[i + j * n])
    }

    /// Column-major flattening, the inverse of [`CMatrix::from_column_major`].
    pub fn to_column_major(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch {
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Self::zeros(r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self, LinalgError> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Largest entrywise modulus of `self − self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn norm_fro(&self) -> f64 {
        norm2(&self.data)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("mul shape mismatch")
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    norm_one: f64,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::ShapeMismatch {
                expected: (a.rows(), a.rows()),
                found: a.shape(),
            });
        }
        let n = a.rows();
        let norm_one = a.norm_one();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].norm();
            for i in k + 1..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LinalgError::Singular {
                    condition: f64::INFINITY,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let inv = C64::new(1.0, 0.0) / pivot;
            for i in k + 1..n {
                let f = lu[i * n + k] * inv;
                lu[i * n + k] = f;
                if f.re == 0.0 && f.im == 0.0 {
                    continue;
                }
                let (head, tail) = lu.split_at_mut(i * n);
                let krow = &head[k * n + k + 1..k * n + n];
                let irow = &mut tail[k + 1..n];
                for (x, y) in irow.iter_mut().zip(krow) {
                    *x -= f * y;
                }
            }
        }
        Ok(Self { n, lu, perm, norm_one })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_permuted_in_place(&mut x);
        x
    }

    /// Solves in place; `x` holds the right-hand side on entry.
    pub fn solve_in_place(&self, x: &mut [C64]) {
        let permuted: Vec<C64> = self.perm.iter().map(|&p| x[p]).collect();
        x.copy_from_slice(&permuted);
        self.solve_permuted_in_place(x);
    }

    fn solve_permuted_in_place(&self, x: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: C64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: C64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
    }

    /// Solves `A† x = b`.
    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y = b.to_vec();
        // U† y = b
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.lu[k * n + i].conj() * y[k];
            }
            y[i] = s / self.lu[i * n + i].conj();
        }
        // L† z = y
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.lu[k * n + i].conj() * y[k];
            }
            y[i] = s;
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// One-norm condition number estimate (Hager's method).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            est = y.iter().map(|z| z.norm()).sum::<f64>();
            let xi: Vec<C64> = y
                .iter()
                .map(|z| {
                    let a = z.norm();
                    if a == 0.0 {
                        C64::new(1.0, 0.0)
                    } else {
                        z / a
                    }
                })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.norm()))
                .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx {
                break;
            }
            x = vec![C64::new(0.0, 0.0); n];
            x[jmax] = C64::new(1.0, 0.0);
        }
        est * self.norm_one
    }
}

/// Relative residual `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
pub fn relative_residual(a: &CMatrix, x: &[C64], b: &[C64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<C64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Dense solve with one round of iterative refinement.
///
/// Fails with [`LinalgError::Singular`] when the refined residual stays above
/// `1e-10` relative.
pub fn solve_linear(a: &CMatrix, rhs: &[C64]) -> Result<Vec<C64>, LinalgError> {
    if rhs.len() != a.rows() {
        return Err(LinalgError::ShapeMismatch {
            expected: (a.rows(), 1),
            found: (rhs.len(), 1),
        });
    }
    let lu = Lu::factor(a)?;
    let mut x = lu.solve(rhs);
    for _ in 0..2 {
        let ax = a.matvec(&x);
        let r: Vec<C64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        let dx = lu.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let res = relative_residual(a, &x, rhs);
    let cond = lu.condition_estimate();
    log::debug!("dense solve n={} cond~{:.2e} residual {:.2e}", a.rows(), cond, res);
    if !(res <= 1e-10) {
        return Err(LinalgError::Singular { condition: cond });
    }
    Ok(x)
}

/// Kernel vector of `m` normalized by a linear constraint.
///
/// Solves the stacked system `[m; c] v = [0; value]` by Householder QR in the
/// least-squares sense. A one-dimensional kernel makes the stacked matrix
/// full-rank and the least-squares residual zero; anything else is reported
/// as a degenerate kernel.
pub fn null_vector_with_constraint(m: &CMatrix, constraint: &[C64], value: C64) -> Result<Vec<C64>, LinalgError> {
    let n = m.cols();
    if !m.is_square() || constraint.len() != n {
        return Err(LinalgError::ShapeMismatch {
            expected: (n, n),
            found: (m.rows(), constraint.len()),
        });
    }
    let rows = n + 1;
    // Column-major copy of the stacked matrix for cache-friendly Householder.
    let mut a = vec![C64::new(0.0, 0.0); rows * n];
    for j in 0..n {
        for i in 0..n {
            a[j * rows + i] = m[(i, j)];
        }
        a[j * rows + n] = constraint[j];
    }
    let mut b = vec![C64::new(0.0, 0.0); rows];
    b[n] = value;
    let scale = m.max_abs().max(constraint.iter().fold(0.0, |s, z| s.max(z.norm())));
    let mut rdiag = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let col = &mut a[k * rows..(k + 1) * rows];
        let alpha_norm = norm2(&col[k..]);
        if alpha_norm == 0.0 {
            rdiag[k] = C64::new(0.0, 0.0);
            continue;
        }
        let x0 = col[k];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * alpha_norm;
        col[k] -= alpha;
        let vnorm = norm2(&col[k..]);
        for z in col[k..].iter_mut() {
            *z /= vnorm;
        }
        rdiag[k] = alpha;
        let v: Vec<C64> = col[k..].to_vec();
        for j in k + 1..n {
            let cj = &mut a[j * rows + k..(j + 1) * rows];
            let s: C64 = v.iter().zip(cj.iter()).map(|(p, q)| p.conj() * q).sum();
            for (q, p) in cj.iter_mut().zip(&v) {
                *q -= p * s * 2.0;
            }
        }
        let s: C64 = v.iter().zip(&b[k..]).map(|(p, q)| p.conj() * q).sum();
        for (q, p) in b[k..].iter_mut().zip(&v) {
            *q -= p * s * 2.0;
        }
    }
    let rmax = rdiag.iter().fold(0.0f64, |s, z| s.max(z.norm()));
    let rmin = rdiag.iter().fold(f64::INFINITY, |s, z| s.min(z.norm()));
    if rmin <= 1e-13 * rmax.max(scale) {
        return Err(LinalgError::DegenerateKernel(format!(
            "kernel dimension exceeds one (min |R_kk| = {rmin:.3e})"
        )));
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[j * rows + i] * v[j];
        }
        v[i] = s / rdiag[i];
    }
    let mv = m.matvec(&v);
    let res = norm2(&mv);
    let mnorm = m.norm_fro();
    if res > 1e-9 * mnorm * norm2(&v).max(1.0) {
        return Err(LinalgError::DegenerateKernel(format!(
            "no kernel vector (residual {res:.3e}, |M| = {mnorm:.3e})"
        )));
    }
    Ok(v)
}
