use alloc::format;
use alloc::vec::Vec;

use super::{eigen_min_hermitian, CMatrix, LinalgError, C64};

/// Truncated annihilation operator, `⟨n−1|a|n⟩ = √n`.
pub fn fock_destroy(dim: usize) -> Result<CMatrix, LinalgError> {
    if dim < 2 {
        return Err(LinalgError::InvalidDimension {
            dim,
            reason: "a Fock mode needs at least two levels",
        });
    }
    Ok(CMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Operator on a tensor product of truncated modes.
///
/// Mode order is (left photons, right photons, phonons); the last mode is the
/// fastest-varying index of the product basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl TensorOperator {
    pub fn new(dims: &[usize], matrix: CMatrix) -> Result<Self, LinalgError> {
        let n: usize = dims.iter().product();
        if matrix.shape() != (n, n) {
            return Err(LinalgError::ShapeMismatch {
                expected: (n, n),
                found: matrix.shape(),
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            matrix,
        })
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            matrix: CMatrix::identity(n),
        }
    }

    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Self {
            dims: dims.to_vec(),
            matrix: CMatrix::zeros(n, n),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Hilbert-space dimension, the product of the mode dimensions.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dims: self.dims.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims, "tensor dims mismatch");
        Self {
            dims: self.dims.clone(),
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims, "tensor dims mismatch");
        Self {
            dims: self.dims.clone(),
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dims, other.dims, "tensor dims mismatch");
        Self {
            dims: self.dims.clone(),
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.matrix.hermitian_deviation() <= tol
    }

    /// Flat index of the product basis state `|n_0, n_1, …⟩`.
    pub fn basis_index(dims: &[usize], occupations: &[usize]) -> usize {
        occupations.iter().zip(dims).fold(0, |acc, (&n, &d)| acc * d + n)
    }

    /// Occupations of flat basis index `k`.
    pub fn occupations(dims: &[usize], mut k: usize) -> Vec<usize> {
        let mut occ = alloc::vec![0; dims.len()];
        for (o, &d) in occ.iter_mut().zip(dims).rev() {
            *o = k % d;
            k /= d;
        }
        occ
    }
}

/// Places a single-mode operator on `mode`, identity elsewhere.
pub fn embed(op: &CMatrix, mode: usize, dims: &[usize]) -> Result<TensorOperator, LinalgError> {
    if mode >= dims.len() {
        return Err(LinalgError::InvalidDimension {
            dim: mode,
            reason: "mode index out of range",
        });
    }
    if op.shape() != (dims[mode], dims[mode]) {
        return Err(LinalgError::ShapeMismatch {
            expected: (dims[mode], dims[mode]),
            found: op.shape(),
        });
    }
    let mut acc = CMatrix::identity(1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == mode { op.clone() } else { CMatrix::identity(d) };
        acc = acc.kron(&factor);
    }
    TensorOperator::new(dims, acc)
}

/// Tolerances applied by [`DensityMatrix::validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityTolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl Default for DensityTolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            trace: 1e-10,
            min_eigenvalue: -1e-8,
        }
    }
}

/// Density matrix on a truncated tensor space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
    trace: C64,
}

impl DensityMatrix {
    /// Wraps a matrix and normalizes it to unit trace.
    pub fn from_matrix(dims: &[usize], matrix: CMatrix) -> Result<Self, LinalgError> {
        let op = TensorOperator::new(dims, matrix)?;
        let tr = op.matrix.trace();
        if tr.norm() == 0.0 || !tr.re.is_finite() {
            return Err(LinalgError::DegenerateKernel(format!("density matrix has trace {tr}")));
        }
        let matrix = op.matrix.scale(C64::new(1.0, 0.0) / tr);
        let trace = matrix.trace();
        Ok(Self {
            dims: op.dims,
            matrix,
            trace,
        })
    }

    /// Pure state `|ψ⟩⟨ψ|`.
    pub fn pure(dims: &[usize], psi: &[C64]) -> Result<Self, LinalgError> {
        let n = psi.len();
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        Self::from_matrix(dims, m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.trace
    }

    /// Real parts of the diagonal (populations).
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().into_iter().map(|z| z.re).collect()
    }

    pub fn expectation(&self, op: &TensorOperator) -> C64 {
        op.matrix().matmul(&self.matrix).expect("dims checked").trace()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        self.matrix.hermitian_deviation()
    }

    pub fn min_eigenvalue(&self) -> Result<f64, LinalgError> {
        let sym = CMatrix::from_fn(self.matrix.rows(), self.matrix.cols(), |i, j| {
            (self.matrix[(i, j)] + self.matrix[(j, i)].conj()) * 0.5
        });
        eigen_min_hermitian(&sym)
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self, tol: &DensityTolerances) -> Result<(), LinalgError> {
        let dev = self.hermitian_deviation();
        if dev > tol.hermitian {
            return Err(LinalgError::NotHermitian { deviation: dev });
        }
        if (self.trace - C64::new(1.0, 0.0)).norm() > tol.trace {
            return Err(LinalgError::DegenerateKernel(format!(
                "trace {} differs from one",
                self.trace
            )));
        }
        let emin = self.min_eigenvalue()?;
        if emin < tol.min_eigenvalue {
            return Err(LinalgError::DegenerateKernel(format!("negative eigenvalue {emin:.3e}")));
        }
        Ok(())
    }
}
