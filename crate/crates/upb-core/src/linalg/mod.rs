//! Complex linear algebra on truncated Fock spaces.
//!
//! Dense matrices carry the small operators (Hamiltonians, collapse
//! operators); sparse CSR carries the Liouvillian. Steady states are found
//! either by a dense bordered solve or by GMRES with a block Gauss-Seidel
//! preconditioner.

pub mod block;
pub mod dense;
pub mod eigen;
pub mod fock;
pub mod krylov;
pub mod sparse;

pub use block::BlockGaussSeidel;
pub use dense::{null_vector_with_constraint, solve_linear, CMatrix, Lu};
pub use eigen::{characteristic_polynomial, eigen_min_hermitian, hermitian_eigenvalues};
pub use fock::{embed, fock_destroy, DensityMatrix, DensityTolerances, TensorOperator};
pub use krylov::{gmres, GmresOptions, GmresOutcome};
pub use sparse::CsrMatrix;

use alloc::string::String;

pub type C64 = num_complex::Complex64;

/// Shorthand for a real-valued complex number.
#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Shorthand for a purely imaginary complex number.
#[inline]
pub fn im(x: f64) -> C64 {
    C64::new(0.0, x)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("singular system (condition estimate {condition:.3e})")]
    Singular { condition: f64 },
    #[error("degenerate steady state: {0}")]
    DegenerateKernel(String),
    #[error("matrix is not Hermitian (max |H - H^dag| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("iterative solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Euclidean norm of a complex vector.
pub fn norm2(v: &[C64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v
        .iter()
        .map(|z| {
            let (a, b) = (z.re / scale, z.im / scale);
            a * a + b * b
        })
        .sum();
    scale * s.sqrt()
}

/// Hermitian inner product `<a, b> = sum conj(a_i) b_i`.
pub fn dot_c(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
