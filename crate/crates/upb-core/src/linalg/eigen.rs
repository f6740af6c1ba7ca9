use alloc::vec;
use alloc::vec::Vec;

use super::{CMatrix, LinalgError, C64};

/// Tolerance on `max |H − H†|` accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigenvalues of a Hermitian matrix in ascending order.
///
/// The matrix `A + iB` is mapped to the real symmetric `[[A, −B], [B, A]]`,
/// whose spectrum is that of `H` with every eigenvalue doubled, and
/// diagonalized by cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    if !h.is_square() {
        return Err(LinalgError::ShapeMismatch {
            expected: (h.rows(), h.rows()),
            found: h.shape(),
        });
    }
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { deviation: dev });
    }
    let n = h.rows();
    let m = 2 * n;
    let mut s = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            s[i * m + j] = z.re;
            s[(i + n) * m + (j + n)] = z.re;
            s[i * m + (j + n)] = -z.im;
            s[(i + n) * m + j] = z.im;
        }
    }
    jacobi_symmetric(&mut s, m);
    let mut ev: Vec<f64> = (0..m).map(|i| s[i * m + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn eigen_min_hermitian(h: &CMatrix) -> Result<f64, LinalgError> {
    let ev = hermitian_eigenvalues(h)?;
    Ok(ev.first().copied().unwrap_or(f64::NAN))
}

fn jacobi_symmetric(a: &mut [f64], n: usize) {
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i * n + j] * a[i * n + j];
                } else {
                    diag += a[i * n + i] * a[i * n + i];
                }
            }
        }
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            return;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

/// Characteristic polynomial coefficients of a small square matrix,
/// lowest degree first and monic, by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(a: &CMatrix) -> Vec<C64> {
    let n = a.rows();
    let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
    coeffs[n] = C64::new(1.0, 0.0);
    let mut m = CMatrix::zeros(n, n);
    let id = CMatrix::identity(n);
    for k in 1..=n {
        let am = a.matmul(&m).expect("square");
        m = &am + &id.scale(coeffs[n - k + 1]);
        let tr = a.matmul(&m).expect("square").trace();
        coeffs[n - k] = -tr / k as f64;
    }
    coeffs
}
