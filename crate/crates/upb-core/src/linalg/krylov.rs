use alloc::vec;
use alloc::vec::Vec;

use super::{dot_c, norm2, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions {
    /// Krylov subspace size before restart.
    pub restart: usize,
    /// Total inner iterations allowed.
    pub max_iter: usize,
    /// Target for `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 40,
            max_iter: 400,
            tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Restarted GMRES with right preconditioning.
///
/// `apply_a(x, y)` writes `A x` into `y`; `apply_m(r, z)` writes an
/// approximation of `A⁻¹ r` into `z`. The reported residual is recomputed
/// from the true `A x` at every restart.
pub fn gmres<A, M>(apply_a: A, apply_m: M, b: &[C64], x0: Option<&[C64]>, opts: GmresOptions) -> GmresOutcome
where
    A: Fn(&[C64], &mut [C64]),
    M: Fn(&[C64], &mut [C64]),
{
    let n = b.len();
    let zero = C64::new(0.0, 0.0);
    let bnorm = norm2(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![zero; n]);
    if bnorm == 0.0 {
        return GmresOutcome {
            x: vec![zero; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let m = opts.restart.max(1);
    let mut total = 0usize;
    let mut ax = vec![zero; n];
    let mut w = vec![zero; n];
    let mut z = vec![zero; n];
    loop {
        apply_a(&x, &mut ax);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= opts.tol || total >= opts.max_iter || !rel.is_finite() {
            return GmresOutcome {
                x,
                iterations: total,
                relative_residual: rel,
                converged: rel <= opts.tol,
            };
        }
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, each of length j+2.
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<C64> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k = 0;
        while k < m && total < opts.max_iter {
            apply_m(&basis[k], &mut z);
            apply_a(&z, &mut w);
            let mut col = vec![zero; k + 2];
            // Modified Gram-Schmidt, applied twice for stability.
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate() {
                    let hij = dot_c(v, &w);
                    col[i] += hij;
                    for (wi, vi) in w.iter_mut().zip(v) {
                        *wi -= hij * vi;
                    }
                }
            }
            let hn = norm2(&w);
            col[k + 1] = C64::new(hn, 0.0);
            for i in 0..k {
                let t = col[i] * cs[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i].conj() * col[i] + col[i + 1] * cs[i];
                col[i] = t;
            }
            let (c, s, rr) = givens(col[k], col[k + 1]);
            col[k] = rr;
            col[k + 1] = zero;
            cs.push(c);
            sn.push(s);
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            h.push(col);
            total += 1;
            k += 1;
            if hn == 0.0 || g[k].norm() / bnorm <= opts.tol * 0.1 {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        // Back substitution for the small triangular system.
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[j][i] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut dx = vec![zero; n];
        for (j, yj) in y.iter().enumerate() {
            for (d, v) in dx.iter_mut().zip(&basis[j]) {
                *d += yj * v;
            }
        }
        apply_m(&dx, &mut z);
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi += zi;
        }
    }
}

/// Complex Givens rotation zeroing `b` against `a`.
fn givens(a: C64, b: C64) -> (f64, C64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0), a);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb, C64::new(nb, 0.0));
    }
    let r = na.hypot(nb);
    let phase = a / na;
    let c = na / r;
    let s = phase * b.conj() / r;
    (c, s, phase * r)
}
