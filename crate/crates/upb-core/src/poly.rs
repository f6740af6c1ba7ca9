//! Polynomial roots.

use alloc::vec::Vec;

use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("polynomial is identically zero")]
    Zero,
    #[error("root iteration did not converge")]
    NoConvergence,
}

/// Evaluates `sum c_k x^k` (coefficients lowest degree first).
pub fn eval(coeffs: &[C64], x: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Evaluates a real polynomial at a real point.
pub fn eval_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn eval_with_derivative(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// All complex roots, by simultaneous Aberth-Ehrlich iteration.
///
/// Coefficients are ordered lowest degree first; trailing zeros (vanishing
/// leading terms) are stripped.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>, PolyError> {
    let mut c: Vec<C64> = coeffs.to_vec();
    while c.last().map_or(false, |z| z.norm() == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(PolyError::Zero);
    }
    let mut out = Vec::new();
    // Roots at the origin.
    while c.len() > 1 && c[0].norm() == 0.0 {
        c.remove(0);
        out.push(C64::new(0.0, 0.0));
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(out);
    }
    let lead = c[n];
    let monic: Vec<C64> = c.iter().map(|z| z / lead).collect();
    // Cauchy bound gives the initial circle.
    let bound = 1.0 + monic[..n].iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let lower = {
        let a0 = monic[0].norm();
        let m = monic[1..].iter().fold(0.0f64, |m, z| m.max(z.norm()));
        a0 / (a0 + m)
    };
    let radius = (lower * bound).sqrt().max(1e-300);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let ang = 2.0 * core::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            C64::from_polar(radius, ang)
        })
        .collect();
    let mut done = false;
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval_with_derivative(&monic, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let mut s = C64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += C64::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let w = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if w.re.is_finite() && w.im.is_finite() {
                z[i] -= w;
                max_step = max_step.max(w.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 1e-15 {
            done = true;
            break;
        }
    }
    // Newton polish against the original coefficients.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_with_derivative(&monic, *zi);
            if dp.norm() == 0.0 || p.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *zi -= step;
        }
    }
    if !done {
        let worst = z
            .iter()
            .map(|zi| eval(&monic, *zi).norm() / (1.0 + zi.norm()).powi(n as i32))
            .fold(0.0, f64::max);
        if worst > 1e-8 {
            return Err(PolyError::NoConvergence);
        }
    }
    out.extend(z);
    Ok(out)
}

/// Real roots of a real polynomial, ascending.
///
/// A root is treated as real when its imaginary part is below
/// `imag_tol · max(1, |root|)`.
pub fn real_roots(coeffs: &[f64], imag_tol: f64) -> Result<Vec<f64>, PolyError> {
    let c: Vec<C64> = coeffs.iter().map(|&x| C64::new(x, 0.0)).collect();
    let mut r: Vec<f64> = roots(&c)?
        .into_iter()
        .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
        .map(|z| z.re)
        .collect();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn quadratic() {
        // (x-1)(x+2) = x^2 + x - 2
        let r = real_roots(&[-2.0, 1.0, 1.0], 1e-9).unwrap();
        assert!((r[0] + 2.0).abs() < 1e-14 && (r[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_pair_is_not_real() {
        let r = real_roots(&[1.0, 0.0, 1.0], 1e-9).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn zero_root_and_leading_zeros() {
        let r = roots(&[c(0.0), c(-1.0), c(1.0), c(0.0)]).unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(re.len(), 2);
        assert!(re[0].abs() < 1e-15 && (re[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_polynomial_errors() {
        assert_eq!(roots(&[c(0.0), c(0.0)]), Err(PolyError::Zero));
    }

    #[test]
    fn widely_scaled_cubic() {
        // roots 1e-6, 1, 1e3
        let (a, b, d) = (1e-6, 1.0, 1e3);
        let coeffs = [-a * b * d, a * b + a * d + b * d, -(a + b + d), 1.0];
        let r = real_roots(&coeffs, 1e-9).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r[0] - a).abs() < 1e-15);
        assert!((r[1] - b).abs() < 1e-12);
        assert!((r[2] - d).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn quartic_roots_have_small_residual(a in proptest::collection::vec(-10.0f64..10.0, 5)) {
            prop_assume!(a[4].abs() > 0.1);
            let coeffs: Vec<C64> = a.iter().map(|&x| c(x)).collect();
            let r = roots(&coeffs).unwrap();
            prop_assert_eq!(r.len(), 4);
            let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            for z in r {
                let res = eval(&coeffs, z).norm();
                prop_assert!(res <= 1e-9 * scale * (1.0 + z.norm()).powi(4), "res {}", res);
            }
        }
    }
}
