//! Weak-drive wavefunction ansatz and the optimal antibunching conditions.
//!
//! The photon state is truncated at two excitations,
//! `|φ⟩ = Σ_{m+n≤2} C_mn |m, n⟩` with `C00 = 1`, and the steady state of the
//! non-Hermitian Hamiltonian is solved order by order in `ε_d`. The
//! mechanical mode is absorbed into the Kerr shift `δ`, so nothing here
//! depends on `γ_m` or the temperature.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::linalg::{re, solve_linear, CMatrix, LinalgError, C64};
use crate::master::{steady_state, MasterError, SteadyOptions};
use crate::model::{HamiltonianKind, ModelError, ReducedParams};
use crate::poly::{self, PolyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeakDriveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error("amplitude equations are singular")]
    Singular,
    #[error("g2 undefined: |C10| = {0:.3e}")]
    Undefined(f64),
    #[error("no admissible optimum: every real root gives a non-positive Kerr shift")]
    NoOptimum,
}

/// How the Kerr shift enters the amplitude equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AmplitudeVariant {
    /// Projection of the Kerr Hamiltonian: one photon in the right cavity
    /// sees `δ_R − δ`, two see `2δ_R − 4δ`.
    #[default]
    Kerr,
    /// The Kerr shift only in the `C02` equation, as `2(δ_R − δ)`.
    Printed,
}

/// Steady-state amplitudes with `C00 = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakDriveAmplitudes {
    pub c00: C64,
    pub c10: C64,
    pub c01: C64,
    pub c20: C64,
    pub c11: C64,
    pub c02: C64,
    /// `2|C20|²/|C10|⁴`.
    pub g2: f64,
}

/// Solves the first- and second-order amplitude equations.
pub fn amplitudes(rp: &ReducedParams, variant: AmplitudeVariant) -> Result<WeakDriveAmplitudes, WeakDriveError> {
    rp.validate()?;
    if rp.eps_d > 0.1 * rp.kappa_l {
        log::warn!("weak-drive ansatz used at eps_d/kappa = {}", rp.eps_d / rp.kappa_l);
    }
    let dl = C64::new(rp.delta_l, -0.5 * rp.kappa_l);
    let dr = C64::new(rp.delta_r_prime(), -0.5 * rp.kappa_r);
    let d = rp.kerr_shift();
    let (dr1, dmid, drr) = match variant {
        AmplitudeVariant::Kerr => (dr - d, dl + dr - d, dr * 2.0 - 4.0 * d),
        AmplitudeVariant::Printed => (dr, dl + dr, (dr - d) * 2.0),
    };
    let j = re(rp.j);
    let sj = re(SQRT_2 * rp.j);
    let zero = re(0.0);
    let eps = rp.eps_d;
    let i = C64::new(0.0, 1.0);

    let a1 = CMatrix::from_row_slice(2, 2, &[dl, j, j, dr1]).map_err(|_| WeakDriveError::Singular)?;
    let c1 = solve_linear(&a1, &[-i * eps, zero]).map_err(singular)?;
    let (c10, c01) = (c1[0], c1[1]);
    let a2 = CMatrix::from_row_slice(3, 3, &[dl * 2.0, sj, zero, sj, dmid, sj, zero, sj, drr])
        .map_err(|_| WeakDriveError::Singular)?;
    let c2 = solve_linear(&a2, &[-i * (SQRT_2 * eps) * c10, -i * eps * c01, zero]).map_err(singular)?;
    let (c20, c11, c02) = (c2[0], c2[1], c2[2]);
    let n10 = c10.norm();
    let g2 = if n10 > 0.0 {
        2.0 * c20.norm_sqr() / (n10 * n10 * n10 * n10)
    } else {
        f64::NAN
    };
    if n10 > 0.0 && (c20.norm() > c10.norm() || c10.norm().max(c01.norm()) > 1.0) {
        log::warn!(
            "weak-drive hierarchy violated: |C10| = {:.3e}, |C20| = {:.3e}",
            c10.norm(),
            c20.norm()
        );
    }
    Ok(WeakDriveAmplitudes {
        c00: re(1.0),
        c10,
        c01,
        c20,
        c11,
        c02,
        g2,
    })
}

fn singular(_: LinalgError) -> WeakDriveError {
    WeakDriveError::Singular
}

/// Weak-drive estimate `g² ≈ 2|C20|²/|C10|⁴`, valid to leading order in
/// `ε_d`.
pub fn g2_weakdrive(rp: &ReducedParams, variant: AmplitudeVariant) -> Result<f64, WeakDriveError> {
    let a = amplitudes(rp, variant)?;
    if a.c10.norm() < 1e-12 {
        return Err(WeakDriveError::Undefined(a.c10.norm()));
    }
    Ok(a.g2)
}

/// Kerr shift fixed by the real part of the `C20 = 0` condition at
/// `Δ_L = Δ_R − δ = Δ` and `κ_L = κ_R = κ`:
/// `δ = (12Δ² − κ² + Δ_F(20Δ + 8Δ_F)) / (8Δ + 6Δ_F)`.
pub fn kerr_from_detuning(delta: f64, kappa: f64, delta_f: f64) -> f64 {
    (12.0 * delta * delta - kappa * kappa + delta_f * (20.0 * delta + 8.0 * delta_f)) / (8.0 * delta + 6.0 * delta_f)
}

/// Both components of the `C20 = 0` condition `(imaginary, real)`.
///
/// With `x = Δ`, `F = Δ_F` and `d = δ` these are
/// `8x³ + 20x²F − 8x²d + 16xF² − 12xFd − 6xκ² + 4F³ − 4F²d − 5Fκ² − 4J²d + 2dκ²`
/// and `8dx − 12x² + κ² + F(6d − 20x − 8F)`.
pub fn optimality_residuals(delta: f64, kerr: f64, j: f64, kappa: f64, delta_f: f64) -> (f64, f64) {
    let (x, f, d, k2) = (delta, delta_f, kerr, kappa * kappa);
    let first =
        8.0 * x.powi(3) + 20.0 * x * x * f - 8.0 * x * x * d + 16.0 * x * f * f - 12.0 * x * f * d - 6.0 * x * k2
            + 4.0 * f.powi(3)
            - 4.0 * f * f * d
            - 5.0 * f * k2
            - 4.0 * j * j * d
            + 2.0 * d * k2;
    let second = 8.0 * d * x - 12.0 * x * x + k2 + f * (6.0 * d - 20.0 * x - 8.0 * f);
    (first, second)
}

/// Which coefficient set to use for the detuning quartic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QuarticVariant {
    /// Coefficients obtained by eliminating `δ` from the optimality
    /// conditions.
    #[default]
    Corrected,
    /// Uncorrected coefficients: a bare `3` closing `a1` and `−44Δ_F⁴` in `a0`.
    Printed,
}

/// `a4Δ⁴ + a3Δ³ + a2Δ² + a1Δ + a0 = 0` for the optimal detuning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuarticProblem {
    /// `[a0, a1, a2, a3, a4]`.
    pub a: [f64; 5],
    pub delta_f: f64,
    pub j: f64,
    pub kappa: f64,
    pub variant: QuarticVariant,
}

impl QuarticProblem {
    pub fn new(j: f64, kappa: f64, delta_f: f64, variant: QuarticVariant) -> Self {
        let (k, f) = (kappa, delta_f);
        let (j2, f2, k2) = (j * j, f * f, k * k);
        let tail = match variant {
            QuarticVariant::Corrected => 3.0 * k * k2,
            QuarticVariant::Printed => 3.0,
        };
        let s44 = match variant {
            QuarticVariant::Corrected => 44.0,
            QuarticVariant::Printed => -44.0,
        };
        let a0 = k * (4.0 * j2 - 10.0 * f2) * (k2 - 8.0 * f2) - 2.0 * k * (k2 * k2 + s44 * f2 * f2);
        let a1 = -8.0 * f * (6.0 * f2 * k + 10.0 * j2 * k + tail);
        let a2 = -8.0 * k * (2.0 * k2 + 6.0 * j2 + 13.0 * f2);
        let a3 = -96.0 * f * k;
        let a4 = -32.0 * k;
        Self {
            a: [a0, a1, a2, a3, a4],
            delta_f,
            j,
            kappa,
            variant,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        poly::eval_real(&self.a, x)
    }

    /// Real roots, ascending.
    pub fn real_roots(&self) -> Result<Vec<f64>, WeakDriveError> {
        Ok(poly::real_roots(&self.a, 1e-9)?)
    }
}

/// One real root of the quartic and its fate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimumCandidate {
    pub delta: f64,
    pub kerr: f64,
    /// `√(δ ω_m)`; NaN when `δ ≤ 0`.
    pub g: f64,
    pub g2: f64,
    /// The 5-point stencil in `Δ` at fixed `g` confirms a local minimum.
    pub local_minimum: bool,
    pub admissible: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalParams {
    pub delta_opt: f64,
    pub g_opt: f64,
    pub kerr: f64,
    /// Weak-drive `g²` at the optimum for `ε_d = 10⁻³κ`.
    pub g2: f64,
    pub candidates: Vec<OptimumCandidate>,
    pub quartic: QuarticProblem,
}

/// Drive used to evaluate candidate optima (`g²` is independent of it to
/// leading order).
pub const PROBE_EPS: f64 = 1e-3;

/// Stencil spacing for the local-minimum check, in units of `κ`.
pub const STENCIL_STEP: f64 = 0.01;

fn probe_params(j: f64, kappa: f64, omega_m: f64, delta_f: f64, delta: f64, g: f64) -> ReducedParams {
    ReducedParams {
        kappa_l: kappa,
        kappa_r: kappa,
        delta_f,
        ..ReducedParams::dimensionless(g, omega_m, j, PROBE_EPS * kappa, 0.0)
    }
    .with_detuning(delta)
}

/// Optimal `(Δ, g)` at fixed `J`, `κ`, `ω_m` and `Δ_F` from the real roots
/// of the detuning quartic.
pub fn optimal_params(j: f64, kappa: f64, omega_m: f64, delta_f: f64) -> Result<OptimalParams, WeakDriveError> {
    if !(kappa > 0.0) || !(j > 0.0) || !(omega_m > 0.0) {
        return Err(WeakDriveError::Model(ModelError::InvalidParameter {
            name: "j/kappa/omega_m",
            value: j.min(kappa).min(omega_m),
        }));
    }
    let quartic = QuarticProblem::new(j, kappa, delta_f, QuarticVariant::Corrected);
    let mut candidates = Vec::new();
    for delta in quartic.real_roots()? {
        let kerr = kerr_from_detuning(delta, kappa, delta_f);
        if !(kerr > 0.0) || !kerr.is_finite() {
            candidates.push(OptimumCandidate {
                delta,
                kerr,
                g: f64::NAN,
                g2: f64::NAN,
                local_minimum: false,
                admissible: false,
            });
            continue;
        }
        let g = (kerr * omega_m).sqrt();
        let at = |d: f64| g2_weakdrive(&probe_params(j, kappa, omega_m, delta_f, d, g), AmplitudeVariant::Kerr);
        let g2 = at(delta)?;
        let h = STENCIL_STEP * kappa;
        let mut local_minimum = true;
        for s in [-2.0, -1.0, 1.0, 2.0] {
            if at(delta + s * h)? <= g2 {
                local_minimum = false;
            }
        }
        candidates.push(OptimumCandidate {
            delta,
            kerr,
            g,
            g2,
            local_minimum,
            admissible: local_minimum,
        });
    }
    let best = candidates
        .iter()
        .filter(|c| c.admissible)
        .min_by(|a, b| a.g2.partial_cmp(&b.g2).unwrap_or(core::cmp::Ordering::Equal))
        .copied()
        .ok_or(WeakDriveError::NoOptimum)?;
    Ok(OptimalParams {
        delta_opt: best.delta,
        g_opt: best.g,
        kerr: best.kerr,
        g2: best.g2,
        candidates,
        quartic,
    })
}

/// Intermediate quantities of the radical formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormAux {
    pub lambda1: C64,
    pub lambda2: C64,
    pub lambda3: C64,
    pub lambda4: C64,
    pub z1: C64,
    pub z2: C64,
    pub z3: C64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    /// `sgn(E)`; zero when `E = 0`, where the formula leaves it undefined.
    pub sgn_e: f64,
}

/// Outcome of evaluating the radical formula as written.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormReport {
    pub aux: ClosedFormAux,
    pub delta_opt: C64,
    /// `g_opt` for the given `ω_m`, evaluated at `Re Δ_opt`.
    pub g_opt: C64,
    /// Intermediates that left the real axis, and other ambiguities.
    pub flags: Vec<&'static str>,
    /// Real quartic roots.
    pub numeric_roots: Vec<f64>,
    /// Distance from `Δ_opt` to the nearest real root.
    pub discrepancy: f64,
    /// `|Σ a_i Δ^i| / (max|a_i| · max(1, |Δ|)⁴)` at `Re Δ_opt`.
    pub quartic_residual: f64,
}

fn principal_cbrt(z: C64) -> C64 {
    if z.norm() == 0.0 {
        z
    } else {
        z.powf(1.0 / 3.0)
    }
}

/// Evaluates the radical expressions for `Δ_opt` and `g_opt` term by term
/// with principal complex roots, and compares against the numeric roots.
pub fn closed_form_optima(problem: &QuarticProblem, omega_m: f64) -> Result<ClosedFormReport, WeakDriveError> {
    let [a0, a1, a2, a3, a4] = problem.a;
    let d = 3.0 * a3 * a3 - 8.0 * a4 * a2;
    let e = -a3.powi(3) + 4.0 * a4 * a3 * a2 - 8.0 * a4 * a4 * a1;
    let f = 3.0 * a3.powi(4) + 16.0 * a4 * a4 * a2 * a2 - 16.0 * a4 * a3 * a3 * a2 + 16.0 * a4 * a4 * a3 * a1
        - 64.0 * a4.powi(3) * a0;
    let a = d * d - 3.0 * f;
    let b = d * f - 9.0 * e * e;
    let c = f * f - 3.0 * d * e * e;
    let disc = re(b * b - 4.0 * a * c).sqrt();
    let z1 = re(a * d) + (re(-b) + disc) * 1.5;
    let z2 = re(a * d) + (re(-b) - disc) * 1.5;
    let s = principal_cbrt(z1) + principal_cbrt(z2);
    let lambda1 = (re(d) + s) / 3.0;
    let z3 = re(d * d) - s * d + s * s - 3.0 * a;
    let lambda2 = (re(2.0 * d) - s + principal_cbrt(z3)) / 3.0;
    let sgn_e = if e > 0.0 {
        1.0
    } else if e < 0.0 {
        -1.0
    } else {
        0.0
    };
    let delta_opt = (re(-a3) + lambda1.sqrt() * sgn_e - lambda2.sqrt()) / (4.0 * a4);
    let x = re(delta_opt.re);
    let (k, fz) = (problem.kappa, problem.delta_f);
    let lambda3 = x * x * 20.0 - x * (8.0 * fz) - re(4.0 * fz * fz - 5.0 * k * k);
    let lambda4 = x * x * 10.0 + x * 3.0 + re(2.0 * fz);
    let num = (x * (x * x * 4.0 + 5.0 * k * k) + lambda3 * fz) * (-omega_m);
    let den = re(2.0 * (2.0 * problem.j * problem.j - k * k)) + lambda4 * (2.0 * fz);
    let g_opt = (num / den).sqrt();

    let mut flags = Vec::new();
    let complex = |z: C64| z.im.abs() > 1e-8 * z.norm().max(1.0);
    if complex(disc) {
        flags.push("B^2 - 4AC < 0: z1, z2 are complex");
    }
    if complex(lambda1) || lambda1.re < 0.0 {
        flags.push("lambda1 is not a non-negative real");
    }
    if complex(lambda2) || lambda2.re < 0.0 {
        flags.push("lambda2 is not a non-negative real");
    }
    if complex(delta_opt) {
        flags.push("Delta_opt is complex");
    }
    if sgn_e == 0.0 {
        flags.push("E = 0: sgn(E) undefined, taken as 0");
    }
    if complex(g_opt) {
        flags.push("g_opt radicand is negative");
    }
    let numeric_roots = problem.real_roots()?;
    let discrepancy = numeric_roots
        .iter()
        .map(|r| (delta_opt - re(*r)).norm())
        .fold(f64::INFINITY, f64::min);
    let amax = problem.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let quartic_residual = problem.eval(delta_opt.re).abs() / (amax * delta_opt.re.abs().max(1.0).powi(4));
    if discrepancy > 1e-6 {
        log::info!(
            "closed-form Delta_opt = {delta_opt} is {discrepancy:.3e} from the nearest real quartic root {numeric_roots:?}"
        );
    }
    Ok(ClosedFormReport {
        aux: ClosedFormAux {
            lambda1,
            lambda2,
            lambda3,
            lambda4,
            z1,
            z2,
            z3,
            a,
            b,
            c,
            d,
            e,
            f,
            sgn_e,
        },
        delta_opt,
        g_opt,
        flags,
        numeric_roots,
        discrepancy,
        quartic_residual,
    })
}

/// One grid point of a `(g², g³)` scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct G3Row {
    pub delta: f64,
    pub g: f64,
    pub g2: f64,
    pub g3: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct G3Table {
    pub rows: Vec<G3Row>,
    pub truncation: [usize; 3],
    /// Indices of rows with `g² < 0.1` and `g³ > 1`.
    pub hits: Vec<usize>,
}

/// Truncation used for third-order correlations. The right cavity carries
/// most of the light when `J ≫ κ`, so it needs as many levels as the left.
pub const G3_DIMS: [usize; 3] = [6, 6, 2];

/// Master-equation `(g², g³)` over a `(Δ, g)` grid around `base`.
///
/// `kind` selects the Hamiltonian; [`HamiltonianKind::EffectiveKerr`] is
/// the Lindblad counterpart of the non-Hermitian model the two-photon
/// ansatz is built on.
pub fn g3_scan(
    base: &ReducedParams,
    kind: HamiltonianKind,
    deltas: &[f64],
    couplings: &[f64],
    dims: [usize; 3],
    opts: &SteadyOptions,
) -> Result<G3Table, WeakDriveError> {
    if dims[0] < 5 {
        return Err(WeakDriveError::Master(MasterError::TruncationTooSmall {
            n: 3,
            dim: dims[0],
        }));
    }
    let mut rows = Vec::with_capacity(deltas.len() * couplings.len());
    for &g in couplings {
        for &delta in deltas {
            let rp = base.clone().with_g(g).with_detuning(delta);
            let r = steady_state(&rp, kind, &dims, opts)?;
            rows.push(G3Row {
                delta,
                g,
                g2: r.g2_l,
                g3: r.g3_l.unwrap_or(f64::NAN),
            });
        }
    }
    let hits = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.g2 < 0.1 && r.g3 > 1.0)
        .map(|(i, _)| i)
        .collect();
    Ok(G3Table {
        rows,
        truncation: dims,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TensorOperator;
    use crate::model::{build_hamiltonian, Direction};
    use alloc::vec;
    use proptest::prelude::*;

    /// Amplitudes from the non-Hermitian Hamiltonian restricted to at most
    /// two photons (phonon vacuum), with `C00 = 1` and the equations for the
    /// one- and two-photon components imposed.
    fn projected(rp: &ReducedParams) -> (C64, C64, C64) {
        let dims = [3, 3, 2];
        let h = build_hamiltonian(HamiltonianKind::NonHermitian, rp, &dims).unwrap();
        let states = [[1, 0], [0, 1], [2, 0], [1, 1], [0, 2]];
        let idx: Vec<usize> = states
            .iter()
            .map(|s| TensorOperator::basis_index(&dims, &[s[0], s[1], 0]))
            .collect();
        let vac = TensorOperator::basis_index(&dims, &[0, 0, 0]);
        let m = CMatrix::from_fn(5, 5, |r, c| h.matrix()[(idx[r], idx[c])]);
        let rhs: Vec<C64> = idx.iter().map(|&r| -h.matrix()[(r, vac)]).collect();
        let x = solve_linear(&m, &rhs).unwrap();
        (x[0], x[1], x[2])
    }

    #[test]
    fn kerr_amplitudes_match_projected_hamiltonian() {
        for rp in [
            ReducedParams::case1().with_detuning(-0.5),
            ReducedParams::case2()
                .with_detuning(0.3)
                .with_spin(0.268, Direction::Cw),
        ] {
            let a = amplitudes(&rp, AmplitudeVariant::Kerr).unwrap();
            let (c10, c01, c20) = projected(&rp);
            // The projection keeps the O(ε²) back-action of two-photon states.
            assert!((a.c10 - c10).norm() < 1e-5 * c10.norm());
            assert!((a.c01 - c01).norm() < 1e-5 * c01.norm());
            assert!((a.c20 - c20).norm() < 1e-5 * c20.norm());
        }
    }

    #[test]
    fn uncoupled_linear_cavity_is_poissonian() {
        let rp = ReducedParams::case1().with_j(0.0).with_g(0.0).with_detuning(0.2);
        let a = amplitudes(&rp, AmplitudeVariant::Kerr).unwrap();
        assert_eq!(a.c01, re(0.0));
        assert!((a.g2 - 1.0).abs() < 1e-9);
        let linear = ReducedParams::case2().with_g(0.0).with_detuning(-0.4);
        for v in [AmplitudeVariant::Kerr, AmplitudeVariant::Printed] {
            assert!((g2_weakdrive(&linear, v).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn reciprocal_without_spin() {
        let rp = ReducedParams::case2().with_detuning(-0.29);
        let a = amplitudes(&rp, AmplitudeVariant::Kerr).unwrap();
        let b = amplitudes(&rp.clone().with_spin(0.0, Direction::Cw), AmplitudeVariant::Kerr).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mechanics_does_not_enter() {
        let rp = ReducedParams::case2().with_detuning(-0.29);
        let other = ReducedParams {
            gamma_m: 0.7,
            ..rp.clone().with_temperature(0.05)
        };
        assert_eq!(
            g2_weakdrive(&rp, AmplitudeVariant::Kerr).unwrap().to_bits(),
            g2_weakdrive(&other, AmplitudeVariant::Kerr).unwrap().to_bits()
        );
    }

    #[test]
    fn undefined_without_drive() {
        let rp = ReducedParams::case2().with_eps(0.0);
        assert!(matches!(
            g2_weakdrive(&rp, AmplitudeVariant::Kerr),
            Err(WeakDriveError::Undefined(_))
        ));
    }

    #[test]
    fn quartic_scale_and_typo_probe() {
        let q = QuarticProblem::new(20.0, 1.0, 0.268, QuarticVariant::Corrected);
        assert_eq!(q.a[4], -32.0);
        // The eliminated system: every admissible root satisfies both
        // optimality conditions.
        for x in q.real_roots().unwrap() {
            let d = kerr_from_detuning(x, 1.0, 0.268);
            let (r1, r2) = optimality_residuals(x, d, 20.0, 1.0, 0.268);
            assert!(r1.abs() < 1e-9 * 800.0 && r2.abs() < 1e-12, "{r1} {r2}");
        }
        let p = QuarticProblem::new(20.0, 1.0, 0.268, QuarticVariant::Printed);
        let worst = p
            .real_roots()
            .unwrap()
            .into_iter()
            .map(|x| {
                optimality_residuals(x, kerr_from_detuning(x, 1.0, 0.268), 20.0, 1.0, 0.268)
                    .0
                    .abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 1e-3, "{worst}");
        // A second κ exposes the unit mismatch of the bare 3.
        let c = QuarticProblem::new(3.0, 2.0, 0.3, QuarticVariant::Corrected);
        let p = QuarticProblem::new(3.0, 2.0, 0.3, QuarticVariant::Printed);
        assert!((c.a[1] - p.a[1]).abs() > 1.0);
    }

    #[test]
    fn optimum_nulls_two_photon_amplitude() {
        for (j, wm, f) in [
            (20.0, 30.0, 0.0),
            (20.0, 30.0, 0.268),
            (20.0, 30.0, -0.268),
            (3.0, 10.0, 0.0),
        ] {
            let opt = optimal_params(j, 1.0, wm, f).unwrap();
            let rp = probe_params(j, 1.0, wm, f, opt.delta_opt, opt.g_opt);
            let a = amplitudes(&rp, AmplitudeVariant::Kerr).unwrap();
            assert!(
                a.c20.norm() / a.c10.norm_sqr() < 1e-8,
                "J={j} F={f}: {}",
                a.c20.norm() / a.c10.norm_sqr()
            );
            let (r1, r2) = optimality_residuals(opt.delta_opt, opt.kerr, j, 1.0, f);
            assert!(r1.abs() < 1e-8 * (1.0 + 4.0 * j * j * opt.kerr) && r2.abs() < 1e-10);
            for s in [-1.0, 1.0] {
                let off = probe_params(j, 1.0, wm, f, opt.delta_opt + s * 0.01, opt.g_opt);
                assert!(g2_weakdrive(&off, AmplitudeVariant::Kerr).unwrap() > opt.g2);
            }
        }
    }

    #[test]
    fn case2_optimum_is_deep() {
        let opt = optimal_params(20.0, 1.0, 30.0, 0.0).unwrap();
        assert!(opt.g2 < 1e-2, "{}", opt.g2);
        assert!(opt.delta_opt < 0.0);
    }

    #[test]
    fn optimum_moves_with_rotation_direction() {
        let p = optimal_params(20.0, 1.0, 30.0, 0.268).unwrap();
        let m = optimal_params(20.0, 1.0, 30.0, -0.268).unwrap();
        assert!((p.delta_opt - m.delta_opt).abs() > 0.1);
    }

    #[test]
    fn closed_form_is_reported_not_trusted() {
        let q = QuarticProblem::new(20.0, 1.0, 0.0, QuarticVariant::Corrected);
        assert_eq!(q.a[3], 0.0);
        assert_eq!(q.a[1], 0.0);
        // Biquadratic: roots ±sqrt of the quadratic roots in Δ².
        let disc = (q.a[2] * q.a[2] - 4.0 * q.a[4] * q.a[0]).sqrt();
        let y = [(-q.a[2] - disc) / (2.0 * q.a[4]), (-q.a[2] + disc) / (2.0 * q.a[4])];
        let pos = y.iter().copied().find(|v| *v > 0.0).unwrap();
        let roots = q.real_roots().unwrap();
        assert!(roots.iter().any(|r| (r + pos.sqrt()).abs() < 1e-12));
        let rep = closed_form_optima(&q, 30.0).unwrap();
        assert!(!rep.flags.is_empty());
        if rep.discrepancy > 1e-6 {
            assert!(rep
                .flags
                .iter()
                .any(|f| f.contains("complex") || f.contains("undefined")));
        }
    }

    #[test]
    fn g3_scan_requires_depth() {
        let r = g3_scan(
            &ReducedParams::case2(),
            HamiltonianKind::FullOm,
            &[0.0],
            &[0.1],
            [4, 4, 4],
            &SteadyOptions::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn g3_scan_coherent_point() {
        let base = ReducedParams::case2().with_eps(1e-2);
        let t = g3_scan(
            &base,
            HamiltonianKind::FullOm,
            &[0.0],
            &[0.0],
            [6, 6, 2],
            &SteadyOptions::default(),
        )
        .unwrap();
        let row = t.rows[0];
        assert!((row.g2 - 1.0).abs() < 1e-6 && (row.g3 - 1.0).abs() < 1e-4, "{row:?}");
        assert!(t.hits.is_empty());
    }

    #[test]
    fn single_photon_state_has_no_triples() {
        let dims = [5, 2, 2];
        let mut psi = vec![re(0.0); 20];
        psi[TensorOperator::basis_index(&dims, &[1, 0, 0])] = re(1.0);
        let rho = crate::linalg::DensityMatrix::pure(&dims, &psi).unwrap();
        assert_eq!(crate::master::g_n(&rho, 0, 3).unwrap(), 0.0);
    }

    #[test]
    fn kerr_optimum_has_bunched_triples() {
        let opt = optimal_params(20.0, 1.0, 30.0, 0.0).unwrap();
        let t = g3_scan(
            &ReducedParams::case2(),
            HamiltonianKind::EffectiveKerr,
            &[opt.delta_opt],
            &[opt.g_opt],
            G3_DIMS,
            &SteadyOptions::default(),
        )
        .unwrap();
        assert_eq!(t.hits, vec![0], "{:?}", t.rows);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn numeric_roots_are_roots(j in 1.0f64..30.0, k in 0.3f64..3.0, f in -1.0f64..1.0) {
            let q = QuarticProblem::new(j, k, f, QuarticVariant::Corrected);
            let amax = q.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for x in q.real_roots().unwrap() {
                prop_assert!(q.eval(x).abs() <= 1e-9 * amax * x.abs().max(1.0).powi(4));
            }
            let rep = closed_form_optima(&q, 30.0).unwrap();
            if rep.flags.is_empty() && rep.discrepancy < 1e-6 {
                prop_assert!(rep.quartic_residual <= 1e-6);
            }
        }
    }

    #[test]
    fn printed_variant_differs_only_by_kerr_placement() {
        let rp = ReducedParams::case2().with_g(0.0).with_detuning(-0.3);
        let a = amplitudes(&rp, AmplitudeVariant::Kerr).unwrap();
        let b = amplitudes(&rp, AmplitudeVariant::Printed).unwrap();
        assert!((a.c20 - b.c20).norm() < 1e-15 * a.c20.norm().max(1e-300));
    }
}
