//! Linearized quantum fluctuations around the mean field.
//!
//! The cavity operators are split as `a_L = α + δa_L`, `a_R = β + δa_R` and
//! the mechanical quadrature as `q = q_s + δq`. The fluctuations are solved
//! in the frequency domain and `g²(0)` follows from the Gaussian moments
//! `R1 = ⟨δa†δa⟩` and `R2 = ⟨δa δa⟩`.
//!
//! Sign conventions: `q_s = −g_b|β|²/ω_m` (radiation pressure lowers the
//! right-cavity frequency) and `g_b = √2 g`.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::linalg::{characteristic_polynomial, re, CMatrix, C64};
use crate::model::{ModelError, ReducedParams};
use crate::poly::{self, PolyError};
use crate::quad::{integrate_real_line, QuadOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FluctError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("mean-field cubic has no real root")]
    NoRealRoot,
    #[error("spectral denominator vanishes at omega = {0}")]
    Singular(f64),
    #[error("correlator integral did not converge (value {value:.3e}, error {error:.3e})")]
    Integration { value: f64, error: f64 },
    #[error("g2 undefined: |alpha|^2 + R1 = {0:.3e}")]
    Undefined(f64),
}

/// Quadrature coupling `g_b = √2 g`.
pub fn quadrature_coupling(rp: &ReducedParams) -> f64 {
    SQRT_2 * rp.g
}

/// Coefficients of `b3 q³ + b2 q² + b1 q + b0 = 0` for the mean-field
/// quadrature `q_s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicCoefficients {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl CubicCoefficients {
    pub fn new(rp: &ReducedParams) -> Self {
        let gb = quadrature_coupling(rp);
        let (kl, kr) = (rp.kappa_l, rp.kappa_r);
        let (dl, dr) = (rp.delta_l, rp.delta_r_prime());
        let (j2, wm) = (rp.j * rp.j, rp.omega_m);
        Self {
            b0: gb * j2 * rp.eps_d * rp.eps_d,
            b1: wm * (kl * kr / 4.0 + j2).powi(2) + wm * (kl * dr / 2.0 + kr * dl / 2.0).powi(2)
                - wm * dl * dr * (kl * kr / 2.0 + 2.0 * j2 - dl * dr),
            b2: 2.0 * wm * gb * (kl * kl * dr / 4.0 + dl * (dl * dr - j2)),
            b3: wm * gb * gb * (kl * kl / 4.0 + dl * dl),
        }
    }

    pub fn eval(&self, q: f64) -> f64 {
        poly::eval_real(&[self.b0, self.b1, self.b2, self.b3], q)
    }
}

/// Classical steady state.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldPoint {
    pub alpha: C64,
    pub beta: C64,
    pub q_s: f64,
    pub p_s: f64,
    pub cubic: CubicCoefficients,
    /// All roots of the cubic.
    pub cubic_roots: Vec<C64>,
    pub selected_root_index: usize,
    /// Number of real roots (more than one signals bistability).
    pub real_root_count: usize,
    /// Whether the linearized dynamics around this point are damped.
    pub stable: bool,
    /// Largest residual of the three steady-state equations.
    pub residual: f64,
}

impl MeanFieldPoint {
    /// Effective right-cavity detuning `Δ_R' + g_b q_s`.
    pub fn shifted_detuning(&self, rp: &ReducedParams) -> f64 {
        rp.delta_r_prime() + quadrature_coupling(rp) * self.q_s
    }
}

/// Solves the mean-field equations
///
/// ```text
/// 0 = (κ_L/2 + iΔ_L) α + iJβ − ε_d
/// 0 = [κ_R/2 + i(Δ_R' + g_b q_s)] β + iJα
/// 0 = ω_m q_s + g_b |β|²
/// ```
///
/// through the cubic for `q_s`, taking the real root of smallest magnitude
/// (the branch connected to `q_s = 0` as `ε_d → 0`).
pub fn mean_field(rp: &ReducedParams) -> Result<MeanFieldPoint, FluctError> {
    rp.validate()?;
    let cubic = CubicCoefficients::new(rp);
    let coeffs = [cubic.b0, cubic.b1, cubic.b2, cubic.b3].map(re);
    let roots = poly::roots(&coeffs)?;
    let scale = roots.iter().fold(1e-300f64, |m, z| m.max(z.norm()));
    let real: Vec<usize> = (0..roots.len())
        .filter(|&i| roots[i].im.abs() <= 1e-9 * scale.max(roots[i].norm()))
        .collect();
    let &idx = real
        .iter()
        .min_by(|&&a, &&b| {
            roots[a]
                .re
                .abs()
                .partial_cmp(&roots[b].re.abs())
                .unwrap_or(core::cmp::Ordering::Equal)
        })
        .ok_or(FluctError::NoRealRoot)?;
    if real.len() > 1 {
        log::info!(
            "mean field has {} real roots {:?}; selected q_s = {}",
            real.len(),
            real.iter().map(|&i| roots[i].re).collect::<Vec<_>>(),
            roots[idx].re
        );
    }
    let q_s = roots[idx].re;
    let (alpha, beta) = amplitudes_given_q(rp, q_s);
    let mut mf = MeanFieldPoint {
        alpha,
        beta,
        q_s,
        p_s: 0.0,
        cubic,
        cubic_roots: roots,
        selected_root_index: idx,
        real_root_count: real.len(),
        stable: true,
        residual: 0.0,
    };
    mf.residual = mean_field_residual(rp, &mf);
    mf.stable = is_stable(rp, &mf)?;
    if !mf.stable {
        log::warn!("selected mean-field point is dynamically unstable");
    }
    Ok(mf)
}

fn amplitudes_given_q(rp: &ReducedParams, q: f64) -> (C64, C64) {
    let d = rp.delta_r_prime() + quadrature_coupling(rp) * q;
    let cl = C64::new(0.5 * rp.kappa_l, rp.delta_l);
    let cr = C64::new(0.5 * rp.kappa_r, d);
    let den = cl * cr + rp.j * rp.j;
    let eps = re(rp.eps_d);
    let beta = C64::new(0.0, -rp.j) * eps / den;
    let alpha = eps * cr / den;
    (alpha, beta)
}

/// Maximum absolute residual of the three steady-state equations.
pub fn mean_field_residual(rp: &ReducedParams, mf: &MeanFieldPoint) -> f64 {
    let gb = quadrature_coupling(rp);
    let i = C64::new(0.0, 1.0);
    let r1 = C64::new(0.5 * rp.kappa_l, rp.delta_l) * mf.alpha + i * rp.j * mf.beta - rp.eps_d;
    let r2 = C64::new(0.5 * rp.kappa_r, mf.shifted_detuning(rp)) * mf.beta + i * rp.j * mf.alpha;
    let r3 = rp.omega_m * mf.q_s + gb * mf.beta.norm_sqr();
    r1.norm().max(r2.norm()).max(r3.abs())
}

/// Drift matrix of `u = (δa_L, δa_L†, δa_R, δa_R†, δq, δp)`, `du/dt = A u + noise`.
pub fn drift_matrix(rp: &ReducedParams, mf: &MeanFieldPoint) -> CMatrix {
    let gb = quadrature_coupling(rp);
    let d3 = mf.shifted_detuning(rp);
    let b = mf.beta;
    let i = C64::new(0.0, 1.0);
    let mut a = CMatrix::zeros(6, 6);
    a[(0, 0)] = -C64::new(0.5 * rp.kappa_l, rp.delta_l);
    a[(0, 2)] = -i * rp.j;
    a[(1, 1)] = -C64::new(0.5 * rp.kappa_l, -rp.delta_l);
    a[(1, 3)] = i * rp.j;
    a[(2, 2)] = -C64::new(0.5 * rp.kappa_r, d3);
    a[(2, 0)] = -i * rp.j;
    a[(2, 4)] = -i * gb * b;
    a[(3, 3)] = -C64::new(0.5 * rp.kappa_r, -d3);
    a[(3, 1)] = i * rp.j;
    a[(3, 4)] = i * gb * b.conj();
    a[(4, 5)] = re(rp.omega_m);
    a[(5, 4)] = re(-rp.omega_m);
    a[(5, 2)] = -gb * b.conj();
    a[(5, 3)] = -gb * b;
    a[(5, 5)] = re(-0.5 * rp.gamma_m);
    a
}

fn is_stable(rp: &ReducedParams, mf: &MeanFieldPoint) -> Result<bool, FluctError> {
    let cp = characteristic_polynomial(&drift_matrix(rp, mf));
    let ev = poly::roots(&cp)?;
    Ok(ev.iter().all(|z| z.re < 0.0))
}

/// Frequency-domain response of `δa_L` to the input noises at `ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralCoefficients {
    pub omega: f64,
    pub e: C64,
    pub f: C64,
    pub g: C64,
    pub h: C64,
    pub q: C64,
    pub a: [C64; 5],
    /// Mechanical susceptibility `ω_m/(ω_m² − ω² + iωγ_m/2)`.
    pub chi: C64,
    /// `Δ_R' + g_b q_s`.
    pub delta_r_3: f64,
    /// `Δ_R''' − g_b²|β|²χ(ω)`.
    pub delta_r_2: C64,
    pub m: C64,
    pub n: C64,
    pub t: C64,
    pub v: C64,
    pub v1: C64,
    pub u: C64,
    pub f_r: C64,
    pub f_l: C64,
    /// Largest relative difference between the two constructions of
    /// `E, F, G, H, Q`.
    pub form_discrepancy: f64,
}

/// Response coefficients from the elimination chain only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Response {
    pub e: C64,
    pub f: C64,
    pub g: C64,
    pub h: C64,
    pub q: C64,
}

struct Chain {
    chi: C64,
    d3: f64,
    m: C64,
    n: C64,
    t: C64,
    v: C64,
    v1: C64,
    u: C64,
    f_r: C64,
    f_l: C64,
    resp: Response,
}

fn chain(omega: f64, rp: &ReducedParams, mf: &MeanFieldPoint) -> Chain {
    let gb = quadrature_coupling(rp);
    let i = C64::new(0.0, 1.0);
    let wm = rp.omega_m;
    let chi = re(wm) / C64::new(wm * wm - omega * omega, 0.5 * omega * rp.gamma_m);
    let d3 = mf.shifted_detuning(rp);
    let b = mf.beta;
    let b2 = b.norm_sqr();
    let kr = 0.5 * rp.kappa_r;
    let kl = 0.5 * rp.kappa_l;
    let mech = chi * (b2 * gb * gb);
    let m = C64::new(kr, omega + d3) - i * mech;
    let n = C64::new(kr, omega - d3) + i * mech;
    let v = C64::new(kl, omega - rp.delta_l);
    let v1 = C64::new(kl, omega + rp.delta_l);
    let j2 = rp.j * rp.j;
    let t = n * v + j2;
    let u = chi * chi * v * (gb.powi(4) * b2 * b2);
    let f_r = m * t - u;
    let f_l = f_r * v1 + t * j2;
    let skl = rp.kappa_l.sqrt();
    let skr = rp.kappa_r.sqrt();
    let bb = b * b;
    let resp = Response {
        e: f_r * skl / f_l,
        f: i * j2 * gb * gb * bb * chi * skl / f_l,
        g: -i * rp.j * skr * t / f_l,
        h: bb * chi * v * (rp.j * gb * gb * skr) / f_l,
        q: (i * rp.j * gb.powi(3) * b * b2 * chi * chi * v - b * chi * t * (rp.j * gb)) / f_l,
    };
    Chain {
        chi,
        d3,
        m,
        n,
        t,
        v,
        v1,
        u,
        f_r,
        f_l,
        resp,
    }
}

/// Main-text construction through `A1..A5`.
fn a_form(omega: f64, rp: &ReducedParams, mf: &MeanFieldPoint, c: &Chain) -> ([C64; 5], C64, Response) {
    let gb = quadrature_coupling(rp);
    let i = C64::new(0.0, 1.0);
    let b = mf.beta;
    let b2 = b.norm_sqr();
    let j = rp.j;
    let chi_over_wm = c.chi;
    let delta_r_2 = re(c.d3) - chi_over_wm * (gb * gb * b2);
    let v1_plus = C64::new(0.5 * rp.kappa_l, omega + rp.delta_l);
    let v1_minus = C64::new(0.5 * rp.kappa_l, omega - rp.delta_l);
    let v2_plus = C64::new(0.5 * rp.kappa_r, omega) + i * delta_r_2;
    let v2_minus = C64::new(0.5 * rp.kappa_r, omega) - i * delta_r_2;
    let kw = C64::new(0.5 * rp.kappa_r, omega);
    let a1 = (kw * kw + delta_r_2 * delta_r_2) * v1_minus
        - chi_over_wm * chi_over_wm * v1_minus * (gb.powi(4) * b2 * b2)
        + v2_plus * (j * j);
    let a2 = -i * (j * j * gb * gb) * b * b * chi_over_wm;
    let a3 = -i * j * v1_minus * v2_minus - i * j.powi(3);
    let a4 = -b * b * chi_over_wm * v1_minus * (j * gb * gb);
    let a5 = v1_plus * a1 + i * j * a3;
    let skl = rp.kappa_l.sqrt();
    let skr = rp.kappa_r.sqrt();
    let resp = Response {
        e: a1 * skl / a5,
        f: -a2 * skl / a5,
        g: a3 * skr / a5,
        h: -a4 * skr / a5,
        q: -i * gb * chi_over_wm / a5 * (b * a3 + b.conj() * a4),
    };
    ([a1, a2, a3, a4, a5], delta_r_2, resp)
}

fn rel_diff(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Both constructions of the response at `ω`, with their discrepancy.
pub fn spectral_coeffs(
    omega: f64,
    rp: &ReducedParams,
    mf: &MeanFieldPoint,
) -> Result<SpectralCoefficients, FluctError> {
    let c = chain(omega, rp, mf);
    if c.f_l.norm() == 0.0 || !c.f_l.re.is_finite() {
        return Err(FluctError::Singular(omega));
    }
    let (a, delta_r_2, alt) = a_form(omega, rp, mf, &c);
    let r = c.resp;
    let form_discrepancy = [
        rel_diff(r.e, alt.e),
        rel_diff(r.f, alt.f),
        rel_diff(r.g, alt.g),
        rel_diff(r.h, alt.h),
        rel_diff(r.q, alt.q),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    debug_assert!(
        form_discrepancy < 1e-6,
        "response forms disagree by {form_discrepancy:e} at omega = {omega}"
    );
    Ok(SpectralCoefficients {
        omega,
        e: r.e,
        f: r.f,
        g: r.g,
        h: r.h,
        q: r.q,
        a,
        chi: c.chi,
        delta_r_3: c.d3,
        delta_r_2,
        m: c.m,
        n: c.n,
        t: c.t,
        v: c.v,
        v1: c.v1,
        u: c.u,
        f_r: c.f_r,
        f_l: c.f_l,
        form_discrepancy,
    })
}

/// Response from the elimination chain, without the cross-check.
pub fn response(omega: f64, rp: &ReducedParams, mf: &MeanFieldPoint) -> Response {
    chain(omega, rp, mf).resp
}

/// Spectrum of the mechanical Brownian force.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum NoiseModel {
    /// `Γ_m(ω) = (ωγ_m/2ω_m)[1 + coth(ħω/2k_BT)]`.
    #[default]
    Brownian,
    /// Frequency-independent spectrum, for comparison with a Markovian
    /// covariance calculation.
    White(f64),
}

/// `Γ_m(ω)` at the bath temperature of `rp`; at zero temperature the
/// limit `(ωγ_m/ω_m)·θ(ω)` is used.
pub fn brownian_spectrum(omega: f64, rp: &ReducedParams) -> f64 {
    let x = rp.hbar_over_2kt();
    let pref = rp.gamma_m / (2.0 * rp.omega_m);
    if x == 0.0 {
        return if omega > 0.0 { 2.0 * pref * omega } else { 0.0 };
    }
    let y = x * omega;
    if y.abs() < 1e-4 {
        // ω coth(xω) = 1/x + xω²/3 + O(ω⁴).
        pref * (omega + 1.0 / x + x * omega * omega / 3.0)
    } else if y > 350.0 {
        2.0 * pref * omega
    } else if y < -350.0 {
        0.0
    } else {
        pref * omega * (1.0 + 1.0 / y.tanh())
    }
}

/// Argument of `Γ_m` in the anomalous correlator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GammaArgument {
    /// `Q(ω)Q(−ω)Γ_m(−ω)`.
    #[default]
    Negative,
    /// `Q(ω)Q(−ω)Γ_m(ω)`.
    Positive,
}

/// Closure of the fourth moment `⟨δa†δa†δaδa⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum R3Form {
    /// Gaussian factorization `2R1² + |R2|²`.
    #[default]
    Wick,
    /// `2R1 + |R2|²`, taken literally.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluctOptions {
    pub noise: NoiseModel,
    pub gamma_argument: GammaArgument,
    pub r3: R3Form,
    pub quad: QuadOptions,
}

impl Default for FluctOptions {
    fn default() -> Self {
        Self {
            noise: NoiseModel::Brownian,
            gamma_argument: GammaArgument::Negative,
            r3: R3Form::Wick,
            quad: QuadOptions {
                abs_tol: 0.0,
                rel_tol: 1e-9,
                max_intervals: 4000,
            },
        }
    }
}

fn noise_at(omega: f64, rp: &ReducedParams, noise: NoiseModel) -> f64 {
    match noise {
        NoiseModel::Brownian => brownian_spectrum(omega, rp),
        NoiseModel::White(g) => g,
    }
}

/// Frequencies where the integrands have structure.
fn breakpoints(rp: &ReducedParams, mf: &MeanFieldPoint) -> Vec<f64> {
    let d3 = mf.shifted_detuning(rp);
    let mut pts = Vec::new();
    for w in [
        rp.omega_m,
        rp.delta_l,
        d3,
        rp.j,
        rp.delta_l + rp.j,
        rp.delta_l - rp.j,
        d3 + rp.j,
        d3 - rp.j,
        0.5 * (rp.delta_l + d3) + rp.j,
        0.5 * (rp.delta_l + d3) - rp.j,
    ] {
        pts.push(w);
        pts.push(-w);
    }
    pts
}

/// Fluctuation moments `(R1, R2)` and their quadrature error estimates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correlators {
    pub r1: f64,
    pub r2: C64,
    pub error: f64,
}

/// `R1 = (1/2π)∫ |Q(−ω)|²Γ(−ω) + |F(−ω)|² + |H(−ω)|² dω` and
/// `R2 = (1/2π)∫ Q(ω)Q(−ω)Γ(∓ω) + E(ω)F(−ω) + G(ω)H(−ω) dω`.
pub fn correlators(rp: &ReducedParams, mf: &MeanFieldPoint, opts: &FluctOptions) -> Result<Correlators, FluctError> {
    let pts = breakpoints(rp, mf);
    let x1 = |w: f64| {
        let r = response(-w, rp, mf);
        re(r.q.norm_sqr() * noise_at(-w, rp, opts.noise) + r.f.norm_sqr() + r.h.norm_sqr())
    };
    let x2 = |w: f64| {
        let p = response(w, rp, mf);
        let m = response(-w, rp, mf);
        let gw = match opts.gamma_argument {
            GammaArgument::Negative => noise_at(-w, rp, opts.noise),
            GammaArgument::Positive => noise_at(w, rp, opts.noise),
        };
        p.q * m.q * gw + p.e * m.f + p.g * m.h
    };
    let i1 = integrate_real_line(x1, &pts, &opts.quad);
    let i2 = integrate_real_line(x2, &pts, &opts.quad);
    for r in [&i1, &i2] {
        if !r.converged || !r.value.re.is_finite() || !r.value.im.is_finite() {
            return Err(FluctError::Integration {
                value: r.value.norm(),
                error: r.error,
            });
        }
    }
    Ok(Correlators {
        r1: i1.value.re / (2.0 * PI),
        r2: i2.value / (2.0 * PI),
        error: (i1.error + i2.error) / (2.0 * PI),
    })
}

/// Semiclassical `g²(0)` with its ingredients.
#[derive(Clone, Debug, PartialEq)]
pub struct SemiclassicalG2 {
    pub g2: f64,
    pub r1: f64,
    pub r2: C64,
    pub r3: f64,
    pub mean_field: MeanFieldPoint,
}

/// `g² = (|α|⁴ + 4|α|²R1 + 2Re(α*²R2) + R3) / (|α|² + R1)²`.
pub fn g2_semiclassical(rp: &ReducedParams, opts: &FluctOptions) -> Result<SemiclassicalG2, FluctError> {
    let mf = mean_field(rp)?;
    let c = correlators(rp, &mf, opts)?;
    let a2 = mf.alpha.norm_sqr();
    let r3 = match opts.r3 {
        R3Form::Wick => 2.0 * c.r1 * c.r1 + c.r2.norm_sqr(),
        R3Form::Literal => 2.0 * c.r1 + c.r2.norm_sqr(),
    };
    let den = a2 + c.r1;
    if !(den > 0.0) {
        return Err(FluctError::Undefined(den));
    }
    let num = a2 * a2 + 4.0 * a2 * c.r1 + 2.0 * (mf.alpha.conj() * mf.alpha.conj() * c.r2).re + r3;
    Ok(SemiclassicalG2 {
        g2: num / (den * den),
        r1: c.r1,
        r2: c.r2,
        r3,
        mean_field: mf,
    })
}
