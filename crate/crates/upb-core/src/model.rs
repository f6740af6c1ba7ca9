//! Physical parameters, unit reduction and the three Hamiltonians.
//!
//! All reduced frequencies are in units of the driven-cavity linewidth
//! `κ_L`; [`ReducedParams::kappa_rad_s`] records that unit in rad/s so the
//! thermal quantities can be evaluated.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::linalg::{embed, fock_destroy, im, re, CMatrix, LinalgError, TensorOperator, C64};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s).
pub const C_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("incomplete dimensionless parameter set, missing: {}", .0.join(", "))]
    MissingKeys(Vec<&'static str>),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Side from which the compound resonator is driven.
///
/// The spinning resonator shifts the co-rotating and counter-rotating modes
/// in opposite directions; `Ccw` is taken to see `Δ_F = −ηΩ` and `Cw` to see
/// `Δ_F = +ηΩ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Direction {
    Ccw,
    Cw,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Ccw, Direction::Cw];

    /// Sign carried by the Fizeau shift.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Ccw => -1.0,
            Direction::Cw => 1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Ccw => Direction::Cw,
            Direction::Cw => Direction::Ccw,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Ccw => "ccw",
            Direction::Cw => "cw",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ccw" | "ccw-drive" | "from-left" => Ok(Direction::Ccw),
            "cw" | "cw-drive" | "from-right" => Ok(Direction::Cw),
            other => Err(alloc::format!("unknown drive direction '{other}' (expected ccw or cw)")),
        }
    }
}

/// Laboratory quantities in SI units.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalParams {
    pub wavelength_m: f64,
    pub q_l: f64,
    pub q_r: f64,
    pub q_m: f64,
    pub radius_m: f64,
    pub refractive_index: f64,
    /// Dispersion `dn/dλ` in 1/m.
    pub dn_dlambda_per_m: f64,
    pub mass_kg: f64,
    pub input_power_w: f64,
    /// Angular velocity of the spinning resonator in rad/s.
    pub omega_spin_rad_s: f64,
    pub temperature_k: f64,
    pub direction: Direction,
}

impl Default for PhysicalParams {
    /// Silica microtoroid at 1550 nm, spinning at 12e3 rad/s, 0.1 mK bath.
    fn default() -> Self {
        Self {
            wavelength_m: 1550e-9,
            q_l: 3e7,
            q_r: 3e7,
            q_m: 1e3,
            radius_m: 0.3e-3,
            refractive_index: 1.44,
            dn_dlambda_per_m: 0.0,
            mass_kg: 5e-11,
            input_power_w: 2e-17,
            omega_spin_rad_s: 12e3,
            temperature_k: 1e-4,
            direction: Direction::Ccw,
        }
    }
}

impl PhysicalParams {
    /// Optical angular frequency `2πc/λ`.
    pub fn optical_frequency(&self) -> f64 {
        2.0 * PI * C_LIGHT / self.wavelength_m
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("wavelength_m", self.wavelength_m),
            ("q_l", self.q_l),
            ("q_r", self.q_r),
            ("q_m", self.q_m),
            ("radius_m", self.radius_m),
            ("mass_kg", self.mass_kg),
            ("input_power_w", self.input_power_w),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        if !(self.refractive_index > 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "refractive_index",
                value: self.refractive_index,
            });
        }
        if !(self.omega_spin_rad_s >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "omega_spin_rad_s",
                value: self.omega_spin_rad_s,
            });
        }
        if !(self.temperature_k >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "temperature_k",
                value: self.temperature_k,
            });
        }
        Ok(())
    }
}

/// Rotation-induced shift `±ηΩ` in rad/s, signed by the drive direction.
pub fn fizeau_shift(p: &PhysicalParams) -> f64 {
    p.direction.sign() * fizeau_magnitude(p)
}

/// `|Δ_F| = (n r Ω ω/c)(1 − 1/n² − (λ/n) dn/dλ)` in rad/s.
pub fn fizeau_magnitude(p: &PhysicalParams) -> f64 {
    let n = p.refractive_index;
    let omega = p.optical_frequency();
    let drag = 1.0 - 1.0 / (n * n) - (p.wavelength_m / n) * p.dn_dlambda_per_m;
    n * p.radius_m * p.omega_spin_rad_s * omega / C_LIGHT * drag
}

/// Single-photon optomechanical coupling `ω/r · sqrt(ħ/(2 m ω_m))` in rad/s.
pub fn optomechanical_coupling(p: &PhysicalParams, omega_m_rad_s: f64) -> f64 {
    p.optical_frequency() / p.radius_m * (HBAR / (2.0 * p.mass_kg * omega_m_rad_s)).sqrt()
}

/// Bose occupation of a mode at angular frequency `omega_rad_s`.
pub fn thermal_occupation(omega_rad_s: f64, temperature_k: f64) -> f64 {
    if temperature_k <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega_rad_s / (K_B * temperature_k);
    if x > 700.0 {
        return 0.0;
    }
    1.0 / x.exp_m1()
}

/// Dimensionless inputs in units of `κ_L`. `g`, `omega_m` and `j` are
/// required; the rest fall back to values derived from [`PhysicalParams`].
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DimensionlessOverrides {
    pub g: Option<f64>,
    pub omega_m: Option<f64>,
    pub j: Option<f64>,
    pub eps_d: Option<f64>,
    pub gamma_m: Option<f64>,
    /// Magnitude of the Fizeau shift; its sign still follows the direction.
    pub delta_f: Option<f64>,
    pub detuning: Option<f64>,
}

/// Model parameters in units of `κ_L`.
///
/// The detuning convention is `Δ_L = Δ`, `Δ_R = Δ + δ` with `δ = g²/ω_m`;
/// [`ReducedParams::with_detuning`] maintains it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReducedParams {
    pub kappa_l: f64,
    pub kappa_r: f64,
    pub delta_l: f64,
    pub delta_r: f64,
    /// Signed Fizeau shift.
    pub delta_f: f64,
    pub j: f64,
    pub g: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub eps_d: f64,
    pub n_th: f64,
    pub temperature_k: f64,
    /// The frequency unit (`κ_L`) in rad/s.
    pub kappa_rad_s: f64,
}

/// `κ_L` in rad/s for the default resonator.
pub fn default_kappa_rad_s() -> f64 {
    let p = PhysicalParams::default();
    p.optical_frequency() / p.q_l
}

impl ReducedParams {
    /// A dimensionless parameter set with `κ_L = κ_R = 1`, `Δ = 0`,
    /// `Δ_F = 0`, `γ_m = ω_m/1000` and the default resonator's `κ_L` as unit.
    pub fn dimensionless(g: f64, omega_m: f64, j: f64, eps_d: f64, temperature_k: f64) -> Self {
        let kappa_rad_s = default_kappa_rad_s();
        let mut rp = Self {
            kappa_l: 1.0,
            kappa_r: 1.0,
            delta_l: 0.0,
            delta_r: 0.0,
            delta_f: 0.0,
            j,
            g,
            omega_m,
            gamma_m: omega_m / PhysicalParams::default().q_m,
            eps_d,
            n_th: 0.0,
            temperature_k,
            kappa_rad_s,
        };
        rp.set_temperature(temperature_k);
        rp.with_detuning(0.0)
    }

    /// First parameter set of the figures: `g = 0.63`, `ω_m = 10`, `J = 3`,
    /// `ε_d = 10⁻³`, 0.1 mK.
    pub fn case1() -> Self {
        Self::dimensionless(0.63, 10.0, 3.0, 1e-3, 1e-4)
    }

    /// Second parameter set: `g = 0.1`, `ω_m = 30`, `J = 20`, `ε_d = 10⁻³`,
    /// 1 mK.
    pub fn case2() -> Self {
        Self::dimensionless(0.1, 30.0, 20.0, 1e-3, 1e-3)
    }

    /// Kerr shift `δ = g²/ω_m`.
    pub fn kerr_shift(&self) -> f64 {
        kerr_energy_shift(self)
    }

    /// `Δ_R' = Δ_R + Δ_F`.
    pub fn delta_r_prime(&self) -> f64 {
        self.delta_r + self.delta_f
    }

    /// Common detuning `Δ = Δ_L`.
    pub fn detuning(&self) -> f64 {
        self.delta_l
    }

    /// Sets `Δ_L = Δ` and `Δ_R = Δ + δ`.
    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.delta_l = delta;
        self.delta_r = delta + self.kerr_shift();
        self
    }

    /// Changes `g` keeping `Δ_L` and the `Δ_R = Δ_L + δ` convention.
    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        let d = self.delta_l;
        self.with_detuning(d)
    }

    pub fn with_j(mut self, j: f64) -> Self {
        self.j = j;
        self
    }

    pub fn with_eps(mut self, eps_d: f64) -> Self {
        self.eps_d = eps_d;
        self
    }

    /// Sets `Δ_F = sign(direction)·magnitude`.
    pub fn with_spin(mut self, magnitude: f64, direction: Direction) -> Self {
        self.delta_f = direction.sign() * magnitude.abs();
        self
    }

    /// Flips the sign of `Δ_F` and nothing else.
    pub fn reversed(mut self) -> Self {
        self.delta_f = -self.delta_f;
        self
    }

    pub fn with_temperature(mut self, temperature_k: f64) -> Self {
        self.set_temperature(temperature_k);
        self
    }

    fn set_temperature(&mut self, temperature_k: f64) {
        self.temperature_k = temperature_k;
        self.n_th = thermal_occupation(self.omega_m * self.kappa_rad_s, temperature_k);
    }

    /// `ħ/(2 k_B T)` in units of `1/κ_L`; zero at zero temperature.
    pub fn hbar_over_2kt(&self) -> f64 {
        if self.temperature_k <= 0.0 {
            0.0
        } else {
            HBAR * self.kappa_rad_s / (2.0 * K_B * self.temperature_k)
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let nonneg = [
            ("kappa_l", self.kappa_l),
            ("kappa_r", self.kappa_r),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("eps_d", self.eps_d),
            ("temperature_k", self.temperature_k),
            ("j", self.j),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        for (name, v) in [
            ("kappa_l", self.kappa_l),
            ("kappa_r", self.kappa_r),
            ("omega_m", self.omega_m),
        ] {
            if v <= 0.0 {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        for (name, v) in [
            ("g", self.g),
            ("delta_l", self.delta_l),
            ("delta_r", self.delta_r),
            ("delta_f", self.delta_f),
        ] {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter { name, value: v });
            }
        }
        Ok(())
    }
}

/// Reduces laboratory parameters to `κ_L` units.
pub fn reduce(p: &PhysicalParams, o: &DimensionlessOverrides) -> Result<ReducedParams, ModelError> {
    p.validate()?;
    let mut missing = Vec::new();
    if o.g.is_none() {
        missing.push("g_over_kappa");
    }
    if o.omega_m.is_none() {
        missing.push("omega_m_over_kappa");
    }
    if o.j.is_none() {
        missing.push("j_over_kappa");
    }
    if !missing.is_empty() {
        return Err(ModelError::MissingKeys(missing));
    }
    let omega = p.optical_frequency();
    let kappa = omega / p.q_l;
    let omega_m = o.omega_m.unwrap_or_default();
    let eps_phys = (kappa * p.input_power_w / (HBAR * omega)).sqrt();
    let delta_f = match o.delta_f {
        Some(m) => p.direction.sign() * m.abs(),
        None => fizeau_shift(p) / kappa,
    };
    let rp = ReducedParams {
        kappa_l: 1.0,
        kappa_r: (omega / p.q_r) / kappa,
        delta_l: 0.0,
        delta_r: 0.0,
        delta_f,
        j: o.j.unwrap_or_default(),
        g: o.g.unwrap_or_default(),
        omega_m,
        gamma_m: o.gamma_m.unwrap_or(omega_m / p.q_m),
        eps_d: o.eps_d.unwrap_or(eps_phys / kappa),
        n_th: thermal_occupation(omega_m * kappa, p.temperature_k),
        temperature_k: p.temperature_k,
        kappa_rad_s: kappa,
    }
    .with_detuning(o.detuning.unwrap_or(0.0));
    rp.validate()?;
    Ok(rp)
}

/// `δ = g²/ω_m`.
pub fn kerr_energy_shift(rp: &ReducedParams) -> f64 {
    rp.g * rp.g / rp.omega_m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum HamiltonianKind {
    /// Two cavities plus the mechanical mode with radiation-pressure coupling.
    FullOm,
    /// Polaron-transformed model with a Kerr term on the right cavity.
    EffectiveKerr,
    /// Kerr model with decay folded in as imaginary energies.
    NonHermitian,
}

/// Mode operators on the `(L, R, phonon)` tensor space.
pub struct ModeOperators {
    pub a_l: TensorOperator,
    pub a_r: TensorOperator,
    pub b: TensorOperator,
}

impl ModeOperators {
    pub fn new(dims: &[usize]) -> Result<Self, LinalgError> {
        if dims.len() != 3 {
            return Err(LinalgError::InvalidDimension {
                dim: dims.len(),
                reason: "expected three modes (L, R, phonon)",
            });
        }
        Ok(Self {
            a_l: embed(&fock_destroy(dims[0])?, 0, dims)?,
            a_r: embed(&fock_destroy(dims[1])?, 1, dims)?,
            b: embed(&fock_destroy(dims[2])?, 2, dims)?,
        })
    }
}

/// Builds the requested Hamiltonian (in units of `ħκ_L`) on `dims`.
pub fn build_hamiltonian(
    kind: HamiltonianKind,
    rp: &ReducedParams,
    dims: &[usize],
) -> Result<TensorOperator, ModelError> {
    let ops = ModeOperators::new(dims)?;
    let n_l = ops.a_l.adjoint().mul(&ops.a_l);
    let n_r = ops.a_r.adjoint().mul(&ops.a_r);
    let n_b = ops.b.adjoint().mul(&ops.b);
    let hop = ops.a_l.adjoint().mul(&ops.a_r);
    let hop = hop.add(&hop.adjoint()).scale(re(rp.j));
    let drive = ops.a_l.adjoint().sub(&ops.a_l).scale(im(rp.eps_d));
    let delta = rp.kerr_shift();
    let h = match kind {
        HamiltonianKind::FullOm => n_l
            .scale(re(rp.delta_l))
            .add(&n_r.scale(re(rp.delta_r_prime())))
            .add(&n_b.scale(re(rp.omega_m)))
            .add(&hop)
            .add(&n_r.mul(&ops.b.add(&ops.b.adjoint())).scale(re(rp.g)))
            .add(&drive),
        HamiltonianKind::EffectiveKerr => {
            check_kerr_validity(rp);
            n_l.scale(re(rp.delta_l))
                .add(&n_r.scale(re(rp.delta_r_prime())))
                .sub(&n_r.mul(&n_r).scale(re(delta)))
                .add(&n_b.scale(re(rp.omega_m)))
                .add(&hop)
                .add(&drive)
        }
        HamiltonianKind::NonHermitian => n_l
            .scale(C64::new(rp.delta_l, -0.5 * rp.kappa_l))
            .add(&n_r.scale(C64::new(rp.delta_r_prime(), -0.5 * rp.kappa_r)))
            .add(&n_b.scale(C64::new(rp.omega_m, -0.5 * rp.gamma_m)))
            .add(&hop)
            .sub(&n_r.mul(&n_r).scale(re(delta)))
            .add(&drive),
    };
    Ok(h)
}

fn check_kerr_validity(rp: &ReducedParams) {
    if rp.g / rp.omega_m > 0.1 {
        log::warn!(
            "Kerr model used with g/omega_m = {:.3} (needs g << omega_m)",
            rp.g / rp.omega_m
        );
    }
    if rp.j >= rp.omega_m / 2.0 {
        log::warn!("Kerr model used with J = {} >= omega_m/2 = {}", rp.j, rp.omega_m / 2.0);
    }
}

/// Matrix of a Hamiltonian with every entry tested for exact equality
/// against another; used by callers that compare builds.
pub fn same_operator(a: &TensorOperator, b: &TensorOperator) -> bool {
    a.dims() == b.dims() && a.matrix() == b.matrix()
}

#[doc(hidden)]
pub fn _dense(op: &TensorOperator) -> &CMatrix {
    op.matrix()
}
