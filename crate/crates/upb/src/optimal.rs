//! Optimal `(Δ, g)` report for the `optimal` subcommand.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use upb_core::model::Direction;
use upb_core::weakdrive::{
    amplitudes, closed_form_optima, g2_weakdrive, optimal_params, optimality_residuals, AmplitudeVariant,
    QuarticProblem, QuarticVariant, WeakDriveError, PROBE_EPS,
};

use crate::config::{Config, ConfigError};

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub delta: f64,
    pub kerr: f64,
    pub g: Option<f64>,
    pub g2: Option<f64>,
    pub local_minimum: bool,
    pub admissible: bool,
}

/// The radical formula evaluated as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSummary {
    pub delta_opt_re: f64,
    pub delta_opt_im: f64,
    pub g_opt_re: f64,
    pub g_opt_im: f64,
    pub flags: Vec<String>,
    /// Distance to the nearest real quartic root.
    pub discrepancy: Option<f64>,
    pub quartic_residual: Option<f64>,
}

/// Roots of the quartic with the uncorrected coefficients, and how well they
/// satisfy the two optimality conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticProbe {
    pub variant: String,
    pub roots: Vec<f64>,
    /// Largest `|C20 = 0 residual|` over the roots, with `δ` from the
    /// second condition.
    pub worst_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionOptimum {
    pub direction: Direction,
    pub delta_f: f64,
    pub delta_opt: Option<f64>,
    pub g_opt: Option<f64>,
    pub kerr: Option<f64>,
    pub g2_weakdrive: Option<f64>,
    /// `|C20|/|C10|²` at the optimum.
    pub c20_ratio: Option<f64>,
    pub local_minimum: bool,
    pub residuals: Option<[f64; 2]>,
    pub candidates: Vec<CandidateReport>,
    pub closed_form: Option<ClosedFormSummary>,
    pub probes: Vec<QuarticProbe>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub direction: Direction,
    pub delta: f64,
    pub g2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalReport {
    pub config: String,
    pub j: f64,
    pub omega_m: f64,
    pub kappa: f64,
    pub eps_d: f64,
    pub directions: Vec<DirectionOptimum>,
    pub landscape: Vec<LandscapeRow>,
}

/// Half-width and step of the `g²` landscape slice around each optimum.
pub const LANDSCAPE: (f64, f64) = (0.5, 0.01);

fn probe(j: f64, kappa: f64, delta_f: f64, variant: QuarticVariant) -> Result<QuarticProbe, WeakDriveError> {
    let q = QuarticProblem::new(j, kappa, delta_f, variant);
    let roots = q.real_roots()?;
    let worst_residual = roots
        .iter()
        .map(|&x| {
            let d = upb_core::weakdrive::kerr_from_detuning(x, kappa, delta_f);
            optimality_residuals(x, d, j, kappa, delta_f).0.abs()
        })
        .fold(0.0, f64::max);
    Ok(QuarticProbe {
        variant: format!("{variant:?}").to_ascii_lowercase(),
        roots,
        worst_residual,
    })
}

fn direction_optimum(cfg: &Config, direction: Direction) -> Result<(DirectionOptimum, Vec<LandscapeRow>), ConfigError> {
    let rp = cfg.reduced(None, direction)?;
    let (j, kappa, wm, f) = (rp.j, rp.kappa_l, rp.omega_m, rp.delta_f);
    let mut out = DirectionOptimum {
        direction,
        delta_f: f,
        delta_opt: None,
        g_opt: None,
        kerr: None,
        g2_weakdrive: None,
        c20_ratio: None,
        local_minimum: false,
        residuals: None,
        candidates: Vec::new(),
        closed_form: None,
        probes: Vec::new(),
        error: None,
    };
    let mut landscape = Vec::new();
    if (rp.kappa_r - kappa).abs() > 1e-12 * kappa {
        log::warn!("optimal conditions assume equal cavity linewidths; using kappa_L = {kappa}");
    }
    for v in [QuarticVariant::Corrected, QuarticVariant::Printed] {
        match probe(j, kappa, f, v) {
            Ok(p) => out.probes.push(p),
            Err(e) => log::warn!("{v:?} quartic: {e}"),
        }
    }
    let q = QuarticProblem::new(j, kappa, f, QuarticVariant::Corrected);
    match closed_form_optima(&q, wm) {
        Ok(c) => {
            out.closed_form = Some(ClosedFormSummary {
                delta_opt_re: c.delta_opt.re,
                delta_opt_im: c.delta_opt.im,
                g_opt_re: c.g_opt.re,
                g_opt_im: c.g_opt.im,
                flags: c.flags.iter().map(|s| s.to_string()).collect(),
                discrepancy: finite(c.discrepancy),
                quartic_residual: finite(c.quartic_residual),
            })
        }
        Err(e) => log::warn!("closed form: {e}"),
    }
    match optimal_params(j, kappa, wm, f) {
        Ok(opt) => {
            out.candidates = opt
                .candidates
                .iter()
                .map(|c| CandidateReport {
                    delta: c.delta,
                    kerr: c.kerr,
                    g: finite(c.g),
                    g2: finite(c.g2),
                    local_minimum: c.local_minimum,
                    admissible: c.admissible,
                })
                .collect();
            let at = rp.clone().with_g(opt.g_opt).with_eps(PROBE_EPS * kappa);
            let amp = amplitudes(&at.clone().with_detuning(opt.delta_opt), AmplitudeVariant::Kerr);
            out.delta_opt = Some(opt.delta_opt);
            out.g_opt = Some(opt.g_opt);
            out.kerr = Some(opt.kerr);
            out.g2_weakdrive = finite(opt.g2);
            out.c20_ratio = amp.ok().map(|a| a.c20.norm() / a.c10.norm_sqr());
            out.local_minimum = opt
                .candidates
                .iter()
                .any(|c| c.delta == opt.delta_opt && c.local_minimum);
            let (r1, r2) = optimality_residuals(opt.delta_opt, opt.kerr, j, kappa, f);
            out.residuals = Some([r1, r2]);
            let (half, step) = LANDSCAPE;
            let n = (2.0 * half / step).round() as i64;
            for k in 0..=n {
                let delta = opt.delta_opt - half + k as f64 * step;
                let g2 = g2_weakdrive(&at.clone().with_detuning(delta), AmplitudeVariant::Kerr).ok();
                landscape.push(LandscapeRow {
                    direction,
                    delta,
                    g2: g2.and_then(finite),
                });
            }
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    Ok((out, landscape))
}

/// Optimum for each requested drive direction.
pub fn run_optimal(cfg: &Config, directions: &[Direction]) -> Result<OptimalReport, ConfigError> {
    let rp = cfg.reduced(None, cfg.physical.direction)?;
    let mut report = OptimalReport {
        config: cfg.name.clone(),
        j: rp.j,
        omega_m: rp.omega_m,
        kappa: rp.kappa_l,
        eps_d: PROBE_EPS * rp.kappa_l,
        directions: Vec::new(),
        landscape: Vec::new(),
    };
    for &d in directions {
        let (o, l) = direction_optimum(cfg, d)?;
        report.directions.push(o);
        report.landscape.extend(l);
    }
    Ok(report)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:?}"))
}

/// Human-readable summary followed by the landscape slice as CSV.
pub fn to_text(r: &OptimalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# optimal conditions for {} (J = {}, omega_m = {}, kappa = {})",
        r.config, r.j, r.omega_m, r.kappa
    );
    for d in &r.directions {
        let _ = writeln!(s, "[{}] delta_f = {:?}", d.direction, d.delta_f);
        if let Some(e) = &d.error {
            let _ = writeln!(s, "  numeric path failed: {e}");
        }
        let _ = writeln!(
            s,
            "  numeric:     delta_opt = {}  g_opt = {}",
            opt(d.delta_opt),
            opt(d.g_opt)
        );
        let _ = writeln!(s, "  g2 (weak drive, eps = {}) = {}", r.eps_d, opt(d.g2_weakdrive));
        let _ = writeln!(
            s,
            "  |C20|/|C10|^2 = {}  local minimum = {}",
            opt(d.c20_ratio),
            d.local_minimum
        );
        if let Some([a, b]) = d.residuals {
            let _ = writeln!(s, "  optimality residuals = {a:e}, {b:e}");
        }
        for c in &d.candidates {
            let _ = writeln!(
                s,
                "  candidate delta = {:?}  kerr = {:?}  g2 = {}  admissible = {}",
                c.delta,
                c.kerr,
                opt(c.g2),
                c.admissible
            );
        }
        if let Some(c) = &d.closed_form {
            let _ = writeln!(
                s,
                "  closed form: delta_opt = {:?}{:+?}i  g_opt = {:?}{:+?}i  discrepancy = {}",
                c.delta_opt_re,
                c.delta_opt_im,
                c.g_opt_re,
                c.g_opt_im,
                opt(c.discrepancy)
            );
            for f in &c.flags {
                let _ = writeln!(s, "    flag: {f}");
            }
        }
        for p in &d.probes {
            let _ = writeln!(
                s,
                "  quartic ({}): roots {:?}  worst residual {:e}",
                p.variant, p.roots, p.worst_residual
            );
        }
    }
    s.push_str("direction,delta,g2\n");
    for row in &r.landscape {
        let _ = writeln!(
            s,
            "{},{:?},{}",
            row.direction,
            row.delta,
            row.g2.map_or_else(|| "NaN".to_owned(), |v| format!("{v:?}"))
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_spinning_optimum_is_mirror_symmetric() {
        let cfg = Config::load("case2", &["physical.omega_spin_rad_s=0".into()]).unwrap();
        let r = run_optimal(&cfg, &Direction::BOTH).unwrap();
        let a = &r.directions[0];
        let b = &r.directions[1];
        assert_eq!(a.delta_opt, b.delta_opt);
        let roots = &a.probes[0].roots;
        assert_eq!(roots.len(), 2);
        assert!((roots[0] + roots[1]).abs() < 1e-9);
        assert!(a.c20_ratio.unwrap() < 1e-3);
    }

    #[test]
    fn spinning_optimum_depends_on_direction() {
        let cfg = Config::load("case2", &[]).unwrap();
        let r = run_optimal(&cfg, &Direction::BOTH).unwrap();
        let a = r.directions[0].delta_opt.unwrap();
        let b = r.directions[1].delta_opt.unwrap();
        assert!((a - b).abs() > 0.1);
        let text = to_text(&r);
        assert!(text.contains("direction,delta,g2"));
        assert_eq!(r.landscape.len(), 2 * 101);
    }
}
