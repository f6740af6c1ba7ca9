//! Globally adaptive Gauss-Kronrod (7/15) quadrature for complex integrands.

use alloc::vec::Vec;

use crate::linalg::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-9,
            max_intervals: 4000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy)]
enum Map {
    Identity,
    /// `ω = w/t` for `t ∈ (0, 1]`.
    Upper(f64),
    /// `ω = −w/t`.
    Lower(f64),
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    map: Map,
    value: C64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> C64>(f: &mut F, map: Map, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |t: f64| -> C64 {
        match map {
            Map::Identity => f(t),
            Map::Upper(w) => f(w / t) * (w / (t * t)),
            Map::Lower(w) => f(-w / t) * (w / (t * t)),
        }
    };
    let fc = eval(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = eval(center - dx) + eval(center + dx);
        kronrod += pair * w;
        if k % 2 == 1 {
            gauss += pair * WG[k / 2];
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).norm();
    (value, err)
}

fn adaptive<F: FnMut(f64) -> C64>(f: &mut F, init: &[(f64, f64, Map)], opts: &QuadOptions) -> QuadResult {
    let mut pieces: Vec<Piece> = init
        .iter()
        .filter(|(a, b, _)| b > a)
        .map(|&(a, b, map)| {
            let (value, error) = gk15(f, map, a, b);
            Piece {
                a,
                b,
                map,
                value,
                error,
            }
        })
        .collect();
    let mut evaluations = 15 * pieces.len();
    let total = |p: &[Piece]| {
        let v = p.iter().fold(C64::new(0.0, 0.0), |s, q| s + q.value);
        let e = p.iter().map(|q| q.error).sum::<f64>();
        (v, e)
    };
    loop {
        let (value, error) = total(&pieces);
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target || pieces.len() >= opts.max_intervals {
            return QuadResult {
                value,
                error,
                evaluations,
                converged: error <= target,
            };
        }
        let (worst, _) = pieces.iter().enumerate().fold(
            (0, -1.0),
            |(bi, be), (i, p)| if p.error > be { (i, p.error) } else { (bi, be) },
        );
        let p = pieces[worst];
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Interval cannot be split further in floating point.
            pieces[worst].error = 0.0;
            continue;
        }
        let (v1, e1) = gk15(f, p.map, p.a, mid);
        let (v2, e2) = gk15(f, p.map, mid, p.b);
        evaluations += 30;
        pieces[worst] = Piece {
            b: mid,
            value: v1,
            error: e1,
            ..p
        };
        pieces.push(Piece {
            a: mid,
            value: v2,
            error: e2,
            ..p
        });
    }
}

fn sorted_breaks(a: f64, b: f64, breakpoints: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal));
    pts.dedup();
    pts
}

/// `∫_a^b f`, with the interval first split at `breakpoints`.
pub fn integrate<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> QuadResult {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let pts = sorted_breaks(lo, hi, breakpoints);
    let init: Vec<(f64, f64, Map)> = pts.windows(2).map(|w| (w[0], w[1], Map::Identity)).collect();
    let mut r = adaptive(&mut f, &init, opts);
    r.value *= sign;
    r
}

/// `∫_{−∞}^{∞} f`.
///
/// The finite window spans all breakpoints (and at least `[−1, 1]`); each
/// tail is mapped onto `(0, 1]` by `ω = ±w/t`.
pub fn integrate_real_line<F: FnMut(f64) -> C64>(mut f: F, breakpoints: &[f64], opts: &QuadOptions) -> QuadResult {
    let w = 2.0
        * breakpoints
            .iter()
            .filter(|x| x.is_finite())
            .fold(1.0f64, |m, x| m.max(x.abs()));
    let pts = sorted_breaks(-w, w, breakpoints);
    let mut init: Vec<(f64, f64, Map)> = pts.windows(2).map(|p| (p[0], p[1], Map::Identity)).collect();
    init.push((0.0, 1.0, Map::Upper(w)));
    init.push((0.0, 1.0, Map::Lower(w)));
    adaptive(&mut f, &init, opts)
}
