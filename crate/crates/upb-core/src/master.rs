//! Lindblad master equation: Liouvillian assembly, steady state and photon
//! correlations.
//!
//! Density matrices are vectorized column-major, `vec(ρ)[i + n·j] = ρ_ij`,
//! so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{
    gmres, re, solve_linear, BlockGaussSeidel, CMatrix, CsrMatrix, DensityMatrix, GmresOptions, LinalgError,
    TensorOperator, C64,
};
use crate::model::{build_hamiltonian, HamiltonianKind, ModeOperators, ModelError, ReducedParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MasterError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("the non-Hermitian Hamiltonian has no Lindblad form")]
    NonHermitianRoute,
    #[error("channel operator dims {found:?} differ from Hamiltonian dims {expected:?}")]
    DimensionMismatch { expected: Vec<usize>, found: Vec<usize> },
    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),
    #[error("steady-state solve stalled after {iterations} iterations (relative residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("correlation undefined: mean occupation {mean:.3e}")]
    UndefinedCorrelation { mean: f64 },
    #[error("correlation order {n} needs mode dimension above {n}, found {dim}")]
    TruncationTooSmall { n: usize, dim: usize },
    #[error("truncation ladder needs at least two rungs")]
    ShortLadder,
}

/// Jump operator with its rate (in `κ_L` units).
#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub operator: TensorOperator,
    pub rate: f64,
}

/// Standard thermal channel set: `(a_L, κ_L)`, `(a_R, κ_R)`,
/// `(b, γ_m(n̄+1))`, `(b†, γ_m n̄)`. Zero-rate channels are omitted.
pub fn standard_channels(rp: &ReducedParams, dims: &[usize]) -> Result<Vec<CollapseChannel>, MasterError> {
    let ops = ModeOperators::new(dims)?;
    let b_dag = ops.b.adjoint();
    let all = [
        (ops.a_l, rp.kappa_l),
        (ops.a_r, rp.kappa_r),
        (ops.b, rp.gamma_m * (rp.n_th + 1.0)),
        (b_dag, rp.gamma_m * rp.n_th),
    ];
    Ok(all
        .into_iter()
        .filter(|(_, r)| *r > 0.0)
        .map(|(operator, rate)| CollapseChannel { operator, rate })
        .collect())
}

/// Sparse Liouvillian together with the Hilbert-space dims it acts on.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dims: Vec<usize>,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension `n`; the superoperator is `n² × n²`.
    pub fn hilbert_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Applies `L` to a density matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.hilbert_dim();
        CMatrix::from_column_major(n, &self.matrix.matvec(&rho.to_column_major()))
    }

    /// Total photon number of basis state `k`: the first two modes are the
    /// cavities (a lone mode counts as a cavity).
    fn photon_count(&self, k: usize) -> usize {
        let occ = TensorOperator::occupations(&self.dims, k);
        occ.iter().take(2).sum()
    }
}

/// `L = −i(I⊗H − Hᵀ⊗I) + Σ_k (γ_k/2)(2 conj(o)⊗o − I⊗o†o − (o†o)ᵀ⊗I)`.
pub fn build_liouvillian(h: &TensorOperator, channels: &[CollapseChannel]) -> Result<Liouvillian, MasterError> {
    let dev = h.matrix().hermitian_deviation();
    if dev > crate::linalg::eigen::HERMITIAN_TOL * h.matrix().max_abs().max(1.0) {
        return Err(LinalgError::NotHermitian { deviation: dev }.into());
    }
    let n = h.dim();
    let id = CsrMatrix::identity(n);
    let hs = CsrMatrix::from_dense(h.matrix());
    let mi = C64::new(0.0, -1.0);
    let mut l = CsrMatrix::kron(&id, &hs)
        .scale(mi)
        .add(&CsrMatrix::kron(&hs.transpose(), &id).scale(-mi))?;
    for ch in channels {
        if ch.operator.dims() != h.dims() {
            return Err(MasterError::DimensionMismatch {
                expected: h.dims().to_vec(),
                found: ch.operator.dims().to_vec(),
            });
        }
        if !(ch.rate >= 0.0) {
            return Err(MasterError::NegativeRate(ch.rate));
        }
        if ch.rate == 0.0 {
            continue;
        }
        let o = CsrMatrix::from_dense(ch.operator.matrix());
        let odo = CsrMatrix::from_dense(ch.operator.adjoint().mul(&ch.operator).matrix());
        let o_conj = CsrMatrix::from_dense(&ch.operator.matrix().conj());
        let half = re(0.5 * ch.rate);
        let d = CsrMatrix::kron(&o_conj, &o)
            .scale(re(2.0))
            .add(&CsrMatrix::kron(&id, &odo).scale(re(-1.0)))?
            .add(&CsrMatrix::kron(&odo.transpose(), &id).scale(re(-1.0)))?;
        l = l.add(&d.scale(half))?;
    }
    Ok(Liouvillian {
        dims: h.dims().to_vec(),
        matrix: l,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyOptions {
    /// Superoperator dimension up to which a dense LU is used.
    pub dense_threshold: usize,
    pub gmres: GmresOptions,
    /// Expected amplitude ratio between successive photon-number sectors.
    /// `Some(λ)` rescales coherence `ρ_ij` by `λ^(N_i+N_j)` before the
    /// solve so that all sectors are resolved to comparable relative
    /// accuracy; `None` solves unscaled.
    pub photon_scale: Option<f64>,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self {
            dense_threshold: 500,
            gmres: GmresOptions {
                restart: 40,
                max_iter: 600,
                tol: 1e-12,
            },
            photon_scale: None,
        }
    }
}

/// Diagnostics of a steady-state solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    /// `‖L vec ρ‖₂` for the trace-normalized `ρ`.
    pub residual: f64,
    /// `residual / ‖L‖_F`.
    pub relative_residual: f64,
    /// Krylov iterations; zero for a dense solve.
    pub iterations: usize,
}

/// Steady state `L(ρ) = 0`, `tr ρ = 1`.
///
/// The equation for `ρ_00` is replaced by the trace condition (bordered
/// system). Small systems use a dense LU; larger ones use restarted GMRES
/// preconditioned by a block Gauss-Seidel sweep over photon-number sectors
/// `(N_ket, N_bra)`, ordered by `N_ket + N_bra`. Under weak drive only the
/// upward drive couples these sectors at leading order, so the sweep is
/// nearly exact.
pub fn solve_steady(l: &Liouvillian, opts: &SteadyOptions) -> Result<(DensityMatrix, SolveStats), MasterError> {
    let n = l.hilbert_dim();
    let nn = n * n;
    let lambda = opts.photon_scale.map_or(1.0, |x| x.clamp(1e-8, 1.0));
    let photons: Vec<usize> = (0..n).map(|k| l.photon_count(k)).collect();
    let t: Vec<C64> = (0..nn)
        .map(|k| re(lambda.powi((photons[k % n] + photons[k / n]) as i32)))
        .collect();
    let t_inv: Vec<C64> = t.iter().map(|x| x.inv()).collect();
    let trace_row: Vec<(usize, C64)> = (0..n).map(|i| (i + n * i, t[i + n * i])).collect();
    let a = l.matrix.scale_rows_cols(&t_inv, &t).replace_row(0, &trace_row);
    let mut rhs = vec![re(0.0); nn];
    rhs[0] = re(1.0);

    let (y, iterations) = if nn <= opts.dense_threshold {
        (solve_linear(&a.to_dense(), &rhs).map_err(degenerate)?, 0)
    } else {
        let max_n = photons.iter().copied().max().unwrap_or(0) + 1;
        let labels = sector_labels(&photons, max_n);
        let pre = BlockGaussSeidel::new(&a, &labels).map_err(degenerate)?;
        log::debug!(
            "steady solve: dim {} nnz {} blocks {} (largest {})",
            nn,
            a.nnz(),
            pre.num_blocks(),
            pre.largest_block()
        );
        let out = gmres(
            |x, y| a.matvec_into(x, y),
            |r, z| pre.apply(r, z),
            &rhs,
            None,
            opts.gmres,
        );
        if !out.converged {
            return Err(MasterError::NoConvergence {
                iterations: out.iterations,
                residual: out.relative_residual,
            });
        }
        (out.x, out.iterations)
    };
    let x: Vec<C64> = y.iter().zip(&t).map(|(a, b)| a * b).collect();
    let raw = CMatrix::from_column_major(n, &x);
    let sym = CMatrix::from_fn(n, n, |i, j| (raw[(i, j)] + raw[(j, i)].conj()) * 0.5);
    let rho = DensityMatrix::from_matrix(&l.dims, sym).map_err(degenerate)?;
    let lx = l.matrix.matvec(&rho.matrix().to_column_major());
    let residual = crate::linalg::norm2(&lx);
    let norm_l = l.matrix.norm_fro();
    Ok((
        rho,
        SolveStats {
            residual,
            relative_residual: residual / norm_l.max(f64::MIN_POSITIVE),
            iterations,
        },
    ))
}

fn degenerate(e: LinalgError) -> MasterError {
    match e {
        LinalgError::Singular { condition } => MasterError::Linalg(LinalgError::DegenerateKernel(alloc::format!(
            "bordered steady-state system is singular (condition ~{condition:.2e})"
        ))),
        other => MasterError::Linalg(other),
    }
}

/// Block label of every vectorized index: sectors `(N_ket, N_bra)` sorted by
/// `N_ket + N_bra`, then by `N_ket`.
fn sector_labels(photons: &[usize], max_n: usize) -> Vec<usize> {
    let n = photons.len();
    let mut order = vec![usize::MAX; max_n * max_n];
    let mut next = 0;
    for level in 0..(2 * max_n - 1) {
        for nk in 0..max_n {
            if level >= nk && level - nk < max_n {
                order[nk * max_n + (level - nk)] = next;
                next += 1;
            }
        }
    }
    (0..n * n)
        .map(|k| order[photons[k % n] * max_n + photons[k / n]])
        .collect()
}

/// `⟨a†ⁿ aⁿ⟩ / ⟨a†a⟩ⁿ` for `mode` of `rho`.
pub fn g_n(rho: &DensityMatrix, mode: usize, n: usize) -> Result<f64, MasterError> {
    let dims = rho.dims();
    let dim = dims.get(mode).copied().unwrap_or(0);
    if n == 0 || dim <= n {
        return Err(MasterError::TruncationTooSmall { n, dim });
    }
    let (mean, moment) = factorial_moments(rho, mode, n);
    let denom = mean.powi(n as i32);
    if !(denom >= 1e-300) {
        return Err(MasterError::UndefinedCorrelation { mean });
    }
    Ok(moment / denom)
}

/// `(⟨a†a⟩, ⟨a†ⁿaⁿ⟩)` from the populations.
fn factorial_moments(rho: &DensityMatrix, mode: usize, n: usize) -> (f64, f64) {
    let dims = rho.dims();
    let mut mean = 0.0;
    let mut moment = 0.0;
    for (k, p) in rho.populations().into_iter().enumerate() {
        let m = TensorOperator::occupations(dims, k)[mode];
        mean += p * m as f64;
        if m >= n {
            let falling: f64 = (0..n).map(|j| (m - j) as f64).product();
            moment += p * falling;
        }
    }
    (mean, moment)
}

/// Outcome of a master-equation run.
#[derive(Clone, Debug)]
pub struct SteadyStateResult {
    pub rho: DensityMatrix,
    pub photon_number_l: f64,
    pub g2_l: f64,
    /// Present when the left cavity holds at least four levels.
    pub g3_l: Option<f64>,
    pub residual: f64,
    pub relative_residual: f64,
    pub truncation: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

/// Tolerance on `‖Lρ‖ / ‖L‖` for a single solve to count as converged.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Linear-response amplitude of the most occupied cavity, used as the
/// sector scale of the steady solve.
pub fn linear_photon_scale(rp: &ReducedParams) -> f64 {
    let dl = C64::new(rp.delta_l, -0.5 * rp.kappa_l);
    let dr = C64::new(rp.delta_r_prime() - rp.kerr_shift(), -0.5 * rp.kappa_r);
    let j = re(rp.j);
    let det = dl * dr - j * j;
    if det.norm() == 0.0 {
        return 1.0;
    }
    let drive = C64::new(0.0, -rp.eps_d);
    let c10 = drive * dr / det;
    let c01 = -drive * j / det;
    c10.norm().max(c01.norm()).min(1.0)
}

/// Builds and solves the master equation for `rp` on `dims`.
pub fn steady_state(
    rp: &ReducedParams,
    kind: HamiltonianKind,
    dims: &[usize],
    opts: &SteadyOptions,
) -> Result<SteadyStateResult, MasterError> {
    if kind == HamiltonianKind::NonHermitian {
        return Err(MasterError::NonHermitianRoute);
    }
    rp.validate()?;
    let h = build_hamiltonian(kind, rp, dims)?;
    let channels = standard_channels(rp, dims)?;
    let l = build_liouvillian(&h, &channels)?;
    let opts = SteadyOptions {
        photon_scale: opts.photon_scale.or(Some(linear_photon_scale(rp))),
        ..*opts
    };
    let (rho, stats) = solve_steady(&l, &opts)?;
    let (mean, _) = factorial_moments(&rho, 0, 1);
    let g2_l = g_n(&rho, 0, 2)?;
    let g3_l = if dims[0] > 3 { Some(g_n(&rho, 0, 3)?) } else { None };
    Ok(SteadyStateResult {
        rho,
        photon_number_l: mean,
        g2_l,
        g3_l,
        residual: stats.residual,
        relative_residual: stats.relative_residual,
        truncation: dims.to_vec(),
        converged: stats.relative_residual <= RESIDUAL_TOL,
        iterations: stats.iterations,
    })
}

/// Default truncation `(photons_L, photons_R, phonons)`.
pub const DEFAULT_DIMS: [usize; 3] = [4, 4, 5];

/// Default truncation ladder for convergence checks.
pub const DEFAULT_LADDER: [[usize; 3]; 3] = [[3, 3, 4], [4, 4, 6], [5, 5, 6]];

/// Relative change of `g2` between rungs accepted as converged.
pub const LADDER_TOL: f64 = 1e-3;

/// Solves on successive truncations until `g2` changes by less than
/// [`LADDER_TOL`] relative; returns the finest solve performed with the
/// `converged` flag set accordingly.
pub fn converged_g2(
    rp: &ReducedParams,
    kind: HamiltonianKind,
    ladder: &[[usize; 3]],
    opts: &SteadyOptions,
) -> Result<SteadyStateResult, MasterError> {
    if ladder.len() < 2 {
        return Err(MasterError::ShortLadder);
    }
    let mut prev: Option<SteadyStateResult> = None;
    for dims in ladder {
        let cur = steady_state(rp, kind, dims, opts)?;
        if let Some(p) = prev {
            let rel = (cur.g2_l - p.g2_l).abs() / cur.g2_l.abs().max(f64::MIN_POSITIVE);
            log::debug!(
                "ladder {:?} -> {:?}: g2 {} -> {} (rel {:.2e})",
                p.truncation,
                dims,
                p.g2_l,
                cur.g2_l,
                rel
            );
            if rel < LADDER_TOL && cur.converged {
                return Ok(cur);
            }
        }
        prev = Some(cur);
    }
    let mut last = prev.expect("ladder is non-empty");
    last.converged = false;
    Ok(last)
}
