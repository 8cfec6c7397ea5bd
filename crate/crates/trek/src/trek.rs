//! Trust-region subproblem driver.
//!
//! Solves min ½xᵀAx − bᵀx subject to ‖x‖ ≤ Δ (optionally in an elliptical
//! norm ‖x‖_S) by factoring A once, testing the interior solution, and then
//! growing an extended Krylov basis one vector at a time.  After every new
//! basis vector the small projected problem is solved through a spectral
//! decomposition plus a secular root find, and a two-band residual formula
//! decides termination without touching the full-size operator.
//!
//! Indefinite matrices take the shifted route: a Gershgorin bound with a
//! safety margin makes A + σ_S·I (or A + σ_S·S) positive definite, the basis
//! is grown for the shifted operator, and the secular solver works with the
//! multiplier lower bound θ ≥ −σ_S so that the reported multiplier
//! σ = θ + σ_S is always on the original scale.  If the shifted
//! factorization still fails from roundoff, the shift doubles up to three
//! times before the failure propagates.
//!
//! A successful solve returns a [`TrekSession`] that retains the basis; a
//! later [`trek_resolve`] with a smaller radius re-solves the projected
//! problem at the current dimension first and grows the basis only when the
//! residual test fails, which in practice almost always means zero extra
//! work.  The regularized variant in [`crate::nrek`] shares all of this
//! machinery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cholesky::{factorize, CholeskyFactor};
use crate::eig;
use crate::eks::{EksOps, EksState};
use crate::matrix::{LinalgError, SymmetricMatrix};
use crate::secular::{solve_diag_reg, solve_diag_tr, Constraint, SecularProblem};
use crate::vecmath;

/// Default residual stopping tolerance (relative to 1 + ‖b‖).
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default outer iteration bound; raising it (400 is plenty in practice)
/// cures rare slow instances.
pub const DEFAULT_MAX_ITER: usize = 100;
/// Default size of the rhs perturbation, relative to 1 + ‖b‖.
pub const PERTURB_SCALE: f64 = 1e-12;
/// Fixed stream for the rhs perturbation; a constant keeps solves
/// reproducible run to run.
const PERTURB_SEED: u64 = 0x7eb1_95ca_11ab_2e01;

/// How the positive-definiteness shift is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftMode {
    /// Try A unshifted; fall back to the Gershgorin shift when the
    /// factorization reports an indefinite matrix.
    Auto,
    /// Always factor A + σ_S·M with the given σ_S and skip the interior
    /// test (unless σ_S = 0).  Mainly a testing hook for exercising the
    /// shifted path on definite matrices.
    Forced(f64),
}

#[derive(Debug, Clone)]
pub struct TrekOptions {
    /// Residual tolerance; the solver stops when ‖r‖ ≤ tol·(1 + ‖b‖).
    pub tol: f64,
    /// Outer iteration bound m; the basis dimension is capped at 2m + 1.
    pub max_iter: usize,
    pub shift_mode: ShiftMode,
    /// Always add the tiny seeded perturbation to b.  A zero b is perturbed
    /// regardless, since the Krylov space of b = 0 is empty.
    pub perturb_b: bool,
    /// Elliptical-norm metric; `trek_solve` uses it when present.  The
    /// positional argument of [`trek_solve_snorm`] takes precedence.
    pub snorm: Option<SymmetricMatrix>,
    /// Re-orthogonalize each new basis candidate against the whole basis
    /// (one extra pass; off by default, the recurrence is self-correcting
    /// enough for the supported problem sizes).
    pub reorth: bool,
}

impl Default for TrekOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            shift_mode: ShiftMode::Auto,
            perturb_b: false,
            snorm: None,
            reorth: false,
        }
    }
}

/// Scalar knobs shared by the trust-region and regularized drivers.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SolverCore {
    pub tol: f64,
    pub max_iter: usize,
    pub shift_mode: ShiftMode,
    pub perturb_b: bool,
    pub reorth: bool,
}

impl TrekOptions {
    pub(crate) fn core(&self) -> SolverCore {
        SolverCore {
            tol: self.tol,
            max_iter: self.max_iter,
            shift_mode: self.shift_mode,
            perturb_b: self.perturb_b,
            reorth: self.reorth,
        }
    }
}

/// Result of a trust-region or regularized subproblem solve.
#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    pub x: Vec<f64>,
    /// Multiplier σ_* ≥ 0, always on the unshifted scale of A.
    pub sigma: f64,
    /// Residual estimate at exit: ‖(A + σ_*M)x − b‖ (measured in the M⁻¹
    /// norm when an elliptical metric M = S is in play).
    pub resid: f64,
    /// Outer iterations used; 0 for the interior early exit.
    pub k_stop: usize,
    /// Subspace solves beyond the free warm-start re-solve during a resolve
    /// call; always 0 for a fresh solve.
    pub k_extra: usize,
    /// True when the constraint is inactive (σ_* = 0, strictly inside).
    pub interior: bool,
    /// Factorization attempts of the A + σ·M family, failed ones included
    /// (the metric factorization of S itself is not counted).
    pub factorizations: usize,
    /// ½xᵀAx − bᵀx against the original matrix (no penalty term).
    pub objective: f64,
}

#[derive(Debug, Error)]
pub enum TrekError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// The iteration bound was reached; `best` is the lowest-residual
    /// iterate seen, so the caller can keep it or retry with a larger bound.
    #[error("iteration bound {m} reached without meeting the tolerance (best residual {resid:.3e})")]
    MaxIterReached {
        m: usize,
        resid: f64,
        best: Box<SubproblemSolution>,
    },
    /// The pencil Gershgorin bound needs strict diagonal dominance of S.
    #[error("metric row {row} is not strictly diagonally dominant (gap {gap:.3e})")]
    SNotDiagonallyDominant { row: usize, gap: f64 },
}

/// Which kind of subspace problem a step solved; the residual formula
/// differs between odd and even dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Residual norm of a dimension-ℓ subspace solution, from the stored bands
/// alone.  `parity` must match ℓ = y.len(); it is accepted explicitly so
/// call sites document which formula they expect.
pub fn residual_norm(state: &EksState, y: &[f64], parity: Parity) -> f64 {
    let odd = y.len() % 2 == 1;
    assert_eq!(
        odd,
        parity == Parity::Odd,
        "parity does not match the solution dimension {}",
        y.len()
    );
    state.residual_norm(y)
}

/// b + scale·(1 + ‖b‖)·u with u a unit vector drawn from a fixed seeded
/// stream, so repeated calls give identical output.  Used to knock b off
/// exact eigenvector directions (always applied when b = 0).
pub fn perturb_rhs(b: &[f64], scale: f64) -> Vec<f64> {
    let n = b.len();
    let mut rng = ChaCha8Rng::seed_from_u64(PERTURB_SEED);
    let mut u = Vec::with_capacity(n + 1);
    while u.len() < n {
        // Box-Muller pair from two uniforms; the log argument stays in (0,1].
        let a: f64 = 1.0 - rng.gen::<f64>();
        let t: f64 = rng.gen();
        let r = (-2.0 * a.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * t).sin_cos();
        u.push(r * c);
        u.push(r * s);
    }
    u.truncate(n);
    let nu = vecmath::norm(&u);
    if nu == 0.0 && n > 0 {
        u[0] = 1.0;
    } else {
        vecmath::scale(&mut u, 1.0 / nu);
    }
    let mut out = b.to_vec();
    vecmath::axpy(scale * (1.0 + vecmath::norm(b)), &u, &mut out);
    out
}

/// The two problem families sharing the driver.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ProblemKind {
    TrustRegion { delta: f64 },
    Regularized { rho: f64, r: f64 },
}

/// Retained solver state for warm-started re-solves with a changed radius
/// or regularization weight.  The session owns copies of the problem data,
/// so it cannot be invalidated from outside.
pub struct TrekSession {
    a: SymmetricMatrix,
    b: Vec<f64>,
    s: Option<SymmetricMatrix>,
    factor: CholeskyFactor,
    s_factor: Option<CholeskyFactor>,
    sigma_shift: f64,
    eks: Option<EksState>,
    /// Cached A⁻¹b when the fresh solve exited through the interior test;
    /// the basis is only built if a later radius forces the boundary.
    interior_x: Option<Vec<f64>>,
    kind: ProblemKind,
    core: SolverCore,
    factorizations: usize,
    k_stop: usize,
}

impl TrekSession {
    /// Outer iterations consumed by the most recent (re-)solve.
    pub fn k_stop(&self) -> usize {
        self.k_stop
    }

    /// Current basis dimension (0 while an interior session has not needed
    /// a basis).
    pub fn basis_dim(&self) -> usize {
        self.eks.as_ref().map_or(0, EksState::dim)
    }

    /// The definiteness shift σ_S in use (0 on the plain path).
    pub fn shift(&self) -> f64 {
        self.sigma_shift
    }

    /// Factorization attempts performed for this session.
    pub fn factorization_count(&self) -> usize {
        self.factorizations
    }

    /// Triangular solves performed through the session's factor.
    pub fn solve_count(&self) -> u64 {
        self.factor.solve_count()
    }

    pub(crate) fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub(crate) fn set_kind(&mut self, kind: ProblemKind) {
        self.kind = kind;
    }
}

/// Shift that makes A + σ·S strictly row diagonally dominant with positive
/// diagonal, hence positive definite.  Requires every gap
/// s_ii − Σ_{j≠i}|s_ij| to be positive.
fn pencil_gershgorin_shift(
    a: &SymmetricMatrix,
    s: &SymmetricMatrix,
) -> Result<f64, TrekError> {
    let (ad, ar) = a.row_radii();
    let (sd, sr) = s.row_radii();
    let mut worst = f64::NEG_INFINITY;
    let mut min_gap = f64::INFINITY;
    for i in 0..a.dim() {
        let gap = sd[i] - sr[i];
        if gap <= 0.0 {
            return Err(TrekError::SNotDiagonallyDominant { row: i, gap });
        }
        min_gap = min_gap.min(gap);
        worst = worst.max((ar[i] - ad[i]) / gap);
    }
    Ok(worst + f64::EPSILON.sqrt() * a.max_abs() / min_gap)
}

fn constraint_norm(x: &[f64], s: Option<&SymmetricMatrix>) -> f64 {
    match s {
        None => vecmath::norm(x),
        Some(sm) => vecmath::dot(&sm.matvec(x), x).max(0.0).sqrt(),
    }
}

fn make_ops<'a>(
    a: &'a SymmetricMatrix,
    sigma_shift: f64,
    factor: &'a CholeskyFactor,
    s: Option<&'a SymmetricMatrix>,
    s_factor: Option<&'a CholeskyFactor>,
) -> EksOps<'a> {
    match (s, s_factor) {
        (Some(sm), Some(sf)) => EksOps::with_metric(a, sigma_shift, factor, sm, sf),
        _ => EksOps::new(a, sigma_shift, factor),
    }
}

/// One solved subspace problem: coordinates, multiplier on the original
/// scale, band residual, and the subspace objective used for the
/// monotonicity check.
struct SubspaceStep {
    y: Vec<f64>,
    sigma_star: f64,
    boundary: bool,
    resid: f64,
    obj: f64,
}

struct Driver<'a, 'b> {
    ops: &'b EksOps<'a>,
    kind: ProblemKind,
    sigma_shift: f64,
    eps: f64,
    m: usize,
}

enum DriveEnd {
    Converged {
        step: SubspaceStep,
        l: usize,
        solves: usize,
    },
    Exhausted {
        best: Option<(SubspaceStep, usize)>,
        solves: usize,
    },
}

impl Driver<'_, '_> {
    /// Solves the projected problem of dimension l through a spectral
    /// decomposition of the banded matrix plus the secular root find.
    fn solve_current(&self, eks: &EksState, l: usize) -> Result<SubspaceStep, LinalgError> {
        let dec = eig::sym_eig_full(l, &eks.p_full(l))?;
        let d: Vec<f64> = dec
            .eigenvectors
            .iter()
            .map(|u| eks.delta0() * u[0])
            .collect();
        match self.kind {
            ProblemKind::TrustRegion { delta } => {
                let prob = SecularProblem {
                    lambdas: dec.eigenvalues.clone(),
                    d,
                    constraint: Constraint::TrustRegion {
                        delta,
                        theta_min: -self.sigma_shift,
                    },
                };
                let sec = solve_diag_tr(&prob)?;
                // θ is against the shifted operator; report against A.
                let sigma_star = if sec.boundary {
                    sec.sigma + self.sigma_shift
                } else {
                    0.0
                };
                let mut obj = 0.0;
                for i in 0..l {
                    let lam_a = dec.eigenvalues[i] - self.sigma_shift;
                    obj += 0.5 * lam_a * sec.z[i] * sec.z[i] - prob.d[i] * sec.z[i];
                }
                let y = dec.from_eigenbasis(&sec.z);
                let resid = eks.residual_norm(&y);
                Ok(SubspaceStep {
                    y,
                    sigma_star,
                    boundary: sec.boundary,
                    resid,
                    obj,
                })
            }
            ProblemKind::Regularized { rho, r } => {
                let lam_a: Vec<f64> = dec
                    .eigenvalues
                    .iter()
                    .map(|l| l - self.sigma_shift)
                    .collect();
                let prob = SecularProblem {
                    lambdas: lam_a.clone(),
                    d,
                    constraint: Constraint::Regularization { rho, r },
                };
                let sec = solve_diag_reg(&prob)?;
                let znorm = vecmath::norm(&sec.z);
                let mut obj = (rho / r) * znorm.powf(r);
                for i in 0..l {
                    obj += 0.5 * lam_a[i] * sec.z[i] * sec.z[i] - prob.d[i] * sec.z[i];
                }
                let y = dec.from_eigenbasis(&sec.z);
                let resid = eks.residual_norm(&y);
                Ok(SubspaceStep {
                    y,
                    sigma_star: sec.sigma,
                    boundary: true,
                    resid,
                    obj,
                })
            }
        }
    }

    /// Runs the outer loop from wherever the state currently is: first half
    /// (new inverse direction), projected column, solve, residual test,
    /// second half (new forward direction), and so on, until the residual
    /// passes or the iteration bound is hit.
    fn drive(&self, eks: &mut EksState, mut prev_obj: f64) -> Result<DriveEnd, TrekError> {
        let mut solves = 0usize;
        let mut best: Option<(SubspaceStep, usize)> = None;
        loop {
            let l = eks.p_cols();
            if l % 2 == 0 {
                // First half of outer cycle k = l/2 + 1.
                let k = l / 2 + 1;
                if k > self.m {
                    return Ok(DriveEnd::Exhausted { best, solves });
                }
                eks.step_neg(self.ops)?;
                if k == 1 {
                    eks.push_start_column();
                } else {
                    eks.push_odd_column();
                }
            } else {
                // Second half of outer cycle k = (l+1)/2; the even-dimension
                // solve only happens while another cycle is still allowed.
                let k = (l + 1) / 2;
                eks.step_pos(self.ops)?;
                if k >= self.m {
                    return Ok(DriveEnd::Exhausted { best, solves });
                }
                eks.push_delta_neg(self.ops);
                eks.push_even_column();
            }
            let l = eks.p_cols();
            let step = self.solve_current(eks, l)?;
            solves += 1;
            // Nested subspaces: the optimum value cannot increase.
            debug_assert!(
                step.obj <= prev_obj + 1e-12 * (1.0 + prev_obj.abs()),
                "subspace objective rose from {prev_obj} to {} at dim {l}",
                step.obj
            );
            prev_obj = step.obj;
            if step.resid <= self.eps {
                return Ok(DriveEnd::Converged { step, l, solves });
            }
            if best.as_ref().map_or(true, |(b, _)| step.resid < b.resid) {
                best = Some((step, l));
            }
        }
    }
}

fn build_solution(
    a: &SymmetricMatrix,
    b: &[f64],
    eks: &EksState,
    step: &SubspaceStep,
    l: usize,
    k_extra: usize,
    factorizations: usize,
    kind: ProblemKind,
) -> SubproblemSolution {
    let x = eks.combine(&step.y);
    let ax = a.matvec(&x);
    let objective = 0.5 * vecmath::dot(&ax, &x) - vecmath::dot(b, &x);
    let k_stop = if l % 2 == 1 { (l + 1) / 2 } else { l / 2 };
    let interior = match kind {
        ProblemKind::TrustRegion { .. } => !step.boundary,
        ProblemKind::Regularized { .. } => false,
    };
    SubproblemSolution {
        x,
        sigma: step.sigma_star,
        resid: step.resid,
        k_stop,
        k_extra,
        interior,
        factorizations,
        objective,
    }
}

fn interior_solution(
    a: &SymmetricMatrix,
    b: &[f64],
    x: Vec<f64>,
    factorizations: usize,
) -> SubproblemSolution {
    let ax = a.matvec(&x);
    let resid = vecmath::norm(&vecmath::sub(&ax, b));
    let objective = 0.5 * vecmath::dot(&ax, &x) - vecmath::dot(b, &x);
    SubproblemSolution {
        x,
        sigma: 0.0,
        resid,
        k_stop: 0,
        k_extra: 0,
        interior: true,
        factorizations,
        objective,
    }
}

fn validate(
    a: &SymmetricMatrix,
    b: &[f64],
    s: Option<&SymmetricMatrix>,
    kind: ProblemKind,
    core: &SolverCore,
) -> Result<(), LinalgError> {
    if b.len() != a.dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: a.dim(),
            got: b.len(),
        });
    }
    if let Some(sm) = s {
        if sm.dim() != a.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: a.dim(),
                got: sm.dim(),
            });
        }
    }
    if !(core.tol > 0.0) {
        return Err(LinalgError::InvalidData(format!(
            "tolerance must be positive, got {}",
            core.tol
        )));
    }
    if core.max_iter == 0 {
        return Err(LinalgError::InvalidData(
            "iteration bound must be at least 1".into(),
        ));
    }
    match kind {
        ProblemKind::TrustRegion { delta } => {
            if !(delta > 0.0) || !delta.is_finite() {
                return Err(LinalgError::InvalidData(format!(
                    "radius must be positive and finite, got {delta}"
                )));
            }
        }
        ProblemKind::Regularized { rho, r } => {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(LinalgError::InvalidData(format!(
                    "regularization weight must be positive, got {rho}"
                )));
            }
            if !(r >= 2.0) || !r.is_finite() {
                return Err(LinalgError::InvalidData(format!(
                    "regularization power must be at least 2, got {r}"
                )));
            }
        }
    }
    Ok(())
}

/// Common entry for both problem families (the public wrappers fix `kind`).
pub(crate) fn solve_entry(
    a: &SymmetricMatrix,
    b: &[f64],
    s: Option<&SymmetricMatrix>,
    kind: ProblemKind,
    core: SolverCore,
) -> Result<(SubproblemSolution, TrekSession), TrekError> {
    validate(a, b, s, kind, &core)?;

    let b_eff = if vecmath::norm(b) == 0.0 || core.perturb_b {
        perturb_rhs(b, PERTURB_SCALE)
    } else {
        b.to_vec()
    };

    // Factorization phase: plain first, Gershgorin shift ladder on demand.
    let mut factorizations = 0usize;
    let (factor, sigma_shift) = match core.shift_mode {
        ShiftMode::Forced(sig) => {
            factorizations += 1;
            (factorize(a, sig, s)?, sig)
        }
        ShiftMode::Auto => {
            factorizations += 1;
            match factorize(a, 0.0, None) {
                Ok(f) => (f, 0.0),
                Err(LinalgError::NotPositiveDefinite { .. }) => {
                    let base = match s {
                        None => a.gershgorin_shift(),
                        Some(sm) => pencil_gershgorin_shift(a, sm)?,
                    };
                    let mut shift = base;
                    let mut done = None;
                    let mut last = None;
                    for _ in 0..4 {
                        factorizations += 1;
                        match factorize(a, shift, s) {
                            Ok(f) => {
                                done = Some((f, shift));
                                break;
                            }
                            Err(e @ LinalgError::NotPositiveDefinite { .. }) => {
                                last = Some(e);
                                shift *= 2.0;
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                    match done {
                        Some(pair) => pair,
                        None => return Err(last.expect("ladder ran").into()),
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    let s_factor = match s {
        Some(sm) => Some(factorize(sm, 0.0, None)?),
        None => None,
    };

    // The initialization solve doubles as the interior test on the
    // unshifted trust-region path (an indefinite matrix has no interior
    // solution, and the regularized problem has none at all).
    let x0 = factor.solve(&b_eff)?;
    if let ProblemKind::TrustRegion { delta } = kind {
        if sigma_shift == 0.0 {
            let cnorm = constraint_norm(&x0, s);
            if cnorm <= delta {
                let sol = interior_solution(a, &b_eff, x0.clone(), factorizations);
                let session = TrekSession {
                    a: a.clone(),
                    b: b_eff,
                    s: s.cloned(),
                    factor,
                    s_factor,
                    sigma_shift,
                    eks: None,
                    interior_x: Some(x0),
                    kind,
                    core,
                    factorizations,
                    k_stop: 0,
                };
                return Ok((sol, session));
            }
        }
    }

    let ops = make_ops(a, sigma_shift, &factor, s, s_factor.as_ref());
    let mut eks = match s {
        Some(_) => EksState::init_snorm(&ops, &b_eff, &x0, core.max_iter, core.reorth)?,
        None => EksState::init_from_solution(&ops, &b_eff, &x0, core.max_iter, core.reorth)?,
    };

    let eps = core.tol * (1.0 + vecmath::norm(&b_eff));
    let driver = Driver {
        ops: &ops,
        kind,
        sigma_shift,
        eps,
        m: core.max_iter,
    };
    match driver.drive(&mut eks, f64::INFINITY)? {
        DriveEnd::Converged { step, l, .. } => {
            let sol = build_solution(a, &b_eff, &eks, &step, l, 0, factorizations, kind);
            let k_stop = sol.k_stop;
            let session = TrekSession {
                a: a.clone(),
                b: b_eff,
                s: s.cloned(),
                factor,
                s_factor,
                sigma_shift,
                eks: Some(eks),
                interior_x: None,
                kind,
                core,
                factorizations,
                k_stop,
            };
            Ok((sol, session))
        }
        DriveEnd::Exhausted { best, .. } => {
            let (step, l) = best.expect("at least one subspace solve before exhaustion");
            let sol = build_solution(a, &b_eff, &eks, &step, l, 0, factorizations, kind);
            Err(TrekError::MaxIterReached {
                m: core.max_iter,
                resid: sol.resid,
                best: Box::new(sol),
            })
        }
    }
}

/// Warm re-solve against the session's retained basis.  The projected
/// problem at the current dimension is solved first; the basis grows only
/// if its residual misses the tolerance.
pub(crate) fn resolve_entry(session: &mut TrekSession) -> Result<SubproblemSolution, TrekError> {
    let eps = session.core.tol * (1.0 + vecmath::norm(&session.b));

    // Interior sessions have no basis; the cached solve may still win.
    if let Some(x) = &session.interior_x {
        if let ProblemKind::TrustRegion { delta } = session.kind {
            if constraint_norm(x, session.s.as_ref()) <= delta {
                session.k_stop = 0;
                return Ok(interior_solution(
                    &session.a,
                    &session.b,
                    x.clone(),
                    session.factorizations,
                ));
            }
        }
        let x0 = session.interior_x.take().expect("checked above");
        let ops = make_ops(
            &session.a,
            session.sigma_shift,
            &session.factor,
            session.s.as_ref(),
            session.s_factor.as_ref(),
        );
        let eks = match session.s {
            Some(_) => {
                EksState::init_snorm(&ops, &session.b, &x0, session.core.max_iter, session.core.reorth)?
            }
            None => EksState::init_from_solution(
                &ops,
                &session.b,
                &x0,
                session.core.max_iter,
                session.core.reorth,
            )?,
        };
        session.eks = Some(eks);
    }

    let ops = make_ops(
        &session.a,
        session.sigma_shift,
        &session.factor,
        session.s.as_ref(),
        session.s_factor.as_ref(),
    );
    let driver = Driver {
        ops: &ops,
        kind: session.kind,
        sigma_shift: session.sigma_shift,
        eps,
        m: session.core.max_iter,
    };

    let mut solves = 0usize;
    let mut best: Option<(SubspaceStep, usize)> = None;
    let mut prev_obj = f64::INFINITY;
    {
        let eks = session.eks.as_ref().expect("basis exists past this point");
        let l = eks.p_cols();
        if l > 0 {
            let step = driver.solve_current(eks, l)?;
            solves += 1;
            if step.resid <= eps {
                let sol =
                    build_solution(&session.a, &session.b, eks, &step, l, 0, session.factorizations, session.kind);
                session.k_stop = sol.k_stop;
                return Ok(sol);
            }
            prev_obj = step.obj;
            best = Some((step, l));
        }
    }

    let end = driver.drive(session.eks.as_mut().expect("basis exists"), prev_obj)?;
    let eks = session.eks.as_ref().expect("basis exists");
    match end {
        DriveEnd::Converged {
            step,
            l,
            solves: grew,
        } => {
            let k_extra = (solves + grew).saturating_sub(1);
            let sol = build_solution(
                &session.a,
                &session.b,
                eks,
                &step,
                l,
                k_extra,
                session.factorizations,
                session.kind,
            );
            session.k_stop = sol.k_stop;
            Ok(sol)
        }
        DriveEnd::Exhausted {
            best: drive_best,
            solves: grew,
        } => {
            let merged = match (best, drive_best) {
                (Some(a0), Some(b0)) => Some(if b0.0.resid < a0.0.resid { b0 } else { a0 }),
                (x, None) => x,
                (None, y) => y,
            };
            let (step, l) = merged.expect("resolve performed at least one solve");
            let k_extra = (solves + grew).saturating_sub(1);
            let sol = build_solution(
                &session.a,
                &session.b,
                eks,
                &step,
                l,
                k_extra,
                session.factorizations,
                session.kind,
            );
            Err(TrekError::MaxIterReached {
                m: session.core.max_iter,
                resid: sol.resid,
                best: Box::new(sol),
            })
        }
    }
}

/// Solves min ½xᵀAx − bᵀx subject to ‖x‖ ≤ Δ (‖x‖_S when `opts.snorm` is
/// set).  Returns the solution together with a session for warm re-solves
/// at smaller radii.
pub fn trek_solve(
    a: &SymmetricMatrix,
    b: &[f64],
    delta: f64,
    opts: &TrekOptions,
) -> Result<(SubproblemSolution, TrekSession), TrekError> {
    solve_entry(
        a,
        b,
        opts.snorm.as_ref(),
        ProblemKind::TrustRegion { delta },
        opts.core(),
    )
}

/// [`trek_solve`] in the elliptical norm ‖x‖_S = √(xᵀSx).  The positional
/// metric takes precedence over `opts.snorm`.
pub fn trek_solve_snorm(
    a: &SymmetricMatrix,
    b: &[f64],
    s: &SymmetricMatrix,
    delta: f64,
    opts: &TrekOptions,
) -> Result<(SubproblemSolution, TrekSession), TrekError> {
    solve_entry(
        a,
        b,
        Some(s),
        ProblemKind::TrustRegion { delta },
        opts.core(),
    )
}

/// Re-solves the session's problem at a new radius, reusing the retained
/// basis.  Intended for the shrinking radii of a trust-region outer loop;
/// growing radii work too (an interior session simply re-checks its cached
/// solve).
pub fn trek_resolve(
    session: &mut TrekSession,
    delta_new: f64,
) -> Result<SubproblemSolution, TrekError> {
    if !matches!(session.kind, ProblemKind::TrustRegion { .. }) {
        return Err(LinalgError::InvalidData(
            "session belongs to the regularized solver; use nrek_resolve".into(),
        )
        .into());
    }
    if !(delta_new > 0.0) || !delta_new.is_finite() {
        return Err(LinalgError::InvalidData(format!(
            "radius must be positive and finite, got {delta_new}"
        ))
        .into());
    }
    session.kind = ProblemKind::TrustRegion { delta: delta_new };
    resolve_entry(session)
}
