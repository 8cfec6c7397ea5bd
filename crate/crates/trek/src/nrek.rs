//! Norm-regularized subproblem driver.
//!
//! Solves min ½xᵀAx − bᵀx + (ρ/r)‖x‖ʳ for ρ > 0, r ≥ 2, sharing the
//! factorization, basis, and projected-solve machinery of [`crate::trek`].
//! The optimality system is (A + σI)x = b with σ = ρ‖x‖^{r−2}, so unlike
//! the trust-region problem there is no interior case: the multiplier is
//! positive whenever b ≠ 0, and for r = 2 it is simply σ = ρ.
//!
//! Sessions support re-solves with a different weight ρ at the same power
//! r, the typical pattern of an adaptive-regularization outer loop.  The
//! basis does not depend on ρ at all, so re-solves usually finish on the
//! warm-started projected problem without growing it.

use crate::matrix::{LinalgError, SymmetricMatrix};
use crate::trek::{
    resolve_entry, solve_entry, ProblemKind, ShiftMode, SolverCore, SubproblemSolution, TrekError,
    TrekSession, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

/// Options for [`nrek_solve`].  `rho` and `r` define the penalty
/// (ρ/r)‖x‖ʳ; the remaining fields mirror [`crate::trek::TrekOptions`].
#[derive(Debug, Clone)]
pub struct RegOptions {
    /// Regularization weight ρ > 0.
    pub rho: f64,
    /// Norm power r ≥ 2 (r = 2 is Tikhonov damping, r = 3 the cubic case).
    pub r: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub shift_mode: ShiftMode,
    pub perturb_b: bool,
    pub snorm: Option<SymmetricMatrix>,
    pub reorth: bool,
}

impl RegOptions {
    /// Options with the given penalty and default solver knobs.
    pub fn new(rho: f64, r: f64) -> Self {
        Self {
            rho,
            r,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            shift_mode: ShiftMode::Auto,
            perturb_b: false,
            snorm: None,
            reorth: false,
        }
    }

    fn core(&self) -> SolverCore {
        SolverCore {
            tol: self.tol,
            max_iter: self.max_iter,
            shift_mode: self.shift_mode,
            perturb_b: self.perturb_b,
            reorth: self.reorth,
        }
    }
}

/// Solves min ½xᵀAx − bᵀx + (ρ/r)‖x‖ʳ (the norm taken in S when
/// `opts.snorm` is set).  `interior` is always false in the result: the
/// penalty keeps the multiplier σ = ρ‖x‖^{r−2} active for any nonzero b.
pub fn nrek_solve(
    a: &SymmetricMatrix,
    b: &[f64],
    opts: &RegOptions,
) -> Result<(SubproblemSolution, TrekSession), TrekError> {
    solve_entry(
        a,
        b,
        opts.snorm.as_ref(),
        ProblemKind::Regularized {
            rho: opts.rho,
            r: opts.r,
        },
        opts.core(),
    )
}

/// Re-solves the session's problem with a new weight ρ at the same power
/// r, reusing the retained basis.
pub fn nrek_resolve(
    session: &mut TrekSession,
    rho_new: f64,
) -> Result<SubproblemSolution, TrekError> {
    let r = match session.kind() {
        ProblemKind::Regularized { r, .. } => r,
        ProblemKind::TrustRegion { .. } => {
            return Err(LinalgError::InvalidData(
                "session belongs to the trust-region solver; use trek_resolve".into(),
            )
            .into())
        }
    };
    if !(rho_new > 0.0) || !rho_new.is_finite() {
        return Err(LinalgError::InvalidData(format!(
            "regularization weight must be positive, got {rho_new}"
        ))
        .into());
    }
    session.set_kind(ProblemKind::Regularized { rho: rho_new, r });
    resolve_entry(session)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecmath;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    #[test]
    fn quadratic_penalty_is_tikhonov() {
        // r = 2: the exact solution is (A + rho I)^{-1} b with sigma = rho.
        let a = SymmetricMatrix::diagonal(&[1.0, 2.0, 4.0]);
        let b = [1.0, 1.0, 1.0];
        let (sol, _) = nrek_solve(&a, &b, &RegOptions::new(3.0, 2.0)).unwrap();
        assert_close(sol.sigma, 3.0, 1e-9, "sigma");
        assert!(!sol.interior);
        for (i, lam) in [1.0, 2.0, 4.0].iter().enumerate() {
            assert_close(sol.x[i], 1.0 / (lam + 3.0), 1e-9, "x entry");
        }
    }

    #[test]
    fn multiplier_identity_holds_for_cubic_power() {
        let a = SymmetricMatrix::from_full(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let b = [1.0, -1.0];
        let (sol, _) = nrek_solve(&a, &b, &RegOptions::new(0.7, 3.0)).unwrap();
        let xnorm = vecmath::norm(&sol.x);
        assert_close(sol.sigma, 0.7 * xnorm, 1e-8 * (1.0 + sol.sigma), "sigma identity");
        // Stationarity: (A + sigma I)x = b.
        let mut res = a.matvec(&sol.x);
        for (ri, (xi, bi)) in res.iter_mut().zip(sol.x.iter().zip(&b)) {
            *ri += sol.sigma * xi - bi;
        }
        assert!(vecmath::norm(&res) <= 1e-8);
    }

    #[test]
    fn indefinite_matrix_takes_the_shifted_path() {
        let a = SymmetricMatrix::diagonal(&[-1.5, 2.0]);
        let b = [1.0, 1.0];
        let (sol, _) = nrek_solve(&a, &b, &RegOptions::new(2.0, 4.0)).unwrap();
        assert_eq!(sol.factorizations, 2);
        let xnorm = vecmath::norm(&sol.x);
        assert_close(
            sol.sigma,
            2.0 * xnorm * xnorm,
            1e-8 * (1.0 + sol.sigma),
            "sigma identity",
        );
        // The multiplier must dominate the leftmost eigenvalue.
        assert!(sol.sigma >= 1.5);
    }

    #[test]
    fn weight_increase_reuses_the_session_basis() {
        let a = SymmetricMatrix::diagonal(&[1.0, 3.0, 9.0]);
        let b = [2.0, 1.0, -1.0];
        let (first, mut session) = nrek_solve(&a, &b, &RegOptions::new(0.5, 3.0)).unwrap();
        let second = nrek_resolve(&mut session, 5.0).unwrap();
        assert_eq!(second.k_extra, 0);
        // Larger weight, smaller step, larger penalized... the plain
        // quadratic model value must not decrease when rho grows.
        assert!(vecmath::norm(&second.x) < vecmath::norm(&first.x));
        let xnorm = vecmath::norm(&second.x);
        assert_close(second.sigma, 5.0 * xnorm, 1e-8 * (1.0 + second.sigma), "sigma");
    }

    #[test]
    fn resolve_rejects_trust_region_sessions() {
        let a = SymmetricMatrix::identity(2);
        let (_, mut session) =
            crate::trek::trek_solve(&a, &[1.0, 0.0], 0.1, &crate::trek::TrekOptions::default())
                .unwrap();
        assert!(nrek_resolve(&mut session, 1.0).is_err());
    }

    #[test]
    fn penalty_options_are_validated() {
        let a = SymmetricMatrix::identity(2);
        assert!(nrek_solve(&a, &[1.0, 0.0], &RegOptions::new(0.0, 2.0)).is_err());
        assert!(nrek_solve(&a, &[1.0, 0.0], &RegOptions::new(1.0, 1.5)).is_err());
    }
}
