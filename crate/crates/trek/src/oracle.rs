//! Reference solvers used to cross-check the Krylov drivers.
//!
//! Both oracles work on the full matrix with no subspace acceleration, so
//! they are slow but easy to audit: [`more_sorensen_solve`] is the classic
//! safeguarded Newton iteration on the reciprocal norm with one Cholesky
//! factorization per step, and [`dense_spectral_solve`] reduces the problem
//! to exact eigencoordinates and calls the same secular root find the
//! drivers use on their projected problems.  Agreement between the two
//! families is the backbone of the integration test suite.

use thiserror::Error;

use crate::cholesky::factorize;
use crate::eig;
use crate::matrix::{LinalgError, SymmetricMatrix};
use crate::secular::{solve_diag_reg, solve_diag_tr, Constraint, SecularProblem};
use crate::vecmath;

/// Size cap for the Newton oracle; one dense factorization per iteration
/// stops being a sensible reference beyond this.
const MS_MAX_N: usize = 2000;
/// Size cap for the spectral oracle (full eigendecomposition).
const SPECTRAL_MAX_N: usize = 500;
const MS_MAX_ITERS: usize = 100;
/// |u₁ᵀb|/‖b‖ below this is treated as numerically orthogonal when a
/// collapsed safeguard bracket points at the hard case.
const HARD_CASE_ALIGNMENT: f64 = 1e-8;

/// Outcome of a reference solve.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub x: Vec<f64>,
    /// Multiplier σ ≥ 0 (0 for an interior trust-region solution).
    pub sigma: f64,
    /// ½xᵀAx − bᵀx, without any penalty term.
    pub objective: f64,
    /// Cholesky attempts, failed ones included (0 for the spectral oracle).
    pub factorizations: usize,
    /// Newton iterations of the outer root find.
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("no boundary multiplier after {iterations} iterations (last sigma {sigma:.6e})")]
    MaxIterReached { iterations: usize, sigma: f64 },
    /// The safeguard bracket collapsed onto −λ₁ with the solution norm
    /// still short of the radius: b is (numerically) orthogonal to the
    /// leftmost eigenvector.  The oracle reports the situation instead of
    /// completing the step along u₁.
    #[error("hard case at sigma {sigma:.6e} (|u1'b|/|b| = {alignment:.3e})")]
    HardCase { sigma: f64, alignment: f64 },
}

fn quadratic_objective(a: &SymmetricMatrix, b: &[f64], x: &[f64]) -> f64 {
    0.5 * a.quad(x) - vecmath::dot(b, x)
}

/// Trust-region reference solve by the Moré–Sorensen iteration: safeguarded
/// Newton on 1/‖x(σ)‖ − 1/Δ, where x(σ) = (A + σI)⁻¹b, with one Cholesky
/// factorization per iteration.  Hard-case instances are detected (via the
/// collapsed bracket and leftmost-eigenvector alignment) and reported as
/// [`OracleError::HardCase`], not resolved.
pub fn more_sorensen_solve(
    a: &SymmetricMatrix,
    b: &[f64],
    delta: f64,
    tol: f64,
) -> Result<OracleReport, OracleError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        }
        .into());
    }
    if n > MS_MAX_N {
        return Err(LinalgError::InvalidData(format!(
            "reference Newton solver is limited to n <= {MS_MAX_N}, got {n}"
        ))
        .into());
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(LinalgError::InvalidData(format!(
            "radius must be positive and finite, got {delta}"
        ))
        .into());
    }
    if !(tol > 0.0) {
        return Err(LinalgError::InvalidData(format!(
            "tolerance must be positive, got {tol}"
        ))
        .into());
    }

    let bnorm = vecmath::norm(b);
    let (diag, radii) = a.row_radii();
    let mut lower_min = f64::INFINITY;
    for i in 0..n {
        lower_min = lower_min.min(diag[i] - radii[i]);
    }
    // sigma* <= ||b||/delta - lambda_1 <= ||b||/delta + max(0, -lower_min).
    let mut lo = 0.0_f64;
    let mut up = bnorm / delta + (-lower_min).max(0.0) + 1.0;
    let mut sigma = 0.0_f64;
    let mut factorizations = 0usize;

    for iter in 1..=MS_MAX_ITERS {
        factorizations += 1;
        let factor = match factorize(a, sigma, None) {
            Ok(f) => f,
            Err(LinalgError::NotPositiveDefinite { .. }) => {
                // sigma <= -lambda_1: raise the lower safeguard and bisect.
                lo = lo.max(sigma);
                sigma = 0.5 * (lo + up);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let x = factor.solve(b)?;
        let nx = vecmath::norm(&x);

        if (nx - delta).abs() <= tol * delta {
            return Ok(OracleReport {
                sigma,
                objective: quadratic_objective(a, b, &x),
                x,
                factorizations,
                iterations: iter,
            });
        }
        if nx < delta {
            if sigma == 0.0 {
                // Unconstrained minimizer inside the ball.
                return Ok(OracleReport {
                    sigma: 0.0,
                    objective: quadratic_objective(a, b, &x),
                    x,
                    factorizations,
                    iterations: iter,
                });
            }
            up = sigma;
            if up - lo <= 1e-12 * (1.0 + up) {
                // The norm stays short of the radius all the way down to
                // the definiteness boundary: hard case.
                let dec = eig::sym_eig(a)?;
                let lead = &dec.eigenvectors[0];
                let alignment = if bnorm == 0.0 {
                    0.0
                } else {
                    vecmath::dot(lead, b).abs() / bnorm
                };
                if alignment <= HARD_CASE_ALIGNMENT {
                    return Err(OracleError::HardCase {
                        sigma: -dec.eigenvalues[0],
                        alignment,
                    });
                }
                // Collapse without orthogonality means the safeguards are
                // numerically stuck, not that the step leaves the range.
                return Err(OracleError::MaxIterReached { iterations: iter, sigma });
            }
        } else {
            lo = lo.max(sigma);
        }

        // Newton step for 1/delta - 1/||x(sigma)||, using the forward
        // substitution w = L^{-1}x so that ||w||^2 = x'(A+sigma I)^{-1}x.
        let w = factor.solve_lower(&x)?;
        let nw = vecmath::norm(&w);
        let step = (nx / nw).powi(2) * ((nx - delta) / delta);
        sigma += step;
        if !sigma.is_finite() || sigma <= lo || sigma >= up {
            sigma = 0.5 * (lo + up);
        }
    }
    Err(OracleError::MaxIterReached {
        iterations: MS_MAX_ITERS,
        sigma,
    })
}

/// Reference solve through exact eigencoordinates: a full symmetric
/// eigendecomposition, the diagonal secular solve, and a change of basis
/// back.  Handles both constraint kinds, hard cases included (the secular
/// solver completes the step inside the leftmost eigenspace).  For the
/// trust-region constraint, pass `theta_min: 0.0` so the multiplier is
/// measured on the original scale.
pub fn dense_spectral_solve(
    a: &SymmetricMatrix,
    b: &[f64],
    constraint: Constraint,
) -> Result<OracleReport, OracleError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: b.len(),
        }
        .into());
    }
    if n > SPECTRAL_MAX_N {
        return Err(LinalgError::InvalidData(format!(
            "spectral reference solver is limited to n <= {SPECTRAL_MAX_N}, got {n}"
        ))
        .into());
    }
    let dec = eig::sym_eig(a)?;
    let prob = SecularProblem {
        lambdas: dec.eigenvalues.clone(),
        d: dec.to_eigenbasis(b),
        constraint,
    };
    let sec = match constraint {
        Constraint::TrustRegion { .. } => solve_diag_tr(&prob)?,
        Constraint::Regularization { .. } => solve_diag_reg(&prob)?,
    };
    let x = dec.from_eigenbasis(&sec.z);
    let sigma = if sec.boundary { sec.sigma } else { 0.0 };
    Ok(OracleReport {
        sigma,
        objective: quadratic_objective(a, b, &x),
        x,
        factorizations: 0,
        iterations: sec.newton_iters,
    })
}
