//! Diagonal secular-equation solvers.
//!
//! After the projected pentadiagonal matrix is eigendecomposed, both the
//! trust-region and the norm-regularization subproblems reduce to scalar
//! root-finding problems in the multiplier.  This module solves those
//! diagonal problems: safeguarded Newton on the Moré–Sorensen reciprocal
//! function for the trust-region case, and on the fixed-point residual
//! σ − ρ‖z(σ)‖^{r−2} for the regularization case, each with a bisection
//! fallback and an explicit hard-case branch.

use crate::matrix::LinalgError;
use crate::vecmath;

/// Magnitude floor on λ_i + σ; keeps pole evaluations finite.
const POLE_FLOOR: f64 = 1e-300;
/// Relative eigenvalue-cluster width for hard-case detection.
const CLUSTER_REL: f64 = 1e-12;
/// Squared relative mass threshold below which d counts as orthogonal to
/// the bottom cluster.
const ORTHO_REL_SQ: f64 = 1e-24;
const MAX_ITERS: usize = 100;

/// Constraint attached to a diagonal subproblem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// ‖z‖ ≤ delta with multiplier bounded below by theta_min.  The shifted
    /// general path passes theta_min = −σ_S so that the reported multiplier
    /// stays in the shifted coordinates; the plain case passes 0.
    TrustRegion { delta: f64, theta_min: f64 },
    /// (ρ/r)‖z‖ʳ penalty; multiplier satisfies σ = ρ‖z‖^{r−2}.
    Regularization { rho: f64, r: f64 },
}

/// Diagonal subproblem: minimize ½ zᵀΛz − dᵀz under `constraint`.
#[derive(Debug, Clone)]
pub struct SecularProblem {
    /// Ascending eigenvalues of the (possibly shifted) projected Hessian.
    pub lambdas: Vec<f64>,
    /// Right-hand side in eigencoordinates.
    pub d: Vec<f64>,
    pub constraint: Constraint,
}

/// Solution of a diagonal subproblem.
#[derive(Debug, Clone)]
pub struct SecularSolution {
    /// Solution in eigencoordinates.
    pub z: Vec<f64>,
    /// Multiplier (trust region: θ with θ ≥ theta_min; regularization: σ).
    pub sigma: f64,
    /// True when the constraint is active (always true for regularization).
    pub boundary: bool,
    /// Root-finder iterations spent (0 for interior / closed-form cases).
    pub newton_iters: usize,
}

fn check_finite(p: &SecularProblem) -> Result<(), LinalgError> {
    if p.lambdas.len() != p.d.len() {
        return Err(LinalgError::DimensionMismatch {
            expected: p.lambdas.len(),
            got: p.d.len(),
        });
    }
    if p.lambdas.is_empty() {
        return Err(LinalgError::InvalidData("empty secular problem".into()));
    }
    let all_finite = p.lambdas.iter().chain(p.d.iter()).all(|v| v.is_finite());
    if !all_finite {
        return Err(LinalgError::NoRoot("non-finite problem data".into()));
    }
    Ok(())
}

/// z_i = d_i / (λ_i + sigma) with the pole floored in magnitude.
fn eval_z(lambdas: &[f64], d: &[f64], sigma: f64) -> Vec<f64> {
    lambdas
        .iter()
        .zip(d)
        .map(|(&l, &di)| {
            let mut denom = l + sigma;
            if denom.abs() < POLE_FLOOR {
                denom = if denom < 0.0 { -POLE_FLOOR } else { POLE_FLOOR };
            }
            di / denom
        })
        .collect()
}

/// φ(sigma) = ‖z(sigma)‖.
fn phi(lambdas: &[f64], d: &[f64], sigma: f64) -> f64 {
    vecmath::norm(&eval_z(lambdas, d, sigma))
}

/// Σ d_i² / (λ_i + sigma)³, the ingredient of φ'(sigma).
fn phi_cubic_sum(lambdas: &[f64], d: &[f64], sigma: f64) -> f64 {
    lambdas
        .iter()
        .zip(d)
        .map(|(&l, &di)| {
            let mut denom = l + sigma;
            if denom.abs() < POLE_FLOOR {
                denom = if denom < 0.0 { -POLE_FLOOR } else { POLE_FLOOR };
            }
            di * di / (denom * denom * denom)
        })
        .sum()
}

/// Indices of the bottom eigenvalue cluster and whether d is (relatively)
/// orthogonal to it.
fn bottom_cluster(lambdas: &[f64], d: &[f64]) -> (Vec<usize>, bool) {
    let l1 = lambdas[0];
    let width = CLUSTER_REL * (1.0 + l1.abs());
    let cluster: Vec<usize> = lambdas
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l - l1 <= width)
        .map(|(i, _)| i)
        .collect();
    let total: f64 = d.iter().map(|v| v * v).sum();
    let mass: f64 = cluster.iter().map(|&i| d[i] * d[i]).sum();
    (cluster, mass <= ORTHO_REL_SQ * total)
}

/// φ restricted to the complement of the bottom cluster, at sigma = −λ₁.
fn phi_outside_cluster(lambdas: &[f64], d: &[f64], cluster: &[usize]) -> f64 {
    let l1 = lambdas[0];
    let mut s = 0.0;
    for (i, (&l, &di)) in lambdas.iter().zip(d).enumerate() {
        if cluster.contains(&i) {
            continue;
        }
        let denom = (l - l1).max(POLE_FLOOR);
        s += (di / denom) * (di / denom);
    }
    s.sqrt()
}

/// Solves the diagonal trust-region problem: minimize ½ zᵀΛz − dᵀz subject
/// to ‖z‖ ≤ Δ, with the multiplier constrained to θ ≥ theta_min.
///
/// Interior solutions (θ = theta_min, ‖z‖ < Δ) are only admitted when
/// Λ + theta_min·I is positive definite.  The boundary root solves
/// ‖z(θ)‖ = Δ by safeguarded Newton on 1/‖z‖ − 1/Δ; the subspace hard case
/// (d orthogonal to the bottom eigenspace with limit norm below Δ) is
/// resolved by padding the first cluster coordinate.
pub fn solve_diag_tr(p: &SecularProblem) -> Result<SecularSolution, LinalgError> {
    check_finite(p)?;
    let (delta, theta_min) = match p.constraint {
        Constraint::TrustRegion { delta, theta_min } => (delta, theta_min),
        Constraint::Regularization { .. } => {
            return Err(LinalgError::InvalidData(
                "solve_diag_tr needs a TrustRegion constraint".into(),
            ))
        }
    };
    if !(delta > 0.0) || !theta_min.is_finite() {
        return Err(LinalgError::NoRoot(format!(
            "bad trust-region parameters delta = {delta}, theta_min = {theta_min}"
        )));
    }
    let (lambdas, d) = (&p.lambdas[..], &p.d[..]);
    let l1 = lambdas[0];

    // Interior: multiplier pinned at its lower bound with slack constraint.
    if l1 + theta_min > 0.0 && phi(lambdas, d, theta_min) <= delta {
        return Ok(SecularSolution {
            z: eval_z(lambdas, d, theta_min),
            sigma: theta_min,
            boundary: false,
            newton_iters: 0,
        });
    }

    // Hard case: d carries no weight on the bottom cluster and the limit
    // norm at θ = −λ₁ stays inside the ball.
    let (cluster, orthogonal) = bottom_cluster(lambdas, d);
    if orthogonal && -l1 >= theta_min {
        let rest = phi_outside_cluster(lambdas, d, &cluster);
        if rest < delta {
            let theta = -l1;
            let mut z = eval_z(lambdas, d, theta);
            for &i in &cluster {
                z[i] = 0.0;
            }
            z[cluster[0]] = (delta * delta - rest * rest).sqrt();
            return Ok(SecularSolution {
                z,
                sigma: theta,
                boundary: true,
                newton_iters: 0,
            });
        }
    }

    // Boundary root of φ(θ) = Δ on (max(theta_min, −λ₁), ∞).
    let tiny = 1e-14 * (1.0 + l1.abs());
    let mut lo = theta_min.max(-l1 + tiny);
    let mut hi = (-l1 + vecmath::norm(d) / delta).max(lo + tiny);
    // Widen until φ(hi) ≤ Δ; analytically hi already satisfies this, the
    // loop only guards rounding.
    let mut guard = 0;
    while phi(lambdas, d, hi) > delta && guard < 64 {
        hi = lo + 2.0 * (hi - lo);
        guard += 1;
    }

    let mut sigma = theta_min.max(-l1 + 1e-14 * l1.abs()).max(0.0);
    if sigma < lo || sigma >= hi {
        sigma = 0.5 * (lo + hi);
    }
    let mut iters = 0;
    loop {
        iters += 1;
        let f = phi(lambdas, d, sigma);
        // Newton is quadratic on this reciprocal form, so pushing to machine
        // precision costs one extra step; the bracket-width stop covers the
        // steep near-hard-case roots where φ jumps across Δ within one ulp.
        if (f - delta).abs() <= 1e-15 * delta
            || hi - lo <= f64::EPSILON * (1.0 + sigma.abs())
        {
            break;
        }
        if f > delta {
            lo = lo.max(sigma);
        } else {
            hi = hi.min(sigma);
        }
        // Newton on g(θ) = 1/φ − 1/Δ:  g' = Σ dᵢ²/(λᵢ+θ)³ / φ³.
        let gp = phi_cubic_sum(lambdas, d, sigma) / (f * f * f);
        let g = 1.0 / f - 1.0 / delta;
        let mut next = sigma - g / gp;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        sigma = next;
        if iters >= MAX_ITERS {
            let f = phi(lambdas, d, sigma);
            if (f - delta).abs() <= 1e-8 * delta {
                break; // close enough to report, outside the strict tolerance
            }
            return Err(LinalgError::ConvergenceFailure(format!(
                "trust-region secular iteration stalled at sigma = {sigma}"
            )));
        }
    }

    Ok(SecularSolution {
        z: eval_z(lambdas, d, sigma),
        sigma,
        boundary: true,
        newton_iters: iters,
    })
}

/// Solves the diagonal norm-regularization problem: minimize
/// ½ zᵀΛz − dᵀz + (ρ/r)‖z‖ʳ.  The multiplier satisfies σ = ρ‖z‖^{r−2}
/// with σ ≥ max(0, −λ₁); there is no interior case.
///
/// For r = 2 the multiplier is ρ itself and the solve is closed-form
/// (the caller is responsible for λ₁ + ρ > 0, which holds on the solver's
/// shifted path).  For r > 2 the strictly increasing residual
/// ψ(σ) = σ − ρ‖z(σ)‖^{r−2} is driven to zero by safeguarded Newton.
pub fn solve_diag_reg(p: &SecularProblem) -> Result<SecularSolution, LinalgError> {
    check_finite(p)?;
    let (rho, r) = match p.constraint {
        Constraint::Regularization { rho, r } => (rho, r),
        Constraint::TrustRegion { .. } => {
            return Err(LinalgError::InvalidData(
                "solve_diag_reg needs a Regularization constraint".into(),
            ))
        }
    };
    if !(rho > 0.0) || !(r >= 2.0) {
        return Err(LinalgError::NoRoot(format!(
            "bad regularization parameters rho = {rho}, r = {r}"
        )));
    }
    let (lambdas, d) = (&p.lambdas[..], &p.d[..]);
    let l1 = lambdas[0];

    if r == 2.0 {
        return Ok(SecularSolution {
            z: eval_z(lambdas, d, rho),
            sigma: rho,
            boundary: true,
            newton_iters: 0,
        });
    }

    let sigma_lb = (-l1).max(0.0);
    let exponent = 1.0 / (r - 2.0);

    // Hard case: d orthogonal to the bottom cluster and the non-cluster
    // part already shorter than the target norm (σ_lb/ρ)^{1/(r−2)}.
    if l1 < 0.0 {
        let (cluster, orthogonal) = bottom_cluster(lambdas, d);
        if orthogonal {
            let target = (sigma_lb / rho).powf(exponent);
            let rest = phi_outside_cluster(lambdas, d, &cluster);
            if rest < target {
                let mut z = eval_z(lambdas, d, sigma_lb);
                for &i in &cluster {
                    z[i] = 0.0;
                }
                z[cluster[0]] = (target * target - rest * rest).sqrt();
                return Ok(SecularSolution {
                    z,
                    sigma: sigma_lb,
                    boundary: true,
                    newton_iters: 0,
                });
            }
        }
    }

    // ψ(σ) = σ − ρ φ(σ)^{r−2}, strictly increasing on (σ_lb, ∞).
    let psi = |s: f64| s - rho * phi(lambdas, d, s).powf(r - 2.0);
    let tiny = 1e-14 * (1.0 + l1.abs());
    let mut lo = if l1 <= 0.0 { sigma_lb + tiny } else { 0.0 };
    if psi(lo) > 0.0 {
        // Root squeezed against the pole (near-hard-case with all-tiny d);
        // walk the offset down until ψ changes sign or the offset dies.
        let mut off = tiny;
        while psi(sigma_lb + off) > 0.0 && off > 1e-280 {
            off *= 1e-4;
        }
        lo = sigma_lb + off;
        if psi(lo) > 0.0 {
            // Indistinguishable from the hard case at working precision.
            let (cluster, _) = bottom_cluster(lambdas, d);
            let target = (sigma_lb / rho).powf(exponent);
            let rest = phi_outside_cluster(lambdas, d, &cluster);
            let mut z = eval_z(lambdas, d, sigma_lb);
            for &i in &cluster {
                z[i] = 0.0;
            }
            if rest < target {
                z[cluster[0]] = (target * target - rest * rest).sqrt();
            }
            return Ok(SecularSolution {
                z,
                sigma: sigma_lb,
                boundary: true,
                newton_iters: 0,
            });
        }
    }
    let mut hi = lo.abs().max(1.0) + lo;
    let mut guard = 0;
    while psi(hi) < 0.0 && guard < 200 {
        hi = lo + 2.0 * (hi - lo);
        guard += 1;
    }

    let mut sigma = 0.5 * (lo + hi);
    let mut iters = 0;
    loop {
        iters += 1;
        let f = phi(lambdas, d, sigma);
        let resid = sigma - rho * f.powf(r - 2.0);
        if resid.abs() <= 1e-12 * (1.0 + sigma) {
            break;
        }
        if resid < 0.0 {
            lo = lo.max(sigma);
        } else {
            hi = hi.min(sigma);
        }
        // ψ'(σ) = 1 − ρ(r−2)φ^{r−3}·φ',  φ' = −Σ dᵢ²/(λᵢ+σ)³ / φ.
        let fp = -phi_cubic_sum(lambdas, d, sigma) / f.max(POLE_FLOOR);
        let psip = 1.0 - rho * (r - 2.0) * f.powf(r - 3.0) * fp;
        let mut next = sigma - resid / psip;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        sigma = next;
        if iters >= MAX_ITERS {
            let f = phi(lambdas, d, sigma);
            if (sigma - rho * f.powf(r - 2.0)).abs() <= 1e-8 * (1.0 + sigma) {
                break;
            }
            return Err(LinalgError::ConvergenceFailure(format!(
                "regularization secular iteration stalled at sigma = {sigma}"
            )));
        }
    }

    Ok(SecularSolution {
        z: eval_z(lambdas, d, sigma),
        sigma,
        boundary: true,
        newton_iters: iters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(lambdas: &[f64], d: &[f64], delta: f64, theta_min: f64) -> SecularProblem {
        SecularProblem {
            lambdas: lambdas.to_vec(),
            d: d.to_vec(),
            constraint: Constraint::TrustRegion { delta, theta_min },
        }
    }

    fn reg(lambdas: &[f64], d: &[f64], rho: f64, r: f64) -> SecularProblem {
        SecularProblem {
            lambdas: lambdas.to_vec(),
            d: d.to_vec(),
            constraint: Constraint::Regularization { rho, r },
        }
    }

    /// Bisection oracle for ‖z(θ)‖ = Δ on a sign-changing bracket.
    fn bisect_tr(lambdas: &[f64], d: &[f64], delta: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(lambdas, d, mid) > delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn scalar_forced_boundary() {
        let s = solve_diag_tr(&tr(&[1.0], &[2.0], 1.0, 0.0)).unwrap();
        assert!((s.sigma - 1.0).abs() <= 1e-12);
        assert!((s.z[0] - 1.0).abs() <= 1e-12);
        assert!(s.boundary);
    }

    #[test]
    fn scalar_interior() {
        let s = solve_diag_tr(&tr(&[1.0], &[0.5], 1.0, 0.0)).unwrap();
        assert_eq!(s.sigma, 0.0);
        assert_eq!(s.z, vec![0.5]);
        assert!(!s.boundary);
        assert_eq!(s.newton_iters, 0);
    }

    #[test]
    fn interior_with_negative_floor() {
        // Shifted-path semantics: multiplier pinned at theta_min < 0.
        let s = solve_diag_tr(&tr(&[2.0], &[1.0], 10.0, -0.5)).unwrap();
        assert_eq!(s.sigma, -0.5);
        assert!((s.z[0] - 1.0 / 1.5).abs() <= 1e-15);
        assert!(!s.boundary);
    }

    #[test]
    fn three_eigenvalue_case_matches_bisection() {
        let (l, d) = (&[1.0, 2.0, 3.0][..], &[1.0, 1.0, 1.0][..]);
        let s = solve_diag_tr(&tr(l, d, 1.0, 0.0)).unwrap();
        let oracle = bisect_tr(l, d, 1.0, 0.0, vecmath::norm(d) / 1.0);
        assert!(
            (s.sigma - oracle).abs() <= 1e-12 * (1.0 + oracle),
            "sigma {} vs oracle {}",
            s.sigma,
            oracle
        );
        let nz = vecmath::norm(&s.z);
        assert!((nz - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn indefinite_with_negative_theta_min_matches_bisection() {
        let (l, d) = (&[-1.0, 2.0][..], &[1.0, 1.0][..]);
        let s = solve_diag_tr(&tr(l, d, 1.0, -0.5)).unwrap();
        assert!(s.sigma > 1.0, "multiplier must clear the pole at 1");
        let oracle = bisect_tr(l, d, 1.0, 1.0 + 1e-13, 1.0 + vecmath::norm(d) / 1.0);
        assert!((s.sigma - oracle).abs() <= 1e-12 * (1.0 + oracle));
    }

    #[test]
    fn hard_case_pads_bottom_coordinate() {
        let s = solve_diag_tr(&tr(&[-2.0, 1.0], &[0.0, 1.0], 2.0, 0.0)).unwrap();
        assert!((s.sigma - 2.0).abs() <= 1e-14);
        assert!(s.boundary);
        let nz = vecmath::norm(&s.z);
        assert!((nz - 2.0).abs() <= 1e-12);
        assert!((s.z[1] - 1.0 / 3.0).abs() <= 1e-14);
        assert!((s.z[0] - (4.0f64 - 1.0 / 9.0).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn componentwise_stationarity() {
        let (l, d) = (&[0.5, 1.0, 4.0][..], &[0.3, -0.2, 0.9][..]);
        let s = solve_diag_tr(&tr(l, d, 0.25, 0.0)).unwrap();
        for i in 0..3 {
            let r = (l[i] + s.sigma) * s.z[i] - d[i];
            assert!(r.abs() <= 1e-12, "component {i}: residual {r}");
        }
        assert!(l[0] + s.sigma >= -1e-12);
    }

    #[test]
    fn monotone_norm_in_sigma() {
        let (l, d) = (&[0.3, 1.0, 2.5, 7.0][..], &[1.0, -2.0, 0.5, 0.25][..]);
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let s = -l[0] + 0.05 + 0.2 * k as f64;
            let n = phi(l, d, s);
            assert!(n < prev, "phi must decrease: {n} at step {k}");
            prev = n;
        }
    }

    #[test]
    fn reg_r2_is_closed_form() {
        let s = solve_diag_reg(&reg(&[0.5, 1.0], &[1.0, 2.0], 0.8, 2.0)).unwrap();
        assert_eq!(s.sigma, 0.8);
        assert!((s.z[0] - 1.0 / 1.3).abs() <= 1e-15);
        assert!((s.z[1] - 2.0 / 1.8).abs() <= 1e-15);
        assert_eq!(s.newton_iters, 0);
    }

    #[test]
    fn reg_r3_analytic_unit_root() {
        // σ = ρ‖z‖ with z = d/σ: σ² = 1 so σ = 1.
        let s = solve_diag_reg(&reg(&[0.0], &[1.0], 1.0, 3.0)).unwrap();
        assert!((s.sigma - 1.0).abs() <= 1e-12);
        assert!((s.z[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn reg_r3_matches_bisection() {
        let (l, d) = (&[1.0, 2.0][..], &[1.0, 1.0][..]);
        let rho = 0.5;
        let s = solve_diag_reg(&reg(l, d, rho, 3.0)).unwrap();
        // Oracle: bisection on ψ(σ) = σ − ρ‖z(σ)‖.
        let psi = |sg: f64| sg - rho * phi(l, d, sg);
        let (mut lo, mut hi) = (0.0, 10.0);
        assert!(psi(lo) < 0.0 && psi(hi) > 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if psi(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((s.sigma - oracle).abs() <= 1e-12 * (1.0 + oracle));
        // Multiplier identity.
        let nz = vecmath::norm(&s.z);
        assert!((s.sigma - rho * nz).abs() <= 1e-12 * (1.0 + s.sigma));
    }

    #[test]
    fn reg_indefinite_leftmost_cleared() {
        let (l, d) = (&[-3.0, 1.0, 2.0][..], &[0.5, 1.0, -1.0][..]);
        let s = solve_diag_reg(&reg(l, d, 1.0, 4.0)).unwrap();
        assert!(s.sigma > 3.0, "sigma {} must clear -lambda_1", s.sigma);
        let nz = vecmath::norm(&s.z);
        assert!((s.sigma - nz * nz).abs() <= 1e-10 * (1.0 + s.sigma));
    }

    #[test]
    fn nan_inputs_are_no_root() {
        let e = solve_diag_tr(&tr(&[f64::NAN], &[1.0], 1.0, 0.0)).unwrap_err();
        assert!(matches!(e, LinalgError::NoRoot(_)));
        let e = solve_diag_reg(&reg(&[1.0], &[f64::NAN], 1.0, 3.0)).unwrap_err();
        assert!(matches!(e, LinalgError::NoRoot(_)));
    }

    #[test]
    fn newton_budget_on_random_instances() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state as f64 / u64::MAX as f64
        };
        for case in 0..100 {
            let n = 2 + (next() * 8.0) as usize;
            let mut lambdas: Vec<f64> = (0..n).map(|_| 4.0 * next() - 1.0).collect();
            lambdas.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let d: Vec<f64> = (0..n).map(|_| 2.0 * next() - 1.0).collect();
            let delta = 0.1 + next();
            let s = solve_diag_tr(&tr(&lambdas, &d, delta, 0.0)).unwrap();
            assert!(
                s.newton_iters <= 25,
                "case {case}: {} iterations",
                s.newton_iters
            );
            if s.boundary {
                assert!((vecmath::norm(&s.z) - delta).abs() <= 1e-12 * delta);
            }
        }
    }
}
