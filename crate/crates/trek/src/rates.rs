//! Convergence-rate theory for the extended Krylov iteration, as runnable
//! formulas.
//!
//! The machinery is classical approximation theory on the spectral interval
//! W = [λ₁, λₙ]: Ψ maps the exterior of the unit disk onto the exterior of
//! W, Φ is its inverse, and a degree-two Blaschke product B turns Φ into
//! the rate function E(σ) = B(1/Φ(−σ)).  The iteration's error after k
//! cycles behaves like μ^{2k} with μ = √|E(σ)|, and for σ ≥ 0 the rate is
//! never worse than (κ^{1/4} − 1)/(κ^{1/4} + 1) with κ = λₙ/λ₁ — the
//! square-root gain over ordinary Krylov methods.  Everything is real:
//! the solvers only ever need real shifts outside (−λₙ, −λ₁).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RateError {
    #[error("argument outside the map's domain: {0}")]
    DomainViolation(String),
    #[error("evaluation at the Blaschke pole w = {0}")]
    PoleHit(f64),
}

/// Spectral interval data for the rate formulas.
#[derive(Debug, Clone, Copy)]
pub struct RateModel {
    pub lambda1: f64,
    pub lambdan: f64,
    /// Interval center (λₙ + λ₁)/2.
    pub c: f64,
    /// Interval radius (λₙ − λ₁)/2.
    pub r: f64,
    /// Condition number λₙ/λ₁.
    pub kappa: f64,
}

impl RateModel {
    /// Requires 0 < λ₁ < λₙ.
    pub fn new(lambda1: f64, lambdan: f64) -> Result<Self, RateError> {
        if !(lambda1 > 0.0) || !(lambdan > lambda1) || !lambdan.is_finite() {
            return Err(RateError::DomainViolation(format!(
                "need 0 < lambda1 < lambdan, got ({lambda1}, {lambdan})"
            )));
        }
        Ok(Self {
            lambda1,
            lambdan,
            c: 0.5 * (lambdan + lambda1),
            r: 0.5 * (lambdan - lambda1),
            kappa: lambdan / lambda1,
        })
    }

    /// Joukowski-type map from the exterior of the unit disk onto the
    /// exterior of the spectral interval: Ψ(t) = c + (r/2)(t + 1/t).
    pub fn psi(&self, t: f64) -> f64 {
        assert!(t != 0.0, "psi has a pole at t = 0");
        self.c + 0.5 * self.r * (t + 1.0 / t)
    }

    /// Inverse of Ψ on the reals: Φ(t) = s + sign(s)·√(s² − 1) with
    /// s = (t − c)/r, defined for t outside the open interval (λ₁, λₙ).
    /// |Φ| ≥ 1 everywhere, with equality exactly at the interval endpoints.
    pub fn phi(&self, t: f64) -> Result<f64, RateError> {
        if t > self.lambda1 && t < self.lambdan {
            return Err(RateError::DomainViolation(format!(
                "phi({t}) inside the spectral interval ({}, {})",
                self.lambda1, self.lambdan
            )));
        }
        let s = (t - self.c) / self.r;
        // At the endpoints s is ±1 up to rounding; clamp the discriminant.
        Ok(s + s.signum() * (s * s - 1.0).max(0.0).sqrt())
    }

    /// Degree-two Blaschke factor pinned at the images of 0 and ∞:
    /// B(w) = w(1 − Φ(0)w)/(Φ(0) − w).  |B| = 1 on the unit circle and
    /// |B| < 1 strictly inside.
    pub fn blaschke(&self, w: f64) -> Result<f64, RateError> {
        // 0 < lambda1 puts 0 outside the interval, so phi(0) always exists.
        let phi0 = self.phi(0.0).expect("0 is outside the spectral interval");
        if w == phi0 {
            return Err(RateError::PoleHit(w));
        }
        Ok(w * (1.0 - phi0 * w) / (phi0 - w))
    }

    /// Rate function E(σ) = B(1/Φ(−σ)) for shifts σ outside (−λₙ, −λ₁).
    /// E(0) = 0, E(−λ₁) = E(−λₙ) = −1, and on σ > 0 it peaks at
    /// σ = √(λ₁λₙ) with value ((κ^{1/4}−1)/(κ^{1/4}+1))².
    pub fn rate_e(&self, sigma: f64) -> Result<f64, RateError> {
        let phi = self.phi(-sigma).map_err(|_| {
            RateError::DomainViolation(format!(
                "sigma = {sigma} inside (-{}, -{})",
                self.lambdan, self.lambda1
            ))
        })?;
        // |phi| >= 1, so w = 1/phi stays inside the closed unit disk and
        // can never hit the Blaschke pole (|phi(0)| > 1).
        self.blaschke(1.0 / phi)
    }

    /// Worst-case linear rate μ(σ) = √|E(σ)| per outer cycle (the error
    /// after k cycles is O(μ^{2k})).
    pub fn rate_mu(&self, sigma: f64) -> Result<f64, RateError> {
        Ok(self.rate_e(sigma)?.abs().sqrt())
    }

    /// The shift-independent ceiling (κ^{1/4} − 1)/(κ^{1/4} + 1) that
    /// dominates μ(σ) for every σ ≥ 0.
    pub fn kappa_rate(&self) -> f64 {
        let q = self.kappa.powf(0.25);
        (q - 1.0) / (q + 1.0)
    }

    /// Uniform rate over the whole solution manifold, with the shift range
    /// pulled δₙ below −λₙ and δ₁ above −λ₁:
    /// max(√|E(−λₙ−δₙ)|, √|E(−λ₁+δ₁)|, κ-rate).  Requires δ₁, δₙ > 0.
    pub fn manifold_rate(&self, delta1: f64, deltan: f64) -> Result<f64, RateError> {
        if !(delta1 > 0.0) || !(deltan > 0.0) {
            return Err(RateError::DomainViolation(format!(
                "manifold margins must be positive, got ({delta1}, {deltan})"
            )));
        }
        let low = self.rate_mu(-self.lambdan - deltan)?;
        let high = self.rate_mu(-self.lambda1 + delta1)?;
        Ok(low.max(high).max(self.kappa_rate()))
    }
}

/// CSV rows (sigma, E) for a shift grid, for plotting the rate profile.
pub fn rate_csv(model: &RateModel, sigmas: &[f64]) -> Result<String, RateError> {
    let mut out = String::from("sigma,E\n");
    for &s in sigmas {
        let e = model.rate_e(s)?;
        out.push_str(&format!("{s},{e}\n"));
    }
    Ok(out)
}
