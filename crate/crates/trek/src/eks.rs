//! Extended Krylov basis construction.
//!
//! Builds, one vector at a time, an orthonormal basis of the extended
//! Krylov subspace span{b, A⁻¹b, Ab, A⁻²b, A²b, …} in the interleaved
//! column order (v₀ : v₋₁ : v₁ : v₋₂ : v₂ : …), together with the
//! scalar recurrence coefficients and the lower bands of the pentadiagonal
//! projected matrix P = VᵀAV.  Each outer cycle costs one operator solve
//! and one operator product; everything else is vector arithmetic.
//!
//! A metric variant builds an S-orthonormal basis (VᵀSV = I) for elliptical
//! trust regions.  It maintains companion vectors w = S·u and q±2 = S·v±
//! incrementally so each cycle needs a single extra S product and S solve
//! (plus four extra vector subtractions), never a full re-orthogonalization
//! against S.
//!
//! The two-stage subtract-then-normalize update is used throughout; the
//! single-pass square-root form √(‖u‖² − Σ coef²) loses orthogonality on
//! ill-conditioned problems and is deliberately avoided.

use crate::cholesky::CholeskyFactor;
use crate::matrix::{LinalgError, SymmetricMatrix};
use crate::vecmath;

/// Relative breakdown threshold: a recurrence norm δ at or below
/// `BREAKDOWN_REL`·δ₀ is treated as exactly zero (invariant subspace found).
const BREAKDOWN_REL: f64 = 1e-14;

/// Operator bundle for basis growth: the matrix, an optional diagonal-style
/// shift, the factorization of the shifted operator, and (in metric mode)
/// the metric with its own factorization.
///
/// The operator applied is A + shift·M where M is the metric (identity when
/// none).  `factor` must factor exactly that operator.
pub struct EksOps<'a> {
    a: &'a SymmetricMatrix,
    shift: f64,
    factor: &'a CholeskyFactor,
    metric: Option<(&'a SymmetricMatrix, &'a CholeskyFactor)>,
}

impl<'a> EksOps<'a> {
    /// Plain Euclidean mode: operator A + shift·I, factored in `factor`.
    pub fn new(a: &'a SymmetricMatrix, shift: f64, factor: &'a CholeskyFactor) -> Self {
        Self {
            a,
            shift,
            factor,
            metric: None,
        }
    }

    /// Metric mode: operator A + shift·S, factored in `factor`; `s_factor`
    /// factors S itself.
    pub fn with_metric(
        a: &'a SymmetricMatrix,
        shift: f64,
        factor: &'a CholeskyFactor,
        s: &'a SymmetricMatrix,
        s_factor: &'a CholeskyFactor,
    ) -> Self {
        Self {
            a,
            shift,
            factor,
            metric: Some((s, s_factor)),
        }
    }

    pub fn is_metric(&self) -> bool {
        self.metric.is_some()
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// (A + shift·M)·v.  In metric mode the caller can pass the known
    /// product mv = M·v to avoid recomputing it.
    fn apply(&self, v: &[f64], mv: Option<&[f64]>) -> Vec<f64> {
        let mut out = self.a.matvec(v);
        if self.shift != 0.0 {
            match (self.metric, mv) {
                (None, _) => vecmath::axpy(self.shift, v, &mut out),
                (Some(_), Some(q)) => vecmath::axpy(self.shift, q, &mut out),
                (Some((s, _)), None) => {
                    let q = s.matvec(v);
                    vecmath::axpy(self.shift, &q, &mut out);
                }
            }
        }
        out
    }

    /// (A + shift·M)⁻¹·v via the stored factorization.
    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.factor.solve(v)
    }

    fn metric_apply(&self, v: &[f64]) -> Vec<f64> {
        match self.metric {
            Some((s, _)) => s.matvec(v),
            None => v.to_vec(),
        }
    }

    fn metric_solve(&self, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
        match self.metric {
            Some((_, sf)) => sf.solve(v),
            None => Ok(v.to_vec()),
        }
    }
}

/// Incremental extended-Krylov state: basis columns in the interleaved
/// order, recurrence scalars, and the lower bands of the projected
/// pentadiagonal matrix.
///
/// Scalars are stored zero-based: `alpha_prev[i]` holds α_i,
/// `alpha_neg[i]` holds α₋₍ᵢ₊₁₎, `delta_pos[i]` holds δ₍ᵢ₊₁₎,
/// `delta_neg[i]` holds δ₋₍ᵢ₊₁₎, and likewise for the β arrays; δ₀ and β₀
/// live in their own fields.  Any δ at or below the breakdown threshold is
/// stored as exactly 0, which makes the residual formulas vanish at the
/// step where the subspace became invariant.
#[derive(Debug, Clone)]
pub struct EksState {
    n: usize,
    /// Basis columns: v₀, v₋₁, v₁, v₋₂, v₂, …
    v: Vec<Vec<f64>>,
    /// Candidate vector of the recurrence (unnormalized next column).
    u: Vec<f64>,
    /// Metric mode: w = S·u companion of the candidate.
    w: Option<Vec<f64>>,
    /// Metric mode: most recent q_j = S·v_j with j ≥ 0.
    q_pos: Option<Vec<f64>>,
    /// Metric mode: most recent q₋ⱼ = S·v₋ⱼ.
    q_neg: Option<Vec<f64>>,

    delta0: f64,
    beta0: f64,
    alpha_prev: Vec<f64>,
    alpha_neg: Vec<f64>,
    beta_pos: Vec<f64>,
    beta_neg: Vec<f64>,
    delta_pos: Vec<f64>,
    delta_neg: Vec<f64>,

    /// Lower bands of P, one entry of each per appended column c:
    /// pmain[c] = P(c,c), psub[c] = P(c+1,c), psubsub[c] = P(c+2,c).
    pmain: Vec<f64>,
    psub: Vec<f64>,
    psubsub: Vec<f64>,

    n_neg: usize,
    n_pos: usize,
    breakdown: bool,
    reorth: bool,
    snorm: bool,
}

impl EksState {
    /// Starts a plain (Euclidean) basis from b, performing the single
    /// initialization solve itself.
    pub fn init(ops: &EksOps, b: &[f64], m_hint: usize, reorth: bool) -> Result<Self, LinalgError> {
        let x = ops.solve(b)?;
        Self::init_from_solution(ops, b, &x, m_hint, reorth)
    }

    /// Starts a plain basis when x = (A + shift·I)⁻¹b is already available
    /// (the trust-region driver computes it for the interior test).
    pub fn init_from_solution(
        ops: &EksOps,
        b: &[f64],
        x: &[f64],
        m_hint: usize,
        reorth: bool,
    ) -> Result<Self, LinalgError> {
        assert!(!ops.is_metric(), "metric mode needs init_snorm");
        let n = b.len();
        let delta0 = vecmath::norm(b);
        if delta0 == 0.0 {
            return Err(LinalgError::ZeroRhs);
        }
        let v0 = vecmath::scaled(1.0 / delta0, b);
        let mut u = vecmath::scaled(1.0 / delta0, x);
        let beta0 = vecmath::dot(&u, &v0);
        vecmath::axpy(-beta0, &v0, &mut u);

        let mut state = Self {
            n,
            v: Vec::with_capacity(2 * m_hint + 3),
            u,
            w: None,
            q_pos: None,
            q_neg: None,
            delta0,
            beta0,
            alpha_prev: Vec::with_capacity(m_hint + 1),
            alpha_neg: Vec::with_capacity(m_hint + 1),
            beta_pos: Vec::with_capacity(m_hint + 1),
            beta_neg: Vec::with_capacity(m_hint + 1),
            delta_pos: Vec::with_capacity(m_hint + 1),
            delta_neg: Vec::with_capacity(m_hint + 1),
            pmain: Vec::with_capacity(2 * m_hint + 3),
            psub: Vec::with_capacity(2 * m_hint + 3),
            psubsub: Vec::with_capacity(2 * m_hint + 3),
            n_neg: 0,
            n_pos: 0,
            breakdown: false,
            reorth,
            snorm: false,
        };
        state.v.push(v0);
        state.reorthogonalize(ops);
        let dm1 = state.clamp(vecmath::norm(&state.u));
        state.delta_neg.push(dm1);
        state.breakdown = dm1 == 0.0;
        Ok(state)
    }

    /// Starts a metric (S-orthonormal) basis.  `x` must be
    /// (A + shift·S)⁻¹b, usually left over from the driver's interior test.
    /// The candidate companion w = S·u is formed by a fresh product after
    /// the β₀ subtraction rather than updated incrementally.
    pub fn init_snorm(
        ops: &EksOps,
        b: &[f64],
        x: &[f64],
        m_hint: usize,
        reorth: bool,
    ) -> Result<Self, LinalgError> {
        assert!(ops.is_metric(), "init_snorm needs metric ops");
        let n = b.len();
        let w0 = ops.metric_solve(b)?;
        let d0sq = vecmath::dot(b, &w0);
        let delta0 = d0sq.max(0.0).sqrt();
        if delta0 == 0.0 {
            return Err(LinalgError::ZeroRhs);
        }
        let v0 = vecmath::scaled(1.0 / delta0, &w0);
        let q0 = vecmath::scaled(1.0 / delta0, b);
        let mut u = vecmath::scaled(1.0 / delta0, x);
        let beta0 = vecmath::dot(&u, &q0);
        vecmath::axpy(-beta0, &v0, &mut u);

        let mut state = Self {
            n,
            v: Vec::with_capacity(2 * m_hint + 3),
            u,
            w: None,
            q_pos: Some(q0),
            q_neg: None,
            delta0,
            beta0,
            alpha_prev: Vec::with_capacity(m_hint + 1),
            alpha_neg: Vec::with_capacity(m_hint + 1),
            beta_pos: Vec::with_capacity(m_hint + 1),
            beta_neg: Vec::with_capacity(m_hint + 1),
            delta_pos: Vec::with_capacity(m_hint + 1),
            delta_neg: Vec::with_capacity(m_hint + 1),
            pmain: Vec::with_capacity(2 * m_hint + 3),
            psub: Vec::with_capacity(2 * m_hint + 3),
            psubsub: Vec::with_capacity(2 * m_hint + 3),
            n_neg: 0,
            n_pos: 0,
            breakdown: false,
            reorth,
            snorm: true,
        };
        state.v.push(v0);
        state.reorthogonalize(ops);
        state.w = Some(ops.metric_apply(&state.u));
        let dm1sq = vecmath::dot(&state.u, state.w.as_ref().unwrap());
        let dm1 = state.clamp(dm1sq.max(0.0).sqrt());
        state.delta_neg.push(dm1);
        state.breakdown = dm1 == 0.0;
        Ok(state)
    }

    fn clamp(&self, delta: f64) -> f64 {
        if delta <= BREAKDOWN_REL * self.delta0 {
            0.0
        } else {
            delta
        }
    }

    /// One classical Gram–Schmidt guard pass of the candidate against the
    /// whole stored basis (no-op unless the reorthogonalization flag is on).
    /// In metric mode the coefficients come from w = S·u and w is refreshed
    /// with one extra S product afterwards.
    fn reorthogonalize(&mut self, ops: &EksOps) {
        if !self.reorth {
            return;
        }
        if self.snorm {
            let w = match &self.w {
                Some(w) => w.clone(),
                None => ops.metric_apply(&self.u),
            };
            let coefs: Vec<f64> = self.v.iter().map(|vi| vecmath::dot(&w, vi)).collect();
            for (vi, c) in self.v.iter().zip(&coefs) {
                vecmath::axpy(-c, vi, &mut self.u);
            }
            self.w = Some(ops.metric_apply(&self.u));
        } else {
            for i in 0..self.v.len() {
                let c = vecmath::dot(&self.u, &self.v[i]);
                let vi = &self.v[i];
                vecmath::axpy(-c, vi, &mut self.u);
            }
        }
    }

    /// First half of outer cycle k: normalize v₋ₖ, apply the operator,
    /// orthogonalize, measure δₖ.  Returns false (and touches nothing) when
    /// the pending δ₋ₖ is zero — the subspace is already invariant.
    pub fn step_neg(&mut self, ops: &EksOps) -> Result<bool, LinalgError> {
        if self.breakdown {
            // Invariant subspace found earlier; nothing can grow.
            return Ok(false);
        }
        assert_eq!(
            self.n_neg, self.n_pos,
            "negative step out of order (dim {})",
            self.dim()
        );
        let k = self.n_neg + 1;
        let dneg = self.delta_neg[k - 1];
        if dneg == 0.0 {
            self.breakdown = true;
            return Ok(false);
        }
        let vneg = vecmath::scaled(1.0 / dneg, &self.u);

        if self.snorm {
            let qneg = vecmath::scaled(1.0 / dneg, self.w.as_ref().unwrap());
            let mut w = ops.apply(&vneg, Some(&qneg));
            let mut u = ops.metric_solve(&w)?;
            // Metric-mode order: the new direction first, then the previous
            // positive one, with the companion w updated alongside u.
            let a_neg = vecmath::dot(&w, &vneg);
            vecmath::axpy(-a_neg, &vneg, &mut u);
            vecmath::axpy(-a_neg, &qneg, &mut w);
            // v_{k-1} is the last stored column (v_{-k} is not pushed yet).
            let vprev = &self.v[self.v.len() - 1];
            let a_prev = vecmath::dot(&w, vprev);
            vecmath::axpy(-a_prev, vprev, &mut u);
            vecmath::axpy(-a_prev, self.q_pos.as_ref().unwrap(), &mut w);
            self.u = u;
            self.w = Some(w);
            self.q_neg = Some(qneg);
            self.v.push(vneg);
            self.n_neg += 1;
            self.alpha_prev.push(a_prev);
            self.alpha_neg.push(a_neg);
            self.reorthogonalize(ops);
            let dsq = vecmath::dot(&self.u, self.w.as_ref().unwrap());
            let d = self.clamp(dsq.max(0.0).sqrt());
            self.delta_pos.push(d);
            if d == 0.0 {
                self.breakdown = true;
            }
        } else {
            let mut u = ops.apply(&vneg, None);
            // Euclidean order: previous positive direction first, then the
            // new negative one (modified Gram–Schmidt).  v_{k-1} is the last
            // stored column since v_{-k} is not pushed yet.
            let vprev = &self.v[self.v.len() - 1];
            let a_prev = vecmath::dot(&u, vprev);
            vecmath::axpy(-a_prev, vprev, &mut u);
            let a_neg = vecmath::dot(&u, &vneg);
            vecmath::axpy(-a_neg, &vneg, &mut u);
            self.u = u;
            self.v.push(vneg);
            self.n_neg += 1;
            self.alpha_prev.push(a_prev);
            self.alpha_neg.push(a_neg);
            self.reorthogonalize(ops);
            let d = self.clamp(vecmath::norm(&self.u));
            self.delta_pos.push(d);
            if d == 0.0 {
                self.breakdown = true;
            }
        }
        Ok(true)
    }

    /// Second half of outer cycle k: normalize vₖ, apply the inverse
    /// operator, orthogonalize.  δ₋ₖ₋₁ is NOT measured here; call
    /// [`push_delta_neg`](Self::push_delta_neg) if the basis will grow
    /// further.  Returns false when δₖ is zero.
    pub fn step_pos(&mut self, ops: &EksOps) -> Result<bool, LinalgError> {
        if self.breakdown {
            return Ok(false);
        }
        assert_eq!(
            self.n_neg,
            self.n_pos + 1,
            "positive step out of order (dim {})",
            self.dim()
        );
        let k = self.n_pos + 1;
        let dpos = self.delta_pos[k - 1];
        if dpos == 0.0 {
            self.breakdown = true;
            return Ok(false);
        }
        let vpos = vecmath::scaled(1.0 / dpos, &self.u);

        if self.snorm {
            let qpos = vecmath::scaled(1.0 / dpos, self.w.as_ref().unwrap());
            let mut u = ops.solve(&qpos)?;
            let mut w = ops.metric_apply(&u);
            let qneg = self.q_neg.as_ref().unwrap().clone();
            let vneg = self.v[self.v.len() - 1].clone();
            let b_neg = vecmath::dot(&w, &vneg);
            vecmath::axpy(-b_neg, &vneg, &mut u);
            vecmath::axpy(-b_neg, &qneg, &mut w);
            let b_pos = vecmath::dot(&w, &vpos);
            vecmath::axpy(-b_pos, &vpos, &mut u);
            vecmath::axpy(-b_pos, &qpos, &mut w);
            self.u = u;
            self.w = Some(w);
            self.q_pos = Some(qpos);
            self.v.push(vpos);
            self.n_pos += 1;
            self.beta_neg.push(b_neg);
            self.beta_pos.push(b_pos);
        } else {
            let mut u = ops.solve(&vpos)?;
            let vneg = &self.v[self.v.len() - 1];
            let b_neg = vecmath::dot(&u, vneg);
            vecmath::axpy(-b_neg, vneg, &mut u);
            let b_pos = vecmath::dot(&u, &vpos);
            vecmath::axpy(-b_pos, &vpos, &mut u);
            self.u = u;
            self.v.push(vpos);
            self.n_pos += 1;
            self.beta_neg.push(b_neg);
            self.beta_pos.push(b_pos);
        }
        Ok(true)
    }

    /// Measures δ₋ₖ₋₁ from the current candidate (called between cycles,
    /// only when another cycle will run).  No-op after breakdown.
    pub fn push_delta_neg(&mut self, ops: &EksOps) {
        if self.breakdown {
            return;
        }
        debug_assert_eq!(self.n_neg, self.n_pos, "delta_neg out of order");
        self.reorthogonalize(ops);
        let d = if self.snorm {
            let dsq = vecmath::dot(&self.u, self.w.as_ref().unwrap());
            self.clamp(dsq.max(0.0).sqrt())
        } else {
            self.clamp(vecmath::norm(&self.u))
        };
        self.delta_neg.push(d);
        if d == 0.0 {
            self.breakdown = true;
        }
    }

    /// Appends the first projected column (the v₀ column): call in cycle 1
    /// once δ₁ is known, or immediately after init when δ₋₁ = 0.
    pub fn push_start_column(&mut self) {
        assert!(self.pmain.is_empty(), "start column already appended");
        if self.delta_neg[0] == 0.0 {
            self.pmain.push(1.0 / self.beta0);
            self.psub.push(0.0);
            self.psubsub.push(0.0);
        } else {
            let d_1 = self.delta_neg[0];
            let a0 = self.alpha_prev[0];
            let d1 = self.delta_pos[0];
            self.pmain.push((1.0 - d_1 * a0) / self.beta0);
            self.psub.push(a0);
            self.psubsub.push(-d_1 * d1 / self.beta0);
        }
    }

    /// Appends the even column for cycle k = current negative count:
    /// (α₋ₖ, δₖ, 0) on the diagonal, sub- and subsub-bands.
    pub fn push_even_column(&mut self) {
        let k = self.n_neg;
        assert_eq!(self.pmain.len(), 2 * k - 1, "even column out of order");
        self.pmain.push(self.alpha_neg[k - 1]);
        self.psub.push(self.delta_pos[k - 1]);
        self.psubsub.push(0.0);
    }

    /// Appends the odd column for the vⱼ direction, j = current positive
    /// count; call during cycle j+1 once αⱼ and δⱼ₊₁ are known (or after
    /// breakdown with δ₋ⱼ₋₁ = 0, when the tail entries vanish).
    pub fn push_odd_column(&mut self) {
        let j = self.n_pos;
        assert!(j >= 1, "odd column before any positive direction");
        assert_eq!(self.pmain.len(), 2 * j, "odd column out of order");
        let bj = self.beta_pos[j - 1];
        let bnegj = self.beta_neg[j - 1];
        let dj = self.delta_pos[j - 1];
        let dnegj1 = self.delta_neg[j];
        if dnegj1 == 0.0 {
            self.pmain.push((1.0 - bnegj * dj) / bj);
            self.psub.push(0.0);
            self.psubsub.push(0.0);
        } else {
            let aj = self.alpha_prev[j];
            let dj1 = self.delta_pos[j];
            self.pmain.push((1.0 - bnegj * dj - dnegj1 * aj) / bj);
            self.psub.push(aj);
            self.psubsub.push(-dnegj1 * dj1 / bj);
        }
    }

    /// Residual norm of the dimension-ℓ subspace solution y (ℓ = y.len()),
    /// evaluated from the stored bands alone: for odd ℓ the solution leaks
    /// into the two next directions, for even ℓ into one.  Equals
    /// ‖(A + σM)Vy − b‖ (measured in the M⁻¹ norm when a metric is in
    /// play) whenever y satisfies the projected stationarity condition.
    pub fn residual_norm(&self, y: &[f64]) -> f64 {
        let l = y.len();
        assert!(l >= 1 && l <= self.pmain.len(), "no bands for dim {l}");
        if l % 2 == 1 {
            y[l - 1].abs() * self.psub[l - 1].hypot(self.psubsub[l - 1])
        } else {
            (self.psubsub[l - 2] * y[l - 2] + self.psub[l - 1] * y[l - 1]).abs()
        }
    }

    /// Current basis dimension ℓ.
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Number of columns whose projected bands are available.
    pub fn p_cols(&self) -> usize {
        self.pmain.len()
    }

    /// Basis columns in the interleaved order.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// x = V·y for a subspace solution of dimension y.len() ≤ dim.
    pub fn combine(&self, y: &[f64]) -> Vec<f64> {
        assert!(y.len() <= self.v.len());
        let mut x = vec![0.0; self.n];
        for (vi, &yi) in self.v.iter().zip(y) {
            vecmath::axpy(yi, vi, &mut x);
        }
        x
    }

    /// Leading ℓ×ℓ block of the projected matrix, dense row-major.
    pub fn p_full(&self, l: usize) -> Vec<f64> {
        assert!(l <= self.pmain.len(), "no bands for dim {l}");
        let mut p = vec![0.0; l * l];
        for c in 0..l {
            p[c * l + c] = self.pmain[c];
            if c + 1 < l {
                p[(c + 1) * l + c] = self.psub[c];
                p[c * l + c + 1] = self.psub[c];
            }
            if c + 2 < l {
                p[(c + 2) * l + c] = self.psubsub[c];
                p[c * l + c + 2] = self.psubsub[c];
            }
        }
        p
    }

    /// Projected matrix as a symmetric matrix value (testing convenience).
    pub fn p_matrix(&self, l: usize) -> SymmetricMatrix {
        SymmetricMatrix::from_full(l, &self.p_full(l)).expect("band block is square")
    }

    /// ‖b‖ (metric mode: √(bᵀS⁻¹b)); the projected rhs is δ₀·e₁.
    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    pub fn is_snorm(&self) -> bool {
        self.snorm
    }

    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    /// Recurrence scalar accessors (zero-based: `alphas().0[i]` = αᵢ).
    pub fn alphas(&self) -> (&[f64], &[f64]) {
        (&self.alpha_prev, &self.alpha_neg)
    }

    pub fn betas(&self) -> (&[f64], &[f64]) {
        (&self.beta_pos, &self.beta_neg)
    }

    pub fn deltas(&self) -> (&[f64], &[f64]) {
        (&self.delta_pos, &self.delta_neg)
    }

    /// Lower bands of P (main, sub, subsub), one entry per column.
    pub fn bands(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.pmain, &self.psub, &self.psubsub)
    }
}
