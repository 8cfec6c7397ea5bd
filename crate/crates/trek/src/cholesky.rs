//! Shifted Cholesky factorization of A + shift*M with a dense and a banded
//! backend.
//!
//! The banded path is taken when the sparsity pattern is known (coordinate
//! storage) and the combined half bandwidth of A and the metric is at most
//! n/10; otherwise the packed dense routine runs.  A nonpositive pivot
//! aborts with [`LinalgError::NotPositiveDefinite`], which is how callers
//! detect indefiniteness.  Factors are immutable; the solve counter is the
//! only telemetry state and is updated atomically.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::matrix::{LinalgError, SymmetricMatrix};

#[derive(Debug)]
enum FactorData {
    /// Packed lower triangle of L, row major.
    Dense(Vec<f64>),
    /// Lower band storage: band[d * n + j] holds L(j + d, j), d = 0..=bw.
    Band { bw: usize, band: Vec<f64> },
}

/// Cholesky factor of A + shift*M (M defaults to the identity).
#[derive(Debug)]
pub struct CholeskyFactor {
    n: usize,
    shift: f64,
    data: FactorData,
    solves: AtomicU64,
}

/// Factors A + shift*M.  `metric: None` means the identity metric.
pub fn factorize(
    a: &SymmetricMatrix,
    shift: f64,
    metric: Option<&SymmetricMatrix>,
) -> Result<CholeskyFactor, LinalgError> {
    let n = a.dim();
    if let Some(m) = metric {
        if m.dim() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                got: m.dim(),
            });
        }
    }

    let band_limit = n as f64 / 10.0;
    let combined_bw = match (a.bandwidth(), metric) {
        (Some(bw), None) => Some(bw),
        (Some(bw), Some(m)) => m.bandwidth().map(|mbw| bw.max(mbw)),
        (None, _) => None,
    };

    if let Some(bw) = combined_bw.filter(|&bw| (bw as f64) <= band_limit) {
        factor_banded(a, shift, metric, bw)
    } else {
        factor_dense(a, shift, metric)
    }
}

fn factor_dense(
    a: &SymmetricMatrix,
    shift: f64,
    metric: Option<&SymmetricMatrix>,
) -> Result<CholeskyFactor, LinalgError> {
    let n = a.dim();
    let mut l = a.to_dense_lower();
    match metric {
        None => {
            for i in 0..n {
                l[i * (i + 1) / 2 + i] += shift;
            }
        }
        Some(m) => {
            let ml = m.to_dense_lower();
            for (li, mi) in l.iter_mut().zip(&ml) {
                *li += shift * mi;
            }
        }
    }

    for j in 0..n {
        let mut pivot = l[j * (j + 1) / 2 + j];
        {
            let row_j = &l[j * (j + 1) / 2..j * (j + 1) / 2 + j];
            pivot -= row_j.iter().map(|v| v * v).sum::<f64>();
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        l[j * (j + 1) / 2 + j] = ljj;
        for i in j + 1..n {
            let mut v = l[i * (i + 1) / 2 + j];
            {
                let (head, tail) = l.split_at(i * (i + 1) / 2);
                let row_j = &head[j * (j + 1) / 2..j * (j + 1) / 2 + j];
                let row_i = &tail[..j];
                v -= row_i
                    .iter()
                    .zip(row_j)
                    .map(|(x, y)| x * y)
                    .sum::<f64>();
            }
            l[i * (i + 1) / 2 + j] = v / ljj;
        }
    }

    Ok(CholeskyFactor {
        n,
        shift,
        data: FactorData::Dense(l),
        solves: AtomicU64::new(0),
    })
}

fn factor_banded(
    a: &SymmetricMatrix,
    shift: f64,
    metric: Option<&SymmetricMatrix>,
    bw: usize,
) -> Result<CholeskyFactor, LinalgError> {
    let n = a.dim();
    let mut band = vec![0.0; (bw + 1) * n];
    let lower = a.to_dense_lower();
    for i in 0..n {
        for j in i.saturating_sub(bw)..=i {
            band[(i - j) * n + j] = lower[i * (i + 1) / 2 + j];
        }
    }
    match metric {
        None => {
            for j in 0..n {
                band[j] += shift;
            }
        }
        Some(m) => {
            let ml = m.to_dense_lower();
            for i in 0..n {
                for j in i.saturating_sub(bw)..=i {
                    band[(i - j) * n + j] += shift * ml[i * (i + 1) / 2 + j];
                }
            }
        }
    }

    for j in 0..n {
        let lo = j.saturating_sub(bw);
        let mut pivot = band[j];
        for k in lo..j {
            let v = band[(j - k) * n + k];
            pivot -= v * v;
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(LinalgError::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = pivot.sqrt();
        band[j] = ljj;
        for i in j + 1..(j + bw + 1).min(n) {
            let mut v = band[(i - j) * n + j];
            for k in i.saturating_sub(bw).max(lo)..j {
                v -= band[(i - k) * n + k] * band[(j - k) * n + k];
            }
            band[(i - j) * n + j] = v / ljj;
        }
    }

    Ok(CholeskyFactor {
        n,
        shift,
        data: FactorData::Band { bw, band },
        solves: AtomicU64::new(0),
    })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// The shift this factor was built with.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_banded(&self) -> bool {
        matches!(self.data, FactorData::Band { .. })
    }

    /// Number of triangular solves performed through this factor.
    pub fn solve_count(&self) -> u64 {
        self.solves.load(Ordering::Relaxed)
    }

    /// Solves (A + shift*M) x = rhs.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        self.solves.fetch_add(1, Ordering::Relaxed);
        let mut x = rhs.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        Ok(x)
    }

    /// Solves L w = rhs (forward substitution only).  Used by the
    /// Moré–Sorensen update, which needs ||L^{-1} x||.
    pub fn solve_lower(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if rhs.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        self.forward(&mut x);
        Ok(x)
    }

    fn forward(&self, x: &mut [f64]) {
        let n = self.n;
        match &self.data {
            FactorData::Dense(l) => {
                for i in 0..n {
                    let row = &l[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
                    let mut v = x[i];
                    for j in 0..i {
                        v -= row[j] * x[j];
                    }
                    x[i] = v / row[i];
                }
            }
            FactorData::Band { bw, band } => {
                for i in 0..n {
                    let mut v = x[i];
                    for j in i.saturating_sub(*bw)..i {
                        v -= band[(i - j) * n + j] * x[j];
                    }
                    x[i] = v / band[i];
                }
            }
        }
    }

    fn backward(&self, x: &mut [f64]) {
        let n = self.n;
        match &self.data {
            FactorData::Dense(l) => {
                for i in (0..n).rev() {
                    let mut v = x[i];
                    for j in i + 1..n {
                        v -= l[j * (j + 1) / 2 + i] * x[j];
                    }
                    x[i] = v / l[i * (i + 1) / 2 + i];
                }
            }
            FactorData::Band { bw, band } => {
                for i in (0..n).rev() {
                    let mut v = x[i];
                    for j in i + 1..(i + bw + 1).min(n) {
                        v -= band[(j - i) * n + i] * x[j];
                    }
                    x[i] = v / band[i];
                }
            }
        }
    }
}
