//! Symmetric matrix storage: packed dense lower triangle or sparse
//! coordinate triples (lower triangle, zero-based).
//!
//! Both storages expose the same read-side operations (matrix-vector
//! product, Gershgorin data, densification).  The sparse form additionally
//! knows its bandwidth, which the factorization layer uses to pick a banded
//! Cholesky path.  Matrices are immutable after construction and safe to
//! share across threads.

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("iteration failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("invalid matrix data: {0}")]
    InvalidData(String),
    #[error("secular equation has no root: {0}")]
    NoRoot(String),
    #[error("right-hand side is identically zero")]
    ZeroRhs,
}

#[derive(Debug, Clone)]
enum Storage {
    /// Packed lower triangle, row major: entry (i, j), i >= j, lives at
    /// i*(i+1)/2 + j.
    DenseLower(Vec<f64>),
    /// Coordinate triples folded into the lower triangle (row >= col).
    Coo {
        entries: Vec<(usize, usize, f64)>,
        bandwidth: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SymmetricMatrix {
    n: usize,
    storage: Storage,
}

impl SymmetricMatrix {
    /// Builds from a packed lower triangle (row-major, n*(n+1)/2 entries).
    pub fn from_dense_lower(n: usize, lower: Vec<f64>) -> Result<Self, LinalgError> {
        let want = n * (n + 1) / 2;
        if lower.len() != want {
            return Err(LinalgError::DimensionMismatch {
                expected: want,
                got: lower.len(),
            });
        }
        Ok(Self {
            n,
            storage: Storage::DenseLower(lower),
        })
    }

    /// Builds from a full row-major n x n buffer, averaging the two
    /// triangles so slightly asymmetric inputs are accepted.
    pub fn from_full(n: usize, full: &[f64]) -> Result<Self, LinalgError> {
        if full.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                got: full.len(),
            });
        }
        let mut lower = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                lower.push(0.5 * (full[i * n + j] + full[j * n + i]));
            }
        }
        Ok(Self {
            n,
            storage: Storage::DenseLower(lower),
        })
    }

    /// Builds from coordinate triples (zero-based).  Entries may name either
    /// triangle; they are folded to the lower one.  A duplicate coordinate
    /// (after folding) is an error.
    pub fn from_coo(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        let mut entries = Vec::with_capacity(triples.len());
        let mut seen = HashSet::with_capacity(triples.len());
        let mut bandwidth = 0usize;
        for &(i, j, v) in triples {
            if i >= n || j >= n {
                return Err(LinalgError::InvalidData(format!(
                    "coordinate ({i}, {j}) out of range for dimension {n}"
                )));
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            if !seen.insert((r, c)) {
                return Err(LinalgError::InvalidData(format!(
                    "duplicate entry at ({r}, {c})"
                )));
            }
            bandwidth = bandwidth.max(r - c);
            entries.push((r, c, v));
        }
        Ok(Self {
            n,
            storage: Storage::Coo { entries, bandwidth },
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let entries = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self {
            n: d.len(),
            storage: Storage::Coo {
                entries,
                bandwidth: 0,
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Half bandwidth (max |i - j| over stored nonzeros) when the sparsity
    /// pattern is known; dense storage reports None.
    pub fn bandwidth(&self) -> Option<usize> {
        match &self.storage {
            Storage::DenseLower(_) => None,
            Storage::Coo { bandwidth, .. } => Some(*bandwidth),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Coo { .. })
    }

    /// Entry (i, j).  O(1) for dense storage, O(nnz) for coordinate storage;
    /// intended for tests and small assembly work, not inner loops.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index out of range");
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        match &self.storage {
            Storage::DenseLower(lower) => lower[r * (r + 1) / 2 + c],
            Storage::Coo { entries, .. } => entries
                .iter()
                .find(|&&(er, ec, _)| er == r && ec == c)
                .map(|&(_, _, v)| v)
                .unwrap_or(0.0),
        }
    }

    /// Packed lower triangle of the full matrix, densifying sparse storage.
    pub fn to_dense_lower(&self) -> Vec<f64> {
        match &self.storage {
            Storage::DenseLower(lower) => lower.clone(),
            Storage::Coo { entries, .. } => {
                let mut lower = vec![0.0; self.n * (self.n + 1) / 2];
                for &(r, c, v) in entries {
                    lower[r * (r + 1) / 2 + c] = v;
                }
                lower
            }
        }
    }

    /// Full row-major n x n buffer.
    pub fn to_dense_full(&self) -> Vec<f64> {
        let n = self.n;
        let lower = self.to_dense_lower();
        let mut full = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = lower[i * (i + 1) / 2 + j];
                full[i * n + j] = v;
                full[j * n + i] = v;
            }
        }
        full
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n, "matvec dimension mismatch");
        assert_eq!(y.len(), self.n, "matvec dimension mismatch");
        y.fill(0.0);
        match &self.storage {
            Storage::DenseLower(lower) => {
                for i in 0..self.n {
                    let row = &lower[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
                    let mut acc = 0.0;
                    for j in 0..i {
                        acc += row[j] * x[j];
                        y[j] += row[j] * x[i];
                    }
                    y[i] += acc + row[i] * x[i];
                }
            }
            Storage::Coo { entries, .. } => {
                for &(r, c, v) in entries {
                    y[r] += v * x[c];
                    if r != c {
                        y[c] += v * x[r];
                    }
                }
            }
        }
    }

    /// Quadratic form x' A x.
    pub fn quad(&self, x: &[f64]) -> f64 {
        crate::vecmath::dot(&self.matvec(x), x)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::DenseLower(lower) => lower.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            Storage::Coo { entries, .. } => {
                entries.iter().fold(0.0f64, |m, &(_, _, v)| m.max(v.abs()))
            }
        }
    }

    /// Per-row (diagonal, sum of |off-diagonal|) pairs.
    pub(crate) fn row_radii(&self) -> (Vec<f64>, Vec<f64>) {
        let mut diag = vec![0.0; self.n];
        let mut rad = vec![0.0; self.n];
        match &self.storage {
            Storage::DenseLower(lower) => {
                for i in 0..self.n {
                    for j in 0..=i {
                        let v = lower[i * (i + 1) / 2 + j];
                        if i == j {
                            diag[i] = v;
                        } else {
                            rad[i] += v.abs();
                            rad[j] += v.abs();
                        }
                    }
                }
            }
            Storage::Coo { entries, .. } => {
                for &(r, c, v) in entries {
                    if r == c {
                        diag[r] = v;
                    } else {
                        rad[r] += v.abs();
                        rad[c] += v.abs();
                    }
                }
            }
        }
        (diag, rad)
    }

    /// Diagonal shift that makes A + shift*I safely positive definite by the
    /// Gershgorin circle bound:
    ///
    ///   shift = -min_i (a_ii - sum_{j != i} |a_ij|) + sqrt(eps) * max|a_ij|.
    ///
    /// The margin term guards against the bound being attained.  For a
    /// matrix that is already comfortably positive definite the result is
    /// negative; callers on the indefinite path clamp by construction
    /// (a failed Cholesky guarantees some row is not dominant).
    pub fn gershgorin_shift(&self) -> f64 {
        let (diag, rad) = self.row_radii();
        let min_bound = diag
            .iter()
            .zip(&rad)
            .map(|(d, r)| d - r)
            .fold(f64::INFINITY, f64::min);
        -min_bound + f64::EPSILON.sqrt() * self.max_abs()
    }
}
