//! Dense symmetric eigendecomposition and singular values.
//!
//! The eigensolver is the classical pair: Householder reduction to
//! tridiagonal form with accumulated transformations, then implicit-shift QL
//! on the tridiagonal matrix.  It targets the small projected matrices the
//! solvers produce (a few hundred rows); no blocking is attempted.
//! Eigenvalues come back ascending with matching eigenvector columns.
//!
//! Singular values use one-sided Jacobi orthogonalization, which preserves
//! high relative accuracy on small singular values — the property the
//! low-rank manifold analysis depends on.

use crate::matrix::{LinalgError, SymmetricMatrix};
use crate::vecmath;

/// Row-major dense rectangular matrix.  A deliberately minimal container
/// for the few places that need one (Cauchy matrices, singular values).
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Eigendecomposition of a symmetric matrix: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// eigenvectors[k] is the eigenvector for eigenvalues[k].
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectralDecomposition {
    /// Applies U' to a vector: coordinates of x in the eigenbasis.
    pub fn to_eigenbasis(&self, x: &[f64]) -> Vec<f64> {
        self.eigenvectors
            .iter()
            .map(|u| vecmath::dot(u, x))
            .collect()
    }

    /// Applies U to coordinates: back to the original basis.
    pub fn from_eigenbasis(&self, z: &[f64]) -> Vec<f64> {
        let n = self.eigenvectors.first().map_or(0, Vec::len);
        let mut x = vec![0.0; n];
        for (u, &zi) in self.eigenvectors.iter().zip(z) {
            vecmath::axpy(zi, u, &mut x);
        }
        x
    }
}

/// Symmetric eigendecomposition (tridiagonalize, then implicit-shift QL).
pub fn sym_eig(a: &SymmetricMatrix) -> Result<SpectralDecomposition, LinalgError> {
    sym_eig_full(a.dim(), &a.to_dense_full())
}

/// Same as [`sym_eig`] for a full row-major buffer.
pub fn sym_eig_full(n: usize, full: &[f64]) -> Result<SpectralDecomposition, LinalgError> {
    if full.len() != n * n {
        return Err(LinalgError::DimensionMismatch {
            expected: n * n,
            got: full.len(),
        });
    }
    if n == 0 {
        return Ok(SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: vec![],
        });
    }
    let mut v = full.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;

    let eigenvectors = (0..n)
        .map(|j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    Ok(SpectralDecomposition {
        eigenvalues: d,
        eigenvectors,
    })
}

/// Householder reduction of a full symmetric matrix (in `v`) to tridiagonal
/// form, accumulating the orthogonal transformation back into `v`.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
    }

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        let mut scale = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[l];
            for j in 0..i {
                d[j] = v[l * n + j];
                v[i * n + j] = 0.0;
                v[j * n + i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[l];
            let mut g = if f > 0.0 { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h -= f * g;
            d[l] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j * n + i] = f;
                g = e[j] + v[j * n + j] * f;
                for k in j + 1..=l {
                    g += v[k * n + j] * d[k];
                    e[k] += v[k * n + j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..=l {
                    v[k * n + j] -= f * e[k] + g * d[k];
                }
                d[j] = v[l * n + j];
                v[i * n + j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n.saturating_sub(1) {
        v[(n - 1) * n + i] = v[i * n + i];
        v[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k * n + i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k * n + i + 1] * v[k * n + j];
                }
                for k in 0..=i {
                    v[k * n + j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k * n + i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1) * n + j];
        v[(n - 1) * n + j] = 0.0;
    }
    v[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal (d, e), rotations applied to `v`.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<(), LinalgError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 50 {
                    return Err(LinalgError::ConvergenceFailure(format!(
                        "QL sweep budget exhausted at eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[k * n + i + 1];
                        v[k * n + i + 1] = s * v[k * n + i] + c * h;
                        v[k * n + i] = c * v[k * n + i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Ascending sort, carrying eigenvector columns along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in i + 1..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                v.swap(row * n + i, row * n + k);
            }
        }
    }
    Ok(())
}

/// Singular values of a dense matrix, descending, via one-sided Jacobi.
/// Returns min(rows, cols) values.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>, LinalgError> {
    // Orient so columns are the short side; singular values are transpose
    // invariant and Jacobi cost scales with the column count squared.
    let (rows, cols, colmajor) = if m.rows() >= m.cols() {
        let mut buf = vec![0.0; m.rows() * m.cols()];
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                buf[j * m.rows() + i] = m.get(i, j);
            }
        }
        (m.rows(), m.cols(), buf)
    } else {
        // Transpose: columns of the buffer are rows of m.
        let mut buf = vec![0.0; m.rows() * m.cols()];
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                buf[i * m.cols() + j] = m.get(i, j);
            }
        }
        (m.cols(), m.rows(), buf)
    };
    let mut a = colmajor;
    jacobi_singular_values(rows, cols, &mut a)
}

/// One-sided Jacobi on a column-major buffer; consumes the buffer.
pub(crate) fn jacobi_singular_values(
    rows: usize,
    cols: usize,
    a: &mut [f64],
) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(a.len(), rows * cols);
    let tol = 1e-15;
    let max_sweeps = 60;
    let mut converged = false;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let (cp, cq) = split_cols(a, rows, p, q);
                let app = vecmath::dot(cp, cp);
                let aqq = vecmath::dot(cq, cq);
                let apq = vecmath::dot(cp, cq);
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                if apq.abs() <= tol * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (2.0 * apq);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let vp = cp[i];
                    let vq = cq[i];
                    cp[i] = c * vp - s * vq;
                    cq[i] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::ConvergenceFailure(
            "one-sided Jacobi sweep budget exhausted".into(),
        ));
    }
    let mut sv: Vec<f64> = (0..cols)
        .map(|j| vecmath::norm(&a[j * rows..(j + 1) * rows]))
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Two distinct column slices of a column-major buffer.
fn split_cols(a: &mut [f64], rows: usize, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (head, tail) = a.split_at_mut(q * rows);
    (&mut head[p * rows..(p + 1) * rows], &mut tail[..rows])
}
