//! Seeded synthetic problem generators for tests, examples, and benchmarks.
//!
//! Everything here is a pure function of its seed (ChaCha8), so suites are
//! reproducible across runs and platforms.  Dense matrices are built as
//! QΛQᵀ with a Haar-ish random orthogonal Q, which gives exact control of
//! the spectrum: conditioning, definiteness, and eigenvalue layout are
//! inputs, not accidents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::manifold::{spectrum, SpectrumKind};
use crate::matrix::SymmetricMatrix;
use crate::vecmath;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller, cosine leg only; the log argument stays in (0, 1].
    let a: f64 = 1.0 - rng.gen::<f64>();
    let t: f64 = rng.gen();
    (-2.0 * a.ln()).sqrt() * (std::f64::consts::TAU * t).cos()
}

fn gaussian_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Random orthogonal columns by Gram–Schmidt on a Gaussian matrix.
fn haar_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v = gaussian_vec(n, rng);
        for qi in &q {
            let c = vecmath::dot(qi, &v);
            vecmath::axpy(-c, qi, &mut v);
        }
        let nv = vecmath::norm(&v);
        if nv < 1e-8 {
            continue; // essentially dependent draw; try again
        }
        vecmath::scale(&mut v, 1.0 / nv);
        q.push(v);
    }
    q
}

/// Dense symmetric matrix with exactly the given eigenvalues (up to
/// roundoff), randomly oriented.
pub fn spd_with_spectrum(eigenvalues: &[f64], seed: u64) -> SymmetricMatrix {
    let n = eigenvalues.len();
    assert!(n > 0, "empty spectrum");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = haar_orthogonal(n, &mut rng);
    let mut lower = vec![0.0; n * (n + 1) / 2];
    for (k, &lam) in eigenvalues.iter().enumerate() {
        let qk = &q[k];
        let mut idx = 0;
        for i in 0..n {
            let s = lam * qk[i];
            for j in 0..=i {
                lower[idx] += s * qk[j];
                idx += 1;
            }
        }
    }
    SymmetricMatrix::from_dense_lower(n, lower).expect("triangle length matches n")
}

/// Random SPD matrix with condition number exactly `kappa`: log-spaced
/// eigenvalues on [1/√κ, √κ] (unit geometric mean).
pub fn random_spd(n: usize, kappa: f64, seed: u64) -> SymmetricMatrix {
    assert!(kappa >= 1.0 && n >= 2);
    let half = kappa.sqrt();
    let eigs: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            (1.0 / half) * kappa.powf(t)
        })
        .collect();
    spd_with_spectrum(&eigs, seed)
}

/// Random symmetric indefinite matrix: the same log-spaced magnitudes with
/// the smallest quarter flipped negative, so the leftmost eigenvalue is
/// decisively below zero while most of the spectrum stays positive.
pub fn random_indefinite(n: usize, kappa: f64, seed: u64) -> SymmetricMatrix {
    assert!(kappa >= 1.0 && n >= 2);
    let half = kappa.sqrt();
    let flip = (n / 4).max(1);
    let eigs: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let mag = (1.0 / half) * kappa.powf(t);
            if i < flip {
                -mag
            } else {
                mag
            }
        })
        .collect();
    spd_with_spectrum(&eigs, seed)
}

/// Strictly diagonally dominant banded SPD matrix, stored sparse so the
/// banded factorization path gets exercised.
pub fn banded_spd(n: usize, bandwidth: usize, seed: u64) -> SymmetricMatrix {
    assert!(n >= 2 && bandwidth >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut rowsum = vec![0.0f64; n];
    for i in 0..n {
        for j in i.saturating_sub(bandwidth)..i {
            let v = 2.0 * rng.gen::<f64>() - 1.0;
            entries.push((i, j, v));
            rowsum[i] += v.abs();
            rowsum[j] += v.abs();
        }
    }
    for (i, rs) in rowsum.iter().enumerate() {
        entries.push((i, i, rs + 1.0 + rng.gen::<f64>()));
    }
    SymmetricMatrix::from_coo(n, &entries).expect("band pattern has no duplicates")
}

/// Banded symmetric indefinite matrix with a tight Gershgorin bound:
/// weakly coupled band entries in (-coupling, coupling), diagonal
/// re-centered so its smallest entry sits at exactly -depth.  Because
/// lambda_1 <= min_i a_ii the matrix is guaranteed indefinite, and the
/// slack of the Gershgorin shift over -lambda_1 stays under the worst row
/// radius, at most bandwidth * 2 * coupling.
///
/// The slack is the quantity that matters for warm-started radius sweeps:
/// the boundary multiplier sits past the peak of the convergence-rate
/// curve of the shifted operator (so a shrinking radius can only speed
/// convergence up) exactly when the multiplier's gap over -lambda_1
/// dominates slack + sqrt(slack * span).  A dense sign-flipped spectrum
/// inflates the slack by a factor near sqrt(n) and defeats resolves;
/// weakly coupled structured instances, the shape optimization Hessians
/// usually take, keep it small.
pub fn banded_indefinite(
    n: usize,
    bandwidth: usize,
    coupling: f64,
    depth: f64,
    seed: u64,
) -> SymmetricMatrix {
    assert!(n >= 2 && bandwidth >= 1 && coupling > 0.0 && depth > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in i.saturating_sub(bandwidth)..i {
            entries.push((i, j, coupling * (2.0 * rng.gen::<f64>() - 1.0)));
        }
    }
    let diag: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
    let lowest = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    for (i, d) in diag.iter().enumerate() {
        entries.push((i, i, d - lowest - depth));
    }
    SymmetricMatrix::from_coo(n, &entries).expect("band pattern has no duplicates")
}

/// Seeded Gaussian right-hand side.
pub fn gaussian_rhs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_vec(n, &mut rng)
}

/// A named problem instance for suites and benchmarks.
pub struct SynthProblem {
    pub name: String,
    pub a: SymmetricMatrix,
    pub b: Vec<f64>,
}

/// Mixed suite for the solver cross-checks, cycling through
/// n ∈ {10, 50, 200}: dense SPD instances with log-uniform condition
/// numbers up to ~150 alternating with banded indefinite instances (tight
/// Gershgorin bounds; see [`banded_indefinite`] for why the suite avoids
/// dense sign-flipped spectra).
pub fn acceptance_suite(count: usize, seed: u64) -> Vec<SynthProblem> {
    let sizes = [10usize, 50, 200];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = sizes[i % sizes.len()];
            let kappa = 2.0 * 75.0f64.powf(rng.gen::<f64>());
            let sub = rng.gen::<u64>();
            let indefinite = i % 2 == 1;
            let a = if indefinite {
                let bandwidth = [1usize, 2, 5][(sub % 3) as usize];
                let depth = 0.5 + 2.0 * ((sub >> 8) % 1024) as f64 / 1023.0;
                banded_indefinite(n, bandwidth, 0.25, depth, sub)
            } else {
                random_spd(n, kappa, sub)
            };
            let b = gaussian_vec(n, &mut rng);
            SynthProblem {
                name: format!(
                    "{}-{:03}-n{n}",
                    if indefinite { "indef" } else { "spd" },
                    i
                ),
                a,
                b,
            }
        })
        .collect()
}

/// Which benchmark families to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchFamily {
    Spd,
    Indefinite,
    Banded,
    Spectra,
}

impl BenchFamily {
    pub const ALL: [BenchFamily; 4] = [
        BenchFamily::Spd,
        BenchFamily::Indefinite,
        BenchFamily::Banded,
        BenchFamily::Spectra,
    ];
}

/// Benchmark suite: `per_family` instances of each requested family at
/// size n, deterministically derived from the seed.  Output is sorted by
/// problem name so downstream records are order-canonical.
pub fn bench_suite(
    families: &[BenchFamily],
    per_family: usize,
    n: usize,
    seed: u64,
) -> Vec<SynthProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &fam in families {
        for i in 0..per_family {
            let sub = rng.gen::<u64>();
            let (name, a) = match fam {
                BenchFamily::Spd => {
                    let kappa = 2.0 * 75.0f64.powf(rng.gen::<f64>());
                    (format!("spd-{i:03}"), random_spd(n, kappa, sub))
                }
                BenchFamily::Indefinite => {
                    let kappa = 2.0 * 75.0f64.powf(rng.gen::<f64>());
                    (format!("indef-{i:03}"), random_indefinite(n, kappa, sub))
                }
                BenchFamily::Banded => (format!("banded-{i:03}"), banded_spd(n, 5, sub)),
                BenchFamily::Spectra => {
                    let kind = SpectrumKind::ALL[i % 4];
                    let eigs = spectrum(kind, n);
                    (
                        format!("spectrum-{}-{i:03}", kind.label()),
                        spd_with_spectrum(&eigs, sub),
                    )
                }
            };
            let b = gaussian_vec(n, &mut rng);
            out.push(SynthProblem { name, a, b });
        }
    }
    out.sort_by(|x, y| x.name.cmp(&y.name));
    out
}
