//! Acceptance gate: ten end-to-end checks, one test each.  Every test
//! prints a single `criterion N (...): PASS` line so the gate can be read
//! off a `cargo test -- --nocapture` run at a glance.
//!
//! The checks exercise the shipped behavior only: solver-vs-oracle
//! agreement, iteration and factorization economy, warm starts, the
//! low-rank study through the command-line binary, the rate model against
//! measured convergence, the elliptical norm, the band residual identity,
//! and benchmark reproducibility.

use std::process::Command;
use std::time::Instant;

use trek::bench::{
    performance_profile, profile_from_records, records_json, run_tr_suite, BenchOptions,
    RunRecord, RunStatus,
};
use trek::eig::sym_eig_full;
use trek::eks::{EksOps, EksState};
use trek::synth;
use trek::{
    dense_spectral_solve, factorize, more_sorensen_solve, nrek_solve, sym_eig, trek_resolve,
    trek_solve, trek_solve_snorm, CholeskyFactor, Constraint, RateModel, RegOptions,
    SecularProblem, SymmetricMatrix, TrekOptions,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// ‖(A + σI)x − b‖.
fn kkt_residual(a: &SymmetricMatrix, b: &[f64], x: &[f64], sigma: f64) -> f64 {
    let mut r = a.matvec(x);
    for i in 0..r.len() {
        r[i] += sigma * x[i] - b[i];
    }
    norm(&r)
}

/// Least-squares slope of ys against xs.
fn fitted_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Smallest shift making A + sI factorizable, following the same ladder
/// the production solver walks (plain attempt, then doubled Gershgorin).
fn pd_shift(a: &SymmetricMatrix) -> (f64, CholeskyFactor) {
    if let Ok(f) = factorize(a, 0.0, None) {
        return (0.0, f);
    }
    let mut s = a.gershgorin_shift();
    for _ in 0..8 {
        if let Ok(f) = factorize(a, s, None) {
            return (s, f);
        }
        s *= 2.0;
    }
    panic!("no definite shift found");
}

// ---------------------------------------------------------------------------
// 1. Objective and KKT agreement with the dense spectral oracle.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_matches_the_spectral_oracle() {
    let t0 = Instant::now();
    let problems = synth::acceptance_suite(200, 1001);
    let opts = TrekOptions::default();
    for p in &problems {
        let (first, mut sess) = trek_solve(&p.a, &p.b, 1.0, &opts)
            .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        let second = trek_resolve(&mut sess, 0.5).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        for (delta, sol) in [(1.0, &first), (0.5, &second)] {
            let oracle = dense_spectral_solve(
                &p.a,
                &p.b,
                Constraint::TrustRegion {
                    delta,
                    theta_min: 0.0,
                },
            )
            .unwrap_or_else(|e| panic!("oracle on {}: {e}", p.name));
            let fref = oracle.objective;
            assert!(
                (sol.objective - fref).abs() <= 1e-8 * (1.0 + fref.abs()),
                "{} at radius {delta}: objective {} vs oracle {}",
                p.name,
                sol.objective,
                fref
            );
            let res = kkt_residual(&p.a, &p.b, &sol.x, sol.sigma);
            assert!(
                res <= 1e-9 * (1.0 + norm(&p.b)),
                "{} at radius {delta}: KKT residual {res:.3e}",
                p.name
            );
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "overran the budget: {dt:.1}s");
    println!("criterion 1 (spectral-oracle agreement, 200 problems x 2 radii): PASS ({dt:.1}s)");
}

// ---------------------------------------------------------------------------
// 2. Iteration economy at tight tolerance.
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_stops_within_twenty_cycles() {
    let t0 = Instant::now();
    let problems = synth::acceptance_suite(200, 2002);
    let opts = TrekOptions {
        tol: 1e-10,
        max_iter: 100,
        ..TrekOptions::default()
    };
    let mut within = 0usize;
    let mut worst = 0usize;
    for p in &problems {
        let (sol, _) = trek_solve(&p.a, &p.b, 1.0, &opts)
            .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        worst = worst.max(sol.k_stop);
        if sol.k_stop <= 20 {
            within += 1;
        }
    }
    let frac = within as f64 / problems.len() as f64;
    assert!(
        frac >= 0.95,
        "only {:.1}% of solves stopped within 20 cycles (worst {worst})",
        100.0 * frac
    );
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "overran the budget: {dt:.1}s");
    println!(
        "criterion 2 (k_stop <= 20 on {:.1}% of 200 solves, worst {worst}): PASS ({dt:.1}s)",
        100.0 * frac
    );
}

// ---------------------------------------------------------------------------
// 3. Warm-started radius shrink is usually free.
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_resolves_reuse_the_subspace() {
    let t0 = Instant::now();
    let problems = synth::acceptance_suite(200, 3003);
    let opts = TrekOptions::default();
    let mut free = 0usize;
    for p in &problems {
        let (_, mut sess) = trek_solve(&p.a, &p.b, 1.0, &opts)
            .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        let sol = trek_resolve(&mut sess, 0.5).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        if sol.k_extra == 0 {
            free += 1;
        }
    }
    let frac = free as f64 / problems.len() as f64;
    assert!(
        frac >= 0.90,
        "only {:.1}% of resolves finished without growing the basis",
        100.0 * frac
    );
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "overran the budget: {dt:.1}s");
    println!(
        "criterion 3 (free resolves on {:.1}% of 200 radius shrinks): PASS ({dt:.1}s)",
        100.0 * frac
    );
}

// ---------------------------------------------------------------------------
// 4. Factorization economy against the Newton reference.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_factorization_counts() {
    let t0 = Instant::now();
    let problems = synth::acceptance_suite(100, 4004);
    let opts = TrekOptions::default();
    let mut ms_facts = 0usize;
    let mut ms_boundary = 0usize;
    for p in &problems {
        let (sol, _) = trek_solve(&p.a, &p.b, 1.0, &opts)
            .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        let expected = if p.name.starts_with("indef") { 2 } else { 1 };
        assert_eq!(
            sol.factorizations, expected,
            "{}: {} factorizations",
            p.name, sol.factorizations
        );
        let rep = more_sorensen_solve(&p.a, &p.b, 1.0, 1e-10)
            .unwrap_or_else(|e| panic!("reference on {}: {e}", p.name));
        if rep.sigma > 0.0 {
            ms_facts += rep.factorizations;
            ms_boundary += 1;
        }
    }
    assert!(
        ms_boundary >= 50,
        "too few boundary instances ({ms_boundary}) for a meaningful average"
    );
    let avg = ms_facts as f64 / ms_boundary as f64;
    assert!(
        avg >= 2.0,
        "reference solver averaged {avg:.2} factorizations on the boundary"
    );
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "overran the budget: {dt:.1}s");
    println!(
        "criterion 4 (1 factorization definite / 2 shifted, reference avg {avg:.2} on {ms_boundary} boundary cases): PASS ({dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// 5. Low-rank table through the installed binary.
// ---------------------------------------------------------------------------

fn footer_counts(csv: &str, label: &str) -> Vec<usize> {
    let line = csv
        .lines()
        .find(|l| l.starts_with(&format!("{label},")))
        .unwrap_or_else(|| panic!("no {label} row in the table"));
    line.split(',')
        .skip(1)
        .map(|v| v.parse().unwrap_or_else(|_| panic!("bad {label} cell {v}")))
        .collect()
}

#[test]
fn criterion_05_rank_window_and_bound() {
    let t0 = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_trek"))
        .args(["rank-demo", "--dist", "all", "--n", "2000", "--eps", "1e-15"])
        .output()
        .expect("spawning the solver binary");
    assert!(
        out.status.success(),
        "rank-demo failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).expect("utf-8 table");
    let ranks = footer_counts(&csv, "eps_rank");
    let bounds = footer_counts(&csv, "bt_bound");
    assert_eq!(ranks.len(), 4, "expected all four spectra");
    assert_eq!(bounds.len(), 4);
    for (rank, bound) in ranks.iter().zip(&bounds) {
        assert!(
            (30..=44).contains(rank),
            "rank {rank} left the expected window [30, 44]"
        );
        assert!(rank <= bound, "rank {rank} above its bound {bound}");
        assert_eq!(*bound, 44, "a priori bound moved");
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 300.0, "overran the budget: {dt:.1}s");
    println!(
        "criterion 5 (ranks {:?} inside [30, 44], bound 44): PASS ({dt:.1}s)",
        ranks
    );
}

// ---------------------------------------------------------------------------
// 6. Rate-curve anchors and measured subspace decay.
// ---------------------------------------------------------------------------

/// Grows a plain extended basis for A (definite) and returns the projection
/// errors ‖x − VVᵀx‖ of each target after every new basis vector.
fn projection_decay(
    a: &SymmetricMatrix,
    b: &[f64],
    targets: &[Vec<f64>],
    cycles: usize,
) -> Vec<Vec<f64>> {
    let factor = factorize(a, 0.0, None).expect("definite matrix");
    let ops = EksOps::new(a, 0.0, &factor);
    let mut eks = EksState::init(&ops, b, cycles, false).expect("nonzero rhs");
    for _ in 0..cycles {
        if !eks.step_neg(&ops).expect("factor solve") {
            break;
        }
        if !eks.step_pos(&ops).expect("factor solve") {
            break;
        }
        eks.push_delta_neg(&ops);
    }
    let basis = eks.basis();
    targets
        .iter()
        .map(|x| {
            let mut r = x.clone();
            let mut errs = Vec::with_capacity(basis.len());
            for v in basis {
                let c = dot(&r, v);
                for i in 0..r.len() {
                    r[i] -= c * v[i];
                }
                errs.push(norm(&r));
            }
            errs
        })
        .collect()
}

#[test]
fn criterion_06_rate_anchors_and_measured_decay() {
    let t0 = Instant::now();

    // Anchors of E on the interval [5, 100].
    let model = RateModel::new(5.0, 100.0).unwrap();
    let e0 = model.rate_e(0.0).unwrap();
    assert!(e0.abs() <= 1e-12, "E(0) = {e0:.3e}");
    let el = model.rate_e(-5.0).unwrap();
    assert!((el + 1.0).abs() <= 1e-12, "E(-lambda1) = {el}");
    let er = model.rate_e(-100.0).unwrap();
    assert!((er + 1.0).abs() <= 1e-12, "E(-lambdan) = {er}");
    let peak = model.rate_e(500.0_f64.sqrt()).unwrap();
    let q = 20.0_f64.powf(0.25);
    let want = ((q - 1.0) / (q + 1.0)).powi(2);
    assert!(
        (peak - want).abs() <= 1e-12,
        "peak {peak} vs closed form {want}"
    );

    // Measured decay on an equispaced spectrum over [1, 100] (the spectrum
    // an interval bound has to honor), n = 200.  One basis serves every
    // shift; the per-vector slope must not be worse than the ceiling
    // log((kappa^{1/4}-1)/(kappa^{1/4}+1)) + 0.1.
    let n = 200;
    let eigs: Vec<f64> = (0..n)
        .map(|i| 1.0 + 99.0 * i as f64 / (n - 1) as f64)
        .collect();
    let a = synth::spd_with_spectrum(&eigs, 2024);
    let b = synth::gaussian_rhs(n, 2025);
    let kappa: f64 = 100.0;
    let ceiling = {
        let q = kappa.powf(0.25);
        ((q - 1.0) / (q + 1.0)).ln() + 0.1
    };
    let shifts = [10.0, 1.0, 100.0]; // sqrt(lambda1*lambdan) is the worst
    let targets: Vec<Vec<f64>> = shifts
        .iter()
        .map(|&s| {
            factorize(&a, s, None)
                .unwrap()
                .solve(&b)
                .expect("dimension matches")
        })
        .collect();
    let zero_shift = factorize(&a, 0.0, None).unwrap().solve(&b).unwrap();
    let mut all = targets.clone();
    all.push(zero_shift);
    let decays = projection_decay(&a, &b, &all, 60);

    for (s, decay) in shifts.iter().zip(&decays) {
        // Fit over the stretch that is still converging.
        let floor = 1e-12 * decay[0];
        let pts: Vec<(f64, f64)> = decay
            .iter()
            .enumerate()
            .skip(2)
            .take_while(|(_, e)| **e > floor)
            .map(|(l, e)| (l as f64, e.ln()))
            .collect();
        assert!(pts.len() >= 6, "only {} usable points at shift {s}", pts.len());
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let slope = fitted_slope(&xs, &ys);
        assert!(
            slope <= ceiling,
            "shift {s}: measured slope {slope:.4} above ceiling {ceiling:.4}"
        );
    }
    // sigma = 0: the very first inverse direction captures x exactly.
    let zero_decay = decays.last().unwrap();
    assert!(
        zero_decay[1] <= 1e-10 * norm(all.last().unwrap()),
        "unshifted solve not in the two-vector basis: {:.3e}",
        zero_decay[1]
    );

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 30.0, "overran the budget: {dt:.1}s");
    println!("criterion 6 (rate anchors at 1e-12, measured slopes under the ceiling): PASS ({dt:.1}s)");
}

// ---------------------------------------------------------------------------
// 7. Regularized multiplier identity and the quadratic special case.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_regularized_multiplier() {
    let t0 = Instant::now();
    let problems = synth::acceptance_suite(50, 7007);
    for (i, p) in problems.iter().enumerate() {
        let r = [2.0, 3.0, 4.0][i % 3];
        let lambda1 = sym_eig(&p.a).unwrap().eigenvalues[0];
        let rho = if r == 2.0 {
            // The quadratic penalty shifts by exactly rho, so keep A + rho I
            // comfortably definite.
            1.0 + 1.5 * (-lambda1).max(0.0)
        } else {
            1.0
        };
        let mut opts = RegOptions::new(rho, r);
        if r == 2.0 {
            opts.tol = 1e-13;
        }
        let (sol, _) = nrek_solve(&p.a, &p.b, &opts)
            .unwrap_or_else(|e| panic!("{} (r = {r}): {e}", p.name));
        let sigma_from_norm = rho * norm(&sol.x).powf(r - 2.0);
        assert!(
            (sol.sigma - sigma_from_norm).abs() <= 1e-8 * (1.0 + sol.sigma.abs()),
            "{} (r = {r}): sigma {} vs rho*|x|^(r-2) {}",
            p.name,
            sol.sigma,
            sigma_from_norm
        );
        if r == 2.0 {
            let direct = factorize(&p.a, rho, None)
                .unwrap()
                .solve(&p.b)
                .expect("dimension matches");
            let diff: Vec<f64> = sol.x.iter().zip(&direct).map(|(a, b)| a - b).collect();
            assert!(
                norm(&diff) <= 1e-10 * (1.0 + norm(&direct)),
                "{}: quadratic penalty drifted {:.3e} from the shifted solve",
                p.name,
                norm(&diff)
            );
        }
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 30.0, "overran the budget: {dt:.1}s");
    println!("criterion 7 (multiplier identity for r = 2, 3, 4 on 50 problems): PASS ({dt:.1}s)");
}

// ---------------------------------------------------------------------------
// 8. Elliptical norm: identity metric and explicit diagonal transformation.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_elliptical_norm_consistency() {
    let t0 = Instant::now();
    let opts = TrekOptions::default();
    let problems = synth::acceptance_suite(40, 8008);

    // S = I must reproduce the plain solver.
    for p in problems.iter().take(20) {
        let eye = SymmetricMatrix::identity(p.a.dim());
        let (plain, _) = trek_solve(&p.a, &p.b, 1.0, &opts).unwrap();
        let (metric, _) = trek_solve_snorm(&p.a, &p.b, &eye, 1.0, &opts).unwrap();
        assert!(
            (plain.objective - metric.objective).abs() <= 1e-10 * (1.0 + plain.objective.abs()),
            "{}: identity metric moved the objective",
            p.name
        );
        assert!(
            (plain.sigma - metric.sigma).abs() <= 1e-10 * (1.0 + plain.sigma),
            "{}: identity metric moved the multiplier",
            p.name
        );
    }

    // Diagonal S: solving with the metric must agree with the explicitly
    // transformed Euclidean problem  A~ = S^{-1/2} A S^{-1/2}, b~ = S^{-1/2} b.
    for (j, p) in problems.iter().skip(20).enumerate() {
        let n = p.a.dim();
        let diag: Vec<f64> = (0..n)
            .map(|i| 0.5 + 2.5 * ((i * 2654435761 + j * 40503) % 1000) as f64 / 999.0)
            .collect();
        let s = SymmetricMatrix::diagonal(&diag);
        let root_inv: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
        let lower = p.a.to_dense_lower();
        let mut tl = Vec::with_capacity(lower.len());
        let mut idx = 0;
        for row in 0..n {
            for col in 0..=row {
                tl.push(lower[idx] * root_inv[row] * root_inv[col]);
                idx += 1;
            }
        }
        let at = SymmetricMatrix::from_dense_lower(n, tl).unwrap();
        let bt: Vec<f64> = p.b.iter().zip(&root_inv).map(|(v, r)| v * r).collect();

        let (metric, _) = trek_solve_snorm(&p.a, &p.b, &s, 1.0, &opts)
            .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        let (euclid, _) =
            trek_solve(&at, &bt, 1.0, &opts).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        assert!(
            (metric.objective - euclid.objective).abs()
                <= 1e-8 * (1.0 + euclid.objective.abs()),
            "{}: objective {} vs transformed {}",
            p.name,
            metric.objective,
            euclid.objective
        );
        assert!(
            (metric.sigma - euclid.sigma).abs() <= 1e-8 * (1.0 + euclid.sigma),
            "{}: multiplier {} vs transformed {}",
            p.name,
            metric.sigma,
            euclid.sigma
        );
        // Stationarity of the metric solution against the original data.
        let mut r = p.a.matvec(&metric.x);
        for i in 0..n {
            r[i] += metric.sigma * diag[i] * metric.x[i] - p.b[i];
        }
        assert!(
            norm(&r) <= 1e-8 * (1.0 + norm(&p.b)),
            "{}: metric stationarity residual {:.3e}",
            p.name,
            norm(&r)
        );
    }
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 30.0, "overran the budget: {dt:.1}s");
    println!("criterion 8 (identity metric to 1e-10, diagonal metric to 1e-8): PASS ({dt:.1}s)");
}

// ---------------------------------------------------------------------------
// 9. Band residual identity at every step.
// ---------------------------------------------------------------------------

enum MirrorKind {
    TrustRegion { delta: f64 },
    Regularized { rho: f64, r: f64 },
}

/// Replays the production loop (grow, project, solve) and checks the
/// two-band residual against a direct evaluation at every dimension.
/// Returns the number of dimensions checked.
fn check_band_residuals(a: &SymmetricMatrix, b: &[f64], kind: MirrorKind, m: usize) -> usize {
    let (shift, factor) = pd_shift(a);
    let ops = EksOps::new(a, shift, &factor);
    let mut eks = EksState::init(&ops, b, m, false).expect("nonzero rhs");
    let bnorm = norm(b);
    let mut checked = 0;
    loop {
        let l = eks.p_cols();
        if l % 2 == 0 {
            let k = l / 2 + 1;
            if k > m {
                break;
            }
            eks.step_neg(&ops).expect("factor solve");
            if k == 1 {
                eks.push_start_column();
            } else {
                eks.push_odd_column();
            }
        } else {
            let k = (l + 1) / 2;
            eks.step_pos(&ops).expect("factor solve");
            if k >= m {
                break;
            }
            eks.push_delta_neg(&ops);
            eks.push_even_column();
        }
        let l = eks.p_cols();
        let dec = sym_eig_full(l, &eks.p_full(l)).expect("band eigensolve");
        let mut e1 = vec![0.0; l];
        e1[0] = eks.delta0();
        let d = dec.to_eigenbasis(&e1);
        // Same secular solves the production driver performs, including the
        // scale bookkeeping around the definite shift.
        let (y, sigma_a) = match kind {
            MirrorKind::TrustRegion { delta } => {
                let prob = SecularProblem {
                    lambdas: dec.eigenvalues.clone(),
                    d,
                    constraint: Constraint::TrustRegion {
                        delta,
                        theta_min: -shift,
                    },
                };
                let sec = trek::solve_diag_tr(&prob).expect("secular");
                let sigma = if sec.boundary { sec.sigma + shift } else { 0.0 };
                (dec.from_eigenbasis(&sec.z), sigma)
            }
            MirrorKind::Regularized { rho, r } => {
                let lam: Vec<f64> = dec.eigenvalues.iter().map(|l| l - shift).collect();
                let prob = SecularProblem {
                    lambdas: lam,
                    d,
                    constraint: Constraint::Regularization { rho, r },
                };
                let sec = trek::solve_diag_reg(&prob).expect("secular");
                (dec.from_eigenbasis(&sec.z), sec.sigma)
            }
        };
        let from_bands = eks.residual_norm(&y);
        let x = eks.combine(&y);
        let direct = kkt_residual(a, b, &x, sigma_a);
        assert!(
            (from_bands - direct).abs() <= 1e-10 * bnorm,
            "dim {l}: band residual {from_bands:.6e} vs direct {direct:.6e}"
        );
        checked += 1;
        if eks.breakdown() {
            break;
        }
    }
    checked
}

#[test]
fn criterion_09_band_residual_identity() {
    let t0 = Instant::now();
    let tr_problems = synth::acceptance_suite(30, 9009);
    let mut dims = 0usize;
    for p in &tr_problems {
        dims += check_band_residuals(&p.a, &p.b, MirrorKind::TrustRegion { delta: 1.0 }, 12);
    }
    let reg_problems = synth::acceptance_suite(20, 9090);
    for (i, p) in reg_problems.iter().enumerate() {
        let r = [3.0, 4.0][i % 2];
        dims += check_band_residuals(&p.a, &p.b, MirrorKind::Regularized { rho: 1.0, r }, 12);
    }
    assert!(dims >= 500, "only {dims} dimensions exercised");
    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 30.0, "overran the budget: {dt:.1}s");
    println!(
        "criterion 9 (band residual = direct residual at {dims} subspace steps of 50 runs): PASS ({dt:.1}s)"
    );
}

// ---------------------------------------------------------------------------
// 10. Benchmark profile against a brute-force oracle, and determinism.
// ---------------------------------------------------------------------------

/// Independent Dolan–Moré evaluation: scan records, build the cost matrix,
/// and count fractions directly for every candidate tau.
fn brute_force_profile(records: &[RunRecord]) -> (Vec<String>, Vec<f64>, Vec<Vec<f64>>) {
    let bits = |v: Option<f64>| v.map_or(u64::MAX, f64::to_bits);
    let mut solvers: Vec<String> = Vec::new();
    let mut rows: Vec<(String, u64, u64, u64)> = Vec::new();
    for r in records {
        if !solvers.iter().any(|s| *s == r.solver) {
            solvers.push(r.solver.clone());
        }
        let key = (r.problem.clone(), bits(r.delta), bits(r.rho), bits(r.power));
        if !rows.iter().any(|k| *k == key) {
            rows.push(key);
        }
    }
    let mut cost = vec![vec![f64::INFINITY; solvers.len()]; rows.len()];
    for r in records {
        let key = (r.problem.clone(), bits(r.delta), bits(r.rho), bits(r.power));
        let p = rows.iter().position(|k| *k == key).unwrap();
        let s = solvers.iter().position(|s| *s == r.solver).unwrap();
        if r.status == RunStatus::Ok {
            cost[p][s] = r.cost;
        }
    }
    let ratio: Vec<Vec<f64>> = cost
        .iter()
        .map(|row| {
            let best = row.iter().cloned().fold(f64::INFINITY, f64::min);
            row.iter()
                .map(|&c| {
                    if c.is_finite() && best.is_finite() {
                        c / best
                    } else {
                        f64::INFINITY
                    }
                })
                .collect()
        })
        .collect();
    let mut taus: Vec<f64> = ratio
        .iter()
        .flatten()
        .cloned()
        .filter(|t| t.is_finite())
        .chain(std::iter::once(1.0))
        .collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();
    let fractions: Vec<Vec<f64>> = (0..solvers.len())
        .map(|s| {
            taus.iter()
                .map(|&t| {
                    let hit = ratio.iter().filter(|row| row[s] <= t).count();
                    hit as f64 / rows.len() as f64
                })
                .collect()
        })
        .collect();
    (solvers, taus, fractions)
}

#[test]
fn criterion_10_profile_matches_brute_force() {
    let t0 = Instant::now();
    let problems = synth::bench_suite(&synth::BenchFamily::ALL, 5, 40, 1234);
    let opts = BenchOptions::default();
    let records = run_tr_suite(&problems, &opts);
    assert!(
        records.iter().all(|r| r.status == RunStatus::Ok),
        "a benchmark run failed; the comparison would be trivial"
    );

    let profile = profile_from_records(&records);
    let (solvers, taus, fractions) = brute_force_profile(&records);
    assert_eq!(profile.solvers, solvers);
    assert_eq!(profile.taus, taus, "tau grids differ");
    assert_eq!(profile.fractions, fractions, "profile curves differ");

    // The low-level entry point agrees too when fed the same matrix.
    let mut keys: Vec<(String, Option<u64>)> = Vec::new();
    for r in &records {
        let k = (r.problem.clone(), r.delta.map(f64::to_bits));
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let mut cost = vec![vec![f64::INFINITY; solvers.len()]; keys.len()];
    for r in &records {
        let k = (r.problem.clone(), r.delta.map(f64::to_bits));
        let p = keys.iter().position(|q| *q == k).unwrap();
        let s = solvers.iter().position(|s| *s == r.solver).unwrap();
        if r.status == RunStatus::Ok {
            cost[p][s] = r.cost;
        }
    }
    let (taus2, fractions2) = performance_profile(&cost);
    assert_eq!(taus2, profile.taus);
    assert_eq!(fractions2, profile.fractions);

    // Determinism: the same seed gives byte-identical records.
    let again = run_tr_suite(&problems, &opts);
    assert_eq!(records_json(&records), records_json(&again));

    let dt = t0.elapsed().as_secs_f64();
    assert!(dt < 60.0, "overran the budget: {dt:.1}s");
    println!(
        "criterion 10 (profile over {} records matches the brute-force oracle bit for bit): PASS ({dt:.1}s)",
        records.len()
    );
}
