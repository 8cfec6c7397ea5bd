//! Benchmark records and Dolan–Moré performance profiles.
//!
//! A benchmark run produces one [`RunRecord`] per (problem, solver,
//! parameter) triple.  The profile machinery compares solvers by the ratio
//! of each one's cost to the best cost on that problem, then plots the
//! fraction of problems each solver handles within a factor τ of the best.
//!
//! Cost is a deterministic work-unit count by default (n²-flop units:
//! a dense factorization is n/3 units, a triangular solve pair is 1), so
//! identical seeds give byte-identical output.  Wall-clock seconds can be
//! recorded alongside with [`BenchOptions::with_times`], but the profile
//! always runs on the work units.  For warm-started radius sequences the
//! cost of a record is cumulative over the sequence so far: "what did it
//! take to have answered every radius up to this one".

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::oracle::{more_sorensen_solve, OracleError};
use crate::synth::SynthProblem;
use crate::trek::{trek_resolve, trek_solve, TrekError, TrekOptions};

/// Outcome flag on a record.  `MaxIter` covers any run that stopped at an
/// iteration bound, including the reference solver declining a hard-case
/// instance after its bracket collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    MaxIter,
    FactorizationFailure,
}

/// One solver invocation.  Optional floats stay `None` on failed runs so
/// the JSON never carries non-finite numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub problem: String,
    pub solver: String,
    pub n: usize,
    pub delta: Option<f64>,
    pub rho: Option<f64>,
    pub power: Option<f64>,
    pub objective: Option<f64>,
    pub sigma: Option<f64>,
    pub k_stop: usize,
    pub k_extra: usize,
    pub factorizations: usize,
    pub wall_s: Option<f64>,
    pub cost: f64,
    pub status: RunStatus,
}

pub const RECORD_SCHEMA: u32 = 1;

/// Performance profile on a shared τ grid.
///
/// `fractions[s][t]` is the share of problems solver `s` solved within a
/// factor `taus[t]` of the best solver on each problem.  Rows are
/// nondecreasing and end at the solver's overall success fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solvers: Vec<String>,
    pub taus: Vec<f64>,
    pub fractions: Vec<Vec<f64>>,
}

/// Dolan–Moré profile from a cost matrix.
///
/// `costs[p]` holds problem p's cost under each solver; failures are
/// `f64::INFINITY`.  Returns the τ grid (the sorted distinct performance
/// ratios, always including 1) and one fraction row per solver.
pub fn performance_profile(costs: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let np = costs.len();
    if np == 0 {
        return (vec![1.0], Vec::new());
    }
    let ns = costs[0].len();
    assert!(
        costs.iter().all(|row| row.len() == ns),
        "ragged cost matrix"
    );

    // ratios[p][s] = cost / best cost on p; ∞ when the run failed or every
    // solver failed the problem.
    let mut ratios = vec![vec![f64::INFINITY; ns]; np];
    for (p, row) in costs.iter().enumerate() {
        let best = row.iter().cloned().fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            assert!(best > 0.0, "nonpositive cost in profile input");
            for (s, &c) in row.iter().enumerate() {
                if c.is_finite() {
                    ratios[p][s] = c / best;
                }
            }
        }
    }

    let mut taus: Vec<f64> = ratios
        .iter()
        .flatten()
        .cloned()
        .filter(|r| r.is_finite())
        .chain(std::iter::once(1.0))
        .collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();

    let fractions = (0..ns)
        .map(|s| {
            taus.iter()
                .map(|&t| {
                    let hit = ratios.iter().filter(|r| r[s] <= t).count();
                    hit as f64 / np as f64
                })
                .collect()
        })
        .collect();
    (taus, fractions)
}

/// Groups records by (problem, parameter) and solver, then profiles them.
/// Solver order is first appearance; a missing or non-`Ok` record counts
/// as a failure on that problem.
pub fn profile_from_records(records: &[RunRecord]) -> ProfileCurve {
    let mut solvers: Vec<String> = Vec::new();
    let mut keys: Vec<(String, [u64; 3])> = Vec::new();
    let param_bits = |r: &RunRecord| {
        let bits = |v: Option<f64>| v.map_or(u64::MAX, f64::to_bits);
        [bits(r.delta), bits(r.rho), bits(r.power)]
    };
    for r in records {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
        let key = (r.problem.clone(), param_bits(r));
        if !keys.contains(&key) {
            keys.push(key);
        }
    }

    let mut costs = vec![vec![f64::INFINITY; solvers.len()]; keys.len()];
    for r in records {
        let p = keys
            .iter()
            .position(|k| k.0 == r.problem && k.1 == param_bits(r))
            .unwrap();
        let s = solvers.iter().position(|v| *v == r.solver).unwrap();
        if r.status == RunStatus::Ok {
            costs[p][s] = r.cost;
        }
    }

    let (taus, fractions) = performance_profile(&costs);
    ProfileCurve {
        solvers,
        taus,
        fractions,
    }
}

/// CSV for a profile: `tau,<solver>,...` header, one row per grid point.
pub fn profile_csv(profile: &ProfileCurve) -> String {
    let mut out = String::from("tau");
    for s in &profile.solvers {
        out.push(',');
        out.push_str(s);
    }
    out.push('\n');
    for (t, &tau) in profile.taus.iter().enumerate() {
        out.push_str(&format!("{tau}"));
        for row in &profile.fractions {
            out.push_str(&format!(",{}", row[t]));
        }
        out.push('\n');
    }
    out
}

/// JSON array of records, pretty-printed, trailing newline.
pub fn records_json(records: &[RunRecord]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records hold no non-finite floats");
    s.push('\n');
    s
}

/// Flat CSV of records; empty cells for absent optionals.
pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(
        "schema,problem,solver,n,delta,rho,power,objective,sigma,k_stop,k_extra,factorizations,wall_s,cost,status\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
    for r in records {
        let status = match r.status {
            RunStatus::Ok => "ok",
            RunStatus::MaxIter => "max-iter",
            RunStatus::FactorizationFailure => "factorization-failure",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.schema,
            r.problem,
            r.solver,
            r.n,
            opt(r.delta),
            opt(r.rho),
            opt(r.power),
            opt(r.objective),
            opt(r.sigma),
            r.k_stop,
            r.k_extra,
            r.factorizations,
            opt(r.wall_s),
            r.cost,
            status,
        ));
    }
    out
}

/// Knobs for a benchmark sweep.
#[derive(Debug, Clone)]
pub struct BenchOptions {
    /// Strictly decreasing radius sequence; the subspace solver warm-starts
    /// across it while the reference solver starts each radius fresh.
    pub radii: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Record wall-clock seconds per record (cumulative like `cost`).
    /// Output stops being byte-reproducible across runs when set.
    pub with_times: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            radii: vec![1.0, 0.5],
            tol: 1e-10,
            max_iter: 100,
            with_times: false,
        }
    }
}

fn fact_units(n: usize) -> f64 {
    n as f64 / 3.0
}

/// Runs the trust-region comparison over a problem set: the subspace
/// solver against the Moré–Sorensen reference, both across the radius
/// sequence.  Records come back sorted by problem name, then solver, with
/// radii in sweep order.
pub fn run_tr_suite(problems: &[SynthProblem], opts: &BenchOptions) -> Vec<RunRecord> {
    assert!(
        opts.radii.windows(2).all(|w| w[1] < w[0]),
        "radii must be strictly decreasing"
    );
    let tr_opts = TrekOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        ..TrekOptions::default()
    };
    let mut records = Vec::with_capacity(problems.len() * opts.radii.len() * 2);

    for p in problems {
        let n = p.a.dim();
        let base = RunRecord {
            schema: RECORD_SCHEMA,
            problem: p.name.clone(),
            solver: String::new(),
            n,
            delta: None,
            rho: None,
            power: None,
            objective: None,
            sigma: None,
            k_stop: 0,
            k_extra: 0,
            factorizations: 0,
            wall_s: None,
            cost: 0.0,
            status: RunStatus::Ok,
        };

        // Warm-started subspace solver: one session across the sweep.
        let start = Instant::now();
        let mut session = None;
        let mut lost_cost = 0.0; // work done before a failed run dropped the session
        for &delta in &opts.radii {
            let outcome = match session.take() {
                None => trek_solve(&p.a, &p.b, delta, &tr_opts),
                Some(mut sess) => trek_resolve(&mut sess, delta).map(|sol| (sol, sess)),
            };
            let mut rec = RunRecord {
                solver: "trek".into(),
                delta: Some(delta),
                ..base.clone()
            };
            match outcome {
                Ok((sol, sess)) => {
                    rec.objective = Some(sol.objective);
                    rec.sigma = Some(sol.sigma);
                    rec.k_stop = sol.k_stop;
                    rec.k_extra = sol.k_extra;
                    rec.factorizations = sol.factorizations;
                    rec.cost = lost_cost
                        + fact_units(n) * sess.factorization_count() as f64
                        + sess.solve_count() as f64;
                    session = Some(sess);
                }
                Err(err) => {
                    // The session is gone; later radii start fresh.  Work
                    // spent is approximated from the telemetry we kept.
                    let (status, spent) = match err {
                        TrekError::MaxIterReached { best, .. } => {
                            rec.objective = Some(best.objective);
                            rec.sigma = Some(best.sigma);
                            rec.k_stop = best.k_stop;
                            rec.k_extra = best.k_extra;
                            rec.factorizations = best.factorizations;
                            let units = fact_units(n) * best.factorizations as f64
                                + (3 * best.k_stop + 1) as f64;
                            (RunStatus::MaxIter, units)
                        }
                        _ => (RunStatus::FactorizationFailure, fact_units(n)),
                    };
                    rec.status = status;
                    lost_cost += spent;
                    rec.cost = lost_cost;
                }
            }
            if opts.with_times {
                rec.wall_s = Some(start.elapsed().as_secs_f64());
            }
            records.push(rec);
        }

        // Reference solver: fresh at each radius, cumulative cost.
        let start = Instant::now();
        let mut cum = 0.0;
        for &delta in &opts.radii {
            let mut rec = RunRecord {
                solver: "more-sorensen".into(),
                delta: Some(delta),
                ..base.clone()
            };
            match more_sorensen_solve(&p.a, &p.b, delta, opts.tol) {
                Ok(rep) => {
                    rec.objective = Some(rep.objective);
                    rec.sigma = Some(rep.sigma);
                    rec.k_stop = rep.iterations;
                    rec.factorizations = rep.factorizations;
                    cum += fact_units(n) * rep.factorizations as f64 + 2.0 * rep.iterations as f64;
                }
                Err(err) => {
                    let (status, spent) = match err {
                        OracleError::MaxIterReached { iterations, sigma } => {
                            rec.sigma = Some(sigma);
                            rec.k_stop = iterations;
                            (
                                RunStatus::MaxIter,
                                iterations as f64 * (fact_units(n) + 2.0),
                            )
                        }
                        OracleError::HardCase { sigma, .. } => {
                            rec.sigma = Some(sigma);
                            (RunStatus::MaxIter, 100.0 * (fact_units(n) + 2.0))
                        }
                        OracleError::Linalg(_) => {
                            (RunStatus::FactorizationFailure, fact_units(n))
                        }
                    };
                    rec.status = status;
                    cum += spent;
                }
            }
            rec.cost = cum;
            if opts.with_times {
                rec.wall_s = Some(start.elapsed().as_secs_f64());
            }
            records.push(rec);
        }
    }

    records.sort_by(|a, b| (&a.problem, &a.solver).cmp(&(&b.problem, &b.solver)));
    records
}
