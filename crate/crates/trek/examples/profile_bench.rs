//! Performance profile: warm-started subspace solver vs the Moré–Sorensen
//! reference across a synthetic suite, cost counted in factorization-
//! equivalent work units (n/3 per factorization, 1 per triangular solve
//! pair), then folded into a Dolan–Moré profile.

use trek::bench::{profile_from_records, run_tr_suite, BenchOptions, RunStatus};
use trek::synth::{bench_suite, BenchFamily};

fn main() {
    let problems = bench_suite(&BenchFamily::ALL, 6, 80, 2026);
    let opts = BenchOptions {
        radii: vec![1.0, 0.5, 0.25],
        ..BenchOptions::default()
    };
    let records = run_tr_suite(&problems, &opts);

    let failures = records.iter().filter(|r| r.status != RunStatus::Ok).count();
    println!(
        "{} problems, {} records, {} failures",
        problems.len(),
        records.len(),
        failures
    );

    let profile = profile_from_records(&records);
    println!("\nfraction of problems solved within tau times the best cost:");
    println!("{:>8} {:>12} {:>16}", "tau", profile.solvers[0], profile.solvers[1]);
    for target in [1.0, 1.5, 2.0, 3.0, 5.0, 10.0] {
        // Step function: last grid point at or below the target.
        let idx = profile
            .taus
            .iter()
            .rposition(|&t| t <= target)
            .expect("tau grid starts at 1");
        println!(
            "{:>8.1} {:>12.3} {:>16.3}",
            target, profile.fractions[0][idx], profile.fractions[1][idx]
        );
    }

    // Cumulative cost tells the same story without the normalization.
    let mut totals = std::collections::BTreeMap::<&str, f64>::new();
    for r in &records {
        *totals.entry(r.solver.as_str()).or_default() += r.cost;
    }
    println!("\ntotal work units:");
    for (solver, cost) in totals {
        println!("  {solver:<14} {cost:>10.1}");
    }
}
