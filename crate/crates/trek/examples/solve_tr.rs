//! Solve one trust-region subproblem on a dense SPD instance and check the
//! answer against the Moré–Sorensen reference.
//!
//! ```text
//! cargo run --release --example solve_tr
//! ```

use trek::{more_sorensen_solve, synth, trek_solve, TrekOptions};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn main() {
    let n = 200;
    let a = synth::random_spd(n, 1e3, 42);
    let b = synth::gaussian_rhs(n, 43);
    let delta = 0.1;

    let opts = TrekOptions::default();
    let (sol, sess) = trek_solve(&a, &b, delta, &opts).expect("solve failed");

    println!("n = {n}, radius = {delta}");
    println!("sigma          = {:.12e}", sol.sigma);
    println!("|x|            = {:.12e}", norm(&sol.x));
    println!("objective      = {:.12e}", sol.objective);
    println!("residual       = {:.3e}", sol.resid);
    println!("interior       = {}", sol.interior);
    println!("krylov cycles  = {}", sol.k_stop);
    println!("factorizations = {}", sess.factorization_count());

    // The reference solver factors (A + sigma I) at every Newton step; the
    // subspace solver paid for exactly one factorization here.
    let reference = more_sorensen_solve(&a, &b, delta, 1e-12).expect("reference failed");
    println!(
        "\nMore-Sorensen reference: sigma = {:.12e} ({} factorizations)",
        reference.sigma, reference.factorizations
    );
    let gap = (sol.objective - reference.objective).abs() / (1.0 + reference.objective.abs());
    println!("relative objective gap   = {gap:.3e}");
    assert!(gap < 1e-9, "solutions disagree");
}
