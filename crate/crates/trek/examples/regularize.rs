//! Norm regularization: minimize the quadratic model plus a power penalty
//! (rho / r) |x|^r, the subproblem shape used by cubic-regularization
//! methods (r = 3).
//!
//! The stationarity condition ties the shift to the solution norm,
//! sigma = rho |x|^(r-2), and unlike the trust-region case there is no
//! interior branch and no hard case.  Re-solving at a larger weight reuses
//! the session the same way radius shrinking does.

use trek::{nrek_resolve, nrek_solve, synth, RegOptions};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn main() {
    let n = 250;
    let a = synth::random_indefinite(n, 500.0, 5);
    let b = synth::gaussian_rhs(n, 6);

    let opts = RegOptions::new(1.0, 3.0);
    let (sol, mut sess) = nrek_solve(&a, &b, &opts).expect("solve");
    report("rho = 1.0", &sol, opts.r);

    // A trust-region-style rejection raises rho; the session absorbs it.
    for rho in [2.5, 6.0, 15.0] {
        let sol = nrek_resolve(&mut sess, rho).expect("resolve");
        report(&format!("rho = {rho}"), &sol, opts.r);
    }
    println!("\nfactorizations across the whole sweep: {}", sess.factorization_count());

    // r = 2 degenerates to Tikhonov: the shift is exactly the weight.
    let mut quad = RegOptions::new(0.75, 2.0);
    quad.tol = 1e-12;
    let (sol, _) = nrek_solve(&a, &b, &quad).expect("quadratic penalty");
    println!("\nr = 2 check: sigma = {:.12} (weight 0.75)", sol.sigma);
    assert!((sol.sigma - 0.75).abs() <= 1e-10);
}

fn report(label: &str, sol: &trek::SubproblemSolution, r: f64) {
    println!(
        "{label:>10}: |x| = {:.6}  sigma = {:.6}  sigma/|x|^(r-2) = {:.6}  k_extra = {}",
        norm(&sol.x),
        sol.sigma,
        sol.sigma / norm(&sol.x).powf(r - 2.0),
        sol.k_extra
    );
}
