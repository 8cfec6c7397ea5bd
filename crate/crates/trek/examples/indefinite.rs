//! Indefinite Hessian: the boundary multiplier must climb past the most
//! negative eigenvalue before (A + sigma I) turns positive definite.

use trek::{sym_eig, synth, trek_solve, TrekOptions};

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn main() {
    let n = 120;
    let a = synth::banded_indefinite(n, 2, 0.25, 1.5, 3);
    let b = synth::gaussian_rhs(n, 4);
    let delta = 0.8;

    let (sol, sess) = trek_solve(&a, &b, delta, &TrekOptions::default()).expect("solve");

    // Dense eigensolve only to report lambda_1; the solver never needs it.
    let lambda1 = sym_eig(&a).expect("eig").eigenvalues[0];
    println!("lambda_1(A)    = {lambda1:.6}");
    println!("sigma          = {:.6}", sol.sigma);
    println!("sigma + lambda_1 = {:.3e} (must be >= 0)", sol.sigma + lambda1);
    println!("|x| - delta    = {:.3e}", norm(&sol.x) - delta);
    println!("residual       = {:.3e}", sol.resid);
    println!("factorizations = {} (one probe at the Gershgorin shift, one at sigma)",
        sess.factorization_count());

    assert!(sol.sigma + lambda1 >= -1e-8);
    assert!(!sol.interior, "an indefinite model has no interior minimizer");
}
