//! Trust region measured in an elliptical norm |x|_S = sqrt(x' S x).
//!
//! The solver works on the pencil (A + sigma S) directly instead of
//! folding S^{-1/2} into the matrix, so A keeps its sparsity.  S has to be
//! symmetric positive definite; for indefinite A it must also be
//! diagonally dominant, because the solver bounds the pencil's leftmost
//! eigenvalue with a Gershgorin argument in the S-weighted geometry.

use trek::{synth, trek_solve_snorm, SymmetricMatrix, TrekOptions};

fn main() {
    let n = 300;
    let a = synth::banded_indefinite(n, 3, 0.25, 1.0, 21);
    let b = synth::gaussian_rhs(n, 22);
    let delta = 0.6;

    // Tridiagonal mass-matrix shape: dominant diagonal, weak coupling.
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        entries.push((i, i, 2.0 + (i as f64 / n as f64)));
        if i + 1 < n {
            entries.push((i + 1, i, 0.4));
        }
    }
    let s = SymmetricMatrix::from_coo(n, &entries).expect("S is well formed");

    let (sol, sess) =
        trek_solve_snorm(&a, &b, &s, delta, &TrekOptions::default()).expect("solve");

    let snorm = s.quad(&sol.x).sqrt();
    println!("|x|_S - delta  = {:.3e}", snorm - delta);
    println!("sigma          = {:.6}", sol.sigma);
    println!("residual       = {:.3e} (measured on (A + sigma S) x - b)", sol.resid);
    println!("cycles         = {}", sol.k_stop);
    println!("factorizations = {}", sess.factorization_count());

    // Euclidean norm differs from the S-norm; the constraint binds in S.
    let enorm = sol.x.iter().map(|x| x * x).sum::<f64>().sqrt();
    println!("|x|_2          = {enorm:.6} (unconstrained, for contrast)");

    assert!((snorm - delta).abs() <= 1e-8 * delta);
}
