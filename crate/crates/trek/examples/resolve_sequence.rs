//! Warm-started radius sweep: solve once, then track a shrinking
//! trust-region radius through the same session.
//!
//! A trust-region method rejects steps by shrinking the radius and asking
//! again on the same quadratic model.  The session keeps the extended
//! Krylov subspace it already built, so each rejection usually costs a few
//! cheap projected solves and no new matrix factorization.  The run prints
//! `k_extra`, the number of subspace dimensions added per resolve; zero
//! means the stored basis absorbed the new radius outright.

use trek::{synth, trek_resolve, trek_solve, TrekOptions};

fn main() {
    let n = 500;
    let a = synth::banded_spd(n, 4, 7);
    let b = synth::gaussian_rhs(n, 8);

    let opts = TrekOptions::default();
    let radii = [1.0, 0.45, 0.2, 0.09, 0.04, 0.018, 0.008];

    let (first, mut sess) = trek_solve(&a, &b, radii[0], &opts).expect("initial solve");
    println!(
        "radius {:>7}: sigma = {:10.6}  cycles = {:2}  k_extra = -  factorizations = {}",
        radii[0],
        first.sigma,
        first.k_stop,
        sess.factorization_count()
    );

    for &delta in &radii[1..] {
        let sol = trek_resolve(&mut sess, delta).expect("resolve");
        println!(
            "radius {:>7}: sigma = {:10.6}  cycles = {:2}  k_extra = {}  factorizations = {}",
            delta,
            sol.sigma,
            sol.k_stop,
            sol.k_extra,
            sess.factorization_count()
        );
    }

    println!(
        "\ntotal linear solves with the single stored factorization: {}",
        sess.solve_count()
    );
}
