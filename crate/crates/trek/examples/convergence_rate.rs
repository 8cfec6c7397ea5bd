//! Convergence-rate landscape for the shifted systems (A + sigma I) x = b
//! solved through an extended Krylov space built at shift 0.
//!
//! E(sigma) is the asymptotic error-reduction factor per basis pair; the
//! worst shift on sigma > 0 sits at sqrt(lambda_1 lambda_n), where the
//! rate equals ((kappa^(1/4) - 1)/(kappa^(1/4) + 1))^2.  That fourth root
//! is the whole point: a plain Krylov space pays the square root.

use trek::RateModel;

fn main() {
    let model = RateModel::new(5.0, 100.0).expect("0 < lambda1 < lambdan");
    println!(
        "spectrum [{}, {}], kappa = {}\n",
        model.lambda1, model.lambdan, model.kappa
    );

    println!("{:>10} {:>12} {:>12}", "sigma", "E(sigma)", "mu(sigma)");
    for sigma in [0.0, 1.0, 5.0, 22.36, 50.0, model.c, 200.0, 1e4] {
        let e = model.rate_e(sigma).expect("sigma >= 0 is always valid");
        let mu = model.rate_mu(sigma).unwrap();
        println!("{sigma:>10.2} {e:>12.6} {mu:>12.6}");
    }

    let peak_sigma = (model.lambda1 * model.lambdan).sqrt();
    let peak = model.rate_e(peak_sigma).unwrap();
    let ceiling = model.kappa_rate();
    println!("\npeak at sigma = sqrt(lambda1 lambdan) = {peak_sigma:.4}");
    println!("E there        = {peak:.10}");
    println!("ceiling^2      = {:.10} (fourth-root-of-kappa law)", ceiling * ceiling);
    assert!((peak - ceiling * ceiling).abs() <= 1e-12);

    // One uniform rate for every shift the trust-region sweep can visit,
    // margins delta away from the interval endpoints.
    let uniform = model.manifold_rate(0.5, 0.5).unwrap();
    println!("\nuniform manifold rate with 0.5 margins = {uniform:.6}");
}
