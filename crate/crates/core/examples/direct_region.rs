//! Error-exponent trade-off for testing Bern(0.5) against Bern(0.8) from
//! i.i.d. samples, traced by sweeping the Neyman–Pearson threshold.

use dht_exponents::prob::Pmf;
use dht_exponents::regions::{direct_curve, DirectPair};

fn main() -> dht_exponents::Result<()> {
    let p = Pmf::bernoulli(0.5)?;
    let q = Pmf::bernoulli(0.8)?;
    let pair = DirectPair::new(&p, &q)?;
    let (lo, hi) = pair.interval();
    println!("threshold interval ({lo:.5}, {hi:.5})");

    println!("{:>10} {:>12} {:>12}", "theta", "kappa_alpha", "kappa_beta");
    for pt in direct_curve(&p, &q, 12)?.points {
        println!("{:>10.5} {:>12.6} {:>12.6}", pt.theta0, pt.kappa_alpha, pt.kappa_beta);
    }

    // Reading the curve the other way: best kappa_beta for a target kappa_alpha.
    for ka in [0.0, 0.01, 0.05] {
        let pt = pair.tradeoff_point(ka);
        println!("kappa_alpha = {ka:<5} -> kappa_beta = {:.6} (theta {:.5})", pt.kappa_beta, pt.theta0);
    }
    Ok(())
}
