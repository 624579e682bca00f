//! Simulates the remote two-codeword scheme for Bern(0.5) vs Bern(0.8) over
//! BSC(0.35) and compares the fitted exponents with the analytic ones.
//!
//! cargo run --release --example monte_carlo -- [trials] [n ...]

use dht_exponents::prob::{Channel, Pmf};
use dht_exponents::regions::ChannelPairLaw;
use dht_exponents::simulate::{rht_prediction, simulate_rht, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let trials: u64 = args.first().map(|s| s.parse()).transpose()?.unwrap_or(100_000);
    let ns: Vec<usize> = if args.len() > 1 {
        args[1..].iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    } else {
        vec![20, 40, 60, 80, 100]
    };

    let p = Pmf::bernoulli(0.5)?;
    let q = Pmf::bernoulli(0.8)?;
    let ch = Channel::bsc(0.35)?;
    let law = ChannelPairLaw::point_mass(2, 0, 1);
    let cfg = SimConfig::new(ns, trials, 7)?;

    let report = simulate_rht(&p, &q, &ch, 0.0, 0.0, &law, &cfg)?;
    println!("{:>6} {:>12} {:>12} {:>10} {:>10}", "n", "alpha_hat", "beta_hat", "a_err", "b_err");
    for r in &report.rows {
        println!("{:>6} {:>12.4e} {:>12.4e} {:>10} {:>10}", r.n, r.alpha_hat, r.beta_hat, r.alpha_errors, r.beta_errors);
    }

    let z = rht_prediction(&p, &q, &ch, 0.0, 0.0, &law)?;
    println!("analytic: zeta0 = {:.5}  zeta1 = {:.5}", z.zeta0, z.zeta1);
    println!("  source stage  ({:.5}, {:.5})", z.source.0, z.source.1);
    println!("  channel stage ({:.5}, {:.5})", z.channel.0, z.channel.1);
    match report.alpha_fit() {
        Ok(f) => println!("fitted kappa_alpha = {:.5} +/- {:.5}", f.slope, f.std_error),
        Err(e) => println!("kappa_alpha fit: {e}"),
    }
    match report.beta_fit() {
        Ok(f) => println!("fitted kappa_beta  = {:.5} +/- {:.5}", f.slope, f.std_error),
        Err(e) => println!("kappa_beta fit: {e}"),
    }
    Ok(())
}
