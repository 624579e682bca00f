//! Remote testing: the observer tests Bern(0.5) against Bern(0.8) locally
//! and signals one bit over BSC(0.35). Prints the trade-off and which stage
//! limits it.

use dht_exponents::prob::{Channel, Pmf};
use dht_exponents::regions::{rht_stein, rht_tradeoff, LawSearch};

fn main() -> dht_exponents::Result<()> {
    let p = Pmf::bernoulli(0.5)?;
    let q = Pmf::bernoulli(0.8)?;
    let ch = Channel::bsc(0.35)?;
    let search = LawSearch::default();

    println!("Stein corner min(D(P||Q), E_c) = {:.5}", rht_stein(&p, &q, &ch)?);
    println!("{:>10} {:>10} {:>10} {:>10}  limited by", "kappa_a", "kappa_b", "source", "channel");
    for ka in [0.0, 1e-4, 0.005, 0.01, 0.02, 0.04, 0.06] {
        let pt = rht_tradeoff(&p, &q, &ch, ka, &search)?;
        let side = if pt.source_kappa_beta <= pt.channel_kappa_beta { "source" } else { "channel" };
        println!(
            "{:>10.4} {:>10.5} {:>10.5} {:>10.5}  {side}",
            ka, pt.kappa_beta, pt.source_kappa_beta, pt.channel_kappa_beta
        );
    }
    Ok(())
}
