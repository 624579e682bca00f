//! Testing which of two codewords was sent over BSC(0.35), for a few joint
//! types of the codeword pair, plus the best pair law at each type-I target.

use dht_exponents::prob::Channel;
use dht_exponents::regions::{channel_curve, channel_max_divergence, maximize_channel_branch, ChannelPairLaw, LawSearch};

fn main() -> dht_exponents::Result<()> {
    let ch = Channel::bsc(0.35)?;
    let (ec, pair) = channel_max_divergence(&ch)?;
    println!("E_c = {ec:.5} at input pair {pair:?}");

    let laws = [
        ("point mass (0,1)", ChannelPairLaw::point_mass(2, 0, 1)),
        ("half (0,1), half (1,0)", ChannelPairLaw::from_probs(2, vec![0.0, 0.5, 0.5, 0.0])?),
        ("70% (0,1), 30% (0,0)", ChannelPairLaw::from_probs(2, vec![0.3, 0.7, 0.0, 0.0])?),
    ];
    for (name, law) in &laws {
        let curve = channel_curve(&ch, law, 5)?;
        let pts: Vec<String> =
            curve.points.iter().map(|p| format!("({:.4}, {:.4})", p.kappa_alpha, p.kappa_beta)).collect();
        println!("{name:>24}: {}", pts.join(" "));
    }

    let search = LawSearch::default();
    for ka in [0.001, 0.02, 0.08] {
        let best = maximize_channel_branch(&ch, ka, &search)?;
        let law: Vec<String> = best.law.iter().map(|w| format!("{w:.3}")).collect();
        println!("kappa_alpha {ka:<6} best kappa_beta {:.5} with law [{}]", best.kappa_beta, law.join(", "));
    }
    Ok(())
}
