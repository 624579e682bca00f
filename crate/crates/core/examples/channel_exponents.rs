//! Expurgated and special-message exponents of a BSC.

use dht_exponents::coding::{
    bsc_expurgated_zero_rate, expurgated_exponent, max_expurgated_exponent, InputDesign, SpecialMessage,
};
use dht_exponents::optimize::SimplexSearch;
use dht_exponents::prob::{capacity, Channel};

fn main() -> dht_exponents::Result<()> {
    let p = 0.35;
    let ch = Channel::bsc(p)?;
    println!("capacity {:.5} nats", capacity(&ch));
    println!("zero-rate expurgated exponent: closed form {:.6}", bsc_expurgated_zero_rate(p)?);
    let best = max_expurgated_exponent(0.0, &ch, &SimplexSearch::default())?;
    println!("                               design search {:.6}", best.value);

    let uniform = InputDesign::uniform(2);
    for r in [0.0, 0.005, 0.01, 0.02] {
        println!("E_x({r:<5}) = {:.6}", expurgated_exponent(r, &uniform, &ch)?);
    }

    let sm = SpecialMessage::new(&uniform, &ch)?;
    let (lo, hi) = sm.interval();
    println!("special-message interval [{lo:.5}, {hi:.5}]");
    for i in 0..=4 {
        let theta = lo + (hi - lo) * i as f64 / 4.0;
        println!("  E_sp({theta:>8.5}) = {:.6}", sm.exponent(theta)?);
    }
    if let Some(t) = sm.threshold_for(0.05) {
        println!("smallest threshold protecting at 0.05: {t:.5}");
    }
    Ok(())
}
