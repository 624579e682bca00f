//! Anti-diagonal Q_UV against the uniform P_UV over BSC(0.35): the uncoded
//! scheme against the zero-rate expurgated line that caps separation.

use dht_exponents::dht::{compare_schemes, CompareOptions, SourceModel};
use dht_exponents::prob::{Channel, JointPmf};

fn main() -> dht_exponents::Result<()> {
    let q = JointPmf::from_matrix(&[vec![0.0, 0.5], vec![0.5, 0.0]])?;
    let p = JointPmf::product(&q.row_marginal(), &q.col_marginal());
    let model = SourceModel::new(p, q)?;
    let ch = Channel::bsc(0.35)?;

    let kappas: Vec<f64> = (0..=10).map(|i| i as f64 * 0.001).collect();
    let opts = CompareOptions { separation: true, ..CompareOptions::default() };
    let cmp = compare_schemes(&model, &ch, &kappas, &opts)?;
    println!("expurgated zero-rate line {:.5}", cmp.expurgated_zero_rate);
    println!("{:>8} {:>10} {:>10}", "kappa_a", "uncoded", "separation");
    for row in &cmp.rows {
        let sep = row.separation.as_ref().map_or(f64::NAN, |r| r.value);
        println!("{:>8.3} {:>10.5} {:>10.5}", row.kappa_alpha, row.uncoded.value, sep);
    }
    if let Some(k) = cmp.crossover {
        println!("uncoded drops below the line at kappa_alpha = {k:.5}");
    }
    Ok(())
}
