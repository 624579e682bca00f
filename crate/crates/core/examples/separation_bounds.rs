//! Separation-based bounds for testing against independence on a doubly
//! symmetric binary source, over a nearly clean and a noisy channel.

use dht_exponents::dht::{shtcc_tai, shtcc_tai_stein, BoundSearch, SourceModel};
use dht_exponents::optimize::SimplexSearch;
use dht_exponents::prob::{mutual_information, Channel, JointPmf};

fn main() -> dht_exponents::Result<()> {
    let p = JointPmf::from_matrix(&[vec![0.4, 0.1], vec![0.1, 0.4]])?;
    let q = JointPmf::product(&p.row_marginal(), &p.col_marginal());
    let model = SourceModel::new(p.clone(), q)?;
    println!("I(U;V) = {:.5}", mutual_information(&p));

    for (name, ch) in [("BSC(0.01)", Channel::bsc(0.01)?), ("BSC(0.1)", Channel::bsc(0.1)?)] {
        let stein = shtcc_tai_stein(&model, &ch, &SimplexSearch::default())?;
        println!("{name}: Stein bound {:.5}", stein.value);
        for ka in [0.001, 0.01] {
            let r = shtcc_tai(&model, &ch, ka, &BoundSearch::default())?;
            println!("  kappa_alpha {ka:<6} bound {:.5} feasible {} digest {}", r.value, r.feasible, r.achiever_digest());
        }
    }
    Ok(())
}
