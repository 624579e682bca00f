//! Loads a JSON model file (default: the bundled example1.json) and prints
//! the uncoded bound on a small grid, as the CLI would.
//!
//! cargo run --example model_file -- path/to/model.json

use std::path::PathBuf;

use dht_exponents::cli::load_model;
use dht_exponents::dht::{jhtcc_uncoded_opt, BoundSearch};

fn main() -> dht_exponents::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/example1.json"));
    let model = load_model(&path)?;
    println!("{} (sha256 {})", path.display(), &model.digest[..16]);
    println!("TAI {}  TAD {}", model.source.is_tai(), model.source.is_tad());
    let search = BoundSearch::default();
    for ka in [0.0, 0.002, 0.004] {
        let r = jhtcc_uncoded_opt(&model.source, &model.channel, ka, 1, &search.outer)?;
        println!("kappa_alpha {ka:<6} uncoded {:.5}", r.value);
    }
    Ok(())
}
