//! Draw readout samples from a random extended model and compare the
//! histogram with the exact readout distribution.
//!
//! Usage: `cargo run --release --example sampling [count] [seed]`

use bsbm::born_machine::{exact_distribution, sample_distribution, BsbmSpec};
use bsbm::interferometer::haar_random;
use bsbm::permanent::derive_seed;
use bsbm::readout::{pushforward, total_variation, EbsbmSpec, ReadoutMap};

fn main() -> bsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(20_000, |s| s.parse().expect("count"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let (m, k, n) = (9, 3, 7);

    let spec = EbsbmSpec::new(
        BsbmSpec::new(k, haar_random(m, seed))?,
        ReadoutMap::rank(m, k, n)?,
    )?;
    let dist = exact_distribution(&spec.base)?;
    println!("collision-free mass Z = {:.4}", dist.z);
    let exact = pushforward(&dist, &spec.readout)?;

    let mut hist = vec![0.0; 1 << n];
    for s in sample_distribution(&dist, count, derive_seed(seed, 1))? {
        hist[spec.readout.value(&s)? as usize] += 1.0 / count as f64;
    }
    println!(
        "TV(histogram, exact) = {:.4}",
        total_variation(&hist, &exact)
    );
    Ok(())
}
