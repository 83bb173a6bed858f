//! Parity expectations of a bare model: exact permanent, Monte-Carlo
//! estimate, and the gap to the collision-free (postselected) value.
//!
//! Usage: `cargo run --release --example parity_expectations [m] [k] [seed]`

use bsbm::born_machine::{
    dilute_gap, parity_expectation_estimate, parity_expectation_exact, BsbmSpec, ParityWord,
};
use bsbm::interferometer::haar_random;
use bsbm::permanent::{derive_seed, EstimatorConfig};
use bsbm::BitString;

fn main() -> bsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(10, |s| s.parse().expect("m"));
    let k: usize = args.next().map_or(3, |s| s.parse().expect("k"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let spec = BsbmSpec::new(k, haar_random(m, seed))?;
    println!(
        "m = {m}, k = {k}, outside dilute regime: {}",
        spec.outside_dilute_regime()
    );
    println!("alpha        exact      estimate (± stderr)   full - postselected");
    for i in 0..6u64 {
        let bits = BitString::from_value(u128::from(derive_seed(seed, i)), m);
        let alpha = ParityWord::new(bits.clone(), m)?;
        let exact = parity_expectation_exact(&spec, &alpha)?;
        let cfg = EstimatorConfig::new(5_000, derive_seed(seed, 100 + i));
        let (est, stderr) = parity_expectation_estimate(&spec, &alpha, &cfg)?;
        let gap = dilute_gap(&spec, &alpha)?;
        println!("{bits}  {exact:+.5}   {est:+.5} ± {stderr:.5}     {gap:+.2e}");
    }
    Ok(())
}
