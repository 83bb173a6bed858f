//! Estimate the permanent of a Haar submatrix with the Rys estimator and
//! compare against Ryser's exact formula as the sample count grows.
//!
//! Usage: `cargo run --release --example permanent_estimation [k] [seed]`

use bsbm::interferometer::haar_random;
use bsbm::permanent::{gurvits_estimate, hoeffding_samples, ryser_permanent, EstimatorConfig};

fn main() -> bsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(6, |s| s.parse().expect("k"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let u = haar_random(2 * k, seed).unitary().into_matrix();
    let w = u.view((0, 0), (k, k)).into_owned();
    let exact = ryser_permanent(&w)?;
    println!("Ryser      {exact:.6}");

    for n in [100, 1_000, 10_000, 100_000] {
        let (est, stderr) = gurvits_estimate(&w, &EstimatorConfig::new(n, seed))?;
        println!(
            "N = {n:>6}  {est:.6}  stderr {stderr:.2e}  error {:.2e}",
            (est - exact).norm()
        );
    }
    let (avg, _) = gurvits_estimate(&w, &EstimatorConfig::exhaustive())?;
    println!("all 2^{k} sign vectors  {avg:.6}");
    println!(
        "samples for ±0.01 with 99% confidence: {}",
        hoeffding_samples(0.01, 0.01)?
    );
    Ok(())
}
