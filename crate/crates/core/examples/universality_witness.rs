//! Route one photon so the top level of an interp tower reproduces an
//! arbitrary target distribution exactly.
//!
//! Usage: `cargo run --release --example universality_witness [n] [seed]`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bsbm::readout::{build_tower, pushforward_exact, total_variation, Construction, TowerOptions};

fn main() -> bsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(4, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));

    let tower = build_tower(n, Construction::Interp, TowerOptions::default())?;
    let top = tower.top();
    println!("top level: m = {}, k = {}", top.m, top.k);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..1usize << n)
        .map(|_| rng.random::<f64>().powi(3))
        .collect();
    let total: f64 = raw.iter().sum();
    let target: Vec<f64> = raw.iter().map(|v| v / total).collect();

    let witness = tower.universal_witness(&target)?;
    let realized = pushforward_exact(&witness)?;
    for (y, (p, q)) in target.iter().zip(&realized).enumerate() {
        println!("{y:0n$b}  target {p:.6}  model {q:.6}");
    }
    println!("TV = {:.2e}", total_variation(&target, &realized));
    Ok(())
}
