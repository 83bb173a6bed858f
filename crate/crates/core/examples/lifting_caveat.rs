//! A readout that merges outcomes makes the lifted training loss a surrogate:
//! a model whose readout distribution already equals the data still shows a
//! positive loss under a deterministic lift, while the posterior lift follows
//! the model and the loss vanishes.
//!
//! Usage: `cargo run --release --example lifting_caveat`

use num_complex::Complex64;

use bsbm::born_machine::BsbmSpec;
use bsbm::interferometer::InterferometerMesh;
use bsbm::readout::{pushforward_exact, EbsbmSpec, LiftMode, ReadoutMap};
use bsbm::training::{final_loss, train, TrainConfig};
use bsbm::BitString;

fn main() -> bsbm::Result<()> {
    // outcomes 100, 010, 001 read out as 0, 1, 1
    let readout = ReadoutMap::table(3, 1, 1, vec![0, 1, 1])?;
    let amp = Complex64::new((1.0f64 / 3.0).sqrt(), 0.0);
    let mesh = InterferometerMesh::with_first_column(&[amp, amp, amp])?;
    let model = EbsbmSpec::new(BsbmSpec::new(1, mesh)?, readout)?;
    println!(
        "model readout distribution {:?}",
        pushforward_exact(&model)?
    );

    let data: Vec<BitString> = (0..3000)
        .map(|i| BitString::from_value(u128::from(i % 3 != 0), 1))
        .collect();
    for lift_mode in [LiftMode::Deterministic, LiftMode::Posterior] {
        let config = TrainConfig {
            steps: 0,
            batch_alphas: 256,
            lift_mode,
            seed: 5,
            ..Default::default()
        };
        let kernel = train(&data, &model, None, &config)?.kernel;
        let (loss, stderr) = final_loss(&data, &model, &kernel, &config)?;
        println!("{lift_mode:>13} lift: loss {loss:+.4} ± {stderr:.4}");
    }
    Ok(())
}
