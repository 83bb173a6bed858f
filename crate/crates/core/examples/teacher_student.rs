//! Fit a student model to samples drawn from a random teacher with the same
//! readout, then compare the two readout distributions exactly.
//!
//! Usage: `cargo run --release --example teacher_student [seed] [steps] [lift] [sigma]`

use bsbm::born_machine::{sample_exact, BsbmSpec};
use bsbm::interferometer::haar_random;
use bsbm::permanent::derive_seed;
use bsbm::readout::{pushforward_exact, total_variation, EbsbmSpec, LiftMode, ReadoutMap};
use bsbm::training::{train, KernelSpec, TrainConfig};
use bsbm::BitString;

fn main() -> bsbm::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let steps: usize = args.next().map_or(300, |s| s.parse().expect("steps"));
    let lift_mode: LiftMode = args
        .next()
        .map_or(Ok(TrainConfig::default().lift_mode), |s| s.parse())?;
    let sigma: Option<f64> = args.next().map(|s| s.parse().expect("sigma"));
    let (m, k, n) = (8, 2, 3);

    let readout = ReadoutMap::interp(m, k, n)?;
    let teacher = EbsbmSpec::new(
        BsbmSpec::new(k, haar_random(m, derive_seed(seed, 1)))?,
        readout.clone(),
    )?;
    let data: Vec<BitString> = sample_exact(&teacher.base, 10_000, derive_seed(seed, 2))?
        .iter()
        .map(|s| readout.apply(s))
        .collect::<bsbm::Result<_>>()?;

    let student = EbsbmSpec::new(
        BsbmSpec::new(k, haar_random(m, derive_seed(seed, 3)))?,
        readout,
    )?;
    let target = pushforward_exact(&teacher)?;
    let tv_init = total_variation(&target, &pushforward_exact(&student)?);

    let config = TrainConfig {
        steps,
        seed,
        lift_mode,
        ..Default::default()
    };
    let kernel = sigma
        .map(|s| KernelSpec::gaussian_hamming(m, s))
        .transpose()?;
    let result = train(&data, &student, kernel.as_ref(), &config)?;
    let trained = EbsbmSpec::new(BsbmSpec::new(k, result.mesh)?, student.readout.clone())?;
    let tv_final = total_variation(&target, &pushforward_exact(&trained)?);

    for row in result.trace.iter().step_by((steps / 10).max(1)) {
        println!(
            "step {:4}  loss {:+.5} ± {:.5}",
            row.step, row.loss_estimate, row.stderr
        );
    }
    println!(
        "final loss {:+.5} ± {:.5}",
        result.final_loss.0, result.final_loss.1
    );
    println!("TV(teacher, student): init {tv_init:.4}  trained {tv_final:.4}");
    Ok(())
}
