use std::io::Write;
use std::time::Instant;

use super::kernel::{median_heuristic_sigma, KernelSpec};
use super::mmd::{
    mmd2_estimate, mmd2_value_and_gradient, AlphaSampling, EmpiricalDistribution, MmdConfig,
};
use super::optimizer::{Optimizer, OptimizerConfig};
use crate::bits::BitString;
use crate::born_machine::BsbmSpec;
use crate::combinatorics::FockOutcome;
use crate::error::{Error, Result};
use crate::interferometer::InterferometerMesh;
use crate::permanent::{derive_seed, EstimatorConfig};
use crate::readout::{lift_dataset, lift_dataset_posterior, EbsbmSpec, LiftMode};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub optimizer: OptimizerConfig,
    pub steps: usize,
    pub batch_alphas: usize,
    /// Samples per parity estimate; its seed is replaced per step.
    pub estimator: EstimatorConfig,
    pub lift_mode: LiftMode,
    pub seed: u64,
    /// Record wall-clock milliseconds in the trace. Off by default so traces
    /// are byte-identical across runs.
    pub timing: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            optimizer: OptimizerConfig::default(),
            steps: 300,
            batch_alphas: 32,
            estimator: EstimatorConfig::new(2000, 0),
            lift_mode: LiftMode::Posterior,
            seed: 0,
            timing: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.batch_alphas == 0 {
            return Err(Error::InvalidParameter(
                "batch_alphas must be at least 1".into(),
            ));
        }
        self.estimator.validate()
    }

    fn mmd_config(&self, seed: u64) -> MmdConfig {
        MmdConfig {
            alphas: AlphaSampling::Sampled(self.batch_alphas),
            estimator: self.estimator.with_seed(seed),
        }
    }

    /// Seed of the loss estimate taken after the final step.
    pub fn final_loss_seed(&self) -> u64 {
        derive_seed(self.seed, self.steps as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub loss_estimate: f64,
    pub stderr: f64,
    pub grad_norm: f64,
    pub wall_ms: u128,
}

#[derive(Debug, Clone)]
pub struct TrainResult {
    pub mesh: InterferometerMesh,
    pub kernel: KernelSpec,
    pub trace: Vec<TraceRow>,
    /// Loss estimate at the trained parameters; see [`final_loss`].
    pub final_loss: (f64, f64),
}

/// Median-heuristic Gaussian kernel on lifted data.
pub fn default_kernel(lifted: &EmpiricalDistribution) -> Result<KernelSpec> {
    KernelSpec::gaussian_hamming(
        lifted.bits(),
        median_heuristic_sigma(lifted.values(), lifted.counts()),
    )
}

fn lifted_distribution(lifted: &[FockOutcome]) -> Result<EmpiricalDistribution> {
    let bits: Vec<BitString> = lifted.iter().map(FockOutcome::to_bits).collect();
    EmpiricalDistribution::from_samples(&bits)
}

/// The lifted dataset used at `step`, with `model` the current bare model.
fn lift_at(
    data: &[BitString],
    ebsbm: &EbsbmSpec,
    model: &BsbmSpec,
    config: &TrainConfig,
    step: usize,
) -> Result<EmpiricalDistribution> {
    let seed = derive_seed(config.seed ^ 0x11F7, step as u64);
    let lifted = match config.lift_mode {
        LiftMode::Posterior => lift_dataset_posterior(data, &ebsbm.readout, model, seed)?,
        mode => lift_dataset(data, mode, &ebsbm.readout, seed)?,
    };
    lifted_distribution(&lifted)
}

/// The lifted dataset [`final_loss`] evaluates on: lift index
/// `config.steps` (0 for deterministic lifts) at the model in `ebsbm`.
pub fn final_lift(
    data: &[BitString],
    ebsbm: &EbsbmSpec,
    config: &TrainConfig,
) -> Result<EmpiricalDistribution> {
    let step = if config.lift_mode == LiftMode::Deterministic {
        0
    } else {
        config.steps
    };
    lift_at(data, ebsbm, &ebsbm.base, config, step)
}

/// Loss estimate of `ebsbm` on `data` as recorded after training, with
/// estimator seed [`TrainConfig::final_loss_seed`]. Reproduces
/// [`TrainResult::final_loss`] when `ebsbm` carries the trained mesh and
/// `kernel` the kernel used in training.
pub fn final_loss(
    data: &[BitString],
    ebsbm: &EbsbmSpec,
    kernel: &KernelSpec,
    config: &TrainConfig,
) -> Result<(f64, f64)> {
    config.validate()?;
    let lifted = final_lift(data, ebsbm, config)?;
    mmd2_estimate(
        &lifted,
        &ebsbm.base,
        kernel,
        &config.mmd_config(config.final_loss_seed()),
    )
}

/// Lifts `data` through the readout and fits the bare model to the lifted
/// samples by minimizing the parity-spectrum MMD. `kernel` defaults to the
/// median heuristic on the initial lift. Stochastic and posterior lifts are
/// redrawn before every step, the latter from the current model.
pub fn train(
    data: &[BitString],
    ebsbm: &EbsbmSpec,
    kernel: Option<&KernelSpec>,
    config: &TrainConfig,
) -> Result<TrainResult> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidParameter("training data is empty".into()));
    }
    let mut spec: BsbmSpec = ebsbm.base.clone();
    let num_params = spec
        .mesh()
        .ok_or(Error::FixedUnitaryHasNoGradient)?
        .num_params();

    let mut lifted = lift_at(data, ebsbm, &spec, config, 0)?;
    let kernel = match kernel {
        Some(k) => {
            if k.m() != spec.m() {
                return Err(Error::LengthMismatch {
                    expected: spec.m(),
                    got: k.m(),
                });
            }
            k.clone()
        }
        None => default_kernel(&lifted)?,
    };

    let mut optimizer = Optimizer::new(config.optimizer, num_params);
    let mut trace = Vec::with_capacity(config.steps);
    let mut params = spec.mesh().expect("checked").params().to_vec();
    for step in 0..config.steps {
        let started = Instant::now();
        if config.lift_mode != LiftMode::Deterministic && step > 0 {
            lifted = lift_at(data, ebsbm, &spec, config, step)?;
        }
        let est = mmd2_value_and_gradient(
            &lifted,
            &spec,
            &kernel,
            &config.mmd_config(derive_seed(config.seed, step as u64)),
        )?;
        let grad = est.gradient.unwrap_or_else(|| vec![0.0; num_params]);
        optimizer.step(&mut params, &grad);
        spec.mesh_mut().expect("checked").set_params(&params);
        trace.push(TraceRow {
            step,
            loss_estimate: est.value,
            stderr: est.stderr,
            grad_norm: grad.iter().map(|g| g * g).sum::<f64>().sqrt(),
            wall_ms: if config.timing {
                started.elapsed().as_millis()
            } else {
                0
            },
        });
    }
    let trained = EbsbmSpec {
        base: spec,
        readout: ebsbm.readout.clone(),
    };
    let final_loss = final_loss(data, &trained, &kernel, config)?;
    Ok(TrainResult {
        mesh: trained.base.mesh().expect("checked").clone(),
        kernel,
        trace,
        final_loss,
    })
}

/// Loss trace as CSV with header `step,loss_estimate,stderr,grad_norm,wall_ms`.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,loss_estimate,stderr,grad_norm,wall_ms")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{}",
            r.step, r.loss_estimate, r.stderr, r.grad_norm, r.wall_ms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::haar_random;
    use crate::readout::ReadoutMap;

    fn small_problem() -> (Vec<BitString>, EbsbmSpec) {
        let data: Vec<BitString> = ["00", "01", "01", "11"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let base = BsbmSpec::new(2, haar_random(5, 3)).unwrap();
        let spec = EbsbmSpec::new(base, ReadoutMap::interp(5, 2, 2).unwrap()).unwrap();
        (data, spec)
    }

    #[test]
    fn zero_steps_keep_mesh() {
        let (data, spec) = small_problem();
        let cfg = TrainConfig {
            steps: 0,
            ..Default::default()
        };
        let out = train(&data, &spec, None, &cfg).unwrap();
        assert_eq!(&out.mesh, spec.base.mesh().unwrap());
        assert!(out.trace.is_empty());
    }

    #[test]
    fn training_is_reproducible() {
        let (data, spec) = small_problem();
        for lift_mode in [LiftMode::Stochastic, LiftMode::Posterior] {
            let cfg = TrainConfig {
                steps: 3,
                batch_alphas: 4,
                estimator: EstimatorConfig::new(200, 0),
                lift_mode,
                ..Default::default()
            };
            let a = train(&data, &spec, None, &cfg).unwrap();
            let b = train(&data, &spec, None, &cfg).unwrap();
            assert_eq!(a.trace, b.trace);
            assert_eq!(a.mesh, b.mesh);
            let trained = EbsbmSpec::new(
                BsbmSpec::new(2, a.mesh.clone()).unwrap(),
                spec.readout.clone(),
            )
            .unwrap();
            assert_eq!(
                final_loss(&data, &trained, &a.kernel, &cfg).unwrap(),
                a.final_loss
            );
            let mut csv = Vec::new();
            write_trace_csv(&a.trace, &mut csv).unwrap();
            assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 4);
        }
    }
}
