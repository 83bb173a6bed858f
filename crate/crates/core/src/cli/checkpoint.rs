//! Text checkpoints: a block of `section.key = value` header lines, a line
//! `params`, then one mesh parameter per line in mesh order (blocks
//! layer-major as `θ, φ`, then output phases), each with 17 significant
//! digits.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{parse_sigma, parse_train, ModelConfig, RawConfig};
use super::{CliError, CliResult};
use crate::born_machine::BsbmSpec;
use crate::interferometer::InterferometerMesh;
use crate::readout::{EbsbmSpec, ReadoutTower};
use crate::training::{KernelSpec, TrainConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: ModelConfig,
    pub spec: EbsbmSpec,
    pub tower: Option<ReadoutTower>,
    pub level: usize,
    pub kernel: KernelSpec,
    /// Settings needed to reproduce the final loss estimate.
    pub train: TrainConfig,
    pub seed: u64,
    pub config_hash: String,
    pub final_loss: (f64, f64),
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Checkpoint {
    pub fn to_text(&self) -> CliResult<String> {
        let mesh = self
            .spec
            .base
            .mesh()
            .ok_or_else(|| CliError::runtime("checkpoint needs a mesh-parametrised model"))?;
        let sigma = match self.kernel.kind() {
            crate::training::KernelKind::GaussianHamming { sigma } => *sigma,
            crate::training::KernelKind::TabulatedSpectral { .. } => {
                return Err(CliError::runtime(
                    "checkpoints store Gaussian-Hamming kernels only",
                ))
            }
        };
        let mut raw = RawConfig::default();
        raw.set("checkpoint.version", CHECKPOINT_VERSION.to_string());
        raw.set("checkpoint.m", self.spec.base.m().to_string());
        raw.set("checkpoint.k", self.spec.base.k().to_string());
        raw.set(
            "checkpoint.tower",
            self.tower.as_ref().map_or_else(
                || "-".to_string(),
                |t| {
                    t.levels
                        .iter()
                        .map(|l| {
                            format!("({},{},{},{})", l.m, l.k, t.construction, l.readout.kind())
                        })
                        .collect::<Vec<_>>()
                        .join(" ")
                },
            ),
        );
        raw.set("checkpoint.config_hash", self.config_hash.clone());
        raw.set("checkpoint.final_loss", float(self.final_loss.0));
        raw.set("checkpoint.final_stderr", float(self.final_loss.1));
        raw.set("checkpoint.params", mesh.num_params().to_string());
        self.model.to_raw(self.tower.as_ref(), self.level, &mut raw);
        raw.set("kernel.kind", "gaussian_hamming");
        raw.set("kernel.sigma", float(sigma));
        raw.set("train.steps", self.train.steps.to_string());
        raw.set("train.batch_alphas", self.train.batch_alphas.to_string());
        raw.set("train.samples", self.train.estimator.n_samples.to_string());
        raw.set("train.lift", self.train.lift_mode.to_string());
        raw.set("run.seed", self.seed.to_string());

        let mut text = String::from("# bsbm checkpoint\n");
        text.push_str(&raw.canonical());
        text.push_str("params\n");
        for p in mesh.params() {
            writeln!(text, "{}", float(*p)).expect("writing to a String");
        }
        Ok(text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |msg: String| CliError::data(format!("checkpoint: {msg}"));
        let (head, body) = text
            .split_once("\nparams\n")
            .ok_or_else(|| bad("missing params section".into()))?;
        let raw = RawConfig::parse(head).map_err(|e| bad(e.message))?;
        let version: u32 = raw
            .required("checkpoint.version")
            .map_err(|e| bad(e.message))?;
        if version != CHECKPOINT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let field = |key: &str| -> CliResult<String> {
            raw.get(key)
                .map(str::to_string)
                .ok_or_else(|| bad(format!("{key} is missing")))
        };
        let model = ModelConfig::from_raw(&raw).map_err(|e| bad(e.message))?;
        let seed: u64 = raw.required("run.seed").map_err(|e| bad(e.message))?;
        let train = parse_train(&raw, seed).map_err(|e| bad(e.message))?;
        let sigma = parse_sigma(&raw)
            .map_err(|e| bad(e.message))?
            .ok_or_else(|| bad("kernel.sigma must be resolved".into()))?;
        let params: Vec<f64> = body
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("parameter {l:?}: {e}")))
            })
            .collect::<CliResult<_>>()?;
        let expected: usize = raw
            .required("checkpoint.params")
            .map_err(|e| bad(e.message))?;
        if params.len() != expected {
            return Err(bad(format!(
                "expected {expected} parameters, found {}",
                params.len()
            )));
        }
        let (readout, tower, level) = model.build_readout().map_err(|e| bad(e.message))?;
        let m = readout.m();
        let mesh = InterferometerMesh::new(m, params).map_err(|e| bad(e.to_string()))?;
        let base = BsbmSpec::new(readout.k(), mesh).map_err(|e| bad(e.to_string()))?;
        let spec = EbsbmSpec::new(base, readout).map_err(|e| bad(e.to_string()))?;
        let dims: (usize, usize) = (
            raw.required("checkpoint.m").map_err(|e| bad(e.message))?,
            raw.required("checkpoint.k").map_err(|e| bad(e.message))?,
        );
        if dims != (spec.base.m(), spec.base.k()) {
            return Err(bad(format!(
                "recorded dims {dims:?} differ from the rebuilt model ({}, {})",
                spec.base.m(),
                spec.base.k()
            )));
        }
        let final_loss = (
            raw.required("checkpoint.final_loss")
                .map_err(|e| bad(e.message))?,
            raw.required("checkpoint.final_stderr")
                .map_err(|e| bad(e.message))?,
        );
        Ok(Checkpoint {
            kernel: KernelSpec::gaussian_hamming(m, sigma).map_err(|e| bad(e.to_string()))?,
            model,
            spec,
            tower,
            level,
            train,
            seed,
            config_hash: field("checkpoint.config_hash")?,
            final_loss,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::data(format!("cannot read checkpoint {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        std::fs::write(path, self.to_text()?).map_err(|e| {
            CliError::runtime(format!("cannot write checkpoint {}: {e}", path.display()))
        })
    }
}
