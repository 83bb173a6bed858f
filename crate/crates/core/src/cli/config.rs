use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::{CliError, CliResult};
use crate::born_machine::BsbmSpec;
use crate::interferometer::{haar_random, InterferometerMesh};
use crate::permanent::{derive_seed, EstimatorConfig};
use crate::readout::{
    build_tower, Construction, EbsbmSpec, ReadoutMap, ReadoutTower, TowerBase, TowerOptions,
    MAX_BITS,
};
use crate::training::{OptimizerConfig, TrainConfig};

/// Tag mixed into the run seed to draw the initial mesh.
const INIT_SEED_TAG: u64 = 0x1A17;

const KNOWN_KEYS: &[&str] = &[
    "model.n",
    "model.readout",
    "model.m",
    "model.k",
    "model.construction",
    "model.level",
    "model.base_m",
    "model.base_k",
    "model.init",
    "kernel.kind",
    "kernel.sigma",
    "train.optimizer",
    "train.learning_rate",
    "train.beta1",
    "train.beta2",
    "train.epsilon",
    "train.steps",
    "train.batch_alphas",
    "train.samples",
    "train.lift",
    "train.timing",
    "data.path",
    "io.checkpoint",
    "io.trace",
    "run.seed",
    "run.workers",
];

/// Flat `section.key = value` text. Blank lines and lines starting with `#`
/// are ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(format!(
                    "line {}: expected `section.key = value`",
                    number + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let mut parts = key.split('.');
            let well_formed = matches!(
                (parts.next(), parts.next(), parts.next()),
                (Some(s), Some(k), None) if !s.is_empty() && !k.is_empty()
            );
            if !well_formed {
                return Err(CliError::config(format!(
                    "line {}: key {key:?} must have the form section.key",
                    number + 1
                )));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::config(format!("{key}: duplicate key")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Canonical text: sorted `key = value` lines.
    pub fn canonical(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn sha256(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::config(format!("{key}: cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn required<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parse_value(key)?
            .ok_or_else(|| CliError::config(format!("{key}: required key is missing")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelChoice {
    /// One-based, as printed by the tower description.
    Index(usize),
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutChoice {
    Rank {
        m: usize,
        k: usize,
    },
    Interp {
        m: usize,
        k: usize,
    },
    Tower {
        construction: Construction,
        base: TowerBase,
        level: LevelChoice,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshInit {
    Haar,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub n: usize,
    pub readout: ReadoutChoice,
    pub init: MeshInit,
}

impl ModelConfig {
    pub fn from_raw(raw: &RawConfig) -> CliResult<Self> {
        let n: usize = raw.required("model.n")?;
        if n == 0 || n > MAX_BITS {
            return Err(CliError::config(format!(
                "model.n: must lie in 1..={MAX_BITS}, got {n}"
            )));
        }
        let kind = raw.get("model.readout").unwrap_or("tower");
        let readout = match kind {
            "rank" | "interp" => {
                let m = raw.required("model.m")?;
                let k = raw.required("model.k")?;
                if kind == "rank" {
                    ReadoutChoice::Rank { m, k }
                } else {
                    ReadoutChoice::Interp { m, k }
                }
            }
            "tower" => {
                let construction: Construction = raw
                    .get("model.construction")
                    .ok_or_else(|| {
                        CliError::config("model.construction: required for a tower readout")
                    })?
                    .parse()
                    .map_err(|e| CliError::config(format!("model.construction: {e}")))?;
                let base = match (
                    raw.parse_value("model.base_m")?,
                    raw.parse_value("model.base_k")?,
                ) {
                    (Some(m), Some(k)) => TowerBase::Explicit { m, k },
                    (None, Some(k)) => TowerBase::Photons(k),
                    (None, None) => TowerBase::Auto,
                    (Some(_), None) => {
                        return Err(CliError::config("model.base_m: needs model.base_k as well"))
                    }
                };
                let level = match raw.get("model.level") {
                    None | Some("top") => LevelChoice::Top,
                    Some(_) => LevelChoice::Index(raw.required("model.level")?),
                };
                ReadoutChoice::Tower {
                    construction,
                    base,
                    level,
                }
            }
            other => {
                return Err(CliError::config(format!(
                    "model.readout: expected rank, interp or tower, got {other:?}"
                )))
            }
        };
        let init = match raw.get("model.init").unwrap_or("haar") {
            "haar" => MeshInit::Haar,
            "identity" => MeshInit::Identity,
            other => {
                return Err(CliError::config(format!(
                    "model.init: expected haar or identity, got {other:?}"
                )))
            }
        };
        Ok(ModelConfig { n, readout, init })
    }

    /// Writes the settings back as config keys, with the tower base and level
    /// resolved so the same model is rebuilt regardless of defaults.
    pub fn to_raw(&self, tower: Option<&ReadoutTower>, level: usize, raw: &mut RawConfig) {
        raw.set("model.n", self.n.to_string());
        match self.readout {
            ReadoutChoice::Rank { m, k } | ReadoutChoice::Interp { m, k } => {
                let kind = if matches!(self.readout, ReadoutChoice::Rank { .. }) {
                    "rank"
                } else {
                    "interp"
                };
                raw.set("model.readout", kind);
                raw.set("model.m", m.to_string());
                raw.set("model.k", k.to_string());
            }
            ReadoutChoice::Tower { construction, .. } => {
                let base = &tower.expect("tower readout carries its tower").levels[0];
                raw.set("model.readout", "tower");
                raw.set("model.construction", construction.to_string());
                raw.set("model.base_m", base.m.to_string());
                raw.set("model.base_k", base.k.to_string());
                raw.set("model.level", (level + 1).to_string());
            }
        }
        raw.set(
            "model.init",
            match self.init {
                MeshInit::Haar => "haar",
                MeshInit::Identity => "identity",
            },
        );
    }

    /// The readout, plus the tower and level index when one is used.
    pub fn build_readout(&self) -> CliResult<(ReadoutMap, Option<ReadoutTower>, usize)> {
        let model_err = |e: crate::Error| CliError::config(format!("model: {e}"));
        match self.readout {
            ReadoutChoice::Rank { m, k } => {
                Ok((ReadoutMap::rank(m, k, self.n).map_err(model_err)?, None, 0))
            }
            ReadoutChoice::Interp { m, k } => Ok((
                ReadoutMap::interp(m, k, self.n).map_err(model_err)?,
                None,
                0,
            )),
            ReadoutChoice::Tower {
                construction,
                base,
                level,
            } => {
                let tower = build_tower(
                    self.n,
                    construction,
                    TowerOptions {
                        base,
                        ..Default::default()
                    },
                )
                .map_err(model_err)?;
                let index = match level {
                    LevelChoice::Top => tower.levels.len() - 1,
                    LevelChoice::Index(i) if (1..=tower.levels.len()).contains(&i) => i - 1,
                    LevelChoice::Index(i) => {
                        return Err(CliError::config(format!(
                            "model.level: tower has levels 1..={}, got {i}",
                            tower.levels.len()
                        )))
                    }
                };
                Ok((tower.levels[index].readout.clone(), Some(tower), index))
            }
        }
    }

    /// Model with its initial mesh.
    pub fn build(&self, seed: u64) -> CliResult<(EbsbmSpec, Option<ReadoutTower>, usize)> {
        let (readout, tower, level) = self.build_readout()?;
        let m = readout.m();
        let mesh = match self.init {
            MeshInit::Haar => haar_random(m, derive_seed(seed, INIT_SEED_TAG)),
            MeshInit::Identity => InterferometerMesh::identity(m),
        };
        let base = BsbmSpec::new(readout.k(), mesh)
            .map_err(|e| CliError::config(format!("model: {e}")))?;
        let spec =
            EbsbmSpec::new(base, readout).map_err(|e| CliError::config(format!("model: {e}")))?;
        Ok((spec, tower, level))
    }
}

/// Parse a kernel width: a positive number, or `auto` for the median
/// heuristic.
pub(crate) fn parse_sigma(raw: &RawConfig) -> CliResult<Option<f64>> {
    match raw.get("kernel.sigma") {
        None | Some("auto") => Ok(None),
        Some(_) => {
            let sigma: f64 = raw.required("kernel.sigma")?;
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(CliError::config(format!(
                    "kernel.sigma: must be positive, got {sigma}"
                )));
            }
            Ok(Some(sigma))
        }
    }
}

pub(crate) fn parse_train(raw: &RawConfig, seed: u64) -> CliResult<TrainConfig> {
    let defaults = TrainConfig::default();
    let opt_defaults = OptimizerConfig::default();
    let optimizer = OptimizerConfig {
        kind: raw
            .get("train.optimizer")
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::config(format!("train.optimizer: {e}")))
            })
            .transpose()?
            .unwrap_or(opt_defaults.kind),
        learning_rate: raw
            .parse_value("train.learning_rate")?
            .unwrap_or(opt_defaults.learning_rate),
        beta1: raw
            .parse_value("train.beta1")?
            .unwrap_or(opt_defaults.beta1),
        beta2: raw
            .parse_value("train.beta2")?
            .unwrap_or(opt_defaults.beta2),
        epsilon: raw
            .parse_value("train.epsilon")?
            .unwrap_or(opt_defaults.epsilon),
    };
    optimizer
        .validate()
        .map_err(|e| CliError::config(format!("train: {e}")))?;
    let batch_alphas: usize = raw
        .parse_value("train.batch_alphas")?
        .unwrap_or(defaults.batch_alphas);
    if batch_alphas == 0 {
        return Err(CliError::config("train.batch_alphas: must be at least 1"));
    }
    let samples: usize = raw
        .parse_value("train.samples")?
        .unwrap_or(defaults.estimator.n_samples);
    if samples == 0 {
        return Err(CliError::config("train.samples: must be at least 1"));
    }
    let lift_mode = raw
        .get("train.lift")
        .map(|v| {
            v.parse()
                .map_err(|e| CliError::config(format!("train.lift: {e}")))
        })
        .transpose()?
        .unwrap_or(defaults.lift_mode);
    Ok(TrainConfig {
        optimizer,
        steps: raw.parse_value("train.steps")?.unwrap_or(defaults.steps),
        batch_alphas,
        estimator: EstimatorConfig::new(samples, seed),
        lift_mode,
        seed,
        timing: raw.parse_value("train.timing")?.unwrap_or(false),
    })
}

/// A parsed and validated training config.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub model: ModelConfig,
    pub sigma: Option<f64>,
    pub train: TrainConfig,
    pub data_path: PathBuf,
    pub checkpoint_path: Option<PathBuf>,
    pub trace_path: Option<PathBuf>,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Reads `path`. Relative paths inside resolve against the config's
    /// directory. `seed` overrides `run.seed` and is folded into the hash.
    pub fn load(path: &Path, seed: Option<u64>) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let base_dir = path.parent().unwrap_or(Path::new("."));
        Self::from_text(&text, base_dir, seed)
    }

    pub fn from_text(text: &str, base_dir: &Path, seed: Option<u64>) -> CliResult<Self> {
        let mut raw = RawConfig::parse(text)?;
        if let Some(unknown) = raw.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            return Err(CliError::config(format!("{unknown}: unknown key")));
        }
        if let Some(seed) = seed {
            raw.set("run.seed", seed.to_string());
        }
        let seed: u64 = raw.parse_value("run.seed")?.unwrap_or(0);
        let workers: Option<usize> = raw.parse_value("run.workers")?;
        if workers == Some(0) {
            return Err(CliError::config("run.workers: must be at least 1"));
        }
        if let Some(kind) = raw.get("kernel.kind") {
            if kind != "gaussian_hamming" {
                return Err(CliError::config(format!(
                    "kernel.kind: only gaussian_hamming is supported, got {kind:?}"
                )));
            }
        }
        let model = ModelConfig::from_raw(&raw)?;
        let sigma = parse_sigma(&raw)?;
        let train = parse_train(&raw, seed)?;
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let data_path = resolve(
            raw.get("data.path")
                .ok_or_else(|| CliError::data("data.path: no dataset configured"))?,
        );
        if !data_path.is_file() {
            return Err(CliError::data(format!(
                "data.path: {} does not exist",
                data_path.display()
            )));
        }
        Ok(RunConfig {
            checkpoint_path: raw.get("io.checkpoint").map(resolve),
            trace_path: raw.get("io.trace").map(resolve),
            raw,
            model,
            sigma,
            train,
            data_path,
            seed,
            workers,
        })
    }

    pub fn hash(&self) -> String {
        self.raw.sha256()
    }
}
