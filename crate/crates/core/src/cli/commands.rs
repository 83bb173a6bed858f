use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::checkpoint::Checkpoint;
use super::config::{ModelConfig, RawConfig, RunConfig};
use super::dataset::read_dataset;
use super::oracle::run_oracle_suite;
use super::{CliError, CliResult};
use crate::bits::BitString;
use crate::born_machine::{exact_distribution, sample_exact, BsbmSpec, ExactDistribution};
use crate::combinatorics::{checked_binomial, enumeration_cap};
use crate::oracle::walsh_transform;
use crate::readout::{
    pushforward, total_variation, verify_tower, Construction, VerifyOptions, MAX_TABLE_BITS,
};
use crate::training::{
    final_lift, final_loss, full_state_parity_table, train, write_trace_csv, EmpiricalDistribution,
    KernelSpec, MAX_EXACT_BITS,
};
use crate::Error;

/// Cell text for a metric that needs enumeration beyond the cap.
pub const SKIPPED: &str = "skipped:enumeration_cap";

/// Row order of the evaluate metrics CSV.
pub const METRIC_ROWS: [&str; 5] = [
    "mmd2_estimate",
    "exact_tv",
    "exact_mmd2",
    "collision_free_mass",
    "dilute_gap",
];

/// Sets the rayon pool size once per process; later calls are ignored.
pub fn configure_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // build_global fails only if a pool exists already, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
}

fn classify(e: Error) -> CliError {
    match e {
        Error::EmptyPreimage(_) | Error::LengthMismatch { .. } => CliError::data(e.to_string()),
        other => CliError::runtime(other.to_string()),
    }
}

fn check_width(expected: usize, got: usize) -> CliResult<()> {
    if expected != got {
        return Err(CliError::data(format!(
            "dataset has {got}-bit samples but the model reads out {expected} bits"
        )));
    }
    Ok(())
}

fn open_output(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", path.display())))
}

#[derive(Debug, Clone, Default)]
pub struct TrainArgs {
    pub config: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Checkpoint path; overrides `io.checkpoint`.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub trace: PathBuf,
    pub final_loss: (f64, f64),
}

/// Trains on the configured dataset and writes a checkpoint and loss trace.
/// The trace goes to `io.trace`, or next to the checkpoint as
/// `<name>.trace.csv`.
pub fn cmd_train(args: &TrainArgs) -> CliResult<TrainSummary> {
    let run = RunConfig::load(&args.config, args.seed)?;
    configure_workers(args.workers.or(run.workers));
    let checkpoint_path = args
        .out
        .clone()
        .or_else(|| run.checkpoint_path.clone())
        .ok_or_else(|| {
            CliError::config("io.checkpoint: no checkpoint path configured (or pass --out)")
        })?;
    let trace_path = run
        .trace_path
        .clone()
        .unwrap_or_else(|| checkpoint_path.with_extension("trace.csv"));

    let (n, data) = read_dataset(&run.data_path)?;
    check_width(run.model.n, n)?;
    let (spec, tower, level) = run.model.build(run.seed)?;
    let kernel = run
        .sigma
        .map(|s| KernelSpec::gaussian_hamming(spec.base.m(), s))
        .transpose()
        .map_err(|e| CliError::config(format!("kernel.sigma: {e}")))?;
    let result = train(&data, &spec, kernel.as_ref(), &run.train).map_err(classify)?;

    let mut out = open_output(&trace_path)?;
    write_trace_csv(&result.trace, &mut out)?;
    out.flush()?;
    let trained =
        crate::readout::EbsbmSpec::new(BsbmSpec::new(spec.base.k(), result.mesh)?, spec.readout)?;
    Checkpoint {
        model: run.model.clone(),
        spec: trained,
        tower,
        level,
        kernel: result.kernel,
        train: run.train.clone(),
        seed: run.seed,
        config_hash: run.hash(),
        final_loss: result.final_loss,
    }
    .save(&checkpoint_path)?;
    Ok(TrainSummary {
        checkpoint: checkpoint_path,
        trace: trace_path,
        final_loss: result.final_loss,
    })
}

#[derive(Debug, Clone, Default)]
pub struct SampleArgs {
    pub checkpoint: PathBuf,
    pub count: usize,
    /// Defaults to the checkpoint's seed.
    pub seed: Option<u64>,
    /// Emit `m`-bit Fock outcomes instead of readout values.
    pub raw: bool,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Exact samples, one bitstring per line, to `--out` or `stdout`.
pub fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    configure_workers(args.workers);
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    let samples = if args.count == 0 {
        Vec::new()
    } else {
        sample_exact(&ckpt.spec.base, args.count, args.seed.unwrap_or(ckpt.seed))?
    };
    let mut file;
    let out: &mut dyn Write = match &args.out {
        Some(path) => {
            file = open_output(path)?;
            &mut file
        }
        None => stdout,
    };
    for s in &samples {
        let line = if args.raw {
            s.to_bits()
        } else {
            ckpt.spec.readout.apply(s)?
        };
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct EvaluateArgs {
    pub checkpoint: PathBuf,
    pub data: PathBuf,
    /// Defaults to the checkpoint's seed, which reproduces its final loss on
    /// the training data.
    pub seed: Option<u64>,
    /// Kernel width; defaults to the checkpoint's.
    pub sigma: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn empirical_table(data: &[BitString], n: usize) -> Vec<f64> {
    let mut table = vec![0.0; 1 << n];
    for x in data {
        table[x.value() as usize] += 1.0;
    }
    let total = data.len() as f64;
    table.iter_mut().for_each(|v| *v /= total);
    table
}

/// `max_α |⟨Π_α⟩_full − ⟨Π_α⟩_postselected|` over all parity words.
fn max_dilute_gap(spec: &BsbmSpec, dist: &ExactDistribution) -> crate::Result<f64> {
    let m = spec.m();
    let mut diff = full_state_parity_table(spec)?;
    for (s, p) in dist.outcomes.iter().zip(&dist.probs) {
        diff[s.to_bits().value() as usize] -= p;
    }
    let scale = diff.len() as f64;
    debug_assert_eq!(diff.len(), 1 << m);
    Ok(walsh_transform(&diff)
        .iter()
        .map(|c| (c * scale).abs())
        .fold(0.0, f64::max))
}

/// Metrics CSV with columns `metric,value,stderr` in [`METRIC_ROWS`] order.
pub fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    configure_workers(args.workers);
    let ckpt = Checkpoint::load(&args.checkpoint)?;
    let (n, data) = read_dataset(&args.data)?;
    let spec = &ckpt.spec;
    check_width(spec.n(), n)?;
    let (m, k) = (spec.base.m(), spec.base.k());
    let kernel = match args.sigma {
        Some(s) => KernelSpec::gaussian_hamming(m, s)
            .map_err(|e| CliError::config(format!("--sigma: {e}")))?,
        None => ckpt.kernel.clone(),
    };
    let mut config = ckpt.train.clone();
    if let Some(seed) = args.seed {
        config.seed = seed;
        config.estimator = config.estimator.with_seed(seed);
    }
    let estimate = final_loss(&data, spec, &kernel, &config).map_err(classify)?;

    let enumerable = checked_binomial(m, k).is_some_and(|c| c <= enumeration_cap());
    let dist = if enumerable {
        Some(exact_distribution(&spec.base)?)
    } else {
        None
    };
    let fmt = |v: f64| format!("{v:.16e}");
    let exact_tv = match &dist {
        Some(d) if n <= MAX_TABLE_BITS => fmt(total_variation(
            &empirical_table(&data, n),
            &pushforward(d, &spec.readout)?,
        )),
        _ => SKIPPED.to_string(),
    };
    let small = enumerable && m <= MAX_EXACT_BITS;
    let exact_mmd2 = if small {
        let lifted: EmpiricalDistribution = final_lift(&data, spec, &config).map_err(classify)?;
        fmt(crate::training::mmd2_exact(
            &lifted.to_table()?,
            &full_state_parity_table(&spec.base)?,
            &kernel,
        )?)
    } else {
        SKIPPED.to_string()
    };
    let z = dist
        .as_ref()
        .map_or_else(|| SKIPPED.to_string(), |d| fmt(d.z));
    let gap = match &dist {
        Some(d) if small => fmt(max_dilute_gap(&spec.base, d)?),
        _ => SKIPPED.to_string(),
    };

    let mut file;
    let out: &mut dyn Write = match &args.out {
        Some(path) => {
            file = open_output(path)?;
            &mut file
        }
        None => stdout,
    };
    writeln!(out, "metric,value,stderr")?;
    writeln!(
        out,
        "{},{},{}",
        METRIC_ROWS[0],
        fmt(estimate.0),
        fmt(estimate.1)
    )?;
    for (name, value) in METRIC_ROWS[1..].iter().zip([exact_tv, exact_mmd2, z, gap]) {
        writeln!(out, "{name},{value},")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct TowerArgs {
    /// Reads `model.n`, `model.construction` and the base keys.
    pub config: Option<PathBuf>,
    pub n: Option<usize>,
    pub construction: Option<Construction>,
    pub verify: bool,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
}

/// Prints a tower description, and with `verify` its structural checks.
pub fn cmd_tower(args: &TowerArgs, stdout: &mut dyn Write) -> CliResult<()> {
    configure_workers(args.workers);
    let mut raw = match &args.config {
        Some(path) => RawConfig::parse(&std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?)?,
        None => RawConfig::default(),
    };
    if let Some(n) = args.n {
        raw.set("model.n", n.to_string());
    }
    if let Some(c) = args.construction {
        raw.set("model.construction", c.to_string());
    }
    raw.set("model.readout", "tower");
    let model = ModelConfig::from_raw(&raw)?;
    let (_, tower, _) = model.build_readout()?;
    let tower = tower.expect("tower readout");
    write!(stdout, "{}", tower.describe())?;
    if !args.verify {
        return Ok(());
    }
    let seed = match args.seed {
        Some(s) => s,
        None => raw.parse_value("run.seed")?.unwrap_or(0),
    };
    let checks = verify_tower(
        &tower,
        &VerifyOptions {
            seed,
            ..Default::default()
        },
    )?;
    for c in &checks {
        writeln!(stdout, "{c}")?;
    }
    let failed = checks.iter().filter(|c| c.failed()).count();
    if failed > 0 {
        return Err(CliError::runtime(format!("{failed} tower checks failed")));
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct OracleArgs {
    pub seed: u64,
    pub workers: Option<usize>,
}

/// Runs the brute-force cross-checks and prints one line per check.
pub fn cmd_oracle(args: &OracleArgs, stdout: &mut dyn Write) -> CliResult<()> {
    configure_workers(args.workers);
    let checks = run_oracle_suite(args.seed)?;
    for c in &checks {
        writeln!(stdout, "{c}")?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::runtime(format!("{failed} oracle checks failed")));
    }
    Ok(())
}
