use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ReadoutMap;
use crate::bits::BitString;
use crate::born_machine::{raw_weights, BsbmSpec};
use crate::combinatorics::FockOutcome;
use crate::error::{Error, Result};

/// How `n`-bit data is mapped back to Fock outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftMode {
    /// The lowest-rank preimage.
    Deterministic,
    /// A uniform draw from the preimage set.
    Stochastic,
    /// A draw from the preimage set weighted by a model's collision-free
    /// probabilities; see [`lift_dataset_posterior`].
    Posterior,
}

impl std::str::FromStr for LiftMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(LiftMode::Deterministic),
            "stochastic" => Ok(LiftMode::Stochastic),
            "posterior" => Ok(LiftMode::Posterior),
            other => Err(Error::InvalidParameter(format!(
                "unknown lift mode {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for LiftMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LiftMode::Deterministic => "deterministic",
            LiftMode::Stochastic => "stochastic",
            LiftMode::Posterior => "posterior",
        })
    }
}

/// One preimage of `y` under `readout`.
pub fn lift<R: Rng + ?Sized>(
    y: &BitString,
    mode: LiftMode,
    readout: &ReadoutMap,
    rng: &mut R,
) -> Result<FockOutcome> {
    match mode {
        LiftMode::Deterministic => readout
            .min_preimage(y)?
            .ok_or_else(|| Error::EmptyPreimage(y.to_string())),
        LiftMode::Stochastic => {
            let count = readout.preimage_count(y)?;
            if count == 0 {
                return Err(Error::EmptyPreimage(y.to_string()));
            }
            readout.preimage(y, rng.random_range(0..count))
        }
        LiftMode::Posterior => Err(posterior_needs_model()),
    }
}

fn posterior_needs_model() -> Error {
    Error::InvalidParameter("posterior lift needs a model, use lift_dataset_posterior".into())
}

/// Lifts every data point. Deterministic lifts are computed once per distinct
/// value; stochastic lifts draw independently per point from `seed`.
pub fn lift_dataset(
    data: &[BitString],
    mode: LiftMode,
    readout: &ReadoutMap,
    seed: u64,
) -> Result<Vec<FockOutcome>> {
    match mode {
        LiftMode::Deterministic => {
            let mut cache: HashMap<&BitString, FockOutcome> = HashMap::new();
            data.iter()
                .map(|y| {
                    if let Some(s) = cache.get(y) {
                        return Ok(s.clone());
                    }
                    let s = readout
                        .min_preimage(y)?
                        .ok_or_else(|| Error::EmptyPreimage(y.to_string()))?;
                    cache.insert(y, s.clone());
                    Ok(s)
                })
                .collect()
        }
        LiftMode::Stochastic => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            data.iter()
                .map(|y| lift(y, mode, readout, &mut rng))
                .collect()
        }
        LiftMode::Posterior => Err(posterior_needs_model()),
    }
}

/// Lifts each point to `s ∈ f⁻¹(y)` drawn with probability proportional to
/// `|Perm U_s|²` under `model`, uniform where the model gives `y` no mass.
/// When the model's pushforward equals the data distribution, the lifted
/// data is distributed as the model itself. Preimage sets are enumerated, so
/// each must fit under the enumeration cap.
pub fn lift_dataset_posterior(
    data: &[BitString],
    readout: &ReadoutMap,
    model: &BsbmSpec,
    seed: u64,
) -> Result<Vec<FockOutcome>> {
    if model.m() != readout.m() || model.k() != readout.k() {
        return Err(Error::DimensionMismatch(format!(
            "model is ({}, {}), readout expects ({}, {})",
            model.m(),
            model.k(),
            readout.m(),
            readout.k()
        )));
    }
    let mut tables: HashMap<&BitString, (Vec<FockOutcome>, WeightedIndex<f64>)> = HashMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(data.len());
    for y in data {
        if !tables.contains_key(y) {
            let pre = readout.preimages(y)?;
            if pre.is_empty() {
                return Err(Error::EmptyPreimage(y.to_string()));
            }
            let mut w = raw_weights(model, &pre)?;
            if w.iter().sum::<f64>() <= 0.0 {
                w.fill(1.0);
            }
            let index = WeightedIndex::new(&w).expect("nonnegative weights with positive sum");
            tables.insert(y, (pre, index));
        }
        let (pre, index) = &tables[y];
        out.push(pre[index.sample(&mut rng)].clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_lift_is_right_inverse() {
        let f = ReadoutMap::interp(5, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for y in BitString::all(3) {
            let s = lift(&y, LiftMode::Deterministic, &f, &mut rng).unwrap();
            assert_eq!(f.apply(&s).unwrap(), y);
        }
    }

    #[test]
    fn injective_lifts_coincide() {
        let f = ReadoutMap::rank(5, 2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for v in 0..10 {
            let y = BitString::from_value(v, 4);
            assert_eq!(
                lift(&y, LiftMode::Deterministic, &f, &mut rng).unwrap(),
                lift(&y, LiftMode::Stochastic, &f, &mut rng).unwrap()
            );
        }
        let y = BitString::from_value(12, 4);
        assert!(matches!(
            lift(&y, LiftMode::Stochastic, &f, &mut rng),
            Err(Error::EmptyPreimage(_))
        ));
    }

    #[test]
    fn posterior_lift_follows_model() {
        use crate::born_machine::exact_distribution;
        use crate::interferometer::haar_random;

        let f = ReadoutMap::interp(8, 2, 3).unwrap();
        let model = BsbmSpec::new(2, haar_random(8, 4)).unwrap();
        let dist = exact_distribution(&model).unwrap();
        let y: BitString = "010".parse().unwrap();
        let pre = f.preimages(&y).unwrap();
        let mass: f64 = pre.iter().map(|s| dist.prob(s)).sum();
        let draws = 10_000;
        let lifted = lift_dataset_posterior(&vec![y; draws], &f, &model, 8).unwrap();
        for s in &pre {
            let p = dist.prob(s) / mass;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt().max(1.0);
            let c = lifted.iter().filter(|t| *t == s).count() as f64;
            assert!(
                (c - draws as f64 * p).abs() < 4.0 * sd,
                "{s}: {c} vs {}",
                draws as f64 * p
            );
        }
        assert!(lift_dataset(&[], LiftMode::Posterior, &f, 0).is_err());
    }

    #[test]
    fn stochastic_lift_is_uniform() {
        let f = ReadoutMap::interp(8, 2, 3).unwrap();
        let y: BitString = "001".parse().unwrap();
        let pre = f.preimages(&y).unwrap();
        assert!(pre.len() >= 3);
        let draws = 10_000;
        let data = vec![y; draws];
        let lifted = lift_dataset(&data, LiftMode::Stochastic, &f, 5).unwrap();
        let p = 1.0 / pre.len() as f64;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for s in &pre {
            let c = lifted.iter().filter(|t| *t == s).count() as f64;
            assert!((c - draws as f64 * p).abs() < 3.0 * sd, "{s}: {c}");
        }
    }
}
