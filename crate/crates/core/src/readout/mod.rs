//! Readout maps `f : Ω_m^k → {0,1}^n`, the extended model whose distribution
//! is the pushforward of the bare model through `f`, towers of such models,
//! and lifting of `n`-bit data back into the Fock outcome space.

mod lift;
mod maps;
mod tower;

pub use lift::{lift, lift_dataset, lift_dataset_posterior, LiftMode};
pub use maps::{BleedChain, ReadoutMap, MAX_BITS};
pub use tower::{
    build_tower, verify_tower, CheckOutcome, Construction, ReadoutTower, TowerBase, TowerCheck,
    TowerLevel, TowerOptions, VerifyOptions,
};

use crate::born_machine::{exact_distribution, raw_weights, BsbmSpec, ExactDistribution};
use crate::combinatorics::FockOutcome;
use crate::error::{Error, Result};

/// Widest codomain for which a dense probability table is built.
pub const MAX_TABLE_BITS: usize = 24;

/// A bare model followed by a fixed readout.
#[derive(Debug, Clone, PartialEq)]
pub struct EbsbmSpec {
    pub base: BsbmSpec,
    pub readout: ReadoutMap,
}

impl EbsbmSpec {
    pub fn new(base: BsbmSpec, readout: ReadoutMap) -> Result<Self> {
        if readout.m() != base.m() || readout.k() != base.k() {
            return Err(Error::DimensionMismatch(format!(
                "readout acts on Ω_{}^{} but the model has m = {}, k = {}",
                readout.m(),
                readout.k(),
                base.m(),
                base.k()
            )));
        }
        Ok(EbsbmSpec { base, readout })
    }

    pub fn n(&self) -> usize {
        self.readout.n()
    }
}

fn check_table_bits(n: usize) -> Result<()> {
    if n > MAX_TABLE_BITS {
        return Err(Error::SpaceTooLarge {
            bits: n,
            limit: MAX_TABLE_BITS,
        });
    }
    Ok(())
}

/// Groups a bare distribution by readout value into a table over `{0,1}^n`
/// indexed by integer value.
pub fn pushforward(dist: &ExactDistribution, readout: &ReadoutMap) -> Result<Vec<f64>> {
    check_table_bits(readout.n())?;
    let mut table = vec![0.0; 1usize << readout.n()];
    for (s, p) in dist.outcomes.iter().zip(&dist.probs) {
        table[readout.value(s)? as usize] += p;
    }
    Ok(table)
}

/// The extended model's distribution over `{0,1}^n`.
pub fn pushforward_exact(spec: &EbsbmSpec) -> Result<Vec<f64>> {
    pushforward(&exact_distribution(&spec.base)?, &spec.readout)
}

/// Pushforward of the raw weights of an explicit outcome list, for models too
/// large to enumerate whose support is known. Returns the table (not
/// renormalized) and the total raw weight it captured.
pub fn pushforward_on_support(
    spec: &EbsbmSpec,
    support: &[FockOutcome],
) -> Result<(Vec<f64>, f64)> {
    check_table_bits(spec.n())?;
    let weights = raw_weights(&spec.base, support)?;
    let mut table = vec![0.0; 1usize << spec.n()];
    for (s, w) in support.iter().zip(&weights) {
        table[spec.readout.value(s)? as usize] += w;
    }
    Ok((table, weights.iter().sum()))
}

/// `½ Σ |p − q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "tables over different spaces");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use crate::born_machine::sample_exact;
    use crate::interferometer::{haar_random, InterferometerMesh};

    #[test]
    fn constant_readout_gives_point_mass() {
        let base = BsbmSpec::new(2, haar_random(5, 1)).unwrap();
        let spec = EbsbmSpec::new(base, ReadoutMap::constant(5, 2, "10".parse().unwrap())).unwrap();
        let table = pushforward_exact(&spec).unwrap();
        assert!((table[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn injective_readout_relabels() {
        let base = BsbmSpec::new(2, haar_random(5, 2)).unwrap();
        let dist = exact_distribution(&base).unwrap();
        let table = pushforward(&dist, &ReadoutMap::rank(5, 2, 4).unwrap()).unwrap();
        assert_eq!(&table[..10], &dist.probs[..]);
        assert!(table[10..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn pushforward_matches_sampling() {
        let base = BsbmSpec::new(2, haar_random(5, 3)).unwrap();
        let readout = ReadoutMap::interp(5, 2, 3).unwrap();
        let spec = EbsbmSpec::new(base.clone(), readout.clone()).unwrap();
        let exact = pushforward_exact(&spec).unwrap();
        assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let draws = 100_000;
        let mut hist = vec![0.0; 8];
        for s in sample_exact(&base, draws, 77).unwrap() {
            hist[readout.value(&s).unwrap() as usize] += 1.0 / draws as f64;
        }
        assert!(total_variation(&exact, &hist) <= 0.02);
    }

    #[test]
    fn mismatched_readout_rejected() {
        let base = BsbmSpec::new(1, InterferometerMesh::identity(3)).unwrap();
        assert!(EbsbmSpec::new(base, ReadoutMap::constant(4, 1, BitString::zeros(1))).is_err());
    }
}
