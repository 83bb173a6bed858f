use std::sync::Arc;

use crate::bits::BitString;
use crate::combinatorics::{
    binomial, checked_binomial, enumerate_outcomes, skip_rank, skip_unrank, subset_rank,
    subset_unrank, FockOutcome,
};
use crate::error::{Error, Result};

/// Largest codomain width supported by the readouts.
pub const MAX_BITS: usize = 100;

fn modulus(n: usize) -> u128 {
    1u128 << n
}

/// The mode/photon ladder of a bleed-mode tower. Level 0 is the base; level 1
/// adds zero-padded modes; every later level adds one photon, `w ≥ 1` working
/// modes and one bleed mode, embedding the previous level as `x ‖ 0^w ‖ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleedChain {
    n: usize,
    levels: Vec<(usize, usize)>,
}

impl BleedChain {
    pub fn new(n: usize, levels: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 || n > MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "readout width {n} out of range"
            )));
        }
        let Some(&(m0, k0)) = levels.first() else {
            return Err(Error::InvalidParameter(
                "bleed chain needs a base level".into(),
            ));
        };
        if k0 == 0 || k0 > m0 {
            return Err(Error::InfeasibleBase(format!(
                "({m0},{k0}) is not a valid sampler"
            )));
        }
        if binomial(m0, k0) > modulus(n) {
            return Err(Error::CodomainTooSmall {
                m: m0,
                k: k0,
                n,
                count: binomial(m0, k0),
            });
        }
        for (i, pair) in levels.windows(2).enumerate() {
            let ((pm, pk), (m, k)) = (pair[0], pair[1]);
            let ok = if i == 0 {
                k == pk && m >= pm
            } else {
                k == pk + 1 && m >= pm + 2
            };
            if !ok {
                return Err(Error::DimensionMismatch(format!(
                    "bleed level {} ({m},{k}) does not extend ({pm},{pk})",
                    i + 1
                )));
            }
            if checked_binomial(m, k).is_none() {
                return Err(Error::InvalidParameter(format!("C({m},{k}) overflows")));
            }
        }
        Ok(BleedChain { n, levels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[(usize, usize)] {
        &self.levels
    }

    pub fn base_count(&self) -> u128 {
        let (m, k) = self.levels[0];
        binomial(m, k)
    }

    fn count(&self, level: usize) -> u128 {
        let (m, k) = self.levels[level];
        binomial(m, k)
    }

    /// `R_level`: lifts an outcome of `level - 1` into `level`.
    pub fn embed(&self, x: &FockOutcome, level: usize) -> Result<FockOutcome> {
        if level == 0 || level >= self.levels.len() {
            return Err(Error::DimensionMismatch(format!(
                "no embedding into level {level}"
            )));
        }
        let (pm, pk) = self.levels[level - 1];
        let (m, _) = self.levels[level];
        if x.m() != pm || x.k() != pk {
            return Err(Error::DimensionMismatch(format!(
                "{x} is not an outcome of level {}",
                level - 1
            )));
        }
        Ok(if level == 1 {
            x.extend(m - pm, 0)
        } else {
            x.extend(m - pm - 1, 1)
        })
    }

    /// Whether `s` lies in the image of `R_level`.
    pub fn is_embedded(&self, s: &FockOutcome, level: usize) -> bool {
        let (pm, _) = self.levels[level - 1];
        let (m, k) = self.levels[level];
        let c = s.modes();
        if level == 1 {
            c.last().is_none_or(|&last| last < pm)
        } else {
            c[k - 1] == m - 1 && (k < 2 || c[k - 2] < pm)
        }
    }

    /// Left inverse of [`embed`](Self::embed) on embedded outcomes.
    pub fn strip(&self, s: &FockOutcome, level: usize) -> Result<FockOutcome> {
        if !self.is_embedded(s, level) {
            return Err(Error::InvalidOutcome(format!(
                "{s} is not embedded at level {level}"
            )));
        }
        let (pm, pk) = self.levels[level - 1];
        FockOutcome::from_modes(pm, s.modes()[..pk].to_vec())
    }

    /// Number of embedded outcomes of `level` that precede `s` in rank order.
    fn embedded_before(&self, s: &FockOutcome, level: usize) -> u128 {
        let (pm, pk) = self.levels[level - 1];
        let c = s.modes();
        let mut total = 0u128;
        let mut lo = 0usize;
        for p in 0..pk {
            if p > 0 {
                if c[p - 1] >= pm {
                    break;
                }
                lo = c[p - 1] + 1;
            }
            let hi = c[p].min(pm);
            if lo < hi {
                // Σ_{v=lo}^{hi-1} C(pm-1-v, r) by the hockey-stick identity
                let r = pk - 1 - p;
                total += binomial(pm - lo, r + 1) - binomial(pm - hi, r + 1);
            }
        }
        total
    }

    /// Rank of a non-embedded `s` among the non-embedded outcomes of `level`.
    fn nonembedded_rank(&self, s: &FockOutcome, level: usize) -> u128 {
        subset_rank(s) - self.embedded_before(s, level)
    }

    fn nonembedded_count(&self, level: usize) -> u128 {
        self.count(level) - self.count(level - 1)
    }

    /// The non-embedded outcome with the given non-embedded rank.
    fn nonembedded_unrank(&self, r: u128, level: usize) -> Result<FockOutcome> {
        let (m, k) = self.levels[level];
        let total = self.count(level);
        // non-embedded outcomes with rank < g
        let below = |g: u128| -> Result<u128> {
            if g == total {
                return Ok(self.nonembedded_count(level));
            }
            let s = subset_unrank(m, k, g)?;
            Ok(g - self.embedded_before(&s, level))
        };
        let (mut lo, mut hi) = (0u128, total - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if below(mid + 1)? > r {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let s = subset_unrank(m, k, lo)?;
        debug_assert!(!self.is_embedded(&s, level));
        Ok(s)
    }

    pub fn value(&self, s: &FockOutcome, level: usize) -> u128 {
        let mut s = s.clone();
        let mut level = level;
        loop {
            if level == 0 {
                return subset_rank(&s);
            }
            if self.is_embedded(&s, level) {
                s = self.strip(&s, level).expect("embedded outcome strips");
                level -= 1;
            } else {
                let v = self.base_count() + self.nonembedded_rank(&s, level);
                return v % modulus(self.n);
            }
        }
    }

    /// Fallback outcomes of `level` reading out to `y`: non-embedded ranks
    /// `r ≡ y − C(m₁,k₁) (mod 2^n)`.
    fn fallback_first_and_count(&self, y: u128, level: usize) -> (u128, u128) {
        let big = modulus(self.n);
        let r0 = (y + big - self.base_count() % big) % big;
        let avail = self.nonembedded_count(level);
        let count = if r0 < avail {
            (avail - r0).div_ceil(big)
        } else {
            0
        };
        (r0, count)
    }

    pub fn preimage_count(&self, y: u128, level: usize) -> u128 {
        if level == 0 {
            return u128::from(y < self.base_count());
        }
        self.preimage_count(y, level - 1) + self.fallback_first_and_count(y, level).1
    }

    /// The `index`-th preimage, embedded preimages first.
    pub fn preimage(&self, y: u128, level: usize, index: u128) -> Result<FockOutcome> {
        if level == 0 {
            let (m, k) = self.levels[0];
            if index == 0 && y < self.base_count() {
                return subset_unrank(m, k, y);
            }
            return Err(Error::EmptyPreimage(format!("{y}")));
        }
        let inner = self.preimage_count(y, level - 1);
        if index < inner {
            let x = self.preimage(y, level - 1, index)?;
            return self.embed(&x, level);
        }
        let (r0, count) = self.fallback_first_and_count(y, level);
        let j = index - inner;
        if j >= count {
            return Err(Error::EmptyPreimage(format!("{y} (index {index})")));
        }
        self.nonembedded_unrank(r0 + j * modulus(self.n), level)
    }

    pub fn min_preimage(&self, y: u128, level: usize) -> Result<Option<FockOutcome>> {
        if level == 0 {
            return Ok(if y < self.base_count() {
                let (m, k) = self.levels[0];
                Some(subset_unrank(m, k, y)?)
            } else {
                None
            });
        }
        let embedded = match self.min_preimage(y, level - 1)? {
            Some(x) => Some(self.embed(&x, level)?),
            None => None,
        };
        let (r0, count) = self.fallback_first_and_count(y, level);
        let fallback = if count > 0 {
            Some(self.nonembedded_unrank(r0, level)?)
        } else {
            None
        };
        Ok(match (embedded, fallback) {
            (Some(a), Some(b)) => Some(if subset_rank(&a) < subset_rank(&b) {
                a
            } else {
                b
            }),
            (a, b) => a.or(b),
        })
    }

    /// `F′_level`: the base outcome pushed through every embedding.
    pub fn lift_base(&self, x: &FockOutcome, level: usize) -> Result<FockOutcome> {
        let mut s = x.clone();
        for l in 1..=level {
            s = self.embed(&s, l)?;
        }
        Ok(s)
    }
}

/// A readout map `f : Ω_m^k → {0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ReadoutMap {
    /// Binary encoding of the rank; needs `C(m,k) ≤ 2^n`.
    Rank { m: usize, k: usize, n: usize },
    /// Last-mode-occupied outcomes read out the rank of their prefix; the rest
    /// read out `C(m−1,k−1) + skip_rank` with the high bits dropped.
    Interp { m: usize, k: usize, n: usize },
    /// Level `level` of a bleed-mode tower.
    Bleed {
        chain: Arc<BleedChain>,
        level: usize,
    },
    /// Maps everything to one value. Not surjective; for experiments only.
    Constant {
        m: usize,
        k: usize,
        value: BitString,
    },
    /// Arbitrary lookup indexed by outcome rank.
    Table {
        m: usize,
        k: usize,
        n: usize,
        values: Vec<u128>,
    },
}

impl ReadoutMap {
    pub fn rank(m: usize, k: usize, n: usize) -> Result<Self> {
        check_width(n)?;
        let count = binomial(m, k);
        if k > m || count > modulus(n) {
            return Err(Error::CodomainTooSmall { m, k, n, count });
        }
        Ok(ReadoutMap::Rank { m, k, n })
    }

    /// Requires `C(m−1,k−1) ≤ 2^n ≤ C(m,k)`. The upper bound
    /// `C(m,k) ≤ 2^{n+1}` of the tower construction is not needed for the map
    /// to be well defined and is left to [`crate::readout::build_tower`].
    pub fn interp(m: usize, k: usize, n: usize) -> Result<Self> {
        check_width(n)?;
        if k == 0 || k > m {
            return Err(Error::SizePreconditionViolated(format!(
                "need 1 <= k <= m, got ({m},{k})"
            )));
        }
        let e1 = binomial(m - 1, k - 1);
        let all = binomial(m, k);
        if e1 > modulus(n) || all < modulus(n) {
            return Err(Error::SizePreconditionViolated(format!(
                "need C({},{}) = {e1} <= 2^{n} <= C({m},{k}) = {all}",
                m - 1,
                k - 1
            )));
        }
        Ok(ReadoutMap::Interp { m, k, n })
    }

    pub fn bleed(chain: Arc<BleedChain>, level: usize) -> Result<Self> {
        if level >= chain.levels.len() {
            return Err(Error::InvalidParameter(format!("no bleed level {level}")));
        }
        Ok(ReadoutMap::Bleed { chain, level })
    }

    pub fn constant(m: usize, k: usize, value: BitString) -> Self {
        ReadoutMap::Constant { m, k, value }
    }

    /// `values[r]` is the readout of the outcome of rank `r`.
    pub fn table(m: usize, k: usize, n: usize, values: Vec<u128>) -> Result<Self> {
        check_width(n)?;
        if values.len() as u128 != binomial(m, k) {
            return Err(Error::LengthMismatch {
                expected: binomial(m, k) as usize,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|&&v| v >= modulus(n)) {
            return Err(Error::InvalidParameter(format!(
                "table value {v} exceeds {n} bits"
            )));
        }
        Ok(ReadoutMap::Table { m, k, n, values })
    }

    pub fn m(&self) -> usize {
        match self {
            ReadoutMap::Rank { m, .. }
            | ReadoutMap::Interp { m, .. }
            | ReadoutMap::Constant { m, .. }
            | ReadoutMap::Table { m, .. } => *m,
            ReadoutMap::Bleed { chain, level } => chain.levels[*level].0,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            ReadoutMap::Rank { k, .. }
            | ReadoutMap::Interp { k, .. }
            | ReadoutMap::Constant { k, .. }
            | ReadoutMap::Table { k, .. } => *k,
            ReadoutMap::Bleed { chain, level } => chain.levels[*level].1,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ReadoutMap::Rank { n, .. }
            | ReadoutMap::Interp { n, .. }
            | ReadoutMap::Table { n, .. } => *n,
            ReadoutMap::Bleed { chain, .. } => chain.n,
            ReadoutMap::Constant { value, .. } => value.len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ReadoutMap::Rank { .. } => "rank",
            ReadoutMap::Interp { .. } => "interp",
            ReadoutMap::Bleed { .. } => "bleed",
            ReadoutMap::Constant { .. } => "constant",
            ReadoutMap::Table { .. } => "table",
        }
    }

    fn check_outcome(&self, s: &FockOutcome) -> Result<()> {
        if s.m() != self.m() || s.k() != self.k() {
            return Err(Error::InvalidOutcome(format!(
                "{s} is not in Ω_{}^{}",
                self.m(),
                self.k()
            )));
        }
        Ok(())
    }

    /// Readout as an integer in `[0, 2^n)`.
    pub fn value(&self, s: &FockOutcome) -> Result<u128> {
        self.check_outcome(s)?;
        Ok(match self {
            ReadoutMap::Rank { .. } => subset_rank(s),
            ReadoutMap::Interp { m, k, n } => {
                if s.last_mode_occupied() {
                    subset_rank(&s.prefix(m - 1))
                } else {
                    (binomial(m - 1, k - 1) + skip_rank(s)?) % modulus(*n)
                }
            }
            ReadoutMap::Bleed { chain, level } => chain.value(s, *level),
            ReadoutMap::Constant { value, .. } => value.value(),
            ReadoutMap::Table { values, .. } => values[subset_rank(s) as usize],
        })
    }

    pub fn apply(&self, s: &FockOutcome) -> Result<BitString> {
        Ok(BitString::from_value(self.value(s)?, self.n()))
    }

    fn check_value(&self, y: &BitString) -> Result<u128> {
        if y.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        Ok(y.value())
    }

    /// Interp preimages in increasing rank order.
    fn interp_preimages(m: usize, k: usize, n: usize, y: u128) -> Result<Vec<FockOutcome>> {
        let e1 = binomial(m - 1, k - 1);
        let rest = binomial(m, k) - e1;
        let big = modulus(n);
        let mut out = Vec::new();
        if y < e1 {
            out.push(subset_unrank(m - 1, k - 1, y)?.extend(0, 1));
        }
        let mut r = (y + big - e1 % big) % big;
        while r < rest {
            out.push(skip_unrank(m, k, r)?);
            r += big;
        }
        out.sort_by_key(subset_rank);
        Ok(out)
    }

    fn enumerated_preimages(&self, y: u128) -> Result<Vec<FockOutcome>> {
        let mut out = Vec::new();
        for s in enumerate_outcomes(self.m(), self.k())? {
            if self.value(&s)? == y {
                out.push(s);
            }
        }
        Ok(out)
    }

    pub fn preimage_count(&self, y: &BitString) -> Result<u128> {
        let v = self.check_value(y)?;
        Ok(match self {
            ReadoutMap::Rank { m, k, .. } => u128::from(v < binomial(*m, *k)),
            ReadoutMap::Interp { m, k, n } => Self::interp_preimages(*m, *k, *n, v)?.len() as u128,
            ReadoutMap::Bleed { chain, level } => chain.preimage_count(v, *level),
            ReadoutMap::Constant { m, k, value } => {
                if v == value.value() {
                    binomial(*m, *k)
                } else {
                    0
                }
            }
            ReadoutMap::Table { values, .. } => values.iter().filter(|&&x| x == v).count() as u128,
        })
    }

    /// The `index`-th element of `f⁻¹(y)` in the map's canonical order
    /// (increasing rank, except bleed maps list embedded preimages first).
    pub fn preimage(&self, y: &BitString, index: u128) -> Result<FockOutcome> {
        let v = self.check_value(y)?;
        let missing = || Error::EmptyPreimage(format!("{y} (index {index})"));
        match self {
            ReadoutMap::Rank { m, k, .. } => {
                if index == 0 && v < binomial(*m, *k) {
                    subset_unrank(*m, *k, v)
                } else {
                    Err(missing())
                }
            }
            ReadoutMap::Interp { m, k, n } => Self::interp_preimages(*m, *k, *n, v)?
                .into_iter()
                .nth(index as usize)
                .ok_or_else(missing),
            ReadoutMap::Bleed { chain, level } => chain.preimage(v, *level, index),
            ReadoutMap::Constant { m, k, value } => {
                if v == value.value() && index < binomial(*m, *k) {
                    subset_unrank(*m, *k, index)
                } else {
                    Err(missing())
                }
            }
            ReadoutMap::Table { m, k, values, .. } => {
                let r = values
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x == v)
                    .nth(index as usize)
                    .ok_or_else(missing)?
                    .0;
                subset_unrank(*m, *k, r as u128)
            }
        }
    }

    /// The lowest-rank element of `f⁻¹(y)`, if any.
    pub fn min_preimage(&self, y: &BitString) -> Result<Option<FockOutcome>> {
        match self {
            ReadoutMap::Bleed { chain, level } => chain.min_preimage(self.check_value(y)?, *level),
            _ => {
                if self.preimage_count(y)? == 0 {
                    Ok(None)
                } else {
                    self.preimage(y, 0).map(Some)
                }
            }
        }
    }

    /// Every element of `f⁻¹(y)`, refusing sets beyond the enumeration cap.
    pub fn preimages(&self, y: &BitString) -> Result<Vec<FockOutcome>> {
        let count = self.preimage_count(y)?;
        let cap = crate::combinatorics::enumeration_cap();
        if count > cap {
            return Err(Error::EnumerationTooLarge {
                m: self.m(),
                k: self.k(),
                count,
                cap,
            });
        }
        if matches!(self, ReadoutMap::Table { .. } | ReadoutMap::Constant { .. }) {
            return self.enumerated_preimages(y.value());
        }
        (0..count).map(|i| self.preimage(y, i)).collect()
    }

    /// Membership and inverse on the image of the embedded hard sampler:
    /// the `E₁` branch of an interp map, the base image `F′` of a bleed level,
    /// or the whole domain of a rank map. `None` when `y` is not in that image.
    pub fn invert_embedded(&self, y: &BitString) -> Result<Option<FockOutcome>> {
        let v = self.check_value(y)?;
        match self {
            ReadoutMap::Rank { m, k, .. } => Ok(if v < binomial(*m, *k) {
                Some(subset_unrank(*m, *k, v)?)
            } else {
                None
            }),
            ReadoutMap::Interp { m, k, .. } => Ok(if v < binomial(m - 1, k - 1) {
                Some(subset_unrank(m - 1, k - 1, v)?.extend(0, 1))
            } else {
                None
            }),
            ReadoutMap::Bleed { chain, level } => {
                if v < chain.base_count() {
                    let (m0, k0) = chain.levels[0];
                    Ok(Some(chain.lift_base(&subset_unrank(m0, k0, v)?, *level)?))
                } else {
                    Ok(None)
                }
            }
            _ => Err(Error::InvalidParameter(format!(
                "{} readout has no embedded sampler",
                self.kind()
            ))),
        }
    }
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_BITS {
        return Err(Error::InvalidParameter(format!(
            "readout width {n} out of range"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(s: &str) -> FockOutcome {
        s.parse().unwrap()
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn rank_readout_examples() {
        let f = ReadoutMap::rank(3, 1, 2).unwrap();
        assert_eq!(f.apply(&outcome("100")).unwrap(), bits("00"));
        assert_eq!(f.apply(&outcome("010")).unwrap(), bits("01"));
        assert_eq!(f.apply(&outcome("001")).unwrap(), bits("10"));
        assert!(matches!(
            ReadoutMap::rank(4, 2, 2),
            Err(Error::CodomainTooSmall { .. })
        ));
    }

    #[test]
    fn interp_small_instance() {
        let f = ReadoutMap::interp(5, 2, 3).unwrap();
        // E₁ outcomes read out the rank of their 4-mode prefix
        assert_eq!(f.apply(&outcome("10001")).unwrap(), bits("000"));
        assert_eq!(f.apply(&outcome("00011")).unwrap(), bits("011"));
        // 11000 has skip rank 0 → 4 + 0
        assert_eq!(f.apply(&outcome("11000")).unwrap(), bits("100"));
        assert!(matches!(
            ReadoutMap::interp(4, 2, 3),
            Err(Error::SizePreconditionViolated(_))
        ));
    }

    #[test]
    fn interp_preimages_are_exact() {
        let f = ReadoutMap::interp(8, 2, 3).unwrap();
        let all = enumerate_outcomes(8, 2).unwrap();
        for y in BitString::all(3) {
            let expected: Vec<_> = all
                .iter()
                .filter(|s| f.apply(s).unwrap() == y)
                .cloned()
                .collect();
            assert_eq!(f.preimages(&y).unwrap(), expected);
            assert_eq!(f.min_preimage(&y).unwrap().as_ref(), expected.first());
        }
    }

    #[test]
    fn embedded_counts_match_brute_force() {
        let chain = BleedChain::new(4, vec![(6, 2), (7, 2), (9, 3), (11, 4)]).unwrap();
        for level in 1..4 {
            let (m, k) = chain.levels[level];
            let all = enumerate_outcomes(m, k).unwrap();
            let mut seen = 0u128;
            let mut nonembedded = 0u128;
            for s in &all {
                assert_eq!(
                    chain.embedded_before(s, level),
                    seen,
                    "{s} at level {level}"
                );
                if chain.is_embedded(s, level) {
                    seen += 1;
                } else {
                    assert_eq!(chain.nonembedded_rank(s, level), nonembedded);
                    assert_eq!(&chain.nonembedded_unrank(nonembedded, level).unwrap(), s);
                    nonembedded += 1;
                }
            }
            assert_eq!(seen, chain.count(level - 1));
        }
    }

    #[test]
    fn bleed_preimages_match_brute_force() {
        let chain = Arc::new(BleedChain::new(4, vec![(6, 2), (7, 2), (9, 3)]).unwrap());
        for level in 0..3 {
            let f = ReadoutMap::bleed(chain.clone(), level).unwrap();
            let all = enumerate_outcomes(f.m(), f.k()).unwrap();
            for y in BitString::all(4) {
                let expected: Vec<_> = all
                    .iter()
                    .filter(|s| f.apply(s).unwrap() == y)
                    .cloned()
                    .collect();
                let mut got = f.preimages(&y).unwrap();
                got.sort_by_key(subset_rank);
                assert_eq!(got, expected);
                assert_eq!(f.min_preimage(&y).unwrap().as_ref(), expected.first());
            }
        }
    }

    #[test]
    fn bleed_chain_validation() {
        assert!(BleedChain::new(4, vec![(6, 2), (7, 2), (8, 3)]).is_err());
        assert!(BleedChain::new(4, vec![(6, 2), (7, 3)]).is_err());
        assert!(BleedChain::new(3, vec![(6, 2)]).is_err());
    }

    #[test]
    fn constant_and_table() {
        let f = ReadoutMap::constant(3, 1, bits("1"));
        assert_eq!(f.preimage_count(&bits("1")).unwrap(), 3);
        assert_eq!(f.preimage_count(&bits("0")).unwrap(), 0);
        assert_eq!(f.min_preimage(&bits("0")).unwrap(), None);
        let t = ReadoutMap::table(3, 1, 1, vec![1, 0, 1]).unwrap();
        assert_eq!(
            t.preimages(&bits("1")).unwrap(),
            vec![outcome("100"), outcome("001")]
        );
        assert!(ReadoutMap::table(3, 1, 1, vec![2, 0, 1]).is_err());
    }
}
