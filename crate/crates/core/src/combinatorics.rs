//! Exact combinatorics on the collision-free outcome space: the weight-`k`
//! bitstrings of length `m`.
//!
//! Outcomes are ordered lexicographically by their bitstring with mode 0 as
//! the most significant position, reading `1` before `0`. Equivalently,
//! outcomes are ordered by the lexicographic order of their sorted
//! occupied-mode tuples, so for `m = 4, k = 2` the order is
//! `1100, 1010, 1001, 0110, 0101, 0011`. Every rank, unrank and readout map in
//! the crate uses this single order.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Default limit on the number of outcomes any exact routine will enumerate.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

/// Environment variable overriding [`DEFAULT_ENUMERATION_CAP`].
pub const ENUMERATION_CAP_ENV: &str = "BSBM_ENUM_CAP";

/// The active enumeration cap; read once from `BSBM_ENUM_CAP` if set.
pub fn enumeration_cap() -> u128 {
    static CAP: OnceLock<u128> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(ENUMERATION_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_ENUMERATION_CAP)
    })
}

/// A collision-free measurement record: `k` photons in `m` modes, at most one
/// per mode. Stored as the sorted list of occupied modes (0-indexed).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockOutcome {
    m: usize,
    modes: Vec<usize>,
}

impl FockOutcome {
    pub fn from_modes(m: usize, mut modes: Vec<usize>) -> Result<Self> {
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidOutcome(format!("repeated mode in {modes:?}")));
        }
        if let Some(&last) = modes.last() {
            if last >= m {
                return Err(Error::InvalidOutcome(format!(
                    "mode {last} out of range for {m} modes"
                )));
            }
        }
        Ok(FockOutcome { m, modes })
    }

    pub fn from_bits(bits: &BitString) -> Self {
        let modes = (0..bits.len()).filter(|&i| bits.get(i)).collect();
        FockOutcome {
            m: bits.len(),
            modes,
        }
    }

    pub fn to_bits(&self) -> BitString {
        let mut bits = BitString::zeros(self.m);
        for &j in &self.modes {
            bits.set(j, true);
        }
        bits
    }

    /// Mode count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Photon count (Hamming weight).
    pub fn k(&self) -> usize {
        self.modes.len()
    }

    /// Sorted occupied modes, 0-indexed.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn is_occupied(&self, mode: usize) -> bool {
        self.modes.binary_search(&mode).is_ok()
    }

    pub fn last_mode_occupied(&self) -> bool {
        self.m > 0 && self.modes.last() == Some(&(self.m - 1))
    }

    /// Number of occupied modes flagged in `alpha`, modulo 2.
    pub fn parity_with(&self, alpha: &BitString) -> bool {
        self.modes.iter().fold(false, |acc, &j| acc ^ alpha.get(j))
    }

    /// `self ‖ 0^zeros ‖ 1^ones`.
    pub fn extend(&self, zeros: usize, ones: usize) -> FockOutcome {
        let mut modes = self.modes.clone();
        let start = self.m + zeros;
        modes.extend(start..start + ones);
        FockOutcome {
            m: self.m + zeros + ones,
            modes,
        }
    }

    /// The first `len` modes.
    pub fn prefix(&self, len: usize) -> FockOutcome {
        FockOutcome {
            m: len,
            modes: self.modes.iter().copied().filter(|&j| j < len).collect(),
        }
    }
}

impl fmt::Display for FockOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bits())
    }
}

impl FromStr for FockOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(FockOutcome::from_bits(&s.parse()?))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact `C(m, k)`, or `None` if it does not fit into 128 bits.
pub fn checked_binomial(m: usize, k: usize) -> Option<u128> {
    if k > m {
        return Some(0);
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc = C(m, i); C(m, i+1) = acc * (m - i) / (i + 1) exactly
        let num = (m - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let reduced = acc / g;
        let den = den / g;
        acc = reduced.checked_mul(num / den)?;
    }
    Some(acc)
}

/// `C(m, k)`, saturating at `u128::MAX`. Returns 0 for `k > m`.
pub fn binomial(m: usize, k: usize) -> u128 {
    checked_binomial(m, k).unwrap_or(u128::MAX)
}

fn exact_binomial(m: usize, k: usize) -> u128 {
    checked_binomial(m, k).unwrap_or_else(|| panic!("C({m},{k}) overflows 128-bit ranks"))
}

/// Lexicographic rank of `s` within its outcome space, in `[0, C(m,k))`.
pub fn subset_rank(s: &FockOutcome) -> u128 {
    let (m, k) = (s.m(), s.k());
    let below = s
        .modes()
        .iter()
        .enumerate()
        .map(|(i, &c)| exact_binomial(m - 1 - c, k - i))
        .sum::<u128>();
    exact_binomial(m, k) - 1 - below
}

/// Inverse of [`subset_rank`].
pub fn subset_unrank(m: usize, k: usize, rank: u128) -> Result<FockOutcome> {
    let count = if k > m { 0 } else { exact_binomial(m, k) };
    if rank >= count {
        return Err(Error::RankOutOfRange { m, k, rank, count });
    }
    let mut modes = Vec::with_capacity(k);
    let mut rest = rank;
    let mut start = 0usize;
    for i in 0..k {
        let slots = k - i;
        // combinations whose i-th element lies in [start, v) number
        // C(m - start, slots) - C(m - v, slots); find the largest v with that <= rest
        let total = exact_binomial(m - start, slots);
        let (mut lo, mut hi) = (start, m - slots);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if total - exact_binomial(m - mid, slots) <= rest {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        rest -= total - exact_binomial(m - lo, slots);
        modes.push(lo);
        start = lo + 1;
    }
    Ok(FockOutcome { m, modes })
}

/// All outcomes of `Ω_m^k` in rank order, refusing above the active cap.
pub fn enumerate_outcomes(m: usize, k: usize) -> Result<Vec<FockOutcome>> {
    enumerate_outcomes_capped(m, k, enumeration_cap())
}

pub fn enumerate_outcomes_capped(m: usize, k: usize, cap: u128) -> Result<Vec<FockOutcome>> {
    let count = binomial(m, k);
    if count > cap {
        return Err(Error::EnumerationTooLarge { m, k, count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    if k > m {
        return Ok(out);
    }
    let mut modes: Vec<usize> = (0..k).collect();
    loop {
        out.push(FockOutcome {
            m,
            modes: modes.clone(),
        });
        // advance to the next combination in lexicographic order
        let Some(i) = (0..k).rev().find(|&i| modes[i] < m - k + i) else {
            break;
        };
        modes[i] += 1;
        for j in i + 1..k {
            modes[j] = modes[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Rank of `s` among the outcomes whose last mode is empty, in the global
/// order. Those outcomes are exactly the weight-`k` strings on the first
/// `m - 1` modes, so the rank is the `(m-1, k)` subset rank of the prefix.
pub fn skip_rank(s: &FockOutcome) -> Result<u128> {
    if s.last_mode_occupied() {
        return Err(Error::InE1(s.to_string()));
    }
    Ok(subset_rank(&s.prefix(s.m() - 1)))
}

/// Inverse of [`skip_rank`].
pub fn skip_unrank(m: usize, k: usize, rank: u128) -> Result<FockOutcome> {
    if m == 0 {
        return Err(Error::RankOutOfRange {
            m,
            k,
            rank,
            count: 0,
        });
    }
    subset_unrank(m - 1, k, rank).map(|s| s.extend(1, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal(rows: usize) -> Vec<Vec<u128>> {
        let mut t = vec![vec![1u128]];
        for r in 1..=rows {
            let prev = &t[r - 1];
            let mut row = vec![1u128; r + 1];
            for c in 1..r {
                row[c] = prev[c - 1] + prev[c];
            }
            t.push(row);
        }
        t
    }

    fn outcome(s: &str) -> FockOutcome {
        s.parse().unwrap()
    }

    #[test]
    fn binomial_matches_pascal() {
        let t = pascal(64);
        for m in 0..=64 {
            for k in 0..=m {
                assert_eq!(binomial(m, k), t[m][k], "C({m},{k})");
            }
        }
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(9, 0), 1);
        assert_eq!(binomial(30, 15), t[30][15]);
        assert_eq!(t[30][15], 155_117_520);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn binomial_saturates() {
        assert_eq!(checked_binomial(200, 100), None);
        assert_eq!(binomial(200, 100), u128::MAX);
        assert!(checked_binomial(128, 64).is_some());
    }

    #[test]
    fn rank_examples() {
        assert_eq!(subset_rank(&outcome("100")), 0);
        assert_eq!(subset_rank(&outcome("010")), 1);
        assert_eq!(subset_rank(&outcome("001")), 2);
        assert_eq!(subset_rank(&outcome("1100")), 0);
        assert_eq!(subset_rank(&outcome("0011")), 5);
    }

    #[test]
    fn rank_is_sorted_position() {
        // oracle: sort every weight-3 string of length 6 by descending value
        let mut all: Vec<BitString> = BitString::all(6).filter(|b| b.weight() == 3).collect();
        all.sort_by_key(|b| std::cmp::Reverse(b.value()));
        for (i, b) in all.iter().enumerate() {
            assert_eq!(subset_rank(&FockOutcome::from_bits(b)), i as u128);
        }
        assert_eq!(all.len(), 20);
    }

    #[test]
    fn unrank_round_trip() {
        assert_eq!(subset_unrank(3, 1, 0).unwrap(), outcome("100"));
        for r in 0..binomial(8, 3) {
            let s = subset_unrank(8, 3, r).unwrap();
            assert_eq!(s.k(), 3);
            assert_eq!(subset_rank(&s), r);
        }
        assert!(matches!(
            subset_unrank(4, 2, 6),
            Err(Error::RankOutOfRange { count: 6, .. })
        ));
    }

    #[test]
    fn unrank_large_space() {
        let m = 1 << 16;
        let s = subset_unrank(m, 1, 40_000).unwrap();
        assert_eq!(s.modes(), &[40_000]);
        let s = subset_unrank(60, 7, 123_456_789).unwrap();
        assert_eq!(subset_rank(&s), 123_456_789);
    }

    #[test]
    fn enumeration() {
        let e = enumerate_outcomes(3, 1).unwrap();
        let strs: Vec<String> = e.iter().map(|s| s.to_string()).collect();
        assert_eq!(strs, ["100", "010", "001"]);

        let e = enumerate_outcomes(4, 2).unwrap();
        assert_eq!(e.len(), 6);
        let set: std::collections::HashSet<_> = e.iter().collect();
        assert_eq!(set.len(), 6);
        assert!(e.iter().all(|s| s.k() == 2));
        for (i, s) in e.iter().enumerate() {
            assert_eq!(subset_rank(s), i as u128);
        }

        assert!(matches!(
            enumerate_outcomes(40, 20),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert_eq!(enumerate_outcomes(4, 0).unwrap().len(), 1);
    }

    #[test]
    fn skip_rank_examples() {
        assert_eq!(skip_rank(&outcome("100")).unwrap(), 0);
        assert_eq!(skip_rank(&outcome("010")).unwrap(), 1);
        assert!(matches!(skip_rank(&outcome("001")), Err(Error::InE1(_))));
        assert!(skip_rank(&outcome("000001")).is_err());
    }

    #[test]
    fn skip_rank_is_filtered_enumeration_index() {
        let kept: Vec<_> = enumerate_outcomes(6, 3)
            .unwrap()
            .into_iter()
            .filter(|s| !s.last_mode_occupied())
            .collect();
        assert_eq!(kept.len() as u128, binomial(6, 3) - binomial(5, 2));
        for (i, s) in kept.iter().enumerate() {
            assert_eq!(skip_rank(s).unwrap(), i as u128);
            assert_eq!(&skip_unrank(6, 3, i as u128).unwrap(), s);
        }
    }

    #[test]
    fn outcome_helpers() {
        let s = outcome("0110");
        assert_eq!(s.extend(2, 1).to_string(), "0110001");
        assert_eq!(s.prefix(2).to_string(), "01");
        assert!(s.parity_with(&"0100".parse().unwrap()));
        assert!(FockOutcome::from_modes(3, vec![1, 1]).is_err());
        assert!(FockOutcome::from_modes(3, vec![3]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rank_unrank_round_trip(m in 1usize..=10, bits in any::<u16>()) {
                let b = BitString::from_value(bits as u128, m);
                let s = FockOutcome::from_bits(&b);
                let r = subset_rank(&s);
                prop_assert!(r < binomial(m, s.k()));
                prop_assert_eq!(subset_unrank(m, s.k(), r).unwrap(), s);
            }
        }
    }
}
