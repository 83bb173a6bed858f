//! Matrix permanents: Ryser's exact formula and the Rys/Gurvits unbiased
//! estimator `Per(W) = E_x[(Π x_i) Π_i (W x)_i]` with `x` uniform on `{±1}^k`.
//!
//! Monte-Carlo work is split into chunks of [`CHUNK`] samples. Chunk `c` draws
//! its sign vectors from a ChaCha8 stream selected by `(seed, c)`, so results
//! depend only on the seed and never on the number of worker threads.

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interferometer::CMatrix;

/// Largest size accepted by [`ryser_permanent`].
pub const RYSER_LIMIT: usize = 20;

/// Largest `k` for which all `2^k` sign vectors may be enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 24;

pub(crate) const CHUNK: usize = 4096;

/// Monte-Carlo settings for the Rys estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub n_samples: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: u64,
    /// Average over every `x ∈ {±1}^k` instead of sampling.
    pub exhaustive: bool,
}

impl EstimatorConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        EstimatorConfig {
            n_samples,
            epsilon: None,
            delta: None,
            seed,
            exhaustive: false,
        }
    }

    /// Sample count from the Hoeffding bound for an `ε`-accurate estimate with
    /// failure probability `δ`, valid when every sample lies in `[-1, 1]`.
    pub fn from_accuracy(epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        let n = hoeffding_samples(epsilon, delta)?;
        Ok(EstimatorConfig {
            n_samples: n,
            epsilon: Some(epsilon),
            delta: Some(delta),
            seed,
            exhaustive: false,
        })
    }

    pub fn exhaustive() -> Self {
        EstimatorConfig {
            n_samples: 0,
            epsilon: None,
            delta: None,
            seed: 0,
            exhaustive: true,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        EstimatorConfig {
            seed,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.exhaustive {
            return Ok(());
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be positive".into()));
        }
        match (self.epsilon, self.delta) {
            (Some(eps), Some(delta)) => {
                let need = hoeffding_samples(eps, delta)?;
                if self.n_samples < need {
                    return Err(Error::InvalidParameter(format!(
                        "n_samples {} is below the {need} required for epsilon={eps}, delta={delta}",
                        self.n_samples
                    )));
                }
                Ok(())
            }
            (None, None) => Ok(()),
            _ => Err(Error::InvalidParameter(
                "epsilon and delta must be given together".into(),
            )),
        }
    }
}

/// `ceil(2 ln(2/δ) / ε²)`.
pub fn hoeffding_samples(epsilon: f64, delta: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0,1), got {delta}"
        )));
    }
    Ok((2.0 * (2.0 / delta).ln() / (epsilon * epsilon)).ceil() as usize)
}

/// Exact permanent by Ryser's inclusion–exclusion formula, visiting column
/// subsets in Gray-code order so each step updates the row sums in `O(k)`.
pub fn ryser_permanent(w: &CMatrix) -> Result<Complex64> {
    let k = w.nrows();
    if w.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "permanent needs a square matrix, got {}x{}",
            k,
            w.ncols()
        )));
    }
    if k > RYSER_LIMIT {
        return Err(Error::MatrixTooLarge {
            size: k,
            limit: RYSER_LIMIT,
        });
    }
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); k];
    let mut in_set = vec![false; k];
    let mut total = Complex64::new(0.0, 0.0);
    let mut size = 0usize;
    for g in 1u64..(1u64 << k) {
        let j = g.trailing_zeros() as usize;
        if in_set[j] {
            for i in 0..k {
                row_sums[i] -= w[(i, j)];
            }
            size -= 1;
        } else {
            for i in 0..k {
                row_sums[i] += w[(i, j)];
            }
            size += 1;
        }
        in_set[j] = !in_set[j];
        let prod = row_sums
            .iter()
            .fold(Complex64::new(1.0, 0.0), |a, &b| a * b);
        if size.is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if k % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

/// One Rys sample `(Π x_i) Π_i Σ_j W_ij x_j`.
pub fn rys_sample(w: &CMatrix, x: &[f64]) -> Result<Complex64> {
    let k = w.nrows();
    if w.ncols() != k || x.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "Rys sample of a {}x{} matrix with {} signs",
            k,
            w.ncols(),
            x.len()
        )));
    }
    Ok(rys_unchecked(w, x))
}

pub(crate) fn rys_unchecked(w: &CMatrix, x: &[f64]) -> Complex64 {
    let k = x.len();
    let sign: f64 = x.iter().product();
    let mut prod = Complex64::new(sign, 0.0);
    for i in 0..k {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..k {
            s += w[(i, j)] * x[j];
        }
        prod *= s;
    }
    prod
}

/// Monte-Carlo (or exhaustive) Rys estimate of `Per(W)` with its standard
/// error `sqrt(Var|z|) / sqrt(N)`.
pub fn gurvits_estimate(w: &CMatrix, cfg: &EstimatorConfig) -> Result<(Complex64, f64)> {
    let k = w.nrows();
    if w.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "permanent needs a square matrix, got {}x{}",
            k,
            w.ncols()
        )));
    }
    cfg.validate()?;
    let stats = sign_vector_reduce(
        k,
        cfg,
        ComplexStats::default,
        |x, acc| acc.push(rys_unchecked(w, x)),
        ComplexStats::merge,
    )?;
    Ok((stats.mean(), stats.stderr()))
}

/// Running sums for a complex-valued sample mean.
#[derive(Debug, Clone, Default)]
pub(crate) struct ComplexStats {
    pub count: usize,
    pub sum: Complex64,
    pub sum_sq_re: f64,
    pub sum_sq_im: f64,
}

impl ComplexStats {
    pub fn push(&mut self, z: Complex64) {
        self.count += 1;
        self.sum += z;
        self.sum_sq_re += z.re * z.re;
        self.sum_sq_im += z.im * z.im;
    }

    pub fn merge(&mut self, other: ComplexStats) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq_re += other.sum_sq_re;
        self.sum_sq_im += other.sum_sq_im;
    }

    pub fn mean(&self) -> Complex64 {
        self.sum / self.count as f64
    }

    fn variance(sum: f64, sum_sq: f64, n: f64) -> f64 {
        if n < 2.0 {
            return 0.0;
        }
        ((sum_sq - sum * sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the complex mean.
    pub fn stderr(&self) -> f64 {
        let n = self.count as f64;
        let v = Self::variance(self.sum.re, self.sum_sq_re, n)
            + Self::variance(self.sum.im, self.sum_sq_im, n);
        (v / n).sqrt()
    }

    /// Standard error of the real part of the mean.
    pub fn stderr_re(&self) -> f64 {
        let n = self.count as f64;
        (Self::variance(self.sum.re, self.sum_sq_re, n) / n).sqrt()
    }
}

/// Runs `visit` on every sign vector of the estimator (sampled, or all `2^k`
/// when exhaustive) and folds per-chunk accumulators in chunk order.
pub(crate) fn sign_vector_reduce<A, N, V, M>(
    k: usize,
    cfg: &EstimatorConfig,
    new: N,
    visit: V,
    merge: M,
) -> Result<A>
where
    A: Send,
    N: Fn() -> A + Sync,
    V: Fn(&[f64], &mut A) + Sync,
    M: Fn(&mut A, A),
{
    let total: usize = if cfg.exhaustive {
        if k > EXHAUSTIVE_LIMIT {
            return Err(Error::MatrixTooLarge {
                size: k,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
        1usize << k
    } else {
        cfg.n_samples
    };
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = new();
            let mut x = vec![0.0f64; k];
            let start = c * CHUNK;
            let end = (start + CHUNK).min(total);
            if cfg.exhaustive {
                for idx in start..end {
                    for (i, xi) in x.iter_mut().enumerate() {
                        *xi = if (idx >> i) & 1 == 1 { -1.0 } else { 1.0 };
                    }
                    visit(&x, &mut acc);
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(c as u64);
                for _ in start..end {
                    fill_signs(&mut rng, &mut x);
                    visit(&x, &mut acc);
                }
            }
            acc
        })
        .collect();
    let mut out = new();
    for part in parts {
        merge(&mut out, part);
    }
    Ok(out)
}

fn fill_signs(rng: &mut ChaCha8Rng, x: &mut [f64]) {
    for block in x.chunks_mut(64) {
        let bits = rng.next_u64();
        for (i, xi) in block.iter_mut().enumerate() {
            *xi = if (bits >> i) & 1 == 1 { -1.0 } else { 1.0 };
        }
    }
}

/// Deterministically derives an independent seed from `seed` and `tag`
/// (SplitMix64 finalizer over both).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed
        ^ tag
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn small_permanents() {
        assert_eq!(ryser_permanent(&CMatrix::identity(2, 2)).unwrap(), c(1.0));
        let ones = CMatrix::from_element(2, 2, c(1.0));
        assert_eq!(ryser_permanent(&ones).unwrap(), c(2.0));
        // per of the all-ones 4x4 is 4!
        let ones = CMatrix::from_element(4, 4, c(1.0));
        assert!((ryser_permanent(&ones).unwrap() - c(24.0)).norm() < 1e-12);
        assert_eq!(ryser_permanent(&CMatrix::zeros(0, 0)).unwrap(), c(1.0));
        let big = CMatrix::identity(21, 21);
        assert!(matches!(
            ryser_permanent(&big),
            Err(Error::MatrixTooLarge { .. })
        ));
    }

    #[test]
    fn rys_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(rys_sample(&i2, &[1.0, 1.0]).unwrap(), c(1.0));
        assert_eq!(rys_sample(&i2, &[1.0, -1.0]).unwrap(), c(1.0));
        assert!(rys_sample(&i2, &[1.0]).is_err());
    }

    #[test]
    fn negative_identity_has_zero_variance() {
        let w = -CMatrix::identity(3, 3);
        let (est, se) = gurvits_estimate(&w, &EstimatorConfig::new(10_000, 7)).unwrap();
        assert_eq!(est, c(-1.0));
        assert_eq!(se, 0.0);
    }

    #[test]
    fn hoeffding_count() {
        assert_eq!(hoeffding_samples(0.05, 0.1).unwrap(), 2397);
        let cfg = EstimatorConfig::from_accuracy(0.05, 0.1, 0).unwrap();
        assert!(cfg.validate().is_ok());
        let short = EstimatorConfig {
            n_samples: 100,
            ..cfg
        };
        assert!(short.validate().is_err());
    }

    #[test]
    fn estimate_is_seed_deterministic() {
        let w = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, 0.2));
        let cfg = EstimatorConfig::new(10_000, 3);
        assert_eq!(
            gurvits_estimate(&w, &cfg).unwrap(),
            gurvits_estimate(&w, &cfg).unwrap()
        );
        assert_ne!(
            gurvits_estimate(&w, &cfg).unwrap(),
            gurvits_estimate(&w, &cfg.with_seed(4)).unwrap()
        );
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(0, 1), derive_seed(1, 1));
    }
}
