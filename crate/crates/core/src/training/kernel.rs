use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::born_machine::ParityWord;
use crate::error::{Error, Result};

/// Widest space for which spectral weights may be tabulated.
pub const MAX_TABULATED_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `k(x,y) = exp(−d_H(x,y) / (2σ²))`.
    GaussianHamming { sigma: f64 },
    /// Spectral weights `G(α)` indexed by the integer value of `α`; the kernel
    /// is `k(x,y) = Σ_α G(α) (−1)^{α·(x⊕y)}`.
    TabulatedSpectral { weights: Vec<f64> },
}

/// A stationary kernel on `m`-bit strings and its spectral measure.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    m: usize,
    kind: KernelKind,
    sampler: Option<WeightedIndex<f64>>,
}

impl PartialEq for KernelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.kind == other.kind
    }
}

impl KernelSpec {
    pub fn gaussian_hamming(m: usize, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(KernelSpec {
            m,
            kind: KernelKind::GaussianHamming { sigma },
            sampler: None,
        })
    }

    pub fn tabulated(m: usize, weights: Vec<f64>) -> Result<Self> {
        if m > MAX_TABULATED_BITS {
            return Err(Error::SpaceTooLarge {
                bits: m,
                limit: MAX_TABULATED_BITS,
            });
        }
        if weights.len() != 1 << m {
            return Err(Error::LengthMismatch {
                expected: 1 << m,
                got: weights.len(),
            });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "spectral weights must be nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "spectral weights must sum to 1, got {total}"
            )));
        }
        let sampler = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidParameter(format!("bad spectral weights: {e}")))?;
        Ok(KernelSpec {
            m,
            kind: KernelKind::TabulatedSpectral { weights },
            sampler: Some(sampler),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// Per-bit flip probability `q = (1 − e^{−c})/2` with `c = 1/(2σ²)`:
    /// the factor `e^{−c z}` of one bit has Walsh coefficients
    /// `(1 + e^{−c})/2` at `α_i = 0` and `(1 − e^{−c})/2` at `α_i = 1`.
    pub fn flip_probability(&self) -> Option<f64> {
        match self.kind {
            KernelKind::GaussianHamming { sigma } => {
                let c = 1.0 / (2.0 * sigma * sigma);
                Some(-(-c).exp_m1() / 2.0)
            }
            KernelKind::TabulatedSpectral { .. } => None,
        }
    }

    pub fn evaluate(&self, x: &BitString, y: &BitString) -> f64 {
        match &self.kind {
            KernelKind::GaussianHamming { sigma } => {
                (-(x.hamming(y) as f64) / (2.0 * sigma * sigma)).exp()
            }
            KernelKind::TabulatedSpectral { weights } => {
                let z = BitString::new(
                    x.as_slice()
                        .iter()
                        .zip(y.as_slice())
                        .map(|(a, b)| a ^ b)
                        .collect(),
                );
                weights
                    .iter()
                    .enumerate()
                    .map(|(a, w)| w * BitString::from_value(a as u128, self.m).character(&z))
                    .sum()
            }
        }
    }

    /// `G(α)`.
    pub fn spectral_weight(&self, alpha: &BitString) -> f64 {
        match &self.kind {
            KernelKind::GaussianHamming { .. } => {
                let q = self.flip_probability().expect("gaussian kernel");
                let w = alpha.weight() as i32;
                q.powi(w) * (1.0 - q).powi(self.m as i32 - w)
            }
            KernelKind::TabulatedSpectral { weights } => weights[alpha.value() as usize],
        }
    }

    /// One draw from the spectral measure.
    pub fn sample_word<R: Rng + ?Sized>(&self, rng: &mut R) -> ParityWord {
        let bits = match &self.kind {
            KernelKind::GaussianHamming { .. } => {
                let q = self.flip_probability().expect("gaussian kernel");
                BitString::new((0..self.m).map(|_| rng.random::<f64>() < q).collect())
            }
            KernelKind::TabulatedSpectral { .. } => {
                let index = self
                    .sampler
                    .as_ref()
                    .expect("tabulated sampler")
                    .sample(rng);
                BitString::from_value(index as u128, self.m)
            }
        };
        ParityWord::new(bits, self.m).expect("length matches kernel")
    }
}

/// A single seeded draw from the kernel's spectral measure.
pub fn spectral_sample(kernel: &KernelSpec, seed: u64) -> ParityWord {
    kernel.sample_word(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// `σ = sqrt(median pairwise Hamming distance)` over distinct pairs of data
/// points, so that `2σ²` is twice the typical distance; `1` when the median
/// is zero or there are fewer than two points.
pub fn median_heuristic_sigma(values: &[BitString], counts: &[u64]) -> f64 {
    let mut pairs: Vec<(usize, u128)> = Vec::new();
    for a in 0..values.len() {
        let ca = u128::from(counts[a]);
        if ca >= 2 {
            pairs.push((0, ca * (ca - 1) / 2));
        }
        for b in a + 1..values.len() {
            pairs.push((values[a].hamming(&values[b]), ca * u128::from(counts[b])));
        }
    }
    let total: u128 = pairs.iter().map(|p| p.1).sum();
    if total == 0 {
        return 1.0;
    }
    pairs.sort_unstable();
    let half = total.div_ceil(2);
    let mut seen = 0u128;
    let median = pairs
        .iter()
        .find(|(_, w)| {
            seen += w;
            seen >= half
        })
        .map_or(0, |p| p.0);
    if median == 0 {
        1.0
    } else {
        (median as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_kernel_samples_zero_word() {
        let k = KernelSpec::gaussian_hamming(6, 1e4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(k.sample_word(&mut rng), ParityWord::zeros(6));
        }
    }

    #[test]
    fn seeded_draw_repeats() {
        let k = KernelSpec::gaussian_hamming(8, 0.7).unwrap();
        assert_eq!(spectral_sample(&k, 9), spectral_sample(&k, 9));
    }

    #[test]
    fn weights_sum_to_one() {
        let k = KernelSpec::gaussian_hamming(5, 0.8).unwrap();
        let total: f64 = BitString::all(5).map(|a| k.spectral_weight(&a)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tabulated_validation() {
        assert!(KernelSpec::tabulated(2, vec![0.5, 0.5, 0.0, 0.0]).is_ok());
        assert!(KernelSpec::tabulated(2, vec![0.5, 0.6, 0.0, -0.1]).is_err());
        assert!(KernelSpec::tabulated(2, vec![0.5, 0.4, 0.0, 0.0]).is_err());
        assert!(KernelSpec::gaussian_hamming(2, 0.0).is_err());
    }

    #[test]
    fn median_heuristic() {
        let v: Vec<BitString> = ["0000", "1100", "1111"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        // distances 2, 4, 2 → median 2
        assert!((median_heuristic_sigma(&v, &[1, 1, 1]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(median_heuristic_sigma(&v[..1], &[5]), 1.0);
    }
}
