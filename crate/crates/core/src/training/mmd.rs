use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::kernel::KernelSpec;
use crate::bits::BitString;
use crate::born_machine::{BsbmSpec, ModelSnapshot, ParityWord};
use crate::error::{Error, Result};
use crate::permanent::{derive_seed, EstimatorConfig};

/// Widest space on which the exact double-sum MMD is evaluated.
pub const MAX_EXACT_BITS: usize = 14;

/// A multiset of bitstrings of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    bits: usize,
    values: Vec<BitString>,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalDistribution {
    pub fn from_samples(samples: &[BitString]) -> Result<Self> {
        let first = samples.first().ok_or_else(|| {
            Error::InvalidParameter("empirical distribution needs samples".into())
        })?;
        let bits = first.len();
        let mut tally: BTreeMap<&BitString, u64> = BTreeMap::new();
        for s in samples {
            if s.len() != bits {
                return Err(Error::LengthMismatch {
                    expected: bits,
                    got: s.len(),
                });
            }
            *tally.entry(s).or_default() += 1;
        }
        let (values, counts): (Vec<_>, Vec<_>) =
            tally.into_iter().map(|(v, c)| (v.clone(), c)).unzip();
        Ok(EmpiricalDistribution {
            bits,
            values,
            counts,
            total: samples.len() as u64,
        })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn values(&self) -> &[BitString] {
        &self.values
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Probability table indexed by integer value.
    pub fn to_table(&self) -> Result<Vec<f64>> {
        if self.bits > 24 {
            return Err(Error::SpaceTooLarge {
                bits: self.bits,
                limit: 24,
            });
        }
        let mut table = vec![0.0; 1 << self.bits];
        for (v, c) in self.values.iter().zip(&self.counts) {
            table[v.value() as usize] += *c as f64 / self.total as f64;
        }
        Ok(table)
    }
}

/// `E_{x∼p}[(−1)^{α·x}]`.
pub fn data_parity(p: &EmpiricalDistribution, alpha: &ParityWord) -> Result<f64> {
    if alpha.len() != p.bits {
        return Err(Error::LengthMismatch {
            expected: p.bits,
            got: alpha.len(),
        });
    }
    let signed: i64 = p
        .values
        .iter()
        .zip(&p.counts)
        .map(|(v, &c)| {
            if v.dot_parity(alpha.bits()) {
                -(c as i64)
            } else {
                c as i64
            }
        })
        .sum();
    Ok(signed as f64 / p.total as f64)
}

/// `E_{p,p} k + E_{q,q} k − 2 E_{p,q} k` over two tables indexed by integer
/// value.
pub fn mmd2_exact(p: &[f64], q: &[f64], kernel: &KernelSpec) -> Result<f64> {
    let m = kernel.m();
    if m > MAX_EXACT_BITS {
        return Err(Error::SpaceTooLarge {
            bits: m,
            limit: MAX_EXACT_BITS,
        });
    }
    if p.len() != 1 << m || q.len() != 1 << m {
        return Err(Error::LengthMismatch {
            expected: 1 << m,
            got: if p.len() != 1 << m { p.len() } else { q.len() },
        });
    }
    // only the difference enters: Σ_{x,y} (p−q)(x) (p−q)(y) k(x,y)
    let diff: Vec<(BitString, f64)> = p
        .iter()
        .zip(q)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (a, b))| (BitString::from_value(i as u128, m), a - b))
        .collect();
    let total: f64 = diff
        .par_iter()
        .map(|(x, dx)| {
            diff.iter()
                .map(|(y, dy)| dx * dy * kernel.evaluate(x, y))
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total)
}

/// Probability that the photon-number parity pattern `(n_j mod 2)_j` of the
/// full output state equals each `b ∈ {0,1}^m`. Its characters are the
/// full-state parity expectations, so it is the distribution the parity-based
/// MMD compares data against.
pub fn full_state_parity_table(spec: &BsbmSpec) -> Result<Vec<f64>> {
    let m = spec.m();
    if m > MAX_EXACT_BITS {
        return Err(Error::SpaceTooLarge {
            bits: m,
            limit: MAX_EXACT_BITS,
        });
    }
    let snap = ModelSnapshot::values_only(spec);
    let mut table: Vec<f64> = (0..1u128 << m)
        .into_par_iter()
        .map(|a| snap.parity_exact(&ParityWord::new(BitString::from_value(a, m), m)?))
        .collect::<Result<_>>()?;
    // inverse Walsh transform: P(b) = 2^{-m} Σ_α μ(α) (−1)^{α·b}
    let mut h = 1;
    while h < table.len() {
        for start in (0..table.len()).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (table[i], table[i + h]);
                table[i] = a + b;
                table[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / table.len() as f64;
    table.iter_mut().for_each(|v| *v *= scale);
    Ok(table)
}

/// How parity words are chosen for an MMD estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSampling {
    /// Draw this many words from the spectral measure.
    Sampled(usize),
    /// Weight every word by its spectral mass (small `m` only).
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmdConfig {
    pub alphas: AlphaSampling,
    pub estimator: EstimatorConfig,
}

/// Loss value, its standard error, and (when requested) its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdEstimate {
    pub value: f64,
    pub stderr: f64,
    pub gradient: Option<Vec<f64>>,
}

fn check_lengths(p: &EmpiricalDistribution, spec: &BsbmSpec, kernel: &KernelSpec) -> Result<()> {
    if kernel.m() != spec.m() || p.bits != spec.m() {
        return Err(Error::LengthMismatch {
            expected: spec.m(),
            got: if kernel.m() != spec.m() {
                kernel.m()
            } else {
                p.bits
            },
        });
    }
    Ok(())
}

/// Parity words with their weights in the final average.
fn alpha_batch(kernel: &KernelSpec, cfg: &MmdConfig) -> Result<Vec<(ParityWord, f64)>> {
    let m = kernel.m();
    match cfg.alphas {
        AlphaSampling::Sampled(count) => {
            if count == 0 {
                return Err(Error::InvalidParameter(
                    "batch_alphas must be positive".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.estimator.seed, u64::MAX));
            let w = 1.0 / count as f64;
            Ok((0..count)
                .map(|_| (kernel.sample_word(&mut rng), w))
                .collect())
        }
        AlphaSampling::Exhaustive => {
            if m > MAX_EXACT_BITS {
                return Err(Error::SpaceTooLarge {
                    bits: m,
                    limit: MAX_EXACT_BITS,
                });
            }
            Ok(BitString::all(m)
                .map(|a| {
                    let w = kernel.spectral_weight(&a);
                    (ParityWord::new(a, m).expect("length m"), w)
                })
                .filter(|(_, w)| *w > 0.0)
                .collect())
        }
    }
}

struct Term {
    value: f64,
    /// Variance of `value` from the two model estimates.
    model_var: f64,
    weight: f64,
    gradient: Option<Vec<f64>>,
}

fn estimate_terms(
    p: &EmpiricalDistribution,
    snap: &ModelSnapshot,
    batch: &[(ParityWord, f64)],
    estimator: &EstimatorConfig,
    with_gradient: bool,
) -> Result<Vec<Term>> {
    batch
        .par_iter()
        .enumerate()
        .map(|(i, (alpha, weight))| {
            let dp = data_parity(p, alpha)?;
            let first = estimator.with_seed(derive_seed(estimator.seed, 2 * i as u64));
            let second = estimator.with_seed(derive_seed(estimator.seed, 2 * i as u64 + 1));
            let (mu1, se1) = snap.parity_estimate(alpha, &first)?;
            let (mu2, se2, gradient) = if with_gradient {
                let (v, s, g) = snap.parity_estimate_with_gradient(alpha, &second)?;
                (
                    v,
                    s,
                    Some(g.into_iter().map(|gt| -2.0 * (dp - mu1) * gt).collect()),
                )
            } else {
                let (v, s) = snap.parity_estimate(alpha, &second)?;
                (v, s, None)
            };
            Ok(Term {
                value: (dp - mu1) * (dp - mu2),
                model_var: (dp - mu1).powi(2) * se2 * se2 + (dp - mu2).powi(2) * se1 * se1,
                weight: *weight,
                gradient,
            })
        })
        .collect()
}

fn combine(terms: Vec<Term>, alphas: AlphaSampling, num_params: usize) -> MmdEstimate {
    let value: f64 = terms.iter().map(|t| t.weight * t.value).sum();
    let stderr = match alphas {
        AlphaSampling::Sampled(count) if count > 1 => {
            let var =
                terms.iter().map(|t| (t.value - value).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        }
        AlphaSampling::Sampled(_) => 0.0,
        AlphaSampling::Exhaustive => terms
            .iter()
            .map(|t| t.weight * t.weight * t.model_var)
            .sum::<f64>()
            .sqrt(),
    };
    let gradient = if terms.iter().all(|t| t.gradient.is_some()) && !terms.is_empty() {
        let mut g = vec![0.0; num_params];
        for t in &terms {
            for (acc, v) in g.iter_mut().zip(t.gradient.as_ref().expect("checked")) {
                *acc += t.weight * v;
            }
        }
        Some(g)
    } else {
        None
    };
    MmdEstimate {
        value,
        stderr,
        gradient,
    }
}

/// Unbiased estimate of `MMD²(p, q_θ)`: per parity word, the product of the
/// data–model gaps from two independent model estimates.
pub fn mmd2_estimate(
    p: &EmpiricalDistribution,
    spec: &BsbmSpec,
    kernel: &KernelSpec,
    cfg: &MmdConfig,
) -> Result<(f64, f64)> {
    check_lengths(p, spec, kernel)?;
    let snap = ModelSnapshot::values_only(spec);
    let batch = alpha_batch(kernel, cfg)?;
    let est = combine(
        estimate_terms(p, &snap, &batch, &cfg.estimator, false)?,
        cfg.alphas,
        0,
    );
    Ok((est.value, est.stderr))
}

/// Loss estimate and unbiased gradient in one pass. The value uses the same
/// model estimate as the gradient's second factor.
pub fn mmd2_value_and_gradient(
    p: &EmpiricalDistribution,
    spec: &BsbmSpec,
    kernel: &KernelSpec,
    cfg: &MmdConfig,
) -> Result<MmdEstimate> {
    check_lengths(p, spec, kernel)?;
    let snap = ModelSnapshot::with_gradients(spec)?;
    let batch = alpha_batch(kernel, cfg)?;
    let terms = estimate_terms(p, &snap, &batch, &cfg.estimator, true)?;
    Ok(combine(terms, cfg.alphas, snap.num_params()))
}

/// Unbiased gradient of `MMD²(p, q_θ)` over the mesh parameters.
pub fn mmd2_gradient(
    p: &EmpiricalDistribution,
    spec: &BsbmSpec,
    kernel: &KernelSpec,
    cfg: &MmdConfig,
) -> Result<Vec<f64>> {
    let est = mmd2_value_and_gradient(p, spec, kernel, cfg)?;
    Ok(est
        .gradient
        .unwrap_or_else(|| vec![0.0; spec.mesh().map_or(0, |m| m.num_params())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::haar_random;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn data_parity_basics() {
        let p = EmpiricalDistribution::from_samples(&[bits("101")]).unwrap();
        assert_eq!(data_parity(&p, &ParityWord::zeros(3)).unwrap(), 1.0);
        let alpha = ParityWord::new(bits("100"), 3).unwrap();
        assert_eq!(data_parity(&p, &alpha).unwrap(), -1.0);
        let uniform =
            EmpiricalDistribution::from_samples(&BitString::all(3).collect::<Vec<_>>()).unwrap();
        assert_eq!(data_parity(&uniform, &alpha).unwrap(), 0.0);
        assert!(data_parity(&p, &ParityWord::zeros(4)).is_err());
    }

    #[test]
    fn point_masses() {
        let k = KernelSpec::gaussian_hamming(3, 0.9).unwrap();
        let mut p = vec![0.0; 8];
        let mut q = vec![0.0; 8];
        p[0b101] = 1.0;
        q[0b011] = 1.0;
        let c: f64 = 1.0 / (2.0 * 0.81);
        let expected = 2.0 * (1.0 - (-2.0 * c).exp());
        assert!((mmd2_exact(&p, &q, &k).unwrap() - expected).abs() < 1e-14);
        assert!(mmd2_exact(&p, &p, &k).unwrap().abs() < 1e-14);
    }

    #[test]
    fn zero_word_batch_has_zero_gradient() {
        // a huge sigma puts all spectral mass on α = 0
        let spec = BsbmSpec::new(2, haar_random(4, 1)).unwrap();
        let k = KernelSpec::gaussian_hamming(4, 1e6).unwrap();
        let p = EmpiricalDistribution::from_samples(&[bits("1100")]).unwrap();
        let cfg = MmdConfig {
            alphas: AlphaSampling::Sampled(4),
            estimator: EstimatorConfig::new(100, 3),
        };
        let g = mmd2_gradient(&p, &spec, &k, &cfg).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parity_table_is_a_distribution() {
        let spec = BsbmSpec::new(2, haar_random(5, 2)).unwrap();
        let t = full_state_parity_table(&spec).unwrap();
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(t.iter().all(|&v| v > -1e-12));
    }
}
