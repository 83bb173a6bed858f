//! The bare boson-sampling Born machine: `k` single photons enter the first
//! `k` modes of an `m`-mode interferometer and collision-free outcomes are
//! recorded.
//!
//! Two notions of expectation coexist. [`ExactDistribution`] is the
//! postselected distribution over `Ω_m^k`, renormalized by the collision-free
//! mass `Z`. Parity expectations ([`parity_expectation_exact`] and the
//! estimators) are taken on the full output state, collisions included, since
//! that is the quantity with a permanent formula. [`dilute_gap`] reports the
//! difference.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bits::BitString;
use crate::combinatorics::{enumerate_outcomes, subset_rank, FockOutcome};
use crate::error::{Error, Result};
use crate::interferometer::{unitary_jacobian, CMatrix, InterferometerMesh, ModeUnitary};
use crate::permanent::{
    rys_unchecked, ryser_permanent, sign_vector_reduce, ComplexStats, EstimatorConfig,
};

/// Tolerance on the imaginary part of an exact parity expectation.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Circuit {
    Mesh(InterferometerMesh),
    Fixed(ModeUnitary),
}

/// A bare model: `m` modes, `k` photons in the first `k` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BsbmSpec {
    m: usize,
    k: usize,
    circuit: Circuit,
}

impl BsbmSpec {
    pub fn new(k: usize, mesh: InterferometerMesh) -> Result<Self> {
        let m = mesh.m();
        check_dims(m, k)?;
        Ok(BsbmSpec {
            m,
            k,
            circuit: Circuit::Mesh(mesh),
        })
    }

    pub fn fixed(k: usize, unitary: ModeUnitary) -> Result<Self> {
        let m = unitary.m();
        check_dims(m, k)?;
        Ok(BsbmSpec {
            m,
            k,
            circuit: Circuit::Fixed(unitary),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn mesh(&self) -> Option<&InterferometerMesh> {
        match &self.circuit {
            Circuit::Mesh(mesh) => Some(mesh),
            Circuit::Fixed(_) => None,
        }
    }

    pub fn mesh_mut(&mut self) -> Option<&mut InterferometerMesh> {
        match &mut self.circuit {
            Circuit::Mesh(mesh) => Some(mesh),
            Circuit::Fixed(_) => None,
        }
    }

    pub fn unitary(&self) -> ModeUnitary {
        match &self.circuit {
            Circuit::Mesh(mesh) => mesh.unitary(),
            Circuit::Fixed(u) => u.clone(),
        }
    }

    /// True when `m < k²`, where collisions are not negligible.
    pub fn outside_dilute_regime(&self) -> bool {
        self.m < self.k * self.k
    }
}

fn check_dims(m: usize, k: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::DimensionMismatch(format!(
            "need 1 <= k <= m, got m = {m}, k = {k}"
        )));
    }
    Ok(())
}

/// A parity word `Π_α = ⊗_j ((-1)^{n_j})^{α_j}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityWord(BitString);

impl ParityWord {
    pub fn new(alpha: BitString, m: usize) -> Result<Self> {
        if alpha.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                got: alpha.len(),
            });
        }
        Ok(ParityWord(alpha))
    }

    pub fn zeros(m: usize) -> Self {
        ParityWord(BitString::zeros(m))
    }

    pub fn ones(m: usize) -> Self {
        ParityWord(BitString::ones(m))
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(±1)` when every mode carries the same flag, so `D = ±I`.
    fn constant_sign(&self) -> Option<f64> {
        let w = self.0.weight();
        if w == 0 {
            Some(1.0)
        } else if w == self.0.len() {
            Some(-1.0)
        } else {
            None
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.0
            .as_slice()
            .iter()
            .map(|&b| if b { -1.0 } else { 1.0 })
            .collect()
    }
}

/// Postselected distribution over `Ω_m^k` in rank order.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    pub m: usize,
    pub k: usize,
    pub outcomes: Vec<FockOutcome>,
    /// `|Per(U_{S(s),[k]})|²`.
    pub raw_weights: Vec<f64>,
    /// Collision-free mass `Σ raw_weights`.
    pub z: f64,
    pub probs: Vec<f64>,
}

impl ExactDistribution {
    /// Probability of `s`, using that outcomes are stored in rank order.
    pub fn prob(&self, s: &FockOutcome) -> f64 {
        if s.m() != self.m || s.k() != self.k {
            return 0.0;
        }
        self.probs[subset_rank(s) as usize]
    }

    /// `Σ_s probs(s) (-1)^{α·s}`.
    pub fn parity(&self, alpha: &ParityWord) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probs)
            .map(|(s, p)| if s.parity_with(alpha.bits()) { -p } else { *p })
            .sum()
    }
}

fn submatrix_rows(u: &CMatrix, rows: &[usize], k: usize) -> CMatrix {
    CMatrix::from_fn(rows.len(), k, |r, c| u[(rows[r], c)])
}

/// `|Per(U_{S(s),[k]})|²` for each listed outcome.
pub fn raw_weights(spec: &BsbmSpec, outcomes: &[FockOutcome]) -> Result<Vec<f64>> {
    let u = spec.unitary().into_matrix();
    outcomes
        .par_iter()
        .map(|s| {
            if s.m() != spec.m || s.k() != spec.k {
                return Err(Error::InvalidOutcome(format!(
                    "{s} is not in Ω_{}^{}",
                    spec.m, spec.k
                )));
            }
            Ok(ryser_permanent(&submatrix_rows(&u, s.modes(), spec.k))?.norm_sqr())
        })
        .collect()
}

/// Enumerates `Ω_m^k` and computes every collision-free probability.
pub fn exact_distribution(spec: &BsbmSpec) -> Result<ExactDistribution> {
    let outcomes = enumerate_outcomes(spec.m, spec.k)?;
    let raw = raw_weights(spec, &outcomes)?;
    let z: f64 = raw.iter().sum();
    if z <= 0.0 {
        return Err(Error::InvalidParameter(
            "model has no collision-free output mass".into(),
        ));
    }
    let probs = raw.iter().map(|w| w / z).collect();
    Ok(ExactDistribution {
        m: spec.m,
        k: spec.k,
        outcomes,
        raw_weights: raw,
        z,
        probs,
    })
}

/// `count` i.i.d. draws from a distribution.
pub fn sample_distribution(
    dist: &ExactDistribution,
    count: usize,
    seed: u64,
) -> Result<Vec<FockOutcome>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let index = WeightedIndex::new(&dist.probs)
        .map_err(|e| Error::InvalidParameter(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| dist.outcomes[index.sample(&mut rng)].clone())
        .collect())
}

/// `count` i.i.d. postselected outcomes of the model.
pub fn sample_exact(spec: &BsbmSpec, count: usize, seed: u64) -> Result<Vec<FockOutcome>> {
    sample_distribution(&exact_distribution(spec)?, count, seed)
}

/// `W = (U† diag(1 − 2α) U)_{[k],[k]}`.
pub fn parity_matrix(u: &CMatrix, k: usize, alpha: &ParityWord) -> CMatrix {
    if let Some(sign) = alpha.constant_sign() {
        return CMatrix::identity(k, k) * Complex64::new(sign, 0.0);
    }
    let d = alpha.diagonal();
    let m = u.nrows();
    CMatrix::from_fn(k, k, |a, b| {
        (0..m).map(|j| u[(j, a)].conj() * u[(j, b)] * d[j]).sum()
    })
}

fn check_word(spec: &BsbmSpec, alpha: &ParityWord) -> Result<()> {
    if alpha.len() != spec.m {
        return Err(Error::LengthMismatch {
            expected: spec.m,
            got: alpha.len(),
        });
    }
    Ok(())
}

/// `⟨Π_α⟩` on the full output state, as the permanent of the parity matrix.
pub fn parity_expectation_exact(spec: &BsbmSpec, alpha: &ParityWord) -> Result<f64> {
    check_word(spec, alpha)?;
    let u = spec.unitary().into_matrix();
    let per = ryser_permanent(&parity_matrix(&u, spec.k, alpha))?;
    if per.im.abs() > IMAGINARY_TOLERANCE {
        return Err(Error::NonRealExpectation {
            real: per.re,
            imag: per.im,
        });
    }
    Ok(per.re)
}

/// Monte-Carlo `⟨Π_α⟩` with its standard error. Only real parts of the Rys
/// samples are averaged; each is itself unbiased because the permanent of the
/// Hermitian parity matrix is real.
pub fn parity_expectation_estimate(
    spec: &BsbmSpec,
    alpha: &ParityWord,
    cfg: &EstimatorConfig,
) -> Result<(f64, f64)> {
    check_word(spec, alpha)?;
    ModelSnapshot::values_only(spec).parity_estimate(alpha, cfg)
}

/// Unbiased estimate of `∂⟨Π_α⟩/∂θ` for every mesh parameter.
pub fn parity_gradient_estimate(
    spec: &BsbmSpec,
    alpha: &ParityWord,
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    check_word(spec, alpha)?;
    let snap = ModelSnapshot::with_gradients(spec)?;
    Ok(snap.parity_estimate_with_gradient(alpha, cfg)?.2)
}

/// Full-state parity minus postselected parity.
pub fn dilute_gap(spec: &BsbmSpec, alpha: &ParityWord) -> Result<f64> {
    let full = parity_expectation_exact(spec, alpha)?;
    let post = exact_distribution(spec)?.parity(alpha);
    Ok(full - post)
}

/// A model frozen at one parameter value: its unitary and, when trainable,
/// the Jacobian columns that feed the first `k` inputs.
#[derive(Debug, Clone)]
pub struct ModelSnapshot {
    m: usize,
    k: usize,
    u: CMatrix,
    /// `∂U[:, :k] / ∂θ_t` for each parameter `t`.
    jac: Option<Vec<CMatrix>>,
}

impl ModelSnapshot {
    pub fn values_only(spec: &BsbmSpec) -> Self {
        ModelSnapshot {
            m: spec.m,
            k: spec.k,
            u: spec.unitary().into_matrix(),
            jac: None,
        }
    }

    pub fn with_gradients(spec: &BsbmSpec) -> Result<Self> {
        let mesh = spec.mesh().ok_or(Error::FixedUnitaryHasNoGradient)?;
        let k = spec.k;
        let jac = unitary_jacobian(mesh)
            .into_iter()
            .map(|d| d.columns(0, k).into_owned())
            .collect();
        Ok(ModelSnapshot {
            m: spec.m,
            k,
            u: mesh.unitary().into_matrix(),
            jac: Some(jac),
        })
    }

    pub fn num_params(&self) -> usize {
        self.jac.as_ref().map_or(0, Vec::len)
    }

    pub fn parity_exact(&self, alpha: &ParityWord) -> Result<f64> {
        let per = ryser_permanent(&parity_matrix(&self.u, self.k, alpha))?;
        if per.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::NonRealExpectation {
                real: per.re,
                imag: per.im,
            });
        }
        Ok(per.re)
    }

    pub fn parity_estimate(&self, alpha: &ParityWord, cfg: &EstimatorConfig) -> Result<(f64, f64)> {
        cfg.validate()?;
        let w = parity_matrix(&self.u, self.k, alpha);
        let stats = sign_vector_reduce(
            self.k,
            cfg,
            ComplexStats::default,
            |x, acc| acc.push(rys_unchecked(&w, x)),
            ComplexStats::merge,
        )?;
        Ok((stats.mean().re, stats.stderr_re()))
    }

    /// Value, standard error and gradient from one shared set of sign vectors.
    ///
    /// Each sample contributes `G_ab = ∂Rys_x/∂W_ab = (Π x) x_b Π_{l≠a} (Wx)_l`;
    /// the chain rule through `W = A† D A` with `A = U[:, :k]` then reduces to
    /// two `m × k` contractions per parameter.
    pub fn parity_estimate_with_gradient(
        &self,
        alpha: &ParityWord,
        cfg: &EstimatorConfig,
    ) -> Result<(f64, f64, Vec<f64>)> {
        let jac = self.jac.as_ref().ok_or(Error::FixedUnitaryHasNoGradient)?;
        cfg.validate()?;
        let k = self.k;
        let w = parity_matrix(&self.u, k, alpha);

        struct Acc {
            stats: ComplexStats,
            g: Vec<Complex64>,
        }
        let acc = sign_vector_reduce(
            k,
            cfg,
            || Acc {
                stats: ComplexStats::default(),
                g: vec![Complex64::new(0.0, 0.0); k * k],
            },
            |x, acc| {
                let sign: f64 = x.iter().product();
                let y: Vec<Complex64> = (0..k)
                    .map(|i| (0..k).map(|j| w[(i, j)] * x[j]).sum())
                    .collect();
                let mut prefix = vec![Complex64::new(sign, 0.0); k + 1];
                for i in 0..k {
                    prefix[i + 1] = prefix[i] * y[i];
                }
                acc.stats.push(prefix[k]);
                let mut suffix = Complex64::new(1.0, 0.0);
                for a in (0..k).rev() {
                    let others = prefix[a] * suffix;
                    for b in 0..k {
                        acc.g[a * k + b] += others * x[b];
                    }
                    suffix *= y[a];
                }
            },
            |into, from| {
                into.stats.merge(from.stats);
                for (a, b) in into.g.iter_mut().zip(from.g) {
                    *a += b;
                }
            },
        )?;
        let value = acc.stats.mean().re;
        let stderr = acc.stats.stderr_re();
        if alpha.constant_sign().is_some() {
            // W = ±I for every θ
            return Ok((value, stderr, vec![0.0; jac.len()]));
        }

        let n = acc.stats.count as f64;
        let g = DMatrix::from_fn(k, k, |a, b| acc.g[a * k + b] / n);
        let d = alpha.diagonal();
        let a_mat = self.u.columns(0, k);
        // P = D A Gᵀ, Q = D conj(A) G
        let mut p = a_mat * g.transpose();
        let mut q = a_mat.map(|z| z.conj()) * &g;
        for j in 0..self.m {
            for c in 0..k {
                p[(j, c)] *= d[j];
                q[(j, c)] *= d[j];
            }
        }
        let grad = jac
            .iter()
            .map(|da| {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..self.m {
                    for c in 0..k {
                        let v = da[(j, c)];
                        s += v.conj() * p[(j, c)] + v * q[(j, c)];
                    }
                }
                s.re
            })
            .collect();
        Ok((value, stderr, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::haar_random;

    fn spec(m: usize, k: usize, seed: u64) -> BsbmSpec {
        BsbmSpec::new(k, haar_random(m, seed)).unwrap()
    }

    #[test]
    fn identity_distribution() {
        let s = BsbmSpec::new(2, InterferometerMesh::identity(5)).unwrap();
        let d = exact_distribution(&s).unwrap();
        assert!((d.z - 1.0).abs() < 1e-15);
        assert_eq!(d.probs[0], 1.0);
        assert!(d.probs[1..].iter().all(|&p| p == 0.0));
        assert!(sample_exact(&s, 50, 1)
            .unwrap()
            .iter()
            .all(|o| o.to_string() == "11000"));
    }

    #[test]
    fn single_photon_is_column() {
        let s = spec(6, 1, 4);
        let d = exact_distribution(&s).unwrap();
        let u = s.unitary();
        assert!((d.z - 1.0).abs() < 1e-12);
        for (j, o) in d.outcomes.iter().enumerate() {
            assert_eq!(o.modes(), &[j]);
            assert!((d.raw_weights[j] - u.matrix()[(j, 0)].norm_sqr()).abs() < 1e-14);
        }
    }

    #[test]
    fn trivial_parities() {
        let s = spec(5, 3, 2);
        let cfg = EstimatorConfig::new(5_000, 1);
        assert_eq!(
            parity_expectation_estimate(&s, &ParityWord::zeros(5), &cfg).unwrap(),
            (1.0, 0.0)
        );
        assert_eq!(
            parity_expectation_estimate(&s, &ParityWord::ones(5), &cfg).unwrap(),
            (-1.0, 0.0)
        );
        assert!((parity_expectation_exact(&s, &ParityWord::ones(5)).unwrap() + 1.0).abs() < 1e-12);
        for alpha in [ParityWord::zeros(5), ParityWord::ones(5)] {
            let g = parity_gradient_estimate(&s, &alpha, &cfg).unwrap();
            assert!(g.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn exhaustive_estimate_equals_exact() {
        let s = spec(7, 4, 8);
        let alpha = ParityWord::new("0110100".parse().unwrap(), 7).unwrap();
        let (est, _) =
            parity_expectation_estimate(&s, &alpha, &EstimatorConfig::exhaustive()).unwrap();
        let exact = parity_expectation_exact(&s, &alpha).unwrap();
        assert!((est - exact).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = spec(5, 2, 13);
        let alpha = ParityWord::new("10110".parse().unwrap(), 5).unwrap();
        let grad = parity_gradient_estimate(&s, &alpha, &EstimatorConfig::exhaustive()).unwrap();
        let h = 1e-5;
        let base = s.mesh().unwrap().params().to_vec();
        for (t, g) in grad.iter().enumerate() {
            let eval = |delta: f64| {
                let mut p = base.clone();
                p[t] += delta;
                let shifted = BsbmSpec::new(2, InterferometerMesh::new(5, p).unwrap()).unwrap();
                parity_expectation_exact(&shifted, &alpha).unwrap()
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            assert!((fd - g).abs() < 1e-7, "param {t}: {fd} vs {g}");
        }
    }

    #[test]
    fn fixed_unitary_has_no_gradient() {
        let s = BsbmSpec::fixed(1, ModeUnitary::identity(3)).unwrap();
        let err = parity_gradient_estimate(&s, &ParityWord::zeros(3), &EstimatorConfig::new(10, 0));
        assert_eq!(err, Err(Error::FixedUnitaryHasNoGradient));
    }

    #[test]
    fn dilute_flag() {
        assert!(spec(8, 3, 0).outside_dilute_regime());
        assert!(!spec(9, 3, 0).outside_dilute_regime());
    }

    #[test]
    fn gap_vanishes_for_one_photon() {
        let s = spec(5, 1, 3);
        let alpha = ParityWord::new("01101".parse().unwrap(), 5).unwrap();
        assert!(dilute_gap(&s, &alpha).unwrap().abs() < 1e-12);
    }
}
