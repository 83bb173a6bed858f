use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::born_machine::{exact_distribution, parity_expectation_exact, BsbmSpec, ParityWord};
use crate::combinatorics::{enumerate_outcomes, subset_rank, subset_unrank};
use crate::interferometer::{haar_random, haar_unitary, CMatrix};
use crate::oracle::{naive_permanent, FockState};
use crate::permanent::{derive_seed, gurvits_estimate, ryser_permanent, EstimatorConfig};
use crate::training::{mmd2_exact, KernelSpec};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, worst: f64, tol: f64) -> OracleCheck {
    OracleCheck {
        name,
        passed: worst <= tol,
        detail: format!("max error {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn corner(u: &CMatrix, k: usize) -> CMatrix {
    u.view((0, 0), (k, k)).into_owned()
}

fn random_table<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Brute-force cross-checks on small random instances.
pub fn run_oracle_suite(seed: u64) -> Result<Vec<OracleCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for k in 1..=7 {
        let u = haar_unitary(k + 2, &mut rng).into_matrix();
        let w = corner(&u, k);
        let naive = naive_permanent(&w);
        worst = worst.max((ryser_permanent(&w)? - naive).norm() / naive.norm().max(1e-300));
    }
    out.push(check("ryser_vs_naive_permanent", worst, 1e-10));

    let mut worst: f64 = 0.0;
    for k in 1..=8 {
        let w = corner(&haar_unitary(k + 3, &mut rng).into_matrix(), k);
        let exact = ryser_permanent(&w)?;
        let (avg, _) = gurvits_estimate(&w, &EstimatorConfig::exhaustive())?;
        worst = worst.max((avg - exact).norm() / exact.norm().max(1e-300));
    }
    out.push(check("exhaustive_rys_average_vs_ryser", worst, 1e-9));

    let mut worst_parity: f64 = 0.0;
    let mut worst_prob: f64 = 0.0;
    for (m, k) in [(4, 2), (5, 2), (5, 3), (6, 3)] {
        let spec = BsbmSpec::new(k, haar_random(m, derive_seed(seed, (m * 10 + k) as u64)))?;
        let state = FockState::evolve(spec.unitary().matrix(), k)?;
        for _ in 0..4 {
            let alpha = BitString::new((0..m).map(|_| rng.random::<bool>()).collect());
            let exact = parity_expectation_exact(&spec, &ParityWord::new(alpha.clone(), m)?)?;
            worst_parity = worst_parity.max((exact - state.parity_expectation(&alpha)).abs());
        }
        let dist = exact_distribution(&spec)?;
        for (bits, p) in state.collision_free() {
            let s = crate::FockOutcome::from_bits(&bits);
            let ours = dist.raw_weights[subset_rank(&s) as usize];
            worst_prob = worst_prob.max((ours - p).abs());
        }
    }
    out.push(check("parity_vs_fock_state", worst_parity, 1e-10));
    out.push(check("collision_free_vs_fock_state", worst_prob, 1e-12));

    let mut worst: f64 = 0.0;
    for m in [3, 5, 6] {
        let p = random_table(1 << m, &mut rng);
        let q = random_table(1 << m, &mut rng);
        for sigma in [0.5, 1.0, 2.0] {
            let kernel = KernelSpec::gaussian_hamming(m, sigma)?;
            let spectral: f64 = BitString::all(m)
                .map(|a| {
                    let gap: f64 = (0..1usize << m)
                        .map(|x| (p[x] - q[x]) * BitString::from_value(x as u128, m).character(&a))
                        .sum();
                    kernel.spectral_weight(&a) * gap * gap
                })
                .sum();
            worst = worst.max((mmd2_exact(&p, &q, &kernel)? - spectral).abs());
        }
    }
    out.push(check("mmd_double_sum_vs_spectral_sum", worst, 1e-12));

    let mut mismatches = 0usize;
    for (m, k) in [(6, 2), (7, 3), (8, 4)] {
        for (rank, s) in enumerate_outcomes(m, k)?.iter().enumerate() {
            if subset_rank(s) != rank as u128 || subset_unrank(m, k, rank as u128)? != *s {
                mismatches += 1;
            }
        }
    }
    out.push(OracleCheck {
        name: "rank_unrank_round_trip",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches"),
    });

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for c in run_oracle_suite(3).unwrap() {
            assert!(c.passed, "{c}");
        }
    }
}
