//! Brute-force reference implementations. None of these share code with the
//! fast paths they are used to check.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::interferometer::CMatrix;

/// Largest Fock-space dimension the state-vector oracle will build.
pub const FOCK_DIMENSION_LIMIT: u128 = 100_000;

/// `Σ_σ Π_i W_{i σ(i)}` over all permutations (Heap's algorithm).
pub fn naive_permanent(w: &CMatrix) -> Complex64 {
    let k = w.nrows();
    assert_eq!(k, w.ncols());
    assert!(k <= 11, "factorial-sum permanent limited to 11x11");
    let mut perm: Vec<usize> = (0..k).collect();
    let term = |p: &[usize]| {
        p.iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (i, &j)| acc * w[(i, j)])
    };
    let mut total = term(&perm);
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            total += term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

/// The full output state `Π_{i<k} (Σ_j U_ji b_j†) |0⟩` in the occupation basis.
#[derive(Debug, Clone)]
pub struct FockState {
    pub m: usize,
    pub k: usize,
    /// Occupation numbers per mode mapped to amplitudes.
    pub amplitudes: BTreeMap<Vec<u8>, Complex64>,
}

impl FockState {
    /// Expands the creation-operator polynomial term by term; the amplitude of
    /// `|n⟩` is the monomial coefficient times `sqrt(Π n_j!)`.
    pub fn evolve(u: &CMatrix, k: usize) -> Result<Self> {
        let m = u.nrows();
        if k > m {
            return Err(Error::DimensionMismatch(format!(
                "{k} photons in {m} modes"
            )));
        }
        let dim = crate::combinatorics::binomial(m + k - 1, k);
        if dim > FOCK_DIMENSION_LIMIT {
            return Err(Error::SpaceTooLarge {
                bits: m,
                limit: FOCK_DIMENSION_LIMIT as usize,
            });
        }
        let mut poly: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        poly.insert(vec![0u8; m], Complex64::new(1.0, 0.0));
        for input in 0..k {
            let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
            for (occ, coeff) in &poly {
                for out in 0..m {
                    let amp = u[(out, input)];
                    if amp == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut o = occ.clone();
                    o[out] += 1;
                    *next.entry(o).or_default() += coeff * amp;
                }
            }
            poly = next;
        }
        let amplitudes = poly
            .into_iter()
            .map(|(occ, coeff)| {
                let norm: f64 = occ
                    .iter()
                    .map(|&n| (1..=n as u32).map(f64::from).product::<f64>())
                    .product();
                (occ, coeff * norm.sqrt())
            })
            .collect();
        Ok(FockState { m, k, amplitudes })
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨Π_α⟩` on the full state, collisions included.
    pub fn parity_expectation(&self, alpha: &BitString) -> f64 {
        self.amplitudes
            .iter()
            .map(|(occ, a)| {
                let flips: u32 = occ
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| alpha.get(*j))
                    .map(|(_, &n)| u32::from(n))
                    .sum();
                let sign = if flips.is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * a.norm_sqr()
            })
            .sum()
    }

    /// Probabilities of the collision-free outcomes, keyed by bitstring.
    pub fn collision_free(&self) -> BTreeMap<BitString, f64> {
        self.amplitudes
            .iter()
            .filter(|(occ, _)| occ.iter().all(|&n| n <= 1))
            .map(|(occ, a)| {
                (
                    BitString::new(occ.iter().map(|&n| n == 1).collect()),
                    a.norm_sqr(),
                )
            })
            .collect()
    }
}

/// Normalized Walsh–Hadamard transform `ĝ(α) = 2^{-m} Σ_z g(z) (-1)^{α·z}`
/// of a table indexed by the big-endian integer value of `z`.
pub fn walsh_transform(values: &[f64]) -> Vec<f64> {
    let len = values.len();
    assert!(len.is_power_of_two(), "table length must be a power of two");
    let mut out = values.to_vec();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for i in start..start + h {
                let (a, b) = (out[i], out[i + h]);
                out[i] = a + b;
                out[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / len as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_permanent_small() {
        let ones = CMatrix::from_element(3, 3, Complex64::new(1.0, 0.0));
        assert_eq!(naive_permanent(&ones), Complex64::new(6.0, 0.0));
        let m =
            CMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0].map(|v| Complex64::new(v, 0.0)));
        assert_eq!(naive_permanent(&m), Complex64::new(10.0, 0.0));
    }

    #[test]
    fn hong_ou_mandel() {
        // balanced beamsplitter: two photons always bunch
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_row_slice(2, 2, &[h, -h, h, h].map(|v| Complex64::new(v, 0.0)));
        let state = FockState::evolve(&u, 2).unwrap();
        assert!((state.total_probability() - 1.0).abs() < 1e-14);
        let cf = state.collision_free();
        assert!(cf.values().sum::<f64>() < 1e-14);
    }

    #[test]
    fn walsh_of_delta_is_flat() {
        let mut g = vec![0.0; 8];
        g[0] = 1.0;
        assert!(walsh_transform(&g)
            .iter()
            .all(|&v| (v - 0.125).abs() < 1e-15));
    }
}
