//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
//! its measured quantity and wall time; the process fails if any criterion
//! fails or overruns its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bsbm::born_machine::{
    exact_distribution, parity_expectation_estimate, parity_expectation_exact, sample_exact,
    BsbmSpec, ParityWord,
};
use bsbm::combinatorics::binomial;
use bsbm::interferometer::{haar_random, haar_unitary, CMatrix, InterferometerMesh};
use bsbm::oracle::FockState;
use bsbm::permanent::{derive_seed, gurvits_estimate, ryser_permanent, EstimatorConfig};
use bsbm::readout::{
    build_tower, pushforward_exact, total_variation, verify_tower, CheckOutcome, Construction,
    EbsbmSpec, LiftMode, ReadoutMap, TowerOptions, VerifyOptions,
};
use bsbm::training::{
    full_state_parity_table, mmd2_exact, mmd2_value_and_gradient, train, AlphaSampling,
    EmpiricalDistribution, KernelSpec, MmdConfig, TrainConfig,
};
use bsbm::BitString;

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Permanent by expansion over all permutations.
fn permutation_permanent(w: &CMatrix) -> Complex64 {
    fn go(w: &CMatrix, row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == w.nrows() {
            return Complex64::new(1.0, 0.0);
        }
        let mut total = Complex64::new(0.0, 0.0);
        for c in 0..w.ncols() {
            if !used[c] {
                used[c] = true;
                total += w[(row, c)] * go(w, row + 1, used);
                used[c] = false;
            }
        }
        total
    }
    go(w, 0, &mut vec![false; w.ncols()])
}

fn random_bits<R: Rng>(m: usize, rng: &mut R) -> BitString {
    BitString::new((0..m).map(|_| rng.random::<bool>()).collect())
}

fn random_table<R: Rng>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn gurvits_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst, mut worst_naive) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let k = 1 + i % 8;
        let m = k + rng.random_range(0..=6);
        let u = haar_unitary(m, &mut rng).into_matrix();
        let rows = sample(&mut rng, m, k).into_vec();
        let w = CMatrix::from_fn(k, k, |r, c| u[(rows[r], c)]);
        let exact = ryser_permanent(&w).map_err(err)?;
        let (avg, _) = gurvits_estimate(&w, &EstimatorConfig::exhaustive()).map_err(err)?;
        worst = worst.max((avg - exact).norm() / exact.norm());
        if k <= 7 {
            let naive = permutation_permanent(&w);
            worst_naive = worst_naive.max((naive - exact).norm() / naive.norm());
        }
    }
    Ok((
        worst <= 1e-9 && worst_naive <= 1e-9,
        format!("max rel err {worst:.2e}, ryser vs permutation expansion {worst_naive:.2e}"),
    ))
}

fn hoeffding_contract() -> Outcome {
    let (eps, delta) = (0.05, 0.1);
    let (m, k, trials) = (12, 4, 500);
    let n = ((2.0 * (2.0f64 / delta).ln()) / (eps * eps)).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut failures = 0usize;
    for t in 0..trials {
        let spec = BsbmSpec::new(k, haar_random(m, derive_seed(202, t))).map_err(err)?;
        let alpha = ParityWord::new(random_bits(m, &mut rng), m).map_err(err)?;
        let exact = parity_expectation_exact(&spec, &alpha).map_err(err)?;
        let cfg = EstimatorConfig::from_accuracy(eps, delta, derive_seed(2020, t)).map_err(err)?;
        if cfg.n_samples != n {
            return Err(format!("sample count {} differs from {n}", cfg.n_samples));
        }
        let (est, _) = parity_expectation_estimate(&spec, &alpha, &cfg).map_err(err)?;
        failures += usize::from((est - exact).abs() > eps);
    }
    let rate = failures as f64 / trials as f64;
    Ok((
        rate <= delta,
        format!("N = {n}, {failures}/{trials} trials off by more than {eps} (rate {rate:.3})"),
    ))
}

fn parity_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0f64;
    for i in 0..30u64 {
        let m = rng.random_range(3..=8);
        let k = rng.random_range(1..=3);
        let spec = BsbmSpec::new(k, haar_random(m, derive_seed(303, i))).map_err(err)?;
        let alpha = random_bits(m, &mut rng);
        let exact =
            parity_expectation_exact(&spec, &ParityWord::new(alpha.clone(), m).map_err(err)?)
                .map_err(err)?;
        let state = FockState::evolve(spec.unitary().matrix(), k).map_err(err)?;
        worst = worst.max((exact - state.parity_expectation(&alpha)).abs());
    }
    Ok((
        worst <= 1e-8,
        format!("max abs err {worst:.2e} over 30 instances"),
    ))
}

fn hamming(x: usize, y: usize) -> u32 {
    (x ^ y).count_ones()
}

fn mmd_forms_agree() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for m in 1..=8usize {
        let p = random_table(1 << m, &mut rng);
        let q = random_table(1 << m, &mut rng);
        for sigma in [0.5, 1.0, 2.0] {
            let c = 1.0 / (2.0 * sigma * sigma);
            let double: f64 = (0..1 << m)
                .flat_map(|x| (0..1 << m).map(move |y| (x, y)))
                .map(|(x, y)| (p[x] - q[x]) * (p[y] - q[y]) * (-c * hamming(x, y) as f64).exp())
                .sum();
            // per-bit Walsh coefficients of e^{-c z}: (1 ± e^{-c}) / 2
            let (g0, g1) = ((1.0 + (-c).exp()) / 2.0, (1.0 - (-c).exp()) / 2.0);
            let spectral: f64 = (0..1usize << m)
                .map(|a| {
                    let w = a.count_ones() as i32;
                    let gap: f64 = (0..1usize << m)
                        .map(|x| {
                            let sign = if (a & x).count_ones() % 2 == 0 {
                                1.0
                            } else {
                                -1.0
                            };
                            sign * (p[x] - q[x])
                        })
                        .sum();
                    g1.powi(w) * g0.powi(m as i32 - w) * gap * gap
                })
                .sum();
            let kernel = KernelSpec::gaussian_hamming(m, sigma).map_err(err)?;
            let library = mmd2_exact(&p, &q, &kernel).map_err(err)?;
            let library_spectral: f64 = (0..1usize << m)
                .map(|a| {
                    let alpha = BitString::from_value(a as u128, m);
                    let gap: f64 = (0..1usize << m)
                        .map(|x| {
                            BitString::from_value(x as u128, m).character(&alpha) * (p[x] - q[x])
                        })
                        .sum();
                    kernel.spectral_weight(&alpha) * gap * gap
                })
                .sum();
            for v in [spectral, library, library_spectral] {
                worst = worst.max((v - double).abs());
            }
        }
    }
    Ok((
        worst <= 1e-9,
        format!("max abs gap {worst:.2e} over m = 1..8, three bandwidths"),
    ))
}

fn exhaustive_loss(table: &[f64], spec: &BsbmSpec, kernel: &KernelSpec) -> Result<f64, String> {
    mmd2_exact(table, &full_state_parity_table(spec).map_err(err)?, kernel).map_err(err)
}

fn gradient_matches_finite_differences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let exhaustive = MmdConfig {
        alphas: AlphaSampling::Exhaustive,
        estimator: EstimatorConfig::exhaustive(),
    };
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let m = rng.random_range(3..=6);
        let k = rng.random_range(1..=2);
        let mut spec = BsbmSpec::new(k, haar_random(m, derive_seed(505, i))).map_err(err)?;
        let samples: Vec<BitString> = (0..200).map(|_| random_bits(m, &mut rng)).collect();
        let data = EmpiricalDistribution::from_samples(&samples).map_err(err)?;
        let table = data.to_table().map_err(err)?;
        let kernel = KernelSpec::gaussian_hamming(m, rng.random_range(0.5..2.0)).map_err(err)?;
        let est = mmd2_value_and_gradient(&data, &spec, &kernel, &exhaustive).map_err(err)?;
        let grad = est.gradient.ok_or("no gradient")?;
        let value = exhaustive_loss(&table, &spec, &kernel)?;
        if (value - est.value).abs() > 1e-10 {
            return Err(format!(
                "exhaustive loss {} differs from {value}",
                est.value
            ));
        }
        let theta = spec.mesh().ok_or("no mesh")?.params().to_vec();
        let mut fd = Vec::with_capacity(theta.len());
        for j in 0..theta.len() {
            let mut shifted = theta.clone();
            shifted[j] = theta[j] + h;
            spec.mesh_mut().ok_or("no mesh")?.set_params(&shifted);
            let up = exhaustive_loss(&table, &spec, &kernel)?;
            shifted[j] = theta[j] - h;
            spec.mesh_mut().ok_or("no mesh")?.set_params(&shifted);
            let down = exhaustive_loss(&table, &spec, &kernel)?;
            fd.push((up - down) / (2.0 * h));
        }
        spec.mesh_mut().ok_or("no mesh")?.set_params(&theta);
        let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diff = grad
            .iter()
            .zip(&fd)
            .fold(0.0f64, |a, (g, f)| a.max((g - f).abs()));
        worst = worst.max(diff / scale);
    }
    Ok((
        worst <= 1e-4,
        format!("max relative error {worst:.2e} over 20 instances"),
    ))
}

fn tower_suite() -> Outcome {
    let required = [
        "surjectivity",
        "compatibility",
        "embedded image",
        "pushforward of embedding",
    ];
    let mut summary = Vec::new();
    let mut ok = true;
    for construction in [Construction::Bleed, Construction::Interp] {
        let tower = build_tower(4, construction, TowerOptions::default()).map_err(err)?;
        let checks = verify_tower(
            &tower,
            &VerifyOptions {
                seed: 606,
                ..Default::default()
            },
        )
        .map_err(err)?;
        let failed: Vec<String> = checks
            .iter()
            .filter(|c| c.failed())
            .map(|c| c.to_string())
            .collect();
        let passed = checks
            .iter()
            .filter(|c| matches!(c.outcome, CheckOutcome::Pass(_)))
            .count();
        let missing: Vec<&str> = required
            .iter()
            .copied()
            .filter(|name| {
                !checks
                    .iter()
                    .any(|c| c.name == *name && matches!(c.outcome, CheckOutcome::Pass(_)))
            })
            .collect();

        // compatibility recomputed outside the verifier on every enumerable pair
        let mut mismatches = 0usize;
        for j in 0..tower.levels.len() {
            let Some((m, k)) = tower.embedded_dims(j) else {
                continue;
            };
            if binomial(m, k) > 100_000 {
                continue;
            }
            let inner = tower.embedded_readout(j).map_err(err)?;
            for s in bsbm::combinatorics::enumerate_outcomes(m, k).map_err(err)? {
                let up = tower.embed_outcome(j, &s).map_err(err)?;
                if tower.levels[j].readout.apply(&up).map_err(err)?
                    != inner.apply(&s).map_err(err)?
                {
                    mismatches += 1;
                }
            }
        }
        ok &= failed.is_empty() && missing.is_empty() && mismatches == 0;
        summary.push(format!(
            "{construction}: {} levels, {passed} checks passed, {} failed, missing {:?}, {mismatches} recomputed mismatches",
            tower.levels.len(),
            failed.len(),
            missing
        ));
        for f in failed {
            summary.push(f);
        }
    }
    Ok((ok, summary.join("; ")))
}

fn universality_witness() -> Outcome {
    let tower = build_tower(4, Construction::Interp, TowerOptions::default()).map_err(err)?;
    let top = tower.top();
    if (top.m, top.k) != (16, 1) {
        return Ok((false, format!("top level is ({}, {})", top.m, top.k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for t in 0..20 {
        let mut target = random_table(16, &mut rng);
        if t % 4 == 0 {
            // sparse targets exercise zero amplitudes
            for v in target.iter_mut().step_by(3) {
                *v = 0.0;
            }
            let total: f64 = target.iter().sum();
            target.iter_mut().for_each(|v| *v /= total);
        }
        let spec = tower.universal_witness(&target).map_err(err)?;
        worst = worst.max(total_variation(
            &target,
            &pushforward_exact(&spec).map_err(err)?,
        ));
    }
    Ok((
        worst <= 1e-9,
        format!("max TV {worst:.2e} over 20 targets at (16,1)"),
    ))
}

fn normalization_and_support() -> Outcome {
    let mut worst_sum = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut off_support = 0usize;
    let mut cases = 0usize;
    for m in 1..=14usize {
        for k in 1..=m.min(5) {
            if binomial(m, k) > 10_000 {
                continue;
            }
            cases += 1;
            let spec = BsbmSpec::new(k, haar_random(m, derive_seed(808, (m * 16 + k) as u64)))
                .map_err(err)?;
            let dist = exact_distribution(&spec).map_err(err)?;
            worst_sum = worst_sum.max((dist.probs.iter().sum::<f64>() - 1.0).abs());
            if k == 1 {
                worst_z = worst_z.max((dist.z - 1.0).abs());
            }
            let mut table = vec![0.0; 1 << m];
            for (s, p) in dist.outcomes.iter().zip(&dist.probs) {
                table[s.to_bits().value() as usize] += p;
            }
            off_support += BitString::all(m)
                .filter(|x| x.weight() != k && table[x.value() as usize] != 0.0)
                .count();
            off_support += sample_exact(&spec, 200, derive_seed(809, m as u64))
                .map_err(err)?
                .iter()
                .filter(|s| s.to_bits().weight() != k)
                .count();
        }
    }
    Ok((
        worst_sum <= 1e-10 && worst_z <= 1e-10 && off_support == 0,
        format!(
            "{cases} (m,k) pairs: max |Σp − 1| {worst_sum:.2e}, max |Z − 1| at k = 1 {worst_z:.2e}, {off_support} off-weight hits"
        ),
    ))
}

fn teacher_student() -> Outcome {
    let (m, k, n) = (8, 2, 3);
    let mut passed = 0;
    let mut lines = Vec::new();
    for seed in 1..=5u64 {
        let readout = ReadoutMap::interp(m, k, n).map_err(err)?;
        let teacher = EbsbmSpec::new(
            BsbmSpec::new(k, haar_random(m, derive_seed(seed, 1))).map_err(err)?,
            readout.clone(),
        )
        .map_err(err)?;
        let data: Vec<BitString> = sample_exact(&teacher.base, 10_000, derive_seed(seed, 2))
            .map_err(err)?
            .iter()
            .map(|s| readout.apply(s))
            .collect::<bsbm::Result<_>>()
            .map_err(err)?;
        let student = EbsbmSpec::new(
            BsbmSpec::new(k, haar_random(m, derive_seed(seed, 3))).map_err(err)?,
            readout.clone(),
        )
        .map_err(err)?;
        let target = pushforward_exact(&teacher).map_err(err)?;
        let before = total_variation(&target, &pushforward_exact(&student).map_err(err)?);
        let config = TrainConfig {
            seed,
            ..Default::default()
        };
        let result = train(&data, &student, None, &config).map_err(err)?;
        let trained =
            EbsbmSpec::new(BsbmSpec::new(k, result.mesh).map_err(err)?, readout).map_err(err)?;
        let after = total_variation(&target, &pushforward_exact(&trained).map_err(err)?);
        let ok = after <= 0.1 && after < before;
        passed += usize::from(ok);
        lines.push(format!("seed {seed} TV {before:.3} -> {after:.3}"));
    }
    Ok((
        passed >= 4,
        format!("{passed}/5 seeds reached TV <= 0.1 ({})", lines.join(", ")),
    ))
}

fn surrogate_caveat() -> Outcome {
    // three one-photon outcomes, two of which read out as 1
    let readout = ReadoutMap::table(3, 1, 1, vec![0, 1, 1]).map_err(err)?;
    let amp = Complex64::new((1.0f64 / 3.0).sqrt(), 0.0);
    let mesh = InterferometerMesh::with_first_column(&[amp, amp, amp]).map_err(err)?;
    let model = EbsbmSpec::new(BsbmSpec::new(1, mesh).map_err(err)?, readout).map_err(err)?;
    // data distributed exactly as the model's readout: P(0) = 1/3, P(1) = 2/3
    let data: Vec<BitString> = (0..3000)
        .map(|i| BitString::from_value(u128::from(i % 3 != 0), 1))
        .collect();
    let table = EmpiricalDistribution::from_samples(&data)
        .map_err(err)?
        .to_table()
        .map_err(err)?;
    let tv = total_variation(&table, &pushforward_exact(&model).map_err(err)?);
    // the deterministic lift puts every 1 on a single outcome, so the lifted
    // target differs from the model even though the readouts agree
    let config = TrainConfig {
        steps: 0,
        batch_alphas: 256,
        lift_mode: LiftMode::Deterministic,
        seed: 1010,
        ..Default::default()
    };
    let result = train(&data, &model, None, &config).map_err(err)?;
    let (loss, stderr) = result.final_loss;
    Ok((
        loss > 4.0 * stderr && tv <= 1e-6,
        format!(
            "final loss {loss:.4e} ± {stderr:.2e} ({:.1} stderr), TV {tv:.2e}",
            loss / stderr
        ),
    ))
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "gurvits_identity",
            gurvits_identity,
            Duration::from_secs(10),
        ),
        (
            "hoeffding_contract",
            hoeffding_contract,
            Duration::from_secs(120),
        ),
        (
            "parity_exactness",
            parity_exactness,
            Duration::from_secs(60),
        ),
        ("mmd_forms_agree", mmd_forms_agree, Duration::from_secs(30)),
        (
            "gradient_finite_differences",
            gradient_matches_finite_differences,
            Duration::from_secs(120),
        ),
        ("tower_structure", tower_suite, Duration::from_secs(120)),
        (
            "universality_witness",
            universality_witness,
            Duration::from_secs(10),
        ),
        (
            "normalization_and_support",
            normalization_and_support,
            Duration::from_secs(60),
        ),
        ("teacher_student", teacher_student, Duration::from_secs(900)),
        (
            "surrogate_caveat",
            surrogate_caveat,
            Duration::from_secs(60),
        ),
    ];
    let mut failures = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && elapsed <= budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!ok);
        println!(
            "{} {name}: {detail} [{:.2}s of {}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
