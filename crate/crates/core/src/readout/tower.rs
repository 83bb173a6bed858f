use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::maps::{BleedChain, ReadoutMap};
use super::{pushforward, pushforward_on_support, total_variation, EbsbmSpec};
use crate::bits::BitString;
use crate::born_machine::{exact_distribution, BsbmSpec};
use crate::combinatorics::{
    binomial, enumerate_outcomes, enumeration_cap, subset_unrank, FockOutcome,
};
use crate::error::{Error, Result};
use crate::interferometer::{
    bleed_embed, haar_unitary, pad_embed, CMatrix, InterferometerMesh, ModeUnitary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Construction {
    /// Photons are added one level at a time and parked in bleed modes.
    Bleed,
    /// Photons are removed one level at a time down to a single photon.
    Interp,
}

impl std::str::FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bleed" => Ok(Construction::Bleed),
            "interp" => Ok(Construction::Interp),
            other => Err(Error::InvalidParameter(format!(
                "unknown construction {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Bleed => "bleed",
            Construction::Interp => "interp",
        })
    }
}

/// How the first level of a tower is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerBase {
    Auto,
    /// Fix `k₁` and pick `m₁` from the size bounds.
    Photons(usize),
    Explicit {
        m: usize,
        k: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TowerOptions {
    pub base: TowerBase,
    /// Working modes added per bleed level beyond the first two.
    pub working_step: usize,
}

impl Default for TowerOptions {
    fn default() -> Self {
        TowerOptions {
            base: TowerBase::Auto,
            working_step: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerLevel {
    pub m: usize,
    pub k: usize,
    pub readout: ReadoutMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutTower {
    pub n: usize,
    pub construction: Construction,
    pub levels: Vec<TowerLevel>,
    /// Size bounds that the construction could not meet, reported rather
    /// than enforced.
    pub notes: Vec<String>,
}

fn pow2(n: usize) -> u128 {
    1u128 << n
}

/// Builds a tower for `n`-bit outputs.
pub fn build_tower(
    n: usize,
    construction: Construction,
    options: TowerOptions,
) -> Result<ReadoutTower> {
    if n == 0 || n > 24 {
        return Err(Error::InvalidParameter(format!(
            "tower width {n} out of range 1..=24"
        )));
    }
    match construction {
        Construction::Bleed => build_bleed(n, options),
        Construction::Interp => build_interp(n, options),
    }
}

fn build_bleed(n: usize, options: TowerOptions) -> Result<ReadoutTower> {
    let big = pow2(n);
    let (m1, k1) = match options.base {
        TowerBase::Explicit { m, k } => (m, k),
        TowerBase::Auto => {
            let k = if n >= 2 { 2 } else { 1 };
            (largest_m_within(k, big), k)
        }
        TowerBase::Photons(k) => {
            if k == 0 {
                return Err(Error::InfeasibleBase("need at least one photon".into()));
            }
            (largest_m_within(k, big), k)
        }
    };
    let c1 = binomial(m1, k1);
    if k1 == 0 || k1 > m1 || !(big / 2 < c1 && c1 <= big) {
        return Err(Error::InfeasibleBase(format!(
            "bleed base needs 2^{} < C(m1,k1) <= 2^{n}, got C({m1},{k1}) = {c1}",
            n - 1
        )));
    }
    if options.working_step == 0 {
        return Err(Error::InvalidParameter(
            "working_step must be at least 1".into(),
        ));
    }

    let mut levels = vec![(m1, k1)];
    let mut m2 = m1 + 1;
    while binomial(m2, k1) < big {
        m2 += 1;
    }
    levels.push((m2, k1));
    let (mut m, mut k) = (m2, k1);
    while m - k < big as usize {
        m += options.working_step + 1;
        k += 1;
        levels.push((m, k));
    }
    let chain = Arc::new(BleedChain::new(n, levels.clone())?);

    let mut notes = Vec::new();
    for (j, &(m, k)) in levels.iter().enumerate().skip(1) {
        let c = binomial(m, k);
        if c > 2 * big {
            notes.push(format!(
                "level {}: C({m},{k}) = {c} exceeds 2^{}",
                j + 1,
                n + 1
            ));
        }
    }
    let levels = levels
        .iter()
        .enumerate()
        .map(|(j, &(m, k))| {
            Ok(TowerLevel {
                m,
                k,
                readout: ReadoutMap::bleed(chain.clone(), j)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ReadoutTower {
        n,
        construction: Construction::Bleed,
        levels,
        notes,
    })
}

fn largest_m_within(k: usize, bound: u128) -> usize {
    let mut m = k.max(1);
    while binomial(m + 1, k) <= bound {
        m += 1;
    }
    m
}

fn smallest_m_reaching(k: usize, bound: u128) -> usize {
    let mut m = k.max(1);
    while binomial(m, k) < bound {
        m += 1;
    }
    m
}

fn build_interp(n: usize, options: TowerOptions) -> Result<ReadoutTower> {
    let big = pow2(n);
    let (m1, k1) = match options.base {
        TowerBase::Explicit { m, k } => (m, k),
        TowerBase::Auto => {
            let k = n / 2 + 1;
            (smallest_m_reaching(k, big), k)
        }
        TowerBase::Photons(k) => {
            if k == 0 {
                return Err(Error::InfeasibleBase("need at least one photon".into()));
            }
            (smallest_m_reaching(k, big), k)
        }
    };
    let c1 = binomial(m1, k1);
    if k1 == 0 || k1 > m1 || !(big <= c1 && c1 <= 2 * big) {
        return Err(Error::InfeasibleBase(format!(
            "interp base needs 2^{n} <= C(m1,k1) <= 2^{}, got C({m1},{k1}) = {c1}",
            n + 1
        )));
    }
    let mut dims = vec![(m1, k1)];
    for k in (1..k1).rev() {
        dims.push((smallest_m_reaching(k, big), k));
    }
    let mut notes = Vec::new();
    let mut levels = Vec::new();
    for (j, &(m, k)) in dims.iter().enumerate() {
        let c = binomial(m, k);
        if c > 2 * big {
            notes.push(format!(
                "level {}: C({m},{k}) = {c} exceeds 2^{}",
                j + 1,
                n + 1
            ));
        }
        let readout = ReadoutMap::interp(m, k, n)
            .map_err(|e| Error::InfeasibleBase(format!("level {} ({m},{k}): {e}", j + 1)))?;
        levels.push(TowerLevel { m, k, readout });
    }
    Ok(ReadoutTower {
        n,
        construction: Construction::Interp,
        levels,
        notes,
    })
}

impl ReadoutTower {
    pub fn top(&self) -> &TowerLevel {
        self.levels.last().expect("towers have at least one level")
    }

    /// `(m, k)` of the sampler embedded into `level`: the previous level for
    /// bleed towers, the `(m−1, k−1)` sub-sampler for interp towers. `None`
    /// for the bleed base and for interp levels with a single photon.
    pub fn embedded_dims(&self, level: usize) -> Option<(usize, usize)> {
        let TowerLevel { m, k, .. } = self.levels[level];
        match self.construction {
            Construction::Bleed => {
                (level > 0).then(|| (self.levels[level - 1].m, self.levels[level - 1].k))
            }
            Construction::Interp => (k > 1).then_some((m - 1, k - 1)),
        }
    }

    /// Readout of the embedded sampler of `level`.
    pub fn embedded_readout(&self, level: usize) -> Result<ReadoutMap> {
        let (m, k) = self
            .embedded_dims(level)
            .ok_or_else(|| no_embedding(level))?;
        match self.construction {
            Construction::Bleed => Ok(self.levels[level - 1].readout.clone()),
            Construction::Interp => ReadoutMap::rank(m, k, self.n),
        }
    }

    /// `R`: outcome of the embedded sampler → outcome of `level`.
    pub fn embed_outcome(&self, level: usize, x: &FockOutcome) -> Result<FockOutcome> {
        let (m, k) = self
            .embedded_dims(level)
            .ok_or_else(|| no_embedding(level))?;
        if x.m() != m || x.k() != k {
            return Err(Error::DimensionMismatch(format!("{x} is not in Ω_{m}^{k}")));
        }
        match &self.levels[level].readout {
            ReadoutMap::Bleed { chain, .. } => chain.embed(x, level),
            _ => Ok(x.extend(0, 1)),
        }
    }

    /// Left inverse of [`embed_outcome`](Self::embed_outcome).
    pub fn strip_outcome(&self, level: usize, s: &FockOutcome) -> Result<FockOutcome> {
        let (m, k) = self
            .embedded_dims(level)
            .ok_or_else(|| no_embedding(level))?;
        match &self.levels[level].readout {
            ReadoutMap::Bleed { chain, .. } => chain.strip(s, level),
            _ => {
                if !s.last_mode_occupied() {
                    return Err(Error::InvalidOutcome(format!("{s} is not embedded")));
                }
                FockOutcome::from_modes(m, s.modes()[..k].to_vec())
            }
        }
    }

    /// `ι`: unitary of the embedded sampler → unitary of `level`.
    pub fn embed_unitary(&self, level: usize, u: &ModeUnitary) -> Result<ModeUnitary> {
        let (m, _) = self
            .embedded_dims(level)
            .ok_or_else(|| no_embedding(level))?;
        if u.m() != m {
            return Err(Error::DimensionMismatch(format!(
                "level {level} embeds {m}-mode unitaries, got {}",
                u.m()
            )));
        }
        let TowerLevel { m: big_m, k, .. } = self.levels[level];
        if self.construction == Construction::Bleed && level == 1 {
            pad_embed(u, big_m)
        } else {
            bleed_embed(u, big_m, k)
        }
    }

    /// Outcomes of the top level that a universality witness populates, one
    /// per `n`-bit value.
    pub fn witness_support(&self) -> Result<Vec<FockOutcome>> {
        let top = self.top();
        let big = pow2(self.n) as usize;
        match self.construction {
            Construction::Interp => {
                if top.k != 1 || top.m != big {
                    return Err(Error::InvalidParameter(format!(
                        "interp top is ({},{}), not ({big},1)",
                        top.m, top.k
                    )));
                }
                (0..top.m)
                    .map(|j| FockOutcome::from_modes(top.m, vec![j]))
                    .collect()
            }
            Construction::Bleed => {
                let parked = top.k - 1;
                if parked + big > top.m - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "bleed top ({},{}) has fewer than 2^{} free working modes",
                        top.m, top.k, self.n
                    )));
                }
                (parked..parked + big)
                    .map(|w| {
                        let mut modes: Vec<usize> = (0..parked).collect();
                        modes.push(w);
                        FockOutcome::from_modes(top.m, modes)
                    })
                    .collect()
            }
        }
    }

    /// A top-level model whose pushforward equals `target` (a table over
    /// `{0,1}^n` by integer value). The photon that is not parked is routed
    /// with amplitude `sqrt(target(f(s)))` to the mode of each support
    /// outcome `s`.
    pub fn universal_witness(&self, target: &[f64]) -> Result<EbsbmSpec> {
        let top = self.top();
        if target.len() as u128 != pow2(self.n) {
            return Err(Error::LengthMismatch {
                expected: pow2(self.n) as usize,
                got: target.len(),
            });
        }
        let support = self.witness_support()?;
        let parked = top.k - 1;
        let mut column = vec![Complex64::new(0.0, 0.0); top.m - parked];
        for s in &support {
            let mode = *s.modes().last().expect("support outcomes hold a photon");
            let p = target[top.readout.value(s)? as usize];
            if p < 0.0 {
                return Err(Error::InvalidParameter(
                    "negative target probability".into(),
                ));
            }
            column[mode - parked] = Complex64::new(p.sqrt(), 0.0);
        }
        let norm: f64 = column.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        column.iter_mut().for_each(|c| *c /= norm);
        let base = match self.construction {
            Construction::Interp => {
                BsbmSpec::new(1, InterferometerMesh::with_first_column(&column)?)?
            }
            Construction::Bleed => {
                let v = ModeUnitary::with_first_column(&column)?;
                let mut full = CMatrix::identity(top.m, top.m);
                full.view_mut((parked, parked), (v.m(), v.m()))
                    .copy_from(v.matrix());
                BsbmSpec::fixed(top.k, ModeUnitary::new(full)?)?
            }
        };
        EbsbmSpec::new(base, top.readout.clone())
    }

    /// One line per level.
    pub fn describe(&self) -> String {
        let mut out = format!("construction = {}\nn = {}\n", self.construction, self.n);
        for (j, level) in self.levels.iter().enumerate() {
            out.push_str(&format!(
                "level {} m = {} k = {} count = {} readout = {}\n",
                j + 1,
                level.m,
                level.k,
                binomial(level.m, level.k),
                level.readout.kind()
            ));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

fn no_embedding(level: usize) -> Error {
    Error::InvalidParameter(format!("level {} embeds no smaller sampler", level + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckOutcome {
    Pass(String),
    Fail(String),
    /// A bound that is reported, not enforced.
    Note(String),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TowerCheck {
    pub name: &'static str,
    pub scope: String,
    pub outcome: CheckOutcome,
}

impl TowerCheck {
    pub fn failed(&self) -> bool {
        matches!(self.outcome, CheckOutcome::Fail(_))
    }
}

impl fmt::Display for TowerCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (tag, detail) = match &self.outcome {
            CheckOutcome::Pass(d) => ("PASS", d),
            CheckOutcome::Fail(d) => ("FAIL", d),
            CheckOutcome::Note(d) => ("NOTE", d),
            CheckOutcome::Skipped(d) => ("SKIP", d),
        };
        write!(f, "{tag} {} [{}] {detail}", self.name, self.scope)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random unitaries per embedded pair in the pushforward check.
    pub unitaries_per_pair: usize,
    /// Skip the pushforward check when `C(m,k) · 2^k` of the larger sampler
    /// exceeds this.
    pub pushforward_budget: u128,
    /// Random targets for the universality witness.
    pub targets: usize,
    /// Random outcomes checked on levels too large to enumerate.
    pub sampled_outcomes: usize,
    pub tv_tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            unitaries_per_pair: 10,
            pushforward_budget: 50_000_000,
            targets: 20,
            sampled_outcomes: 10_000,
            tv_tolerance: 1e-9,
        }
    }
}

struct Checks(Vec<TowerCheck>);

impl Checks {
    fn push(&mut self, name: &'static str, scope: String, outcome: CheckOutcome) {
        self.0.push(TowerCheck {
            name,
            scope,
            outcome,
        });
    }

    fn verdict(&mut self, name: &'static str, scope: String, ok: bool, detail: String) {
        let outcome = if ok {
            CheckOutcome::Pass(detail)
        } else {
            CheckOutcome::Fail(detail)
        };
        self.push(name, scope, outcome);
    }
}

fn level_name(j: usize) -> String {
    format!("level {}", j + 1)
}

/// Runs every decidable structural check on `tower`.
pub fn verify_tower(tower: &ReadoutTower, opts: &VerifyOptions) -> Result<Vec<TowerCheck>> {
    let mut checks = Checks(Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let cap = enumeration_cap();
    size_checks(tower, &mut checks);

    for j in 0..tower.levels.len() {
        let level = &tower.levels[j];
        let count = binomial(level.m, level.k);

        if count < pow2(tower.n) {
            checks.push(
                "surjectivity",
                level_name(j),
                CheckOutcome::Skipped(format!("C = {count} < 2^{}, map is injective", tower.n)),
            );
        } else if count <= cap {
            let mut seen = vec![false; pow2(tower.n) as usize];
            for s in enumerate_outcomes(level.m, level.k)? {
                seen[level.readout.value(&s)? as usize] = true;
            }
            let hit = seen.iter().filter(|&&b| b).count();
            checks.verdict(
                "surjectivity",
                level_name(j),
                hit == seen.len(),
                format!("{hit}/{} values hit by enumeration", seen.len()),
            );
        } else {
            let missing = BitString::all(tower.n)
                .map(|y| level.readout.preimage_count(&y))
                .collect::<Result<Vec<_>>>()?
                .iter()
                .filter(|&&c| c == 0)
                .count();
            checks.verdict(
                "surjectivity",
                level_name(j),
                missing == 0,
                format!("{missing} values without preimage by counting (C = {count} beyond enumeration cap)"),
            );
        }

        let Some((em, ek)) = tower.embedded_dims(j) else {
            continue;
        };
        let source = tower.embedded_readout(j)?;
        let scope = format!("({em},{ek}) -> {}", level_name(j));

        // compatibility f_j ∘ R = f_source, and strip ∘ R = id
        let source_count = binomial(em, ek);
        let check_one = |x: &FockOutcome| -> Result<bool> {
            let s = tower.embed_outcome(j, x)?;
            Ok(level.readout.value(&s)? == source.value(x)? && &tower.strip_outcome(j, &s)? == x)
        };
        if source_count <= cap {
            let mut bad = 0usize;
            for x in enumerate_outcomes(em, ek)? {
                if !check_one(&x)? {
                    bad += 1;
                }
            }
            checks.verdict(
                "compatibility",
                scope.clone(),
                bad == 0,
                format!("{bad} mismatches over all {source_count} outcomes"),
            );
        } else {
            let mut bad = 0usize;
            for _ in 0..opts.sampled_outcomes {
                let x = subset_unrank(em, ek, rng.random_range(0..source_count))?;
                if !check_one(&x)? {
                    bad += 1;
                }
            }
            checks.verdict(
                "compatibility",
                scope.clone(),
                bad == 0,
                format!(
                    "{bad} mismatches over {} sampled outcomes (C = {source_count} beyond enumeration cap)",
                    opts.sampled_outcomes
                ),
            );
        }

        embedded_image_checks(tower, j, &mut checks)?;
        pushforward_checks(tower, j, opts, &mut rng, &mut checks)?;
    }

    universality_checks(tower, opts, &mut rng, &mut checks)?;
    Ok(checks.0)
}

fn size_checks(tower: &ReadoutTower, checks: &mut Checks) {
    let n = tower.n;
    let big = pow2(n);
    for (j, level) in tower.levels.iter().enumerate() {
        let c = binomial(level.m, level.k);
        let scope = format!("{} ({},{})", level_name(j), level.m, level.k);
        match tower.construction {
            Construction::Bleed if j == 0 => checks.verdict(
                "size bounds",
                scope,
                big / 2 < c && c <= big,
                format!("2^{} < {c} <= 2^{n}", n - 1),
            ),
            Construction::Bleed => {
                checks.verdict(
                    "size bounds",
                    scope.clone(),
                    c >= big,
                    format!("{c} >= 2^{n}"),
                );
                if c > 2 * big {
                    checks.push(
                        "upper size bound",
                        scope,
                        CheckOutcome::Note(format!("{c} > 2^{}", n + 1)),
                    );
                }
            }
            Construction::Interp => {
                let e1 = binomial(level.m - 1, level.k - 1);
                checks.verdict(
                    "size bounds",
                    scope.clone(),
                    e1 <= big && big <= c,
                    format!("{e1} <= 2^{n} <= {c}"),
                );
                if c > 2 * big {
                    checks.push(
                        "upper size bound",
                        scope,
                        CheckOutcome::Note(format!("{c} > 2^{}", n + 1)),
                    );
                }
            }
        }
    }
    for j in 1..tower.levels.len() {
        let (prev, cur) = (&tower.levels[j - 1], &tower.levels[j]);
        let scope = format!("{} -> {}", level_name(j - 1), level_name(j));
        let (ok, detail) = match tower.construction {
            Construction::Bleed if j == 1 => {
                let minimal = binomial(cur.m - 1, cur.k) < big || cur.m - 1 == prev.m;
                (
                    cur.k == prev.k && cur.m > prev.m && minimal,
                    format!("k kept at {}, m = {} minimal with C >= 2^{n}", cur.k, cur.m),
                )
            }
            Construction::Bleed => (
                cur.k == prev.k + 1 && cur.m >= prev.m + 2,
                format!("k {} -> {}, m {} -> {}", prev.k, cur.k, prev.m, cur.m),
            ),
            Construction::Interp => (cur.k + 1 == prev.k, format!("k {} -> {}", prev.k, cur.k)),
        };
        checks.verdict("level ladder", scope, ok, detail);
    }
    let top = tower.top();
    let (ok, detail) = match tower.construction {
        Construction::Interp => (
            top.k == 1 && top.m as u128 == big,
            format!("top ({},{})", top.m, top.k),
        ),
        Construction::Bleed => (
            top.m - top.k >= big as usize,
            format!(
                "top ({},{}) leaves {} free modes",
                top.m,
                top.k,
                top.m - top.k
            ),
        ),
    };
    checks.verdict("top level", level_name(tower.levels.len() - 1), ok, detail);
}

/// Injectivity, inverse and membership on the image of the embedded hard
/// sampler (the base image for bleed towers, `E₁` for interp levels).
fn embedded_image_checks(tower: &ReadoutTower, j: usize, checks: &mut Checks) -> Result<()> {
    let level = &tower.levels[j];
    let (hm, hk) = match tower.construction {
        Construction::Bleed => (tower.levels[0].m, tower.levels[0].k),
        Construction::Interp => (level.m - 1, level.k - 1),
    };
    let count = binomial(hm, hk);
    if count > enumeration_cap() {
        checks.push(
            "embedded image",
            level_name(j),
            CheckOutcome::Skipped("enumeration_cap".into()),
        );
        return Ok(());
    }
    let mut images = HashSet::new();
    let mut bad_inverse = 0usize;
    for x in enumerate_outcomes(hm, hk)? {
        let s = match &level.readout {
            ReadoutMap::Bleed { chain, .. } => chain.lift_base(&x, j)?,
            _ => x.extend(0, 1),
        };
        let y = level.readout.apply(&s)?;
        if level.readout.invert_embedded(&y)?.as_ref() != Some(&s) {
            bad_inverse += 1;
        }
        images.insert(y);
    }
    let mut bad_membership = 0usize;
    for y in BitString::all(tower.n) {
        if level.readout.invert_embedded(&y)?.is_some() != images.contains(&y) {
            bad_membership += 1;
        }
    }
    checks.verdict(
        "embedded image",
        level_name(j),
        images.len() as u128 == count && bad_inverse == 0 && bad_membership == 0,
        format!(
            "{} distinct images of {count}, {bad_inverse} inverse and {bad_membership} membership errors",
            images.len()
        ),
    );
    Ok(())
}

fn pushforward_checks(
    tower: &ReadoutTower,
    j: usize,
    opts: &VerifyOptions,
    rng: &mut ChaCha8Rng,
    checks: &mut Checks,
) -> Result<()> {
    let level = &tower.levels[j];
    let (em, ek) = tower.embedded_dims(j).expect("caller checked");
    let scope = format!("({em},{ek}) -> {}", level_name(j));
    let cost = binomial(level.m, level.k).saturating_mul(pow2(level.k.min(100)));
    if cost > opts.pushforward_budget || binomial(level.m, level.k) > enumeration_cap() {
        checks.push(
            "pushforward of embedding",
            scope,
            CheckOutcome::Skipped(format!("C(m,k)*2^k = {cost} over budget")),
        );
        return Ok(());
    }
    let source = tower.embedded_readout(j)?;
    let mut worst_tv = 0.0f64;
    let mut worst_bare = 0.0f64;
    for _ in 0..opts.unitaries_per_pair {
        let u = haar_unitary(em, rng);
        let small = exact_distribution(&BsbmSpec::fixed(ek, u.clone())?)?;
        let large = exact_distribution(&BsbmSpec::fixed(level.k, tower.embed_unitary(j, &u)?)?)?;
        worst_tv = worst_tv.max(total_variation(
            &pushforward(&small, &source)?,
            &pushforward(&large, &level.readout)?,
        ));
        // bare identity q_large(R(x)) = q_small(x), no mass elsewhere
        let mut captured = 0.0;
        for (x, p) in small.outcomes.iter().zip(&small.probs) {
            let q = large.prob(&tower.embed_outcome(j, x)?);
            captured += q;
            worst_bare = worst_bare.max((p - q).abs());
        }
        worst_bare = worst_bare.max((1.0 - captured).abs());
    }
    checks.verdict(
        "pushforward of embedding",
        scope,
        worst_tv <= opts.tv_tolerance && worst_bare <= opts.tv_tolerance,
        format!(
            "max TV {worst_tv:.2e}, max bare deviation {worst_bare:.2e} over {} unitaries",
            opts.unitaries_per_pair
        ),
    );
    Ok(())
}

fn universality_checks(
    tower: &ReadoutTower,
    opts: &VerifyOptions,
    rng: &mut ChaCha8Rng,
    checks: &mut Checks,
) -> Result<()> {
    let scope = level_name(tower.levels.len() - 1);
    let support = match tower.witness_support() {
        Ok(s) => s,
        Err(e) => {
            checks.push("universality", scope, CheckOutcome::Fail(e.to_string()));
            return Ok(());
        }
    };
    let top = tower.top();
    let values: HashSet<u128> = support
        .iter()
        .map(|s| top.readout.value(s))
        .collect::<Result<_>>()?;
    checks.verdict(
        "witness support bijective",
        scope.clone(),
        values.len() == support.len() && support.len() as u128 == pow2(tower.n),
        format!(
            "{} support outcomes onto {} values",
            support.len(),
            values.len()
        ),
    );
    let mut worst_tv = 0.0f64;
    let mut worst_mass = 0.0f64;
    for _ in 0..opts.targets {
        let target = random_distribution(pow2(tower.n) as usize, rng);
        let spec = tower.universal_witness(&target)?;
        let (table, mass) = pushforward_on_support(&spec, &support)?;
        worst_tv = worst_tv.max(total_variation(&table, &target));
        worst_mass = worst_mass.max((1.0 - mass).abs());
    }
    checks.verdict(
        "universality",
        scope,
        worst_tv <= opts.tv_tolerance && worst_mass <= opts.tv_tolerance,
        format!(
            "max TV {worst_tv:.2e}, max missing mass {worst_mass:.2e} over {} targets",
            opts.targets
        ),
    );
    Ok(())
}

/// A random point of the simplex (normalized exponentials).
pub(crate) fn random_distribution<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interp_levels_for_four_bits() {
        let t = build_tower(
            4,
            Construction::Interp,
            TowerOptions {
                base: TowerBase::Photons(3),
                ..Default::default()
            },
        )
        .unwrap();
        let dims: Vec<_> = t.levels.iter().map(|l| (l.m, l.k)).collect();
        assert_eq!(dims, vec![(6, 3), (7, 2), (16, 1)]);
    }

    #[test]
    fn bleed_levels_for_four_bits() {
        let t = build_tower(
            4,
            Construction::Bleed,
            TowerOptions {
                base: TowerBase::Explicit { m: 6, k: 2 },
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((t.levels[1].m, t.levels[1].k), (7, 2));
        assert_eq!((t.levels[2].m, t.levels[2].k), (9, 3));
        assert_eq!((t.top().m, t.top().k), (29, 13));
        let err = build_tower(
            4,
            Construction::Bleed,
            TowerOptions {
                base: TowerBase::Explicit { m: 4, k: 2 },
                ..Default::default()
            },
        );
        assert!(matches!(err, Err(Error::InfeasibleBase(_))));
    }

    #[test]
    fn small_towers_verify() {
        for construction in [Construction::Bleed, Construction::Interp] {
            let t = build_tower(3, construction, TowerOptions::default()).unwrap();
            let opts = VerifyOptions {
                unitaries_per_pair: 2,
                targets: 3,
                ..Default::default()
            };
            for check in verify_tower(&t, &opts).unwrap() {
                assert!(!check.failed(), "{construction}: {check}");
            }
        }
    }
}
