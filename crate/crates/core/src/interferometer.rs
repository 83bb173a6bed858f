//! Linear-optical interferometers: a rectangular mesh of two-mode rotations
//! realizing any `U ∈ U(m)`, its analytic parameter Jacobian, Haar sampling
//! and the unitary embeddings used by readout towers.
//!
//! # Mesh layout
//!
//! The mesh has `m` layers. Layer `l` holds a two-mode block on every pair of
//! adjacent modes `(p, p + 1)` with `p ≡ l (mod 2)`, giving `m(m-1)/2` blocks
//! in total. Each block is
//!
//! ```text
//! T(θ, φ) = [ e^{iφ} cos θ   -sin θ ]
//!           [ e^{iφ} sin θ    cos θ ]
//! ```
//!
//! acting on rows `p, p+1` (outputs) and columns `p, p+1` (inputs). After the
//! last layer a diagonal phase layer `diag(e^{iψ_0}, …, e^{iψ_{m-1}})` is
//! applied, so `U = D · L_{m-1} ⋯ L_1 · L_0`.
//!
//! The flat parameter vector is layer-major: for each layer in order, for
//! each block in increasing `p`, the pair `(θ, φ)`; then the `m` output phases
//! `ψ`. Its length is `m²`. Column `i` of `U` is the output amplitude vector
//! of a photon injected in input mode `i`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Maximum tolerated `max |U†U − I|` for anything treated as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest entry of `|U†U − I|`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// A unitary on `m` modes, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    entries: CMatrix,
}

impl ModeUnitary {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "unitary must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let deviation = unitarity_deviation(&entries);
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(ModeUnitary { entries })
    }

    pub fn identity(m: usize) -> Self {
        ModeUnitary {
            entries: CMatrix::identity(m, m),
        }
    }

    /// Permutation sending input mode `i` to output mode `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let m = perm.len();
        let mut entries = CMatrix::zeros(m, m);
        for (i, &j) in perm.iter().enumerate() {
            if j >= m {
                return Err(Error::DimensionMismatch(format!(
                    "permutation target {j} out of range for {m} modes"
                )));
            }
            entries[(j, i)] = ONE;
        }
        ModeUnitary::new(entries)
    }

    /// A unitary whose first column is `column` (normalized to within 1e-12),
    /// completed by a Householder reflection.
    pub fn with_first_column(column: &[Complex64]) -> Result<Self> {
        let m = column.len();
        check_unit_vector(column)?;
        let phase = if column[0].norm() > 0.0 {
            column[0] / column[0].norm()
        } else {
            ONE
        };
        // H u = v for u = phase·e_0 since <u|v> = |v_0| is real
        let mut w: Vec<Complex64> = column.iter().map(|&c| -c).collect();
        w[0] += phase;
        let wn: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        let mut h = CMatrix::identity(m, m);
        if wn > 1e-30 {
            for r in 0..m {
                for c in 0..m {
                    h[(r, c)] -= w[r] * w[c].conj() * (2.0 / wn);
                }
            }
        }
        for r in 0..m {
            h[(r, 0)] *= phase;
        }
        ModeUnitary::new(h)
    }

    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub(crate) fn from_trusted(entries: CMatrix) -> Self {
        debug_assert!(unitarity_deviation(&entries) <= 1e-9);
        ModeUnitary { entries }
    }

    pub fn compose(&self, after: &ModeUnitary) -> Result<ModeUnitary> {
        if self.m() != after.m() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-mode and {}-mode unitaries",
                self.m(),
                after.m()
            )));
        }
        ModeUnitary::new(&after.entries * &self.entries)
    }
}

fn check_unit_vector(v: &[Complex64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::DimensionMismatch("empty column".into()));
    }
    let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNITARITY_TOLERANCE {
        return Err(Error::InvalidParameter(format!(
            "column must have unit norm, got {norm}"
        )));
    }
    Ok(())
}

/// A block position in the mesh: `layer` and upper mode `top`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSlot {
    pub layer: usize,
    pub top: usize,
}

/// Every block of an `m`-mode mesh in parameter order.
pub fn block_slots(m: usize) -> Vec<BlockSlot> {
    let mut slots = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for layer in 0..m {
        let mut top = layer % 2;
        while top + 1 < m {
            slots.push(BlockSlot { layer, top });
            top += 2;
        }
    }
    slots
}

/// The trainable rectangular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferometerMesh {
    m: usize,
    params: Vec<f64>,
}

impl InterferometerMesh {
    pub fn new(m: usize, params: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter(
                "mesh needs at least one mode".into(),
            ));
        }
        if params.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "{m}-mode mesh takes {} parameters, got {}",
                m * m,
                params.len()
            )));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite mesh parameter {bad}"
            )));
        }
        Ok(InterferometerMesh { m, params })
    }

    /// All-zero parameters; realizes the identity.
    pub fn identity(m: usize) -> Self {
        InterferometerMesh {
            m,
            params: vec![0.0; m * m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.params.len());
        self.params.copy_from_slice(params);
    }

    pub fn num_blocks(&self) -> usize {
        self.m * (self.m - 1) / 2
    }

    /// Parameter index of the first output phase.
    pub fn phase_offset(&self) -> usize {
        2 * self.num_blocks()
    }

    /// `(θ, φ)` of block `b` in parameter order.
    pub fn block(&self, b: usize) -> (f64, f64) {
        (self.params[2 * b], self.params[2 * b + 1])
    }

    pub fn output_phase(&self, mode: usize) -> f64 {
        self.params[self.phase_offset() + mode]
    }

    /// The realized unitary.
    pub fn unitary(&self) -> ModeUnitary {
        ModeUnitary::from_trusted(build_unitary_matrix(self))
    }

    /// A mesh whose realized unitary has `column` as its first column.
    ///
    /// Only the blocks on the diagonal `(l, l+1)` of layer `l` are used: they
    /// peel off the amplitude of mode `l` in hyperspherical coordinates and
    /// the output phases restore the complex arguments.
    pub fn with_first_column(column: &[Complex64]) -> Result<Self> {
        check_unit_vector(column)?;
        let m = column.len();
        let mut mesh = InterferometerMesh::identity(m);
        let slots = block_slots(m);
        let mut tail: f64 = column.iter().map(|c| c.norm_sqr()).sum::<f64>();
        for l in 0..m.saturating_sub(1) {
            let here = column[l].norm();
            tail = (tail - here * here).max(0.0);
            let b = slots
                .iter()
                .position(|s| s.layer == l && s.top == l)
                .expect("diagonal block exists in every layer");
            mesh.params[2 * b] = tail.sqrt().atan2(here);
        }
        let off = mesh.phase_offset();
        for (j, c) in column.iter().enumerate() {
            mesh.params[off + j] = c.arg();
        }
        Ok(mesh)
    }

    /// Decomposes `u` into mesh parameters (rectangular nulling scheme).
    pub fn from_unitary(u: &ModeUnitary) -> Result<Self> {
        decompose(u)
    }
}

fn block_matrix(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let e = Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    [[e * c, Complex64::from(-s)], [e * s, Complex64::from(c)]]
}

fn d_block_dtheta(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let e = Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    [[-e * s, Complex64::from(-c)], [e * c, Complex64::from(-s)]]
}

fn d_block_dphi(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let ie = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, phi);
    let (s, c) = theta.sin_cos();
    [[ie * c, ZERO], [ie * s, ZERO]]
}

/// `M ← T · M` on rows `p, p+1`.
fn apply_rows(mat: &mut CMatrix, p: usize, t: &[[Complex64; 2]; 2]) {
    for col in 0..mat.ncols() {
        let a = mat[(p, col)];
        let b = mat[(p + 1, col)];
        mat[(p, col)] = t[0][0] * a + t[0][1] * b;
        mat[(p + 1, col)] = t[1][0] * a + t[1][1] * b;
    }
}

/// `M ← M · T` on columns `p, p+1`.
fn apply_cols(mat: &mut CMatrix, p: usize, t: &[[Complex64; 2]; 2]) {
    for row in 0..mat.nrows() {
        let a = mat[(row, p)];
        let b = mat[(row, p + 1)];
        mat[(row, p)] = a * t[0][0] + b * t[1][0];
        mat[(row, p + 1)] = a * t[0][1] + b * t[1][1];
    }
}

fn layer_blocks(mesh: &InterferometerMesh) -> Vec<Vec<(usize, usize)>> {
    // per layer: (block index, top mode)
    let mut layers = vec![Vec::new(); mesh.m];
    for (b, slot) in block_slots(mesh.m).into_iter().enumerate() {
        layers[slot.layer].push((b, slot.top));
    }
    layers
}

fn build_unitary_matrix(mesh: &InterferometerMesh) -> CMatrix {
    let m = mesh.m;
    let mut u = CMatrix::identity(m, m);
    for layer in layer_blocks(mesh) {
        for (b, top) in layer {
            let (theta, phi) = mesh.block(b);
            apply_rows(&mut u, top, &block_matrix(theta, phi));
        }
    }
    for j in 0..m {
        let e = Complex64::from_polar(1.0, mesh.output_phase(j));
        for col in 0..m {
            u[(j, col)] *= e;
        }
    }
    u
}

/// Realized unitary of a mesh, in the documented layer order.
pub fn build_unitary(mesh: &InterferometerMesh) -> ModeUnitary {
    mesh.unitary()
}

/// `∂U/∂θ_t` for every parameter `t`, in parameter order.
pub fn unitary_jacobian(mesh: &InterferometerMesh) -> Vec<CMatrix> {
    let m = mesh.m;
    let layers = layer_blocks(mesh);

    // prefix[l] = L_{l-1} ⋯ L_0
    let mut prefix = Vec::with_capacity(m + 1);
    let mut acc = CMatrix::identity(m, m);
    prefix.push(acc.clone());
    for layer in &layers {
        for &(b, top) in layer {
            let (theta, phi) = mesh.block(b);
            apply_rows(&mut acc, top, &block_matrix(theta, phi));
        }
        prefix.push(acc.clone());
    }
    let u_mat = {
        let mut u = acc;
        for j in 0..m {
            let e = Complex64::from_polar(1.0, mesh.output_phase(j));
            for col in 0..m {
                u[(j, col)] *= e;
            }
        }
        u
    };

    // suffix[l] = D · L_{m-1} ⋯ L_{l+1}
    let mut suffix = vec![CMatrix::zeros(0, 0); m];
    let mut acc = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        m,
        (0..m).map(|j| Complex64::from_polar(1.0, mesh.output_phase(j))),
    ));
    for l in (0..m).rev() {
        suffix[l] = acc.clone();
        for &(b, top) in &layers[l] {
            let (theta, phi) = mesh.block(b);
            apply_cols(&mut acc, top, &block_matrix(theta, phi));
        }
    }

    let mut jac = vec![CMatrix::zeros(m, m); mesh.num_params()];
    for (b, slot) in block_slots(m).into_iter().enumerate() {
        let (theta, phi) = mesh.block(b);
        let s = &suffix[slot.layer];
        let pre = &prefix[slot.layer];
        for (offset, dt) in [d_block_dtheta(theta, phi), d_block_dphi(theta, phi)]
            .iter()
            .enumerate()
        {
            let out = &mut jac[2 * b + offset];
            let p = slot.top;
            for r in 0..m {
                // row r of S[:, p..p+2] · dT
                let left0 = s[(r, p)] * dt[0][0] + s[(r, p + 1)] * dt[1][0];
                let left1 = s[(r, p)] * dt[0][1] + s[(r, p + 1)] * dt[1][1];
                for c in 0..m {
                    out[(r, c)] = left0 * pre[(p, c)] + left1 * pre[(p + 1, c)];
                }
            }
        }
    }
    let off = mesh.phase_offset();
    let i = Complex64::new(0.0, 1.0);
    for j in 0..m {
        let out = &mut jac[off + j];
        for c in 0..m {
            out[(j, c)] = i * u_mat[(j, c)];
        }
    }
    jac
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal absorbed (Gram–Schmidt yields a positive diagonal).
pub fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ModeUnitary {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<Vec<Complex64>> = (0..m)
        .map(|_| {
            (0..m)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * scale, im * scale)
                })
                .collect()
        })
        .collect();
    for j in 0..m {
        // two passes of modified Gram–Schmidt keep the result unitary to ~1e-15
        for _ in 0..2 {
            for i in 0..j {
                let proj: Complex64 = (0..m).map(|r| cols[i][r].conj() * cols[j][r]).sum();
                for r in 0..m {
                    let v = cols[i][r];
                    cols[j][r] -= proj * v;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in cols[j].iter_mut() {
            *c /= norm;
        }
    }
    ModeUnitary::from_trusted(CMatrix::from_fn(m, m, |r, c| cols[c][r]))
}

/// Mesh realizing a Haar-random unitary, deterministic in `seed`.
pub fn haar_random(m: usize, seed: u64) -> InterferometerMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(m, &mut rng);
    decompose(&u).expect("Haar unitary decomposes")
}

fn decompose(u: &ModeUnitary) -> Result<InterferometerMesh> {
    let m = u.m();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "mesh needs at least one mode".into(),
        ));
    }
    let mut t = u.matrix().clone();
    let mut rights: Vec<(usize, f64, f64)> = Vec::new();
    let mut lefts: Vec<(usize, f64, f64)> = Vec::new();

    for i in 0..m.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                // null T[m-1-j, i-j] with T^{-1} from the right on columns (p, p+1)
                let row = m - 1 - j;
                let p = i - j;
                let a = t[(row, p)];
                let b = t[(row, p + 1)];
                let theta = a.norm().atan2(b.norm());
                let phi = if a.norm() > 0.0 && b.norm() > 0.0 {
                    a.arg() - b.arg()
                } else {
                    0.0
                };
                let fwd = block_matrix(theta, phi);
                let inv = [
                    [fwd[0][0].conj(), fwd[1][0].conj()],
                    [fwd[0][1].conj(), fwd[1][1].conj()],
                ];
                apply_cols(&mut t, p, &inv);
                rights.push((p, theta, phi));
            }
        } else {
            for j in 1..=i + 1 {
                // null T[p+1, j-1] with T from the left on rows (p, p+1)
                let p = m + j - i - 3;
                let col = j - 1;
                let a = t[(p, col)];
                let b = t[(p + 1, col)];
                let theta = b.norm().atan2(a.norm());
                let phi = if a.norm() > 0.0 && b.norm() > 0.0 {
                    b.arg() - a.arg() + std::f64::consts::PI
                } else {
                    0.0
                };
                apply_rows(&mut t, p, &block_matrix(theta, phi));
                lefts.push((p, theta, phi));
            }
        }
    }

    // U = L_1^{-1} ⋯ L_K^{-1} D R_r ⋯ R_1; push each L^{-1} through D
    let mut diag: Vec<Complex64> = (0..m).map(|j| t[(j, j)]).collect();
    let mut ops = rights;
    for &(p, theta, phi) in lefts.iter().rev() {
        let (d1, d2) = (diag[p], diag[p + 1]);
        let new_phi = d1.arg() - d2.arg() + std::f64::consts::PI;
        diag[p] = -Complex64::from_polar(1.0, -phi) * d2;
        ops.push((p, theta, new_phi));
    }

    // pack the ordered product into the rectangular layer grid
    let slots = block_slots(m);
    let mut params = vec![0.0; m * m];
    let mut avail = vec![0usize; m];
    for (p, theta, phi) in ops {
        let mut layer = avail[p].max(avail[p + 1]);
        if layer % 2 != p % 2 {
            layer += 1;
        }
        let b = slots
            .iter()
            .position(|s| s.layer == layer && s.top == p)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "decomposition does not fit the rectangular mesh (layer {layer}, mode {p})"
                ))
            })?;
        params[2 * b] = theta;
        params[2 * b + 1] = phi;
        avail[p] = layer + 1;
        avail[p + 1] = layer + 1;
    }
    let off = m * (m - 1);
    for (j, d) in diag.iter().enumerate() {
        params[off + j] = d.arg();
    }
    InterferometerMesh::new(m, params)
}

/// `U ⊕ I_{m_new − m}`.
pub fn pad_embed(u: &ModeUnitary, m_new: usize) -> Result<ModeUnitary> {
    let m = u.m();
    if m_new < m {
        return Err(Error::ShrinkNotAllowed { from: m, to: m_new });
    }
    let mut out = CMatrix::identity(m_new, m_new);
    out.view_mut((0, 0), (m, m)).copy_from(u.matrix());
    Ok(ModeUnitary::from_trusted(out))
}

/// Embeds a `k`-photon sampler `U` on `m` modes into `m_new` modes with
/// `k_new = k + 1` photons. Input photon `k_new − 1` is routed straight to the
/// last output mode, inputs `0..k` feed `U`, and the remaining inputs are
/// shifted onto `U`'s vacuum inputs and the fresh modes. An outcome `x` of the
/// small sampler becomes `x ‖ 0^{m_new − m − 1} ‖ 1`.
pub fn bleed_embed(u: &ModeUnitary, m_new: usize, k_new: usize) -> Result<ModeUnitary> {
    let m = u.m();
    if m_new < m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "bleed embedding of {m} modes needs at least {} modes, got {m_new}",
            m + 1
        )));
    }
    if k_new == 0 || k_new > m + 1 {
        return Err(Error::DimensionMismatch(format!(
            "cannot embed {} photons of a {m}-mode sampler",
            k_new.saturating_sub(1)
        )));
    }
    let k = k_new - 1;
    let padded = pad_embed(u, m_new)?;
    let internal = |c: usize| -> usize {
        if c < k {
            c
        } else if c == k {
            m_new - 1
        } else {
            c - 1
        }
    };
    let src = padded.matrix();
    let out = CMatrix::from_fn(m_new, m_new, |r, c| src[(r, internal(c))]);
    Ok(ModeUnitary::from_trusted(out))
}
