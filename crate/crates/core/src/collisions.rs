//! Pairwise spin-exchange collisions.
//!
//! Single-atom states live in electron{↑,↓} ⊗ nuclear{I, I−1, I−2}: six
//! dimensions, enough to hold both the Δm = 1 stored state and the Δm = 2
//! comparison state. A collision applies U(χ) = P_T + e^{iχ}P_S to the pair,
//! where P_S projects the two valence electrons onto their singlet and acts
//! as identity on both nuclei.
//!
//! The ensemble Monte Carlo carries each atom as a 6×6 density operator and
//! closes the hierarchy by molecular chaos: after every collision the pair
//! state is replaced by the product of its reduced states. Between
//! collisions the ground hyperfine splitting removes any coherence between
//! the F = I ± ½ manifolds; this is applied as a block projection in the
//! coupled basis after each collision.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector, SMatrix};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fit::{fit_lifetime, LifetimeFit};
use crate::params::CesiumParams;
use crate::{Error, Result, C64};

pub const SINGLE_DIM: usize = 6;
pub const PAIR_DIM: usize = SINGLE_DIM * SINGLE_DIM;

pub const UP: usize = 0;
pub const DOWN: usize = 1;

/// Index into the single-atom basis. `nuclear` counts down from the
/// stretched level: 0 → m_I = I, 1 → I − 1, 2 → I − 2.
pub const fn basis_index(electron: usize, nuclear: usize) -> usize {
    electron * 3 + nuclear
}

fn split_index(k: usize) -> (usize, usize) {
    (k / 3, k % 3)
}

pub type DensityMatrix = SMatrix<C64, SINGLE_DIM, SINGLE_DIM>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleAtomSpinState {
    pub amplitudes: [C64; SINGLE_DIM],
}

impl SingleAtomSpinState {
    pub fn new(amplitudes: [C64; SINGLE_DIM]) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::param("amplitudes", "state has zero or non-finite norm"));
        }
        Ok(Self {
            amplitudes: amplitudes.map(|a| a / norm),
        })
    }

    pub fn amp(&self, electron: usize, nuclear: usize) -> C64 {
        self.amplitudes[basis_index(electron, nuclear)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn density(&self) -> DensityMatrix {
        let v = nalgebra::SVector::<C64, SINGLE_DIM>::from_column_slice(&self.amplitudes);
        v * v.adjoint()
    }
}

/// Amplitudes over the 36-dim product basis, index `6·a + b` for atom
/// states `a`, `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpinState {
    pub amplitudes: DVector<C64>,
}

impl PairSpinState {
    pub fn product(a: &SingleAtomSpinState, b: &SingleAtomSpinState) -> Self {
        let amplitudes = DVector::from_fn(PAIR_DIM, |k, _| {
            a.amplitudes[k / SINGLE_DIM] * b.amplitudes[k % SINGLE_DIM]
        });
        Self { amplitudes }
    }

    pub fn from_amplitudes(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != PAIR_DIM {
            return Err(Error::param("amplitudes", format!("expected {PAIR_DIM} entries")));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) {
            return Err(Error::param("amplitudes", "zero norm"));
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
        })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Number of Schmidt coefficients above `tol`.
    pub fn schmidt_rank(&self, tol: f64) -> usize {
        let m = DMatrix::from_fn(SINGLE_DIM, SINGLE_DIM, |a, b| self.amplitudes[a * SINGLE_DIM + b]);
        m.singular_values().iter().filter(|s| **s > tol).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollisionEvent {
    pub chi: f64,
    pub i: usize,
    pub j: usize,
    pub time: f64,
}

/// |↑, I⟩ + √2η e^{iφ}(q|↑, I−1⟩ + p|↓, I⟩), normalised.
pub fn stored_state(eta_a: f64, phi_a: f64, params: &CesiumParams) -> Result<SingleAtomSpinState> {
    if !(eta_a >= 0.0) {
        return Err(Error::param("eta_a", format!("must be >= 0, got {eta_a}")));
    }
    let c = C64::from_polar(SQRT_2 * eta_a, phi_a);
    let mut amps = [C64::default(); SINGLE_DIM];
    amps[basis_index(UP, 0)] = C64::new(1.0, 0.0);
    amps[basis_index(UP, 1)] = c * params.q_coeff;
    amps[basis_index(DOWN, 0)] = c * params.p_coeff;
    SingleAtomSpinState::new(amps)
}

/// Clebsch-Gordan weights of |F = I + ½, m⟩ on |↑, m − ½⟩ and |↓, m + ½⟩.
pub fn upper_manifold_weights(nuclear_spin: f64, m: f64) -> (f64, f64) {
    let d = 2.0 * nuclear_spin + 1.0;
    (
        ((nuclear_spin + m + 0.5) / d).sqrt(),
        ((nuclear_spin - m + 0.5) / d).sqrt(),
    )
}

/// |F, F⟩ + √2η e^{iφ}|F, F − 2⟩ with F = I + ½, normalised.
pub fn delta_m2_state(eta: f64, phi: f64, params: &CesiumParams) -> Result<SingleAtomSpinState> {
    if !(eta >= 0.0) {
        return Err(Error::param("eta", format!("must be >= 0, got {eta}")));
    }
    let c = C64::from_polar(SQRT_2 * eta, phi);
    let (up, down) = upper_manifold_weights(params.nuclear_spin, params.nuclear_spin - 1.5);
    let mut amps = [C64::default(); SINGLE_DIM];
    amps[basis_index(UP, 0)] = C64::new(1.0, 0.0);
    amps[basis_index(UP, 2)] = c * up;
    amps[basis_index(DOWN, 1)] = c * down;
    SingleAtomSpinState::new(amps)
}

/// Electron-exchange permutation on the pair basis.
fn electron_swap(k: usize) -> usize {
    let (a, b) = (k / SINGLE_DIM, k % SINGLE_DIM);
    let ((ea, na), (eb, nb)) = (split_index(a), split_index(b));
    basis_index(eb, na) * SINGLE_DIM + basis_index(ea, nb)
}

/// P_S on the pair space: electron singlet ⊗ identity on both nuclei.
pub fn singlet_projector_pair() -> DMatrix<f64> {
    // P_S = (1 − S_e)/2 with S_e the electron exchange
    DMatrix::from_fn(PAIR_DIM, PAIR_DIM, |x, y| {
        let same = if x == y { 0.5 } else { 0.0 };
        let swapped = if electron_swap(y) == x { 0.5 } else { 0.0 };
        same - swapped
    })
}

pub fn triplet_projector_pair() -> DMatrix<f64> {
    DMatrix::identity(PAIR_DIM, PAIR_DIM) - singlet_projector_pair()
}

/// ⟨ψ_i ψ_j|P_S|ψ_i ψ_j⟩.
pub fn singlet_fraction(psi_i: &SingleAtomSpinState, psi_j: &SingleAtomSpinState) -> f64 {
    let pair = PairSpinState::product(psi_i, psi_j);
    let ps = singlet_projector_pair().map(|x| C64::new(x, 0.0));
    let projected = ps * &pair.amplitudes;
    pair.amplitudes.dotc(&projected).re
}

/// (P_T + e^{iχ}P_S)|ψ⟩.
pub fn apply_collision(pair: &PairSpinState, chi: f64) -> PairSpinState {
    let (c1, c2) = collision_weights(chi);
    let amplitudes = DVector::from_fn(PAIR_DIM, |x, _| {
        c1 * pair.amplitudes[x] + c2 * pair.amplitudes[electron_swap(x)]
    });
    PairSpinState { amplitudes }
}

/// U(χ) = c₁·1 + c₂·S_e with c₁ = (1 + e^{iχ})/2, c₂ = (1 − e^{iχ})/2.
fn collision_weights(chi: f64) -> (C64, C64) {
    let e = C64::from_polar(1.0, chi);
    ((1.0 + e) * 0.5, (1.0 - e) * 0.5)
}

/// Applies U(χ) to ρ_i ⊗ ρ_j and returns the two reduced states.
pub fn collide_densities(rho_i: &DensityMatrix, rho_j: &DensityMatrix, chi: f64) -> (DensityMatrix, DensityMatrix) {
    let (c1, c2) = collision_weights(chi);
    let w11 = c1.norm_sqr();
    let w12 = c1 * c2.conj();
    let w21 = c2 * c1.conj();
    let w22 = c2.norm_sqr();

    let joint = |x: usize, y: usize| -> C64 {
        rho_i[(x / SINGLE_DIM, y / SINGLE_DIM)] * rho_j[(x % SINGLE_DIM, y % SINGLE_DIM)]
    };
    let evolved = |x: usize, y: usize| -> C64 {
        let (sx, sy) = (electron_swap(x), electron_swap(y));
        joint(x, y) * w11 + joint(x, sy) * w12 + joint(sx, y) * w21 + joint(sx, sy) * w22
    };

    let mut out_i = DensityMatrix::zeros();
    let mut out_j = DensityMatrix::zeros();
    for a in 0..SINGLE_DIM {
        for a2 in 0..SINGLE_DIM {
            for b in 0..SINGLE_DIM {
                out_i[(a, a2)] += evolved(a * SINGLE_DIM + b, a2 * SINGLE_DIM + b);
                out_j[(a, a2)] += evolved(b * SINGLE_DIM + a, b * SINGLE_DIM + a2);
            }
        }
    }
    (out_i, out_j)
}

/// The coupled |F, m⟩ basis of the truncated space, as rows of an
/// orthogonal matrix, with its manifold blocks.
#[derive(Debug, Clone)]
pub struct HyperfineBasis {
    /// Rows: |F+,F+⟩, |F+,F+−1⟩, |F+,F+−2⟩, |F−,F−⟩, |F−,F−−1⟩, |↓, I−2⟩.
    pub rows: SMatrix<f64, SINGLE_DIM, SINGLE_DIM>,
}

impl HyperfineBasis {
    pub fn new(params: &CesiumParams) -> Self {
        let i = params.nuclear_spin;
        let (q, p) = (params.q_coeff, params.p_coeff);
        let (u2, d2) = upper_manifold_weights(i, i - 1.5);
        let mut rows = SMatrix::<f64, SINGLE_DIM, SINGLE_DIM>::zeros();
        rows[(0, basis_index(UP, 0))] = 1.0;
        rows[(1, basis_index(UP, 1))] = q;
        rows[(1, basis_index(DOWN, 0))] = p;
        rows[(2, basis_index(UP, 2))] = u2;
        rows[(2, basis_index(DOWN, 1))] = d2;
        rows[(3, basis_index(UP, 1))] = p;
        rows[(3, basis_index(DOWN, 0))] = -q;
        rows[(4, basis_index(UP, 2))] = d2;
        rows[(4, basis_index(DOWN, 1))] = -u2;
        rows[(5, basis_index(DOWN, 2))] = 1.0;
        Self { rows }
    }

    fn block(k: usize) -> usize {
        match k {
            0..=2 => 0,
            3 | 4 => 1,
            _ => 2,
        }
    }

    /// Upper-manifold ket with m = F − `k`, as a vector in the product basis.
    pub fn upper(&self, k: usize) -> [f64; SINGLE_DIM] {
        std::array::from_fn(|c| self.rows[(k, c)])
    }

    /// Removes coherences between different F manifolds.
    pub fn dephase(&self, rho: &DensityMatrix) -> DensityMatrix {
        let w = self.rows.map(|x| C64::new(x, 0.0));
        let mut coupled = w * rho * w.transpose();
        for r in 0..SINGLE_DIM {
            for c in 0..SINGLE_DIM {
                if Self::block(r) != Self::block(c) {
                    coupled[(r, c)] = C64::default();
                }
            }
        }
        w.transpose() * coupled * w
    }

    /// ⟨F, F|ρ|F, F − k⟩ in the upper manifold.
    pub fn coherence(&self, rho: &DensityMatrix, k: usize) -> C64 {
        let top = self.upper(0);
        let other = self.upper(k);
        let mut acc = C64::default();
        for r in 0..SINGLE_DIM {
            for c in 0..SINGLE_DIM {
                if top[r] != 0.0 && other[c] != 0.0 {
                    acc += rho[(r, c)] * top[r] * other[c];
                }
            }
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Orientation coherence between adjacent Zeeman sublevels.
    #[serde(rename = "dm1")]
    DeltaM1,
    /// Zeeman coherence two sublevels apart.
    #[serde(rename = "dm2")]
    DeltaM2,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::DeltaM1 => "dm1",
            Scheme::DeltaM2 => "dm2",
        }
    }

    fn offset(&self) -> usize {
        match self {
            Scheme::DeltaM1 => 1,
            Scheme::DeltaM2 => 2,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dm1" | "DeltaM1" => Ok(Scheme::DeltaM1),
            "dm2" | "DeltaM2" => Ok(Scheme::DeltaM2),
            other => Err(Error::param(
                "scheme",
                format!("unknown scheme `{other}` (expected dm1 or dm2)"),
            )),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub scheme: Scheme,
    /// Per-atom collision rate (1/s).
    pub r_se: f64,
    pub duration: f64,
    pub n_atoms: usize,
    pub eta: f64,
    pub seed: u64,
    /// Trace samples, uniformly spaced over [0, duration].
    pub n_samples: usize,
    /// Independent ensembles averaged together; trial k uses RNG stream k.
    pub trials: usize,
    /// Samples below this fraction of the initial coherence are left out of
    /// the lifetime fit.
    pub fit_floor: f64,
}

impl McConfig {
    pub fn new(scheme: Scheme, r_se: f64, duration: f64, n_atoms: usize, eta: f64, seed: u64) -> Self {
        Self {
            scheme,
            r_se,
            duration,
            n_atoms,
            eta,
            seed,
            n_samples: 101,
            trials: 1,
            fit_floor: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_atoms < 2 {
            return Err(Error::param(
                "n_atoms",
                format!("need at least 2, got {}", self.n_atoms),
            ));
        }
        if !(self.r_se > 0.0 && self.r_se.is_finite()) {
            return Err(Error::param("r_se", format!("must be > 0, got {}", self.r_se)));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::param("duration", format!("must be > 0, got {}", self.duration)));
        }
        if !(self.eta > 0.0 && self.eta <= 0.1) {
            return Err(Error::param("eta", format!("must lie in (0, 0.1], got {}", self.eta)));
        }
        if self.n_samples < 3 {
            return Err(Error::param("n_samples", "need at least 3 samples"));
        }
        if self.trials == 0 {
            return Err(Error::param("trials", "need at least one trial"));
        }
        Ok(())
    }
}

/// Poisson schedule of pair collisions: global rate n·R/2, uniform distinct
/// partners, χ uniform on [0, 2π).
pub struct CollisionScheduler {
    rng: ChaCha8Rng,
    n_atoms: usize,
    pair_rate: f64,
    time: f64,
}

impl CollisionScheduler {
    pub fn new(seed: u64, stream: u64, n_atoms: usize, r_se: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            n_atoms,
            pair_rate: n_atoms as f64 * r_se / 2.0,
            time: 0.0,
        }
    }
}

impl Iterator for CollisionScheduler {
    type Item = CollisionEvent;

    fn next(&mut self) -> Option<CollisionEvent> {
        let wait: f64 = Exp1.sample(&mut self.rng);
        self.time += wait / self.pair_rate;
        let i = self.rng.random_range(0..self.n_atoms);
        let mut j = self.rng.random_range(0..self.n_atoms - 1);
        if j >= i {
            j += 1;
        }
        let chi = self.rng.random_range(0.0..2.0 * PI);
        Some(CollisionEvent {
            chi,
            i,
            j,
            time: self.time,
        })
    }
}

#[derive(Debug)]
pub struct McOutcome {
    /// (t, |ensemble-mean coherence|).
    pub trace: Vec<(f64, f64)>,
    pub fit: std::result::Result<LifetimeFit, Error>,
    pub collisions: u64,
}

impl McOutcome {
    pub fn decay_rate(&self) -> Option<f64> {
        self.fit.as_ref().ok().map(|f| f.rate)
    }
}

fn hermitize_unit_trace(rho: &DensityMatrix) -> DensityMatrix {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = h.trace().re;
    h / C64::new(tr, 0.0)
}

fn run_trial(cfg: &McConfig, params: &CesiumParams, basis: &HyperfineBasis, stream: u64) -> Result<(Vec<C64>, u64)> {
    let initial = match cfg.scheme {
        Scheme::DeltaM1 => stored_state(cfg.eta, 0.0, params)?,
        Scheme::DeltaM2 => delta_m2_state(cfg.eta, 0.0, params)?,
    };
    let mut atoms = vec![initial.density(); cfg.n_atoms];
    let offset = cfg.scheme.offset();
    let mean_coherence =
        |atoms: &[DensityMatrix]| atoms.iter().map(|r| basis.coherence(r, offset)).sum::<C64>() / cfg.n_atoms as f64;

    let times = sample_times(cfg);
    let mut samples = Vec::with_capacity(times.len());
    let mut next = 0;
    let mut count = 0u64;
    for ev in CollisionScheduler::new(cfg.seed, stream, cfg.n_atoms, cfg.r_se) {
        while next < times.len() && times[next] < ev.time {
            samples.push(mean_coherence(&atoms));
            next += 1;
        }
        if next == times.len() {
            break;
        }
        let (a, b) = collide_densities(&atoms[ev.i], &atoms[ev.j], ev.chi);
        atoms[ev.i] = basis.dephase(&hermitize_unit_trace(&a));
        atoms[ev.j] = basis.dephase(&hermitize_unit_trace(&b));
        count += 1;
    }
    Ok((samples, count))
}

fn sample_times(cfg: &McConfig) -> Vec<f64> {
    (0..cfg.n_samples)
        .map(|k| cfg.duration * k as f64 / (cfg.n_samples - 1) as f64)
        .collect()
}

/// Ensemble Monte Carlo of the target coherence under spin-exchange
/// collisions, followed by a single-exponential fit of its magnitude.
///
/// Output is a pure function of `(cfg, params)`; trials run in parallel and
/// are combined in trial order.
pub fn mc_coherence_decay(cfg: &McConfig, params: &CesiumParams) -> Result<McOutcome> {
    cfg.validate()?;
    params.validate()?;
    let basis = HyperfineBasis::new(params);
    let runs: Vec<(Vec<C64>, u64)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|k| run_trial(cfg, params, &basis, k))
        .collect::<Result<_>>()?;

    let times = sample_times(cfg);
    let mut mean = vec![C64::default(); times.len()];
    let mut collisions = 0;
    for (samples, count) in &runs {
        for (m, s) in mean.iter_mut().zip(samples) {
            *m += s / cfg.trials as f64;
        }
        collisions += count;
    }
    let trace: Vec<(f64, f64)> = times.iter().zip(&mean).map(|(t, c)| (*t, c.norm())).collect();

    let floor = cfg.fit_floor * trace[0].1;
    let usable: Vec<(f64, f64)> = trace.iter().copied().filter(|s| s.1 > floor).collect();
    let fit = fit_lifetime(&usable);
    Ok(McOutcome { trace, fit, collisions })
}

/// Sparse real operator stored by columns: `cols[y]` lists (x, value) for
/// the nonzero entries of column y.
#[derive(Debug, Clone)]
struct SparseOp {
    cols: Vec<Vec<(usize, f64)>>,
}

impl SparseOp {
    fn apply_col(&self, input: &[(usize, f64)], acc: &mut [f64], touched: &mut Vec<usize>, sign: f64) {
        for &(z, v) in input {
            for &(x, w) in &self.cols[z] {
                if acc[x] == 0.0 {
                    touched.push(x);
                }
                acc[x] += sign * v * w;
            }
        }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); v.len()];
        for (y, col) in self.cols.iter().enumerate() {
            if v[y] == C64::default() {
                continue;
            }
            for &(x, w) in col {
                out[x] += v[y] * w;
            }
        }
        out
    }
}

/// Frobenius norm of [A, B].
fn commutator_norm(a: &SparseOp, b: &SparseOp) -> f64 {
    let dim = a.cols.len();
    let mut acc = vec![0.0; dim];
    let mut touched = Vec::new();
    let mut total = 0.0;
    for y in 0..dim {
        a.apply_col(&b.cols[y], &mut acc, &mut touched, 1.0);
        b.apply_col(&a.cols[y], &mut acc, &mut touched, -1.0);
        for &x in &touched {
            total += acc[x] * acc[x];
            acc[x] = 0.0;
        }
        touched.clear();
    }
    total.sqrt()
}

struct ManyAtomBasis {
    n: usize,
}

impl ManyAtomBasis {
    fn dim(&self) -> usize {
        SINGLE_DIM.pow(self.n as u32)
    }

    fn digit(&self, x: usize, atom: usize) -> usize {
        (x / SINGLE_DIM.pow((self.n - 1 - atom) as u32)) % SINGLE_DIM
    }

    fn with_digit(&self, x: usize, atom: usize, d: usize) -> usize {
        let place = SINGLE_DIM.pow((self.n - 1 - atom) as u32);
        x - self.digit(x, atom) * place + d * place
    }

    /// Electron singlet (`singlet = true`) or triplet projector on atoms i, j.
    fn pair_projector(&self, i: usize, j: usize, singlet: bool) -> SparseOp {
        let cols = (0..self.dim())
            .map(|y| {
                let (ei, ni) = split_index(self.digit(y, i));
                let (ej, nj) = split_index(self.digit(y, j));
                if ei == ej {
                    return if singlet { vec![] } else { vec![(y, 1.0)] };
                }
                let swapped = self.with_digit(self.with_digit(y, i, basis_index(ej, ni)), j, basis_index(ei, nj));
                let off = if singlet { -0.5 } else { 0.5 };
                vec![(y, 0.5), (swapped, off)]
            })
            .collect();
        SparseOp { cols }
    }

    /// F₋ = (1/N) Σ_k (s₋ + i₋) on atom k.
    fn collective_lowering(&self, nuclear_spin: f64) -> SparseOp {
        let inv_n = 1.0 / self.n as f64;
        let cols = (0..self.dim())
            .map(|y| {
                let mut col = Vec::new();
                for k in 0..self.n {
                    let (e, nuc) = split_index(self.digit(y, k));
                    if e == UP {
                        col.push((self.with_digit(y, k, basis_index(DOWN, nuc)), inv_n));
                    }
                    if nuc < 2 {
                        let m = nuclear_spin - nuc as f64;
                        let w = (nuclear_spin * (nuclear_spin + 1.0) - m * (m - 1.0)).sqrt();
                        col.push((self.with_digit(y, k, basis_index(e, nuc + 1)), w * inv_n));
                    }
                }
                col
            })
            .collect();
        SparseOp { cols }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairTripletCheck {
    pub i: usize,
    pub j: usize,
    pub commutator_norm: f64,
    pub singlet_expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripletReport {
    pub n_atoms: usize,
    pub pairs: Vec<PairTripletCheck>,
}

impl TripletReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.pairs
            .iter()
            .all(|p| p.commutator_norm <= tol && p.singlet_expectation.abs() <= tol)
    }
}

/// Builds |R⟩ = (α + βF₋)|G⟩ on N stretched atoms and checks, for every pair,
/// that P_T commutes with F₋ and that |R⟩ has no singlet component.
pub fn collective_triplet_check(
    n_atoms: usize,
    qubit_alpha: C64,
    qubit_beta: C64,
    params: &CesiumParams,
) -> Result<TripletReport> {
    if !(2..=4).contains(&n_atoms) {
        return Err(Error::param("n_atoms", format!("must be 2, 3 or 4, got {n_atoms}")));
    }
    let norm = qubit_alpha.norm_sqr() + qubit_beta.norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::param("qubit", format!("|α|² + |β|² = {norm}, expected 1")));
    }
    let basis = ManyAtomBasis { n: n_atoms };
    let lowering = basis.collective_lowering(params.nuclear_spin);

    let mut ground = vec![C64::default(); basis.dim()];
    ground[0] = C64::new(1.0, 0.0);
    let lowered = lowering.apply(&ground);
    let mut r: Vec<C64> = ground
        .iter()
        .zip(&lowered)
        .map(|(g, l)| qubit_alpha * g + qubit_beta * l)
        .collect();
    let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    r.iter_mut().for_each(|z| *z /= rn);

    let mut pairs = Vec::new();
    for i in 0..n_atoms {
        for j in (i + 1)..n_atoms {
            let pt = basis.pair_projector(i, j, false);
            let ps = basis.pair_projector(i, j, true);
            let projected = ps.apply(&r);
            let singlet = r.iter().zip(&projected).map(|(a, b)| a.conj() * b).sum::<C64>().re;
            pairs.push(PairTripletCheck {
                i,
                j,
                commutator_norm: commutator_norm(&pt, &lowering),
                singlet_expectation: singlet,
            });
        }
    }
    Ok(TripletReport { n_atoms, pairs })
}
