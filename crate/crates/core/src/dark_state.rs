//! Four-level quasi-dark state and the light → spin storage map.
//!
//! Basis order is (|g⟩, |r⟩, |e⟩, |p⟩): the two ground sublevels of the
//! Δm = 1 Λ-system, its excited level, and the off-resonant level a
//! hyperfine splitting Δ away.
//!
//! Phase convention: the signal drives ⟨e|H|g⟩ = Ω_s, and the phase of |r⟩
//! is chosen so that the ideal dark state reads |g⟩ + (Ω_s/Ω_c)|r⟩. With
//! that choice both couplings of |r⟩ enter the matrix with a minus sign.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use nalgebra::{DMatrix, Matrix4};

use crate::linalg::{eig, select_unique};
use crate::params::CesiumParams;
use crate::phase::arctan_k_tan;
use crate::{Error, Result, C64};

pub const G: usize = 0;
pub const R: usize = 1;
pub const E: usize = 2;
pub const P: usize = 3;

/// Relative tolerance under which two candidate eigenvalues are considered
/// degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Polarisation state E_c(ẑ + iη_L e^{iφ_L} ŷ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightState {
    pub eta_l: f64,
    pub phi_l: f64,
    pub control_amplitude: f64,
}

impl LightState {
    pub fn new(eta_l: f64, phi_l: f64, control_amplitude: f64) -> Result<Self> {
        if !(eta_l >= 0.0 && eta_l.is_finite()) {
            return Err(Error::param("eta_l", format!("must be >= 0, got {eta_l}")));
        }
        if !(control_amplitude > 0.0) {
            return Err(Error::param(
                "control_amplitude",
                format!("must be > 0, got {control_amplitude}"),
            ));
        }
        Ok(Self {
            eta_l,
            phi_l: phi_l.rem_euclid(2.0 * std::f64::consts::PI),
            control_amplitude,
        })
    }

    /// The first-order light/spin maps assume η_L ≪ 1.
    pub fn outside_weak_signal_regime(&self) -> bool {
        self.eta_l > 0.1
    }

    /// Signal field E_s = iη_L e^{iφ_L} E_c.
    pub fn signal_field(&self) -> C64 {
        C64::i() * C64::from_polar(self.eta_l, self.phi_l) * self.control_amplitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicState4 {
    pub amplitudes: [C64; 4],
    /// Eigenvalue of the Hamiltonian when the state came from diagonalisation.
    pub eigenvalue: Option<C64>,
}

impl AtomicState4 {
    /// Normalises and fixes the global phase so that amp(g) is real and
    /// non-negative (when it is nonzero).
    pub fn new(amplitudes: [C64; 4]) -> Self {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let g = amplitudes[G];
        let gauge = if g.norm() > 0.0 {
            g.conj() / g.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let amps = amplitudes.map(|a| a * gauge / norm);
        Self {
            amplitudes: amps,
            eigenvalue: None,
        }
    }

    pub fn ground() -> Self {
        Self::new([C64::new(1.0, 0.0), C64::default(), C64::default(), C64::default()])
    }

    pub fn amp(&self, level: usize) -> C64 {
        self.amplitudes[level]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |⟨self|other⟩|².
    pub fn overlap(&self, other: &AtomicState4) -> f64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    pub fn excited_population(&self) -> f64 {
        self.amplitudes[E].norm_sqr() + self.amplitudes[P].norm_sqr()
    }
}

/// Collective spin orientation η_A e^{iφ_A}, with quadratures
/// s_x = ½η_A cos φ_A, s_y = ½η_A sin φ_A, s_z = ½.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochOrientation {
    pub eta_a: f64,
    pub phi_a: f64,
}

impl BlochOrientation {
    pub fn new(eta_a: f64, phi_a: f64) -> Self {
        Self { eta_a, phi_a }
    }

    pub fn from_quadratures(s_x: f64, s_y: f64) -> Self {
        Self {
            eta_a: 2.0 * s_x.hypot(s_y),
            phi_a: s_y.atan2(s_x),
        }
    }

    pub fn s_x(&self) -> f64 {
        0.5 * self.eta_a * self.phi_a.cos()
    }

    pub fn s_y(&self) -> f64 {
        0.5 * self.eta_a * self.phi_a.sin()
    }

    pub fn s_z(&self) -> f64 {
        0.5
    }

    /// η_A e^{iφ_A}.
    pub fn complex(&self) -> C64 {
        C64::from_polar(self.eta_a, self.phi_a)
    }
}

/// H = H₀ + V with H₀ = −iΓ|e⟩⟨e| + (Δ − iΓ)|p⟩⟨p|.
pub fn build_hamiltonian(omega_c: f64, omega_s: C64, params: &CesiumParams) -> Matrix4<C64> {
    let (a, b) = (params.a_cs, params.b_cs);
    let oc = C64::new(omega_c, 0.0);
    let mut h = Matrix4::<C64>::zeros();
    h[(E, E)] = C64::new(0.0, -params.gamma);
    h[(P, P)] = C64::new(params.delta, -params.gamma);

    h[(E, G)] = omega_s;
    h[(E, R)] = -oc;
    h[(P, G)] = a * oc;
    h[(P, R)] = -b * omega_s;
    for (i, j) in [(E, G), (E, R), (P, G), (P, R)] {
        h[(j, i)] = h[(i, j)].conj();
    }
    h
}

/// The eigenstate of `h` whose eigenvalue has the smallest |Im λ|.
pub fn quasi_dark_state_numeric(h: &Matrix4<C64>) -> Result<AtomicState4> {
    if h[(E, R)].norm() == 0.0 {
        return Err(Error::param("omega_c", "control Rabi frequency must be nonzero"));
    }
    let dense = DMatrix::from_iterator(4, 4, h.iter().copied());
    let pair = select_unique(eig(&dense)?, |z| z.im.abs(), DEGENERACY_TOL)?;
    let v = &pair.vector;
    let mut state = AtomicState4::new([v[0], v[1], v[2], v[3]]);
    state.eigenvalue = Some(pair.value);
    Ok(state)
}

/// Builds H for a light state given directly by its Rabi frequencies and
/// diagonalises it.
pub fn solve_quasi_dark_state(eta_l: f64, phi_l: f64, omega_c: f64, params: &CesiumParams) -> Result<AtomicState4> {
    if !(eta_l >= 0.0) {
        return Err(Error::param("eta_l", format!("must be >= 0, got {eta_l}")));
    }
    let omega_s = C64::from_polar(SQRT_2 * omega_c * eta_l, phi_l);
    quasi_dark_state_numeric(&build_hamiltonian(omega_c, omega_s, params))
}

/// First-order quasi-dark state
/// |g⟩ + √2η_L e^{−3iα}[e^{i(φ_L−α)} − iα e^{−i(φ_L−α)}]|r⟩, normalised.
pub fn quasi_dark_state_analytic(eta_l: f64, phi_l: f64, alpha: f64) -> AtomicState4 {
    let theta = phi_l - alpha;
    let bracket = C64::from_polar(1.0, theta) - C64::i() * alpha * C64::from_polar(1.0, -theta);
    let r = SQRT_2 * eta_l * C64::from_polar(1.0, -3.0 * alpha) * bracket;
    AtomicState4::new([C64::new(1.0, 0.0), r, C64::default(), C64::default()])
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::param("alpha", format!("|alpha| must be < 1, got {alpha}")));
    }
    Ok(())
}

/// Light → spin map read off the quasi-dark state.
///
/// The phase is φ_A = −π/4 − 3α + arctan[((1−α)/(1+α))·tan(φ_L + π/4 − α)],
/// evaluated on the continuous branch. The amplitude keeps the α² term of
/// |amp(r)/amp(g)|, η_A = η_L√(1 + α² − 2α sin 2(φ_L − α)), so the image of
/// a φ_L sweep is exactly an ellipse with semi-axes η_L(1 ± α).
/// [`storage_map_first_order`] drops that α² term.
pub fn storage_map(eta_l: f64, phi_l: f64, alpha: f64) -> Result<BlochOrientation> {
    check_alpha(alpha)?;
    let s = (2.0 * (phi_l - alpha)).sin();
    let eta_a = eta_l * (1.0 + alpha * alpha - 2.0 * alpha * s).sqrt();
    Ok(BlochOrientation::new(eta_a, storage_phase(phi_l, alpha)))
}

/// Storage map with the amplitude truncated at first order in α:
/// η_A = η_L√(1 − 2α sin 2(φ_L − α)).
pub fn storage_map_first_order(eta_l: f64, phi_l: f64, alpha: f64) -> Result<BlochOrientation> {
    check_alpha(alpha)?;
    let s = (2.0 * (phi_l - alpha)).sin();
    let eta_a = eta_l * (1.0 - 2.0 * alpha * s).sqrt();
    Ok(BlochOrientation::new(eta_a, storage_phase(phi_l, alpha)))
}

fn storage_phase(phi_l: f64, alpha: f64) -> f64 {
    let k = (1.0 - alpha) / (1.0 + alpha);
    -FRAC_PI_4 - 3.0 * alpha + arctan_k_tan(k, phi_l + FRAC_PI_4 - alpha)
}

/// Reads η_A e^{iφ_A} from amp(r)/amp(g) = √2 η_A e^{iφ_A}.
pub fn bloch_from_state(state: &AtomicState4) -> Result<BlochOrientation> {
    let g = state.amp(G);
    if g.norm() < 1e-12 {
        return Err(Error::param("state", "amp(g) vanishes; orientation undefined"));
    }
    let ratio = state.amp(R) / g / SQRT_2;
    Ok(BlochOrientation::new(ratio.norm(), ratio.arg()))
}
