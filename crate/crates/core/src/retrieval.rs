//! Spin → light retrieval: the transverse susceptibility of the stored
//! ensemble, its least-lossy polarisation eigenmode, the analytic retrieval
//! map, and Stokes-parameter conversion.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::dark_state::{BlochOrientation, LightState};
use crate::linalg::{eig, select_unique};
use crate::params::CesiumParams;
use crate::phase::arctan_k_tan;
use crate::{Error, Result, C64};

/// Row/column index of ŷ (signal polarisation).
pub const Y: usize = 0;
/// Row/column index of ẑ (control polarisation).
pub const Z: usize = 1;

/// Mean transverse susceptibility ⟨χ⟩⊥ over the (ŷ, ẑ) plane, stored as a
/// prefactor i·d²/Γ times a dimensionless 2×2 matrix.
///
/// The lower-right entry carries η_A with no phase factor, exactly as in the
/// closed-form tensor this reproduces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityTensor {
    pub prefactor: C64,
    pub reduced: Matrix2<C64>,
    pub bloch: BlochOrientation,
    pub gamma_over_delta: f64,
}

impl SusceptibilityTensor {
    pub fn matrix(&self) -> Matrix2<C64> {
        self.reduced * self.prefactor
    }
}

pub fn susceptibility_tensor(bloch: &BlochOrientation, params: &CesiumParams) -> SusceptibilityTensor {
    let (a, b) = (params.a_cs, params.b_cs);
    let eps = params.gamma_over_delta();
    let eta = bloch.eta_a;
    let i = C64::i();
    let e_plus = C64::from_polar(1.0, bloch.phi_a);
    let e_minus = e_plus.conj();

    let reduced = Matrix2::new(
        1.0 - 2.0 * i * b * b * eps * eta,
        -i * eta * (e_plus - i * a * b * eps * e_minus),
        i * eta * (e_minus - i * a * b * eps * e_plus),
        eta - 0.5 * i * a * a * eps,
    );
    SusceptibilityTensor {
        prefactor: i * params.d_cs * params.d_cs / params.gamma,
        reduced,
        bloch: *bloch,
        gamma_over_delta: eps,
    }
}

/// Least-lossy eigenmode of ⟨χ⟩⊥, gauged so that E_z = 1. Returns the
/// eigenvalue of the full tensor and the field (E_y, E_z).
pub fn least_lossy_mode(chi: &SusceptibilityTensor) -> Result<(C64, Vector2<C64>)> {
    let dense = DMatrix::from_iterator(2, 2, chi.reduced.iter().copied());
    let pref = chi.prefactor;
    let phase = pref / pref.norm();
    let pair = select_unique(eig(&dense)?, |z| (phase * z).im, crate::dark_state::DEGENERACY_TOL)?;
    let ez = pair.vector[Z];
    if ez.norm() == 0.0 {
        return Err(Error::param("chi", "least-lossy mode has no control component"));
    }
    let field = Vector2::new(pair.vector[Y] / ez, C64::new(1.0, 0.0));
    Ok((pref * pair.value, field))
}

/// The retrieved light as (η_L, φ_L), read from E_y = iη_L e^{iφ_L} in the
/// E_z = 1 gauge. The control amplitude of the result is 1 (normalised units).
pub fn retrieved_field_numeric(chi: &SusceptibilityTensor) -> Result<LightState> {
    let (_, field) = least_lossy_mode(chi)?;
    let ey = field[Y];
    let phi = if ey.norm() == 0.0 { 0.0 } else { ey.arg() - FRAC_PI_2 };
    LightState::new(ey.norm(), phi, 1.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::param("alpha", format!("|alpha| must be < 1, got {alpha}")));
    }
    Ok(())
}

fn retrieval_phase(phi_a: f64, alpha: f64) -> f64 {
    let k = (1.0 + alpha) / (1.0 - alpha);
    FRAC_PI_4 - 2.0 * alpha + arctan_k_tan(k, phi_a - FRAC_PI_4)
}

/// Spin → light map of the first-order retrieved eigenmode
/// iη_A e^{−2iα}(e^{iφ_A} − iα e^{−iφ_A}).
///
/// Phase: φ_L = π/4 − 2α + arctan[((1+α)/(1−α))·tan(φ_A − π/4)] on the
/// continuous branch. Amplitude: η_L = η_A√(1 + α² − 2α sin 2φ_A), the
/// modulus of the eigenmode including its α² term.
pub fn retrieval_map(eta_a: f64, phi_a: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let eta = eta_a * (1.0 + alpha * alpha - 2.0 * alpha * (2.0 * phi_a).sin()).sqrt();
    Ok((eta, retrieval_phase(phi_a, alpha)))
}

/// As [`retrieval_map`] with η_L = η_A√(1 − 2α sin 2φ_A).
pub fn retrieval_map_first_order(eta_a: f64, phi_a: f64, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let eta = eta_a * (1.0 - 2.0 * alpha * (2.0 * phi_a).sin()).sqrt();
    Ok((eta, retrieval_phase(phi_a, alpha)))
}

/// Stokes parameters with S₁ = |E_z|² − |E_y|², S₂ = 2Re(E_z*E_y),
/// S₃ = 2Im(E_z*E_y). Control-only light sits at S₁ = S₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn from_field(ey: C64, ez: C64) -> Self {
        let cross = ez.conj() * ey;
        Self {
            s0: ez.norm_sqr() + ey.norm_sqr(),
            s1: ez.norm_sqr() - ey.norm_sqr(),
            s2: 2.0 * cross.re,
            s3: 2.0 * cross.im,
        }
    }

    /// (S₁, S₂, S₃)/S₀.
    pub fn normalized(&self) -> [f64; 3] {
        [self.s1 / self.s0, self.s2 / self.s0, self.s3 / self.s0]
    }

    /// Recovers (η_L, φ_L). Uses S₂, S₃ and S₀ + S₁ so that weak signals keep
    /// full relative precision.
    pub fn to_light(&self) -> (f64, f64) {
        let ez2 = 0.5 * (self.s0 + self.s1);
        let eta = self.s2.hypot(self.s3) / (2.0 * ez2);
        // E_z*E_y = iη e^{iφ}|E_z|²
        let phi = if eta == 0.0 {
            0.0
        } else {
            (-self.s2).atan2(self.s3).rem_euclid(2.0 * PI)
        };
        (eta, phi)
    }
}

pub fn stokes_from_light(light: &LightState) -> StokesVector {
    StokesVector::from_field(light.signal_field(), C64::new(light.control_amplitude, 0.0))
}
