//! Physical constants of the cesium model and the elementary quantities
//! derived from them.
//!
//! Angular frequencies are stored in rad/s. Values quoted in Hz (for example
//! in config files) are multiplied by 2π once, at parse time.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge (C).
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius (m).
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

pub const DEFAULT_DELTA_HZ: f64 = 1100.0e6;
pub const DEFAULT_GAMMA_HZ: f64 = 124.0e6;
pub const DEFAULT_F_CS: f64 = 0.58;
pub const DEFAULT_NUCLEAR_SPIN: f64 = 3.5;
pub const DEFAULT_P_SQUARED: f64 = 0.125;
pub const DEFAULT_ALPHA_SE: f64 = 6.5e-10;

/// D1 dipole matrix element, 2.6·(√7/4)·e·a₀, in C·m.
pub fn default_dipole() -> f64 {
    2.6 * 7f64.sqrt() / 4.0 * ELEMENTARY_CHARGE * BOHR_RADIUS
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CesiumParams {
    /// Excited-level hyperfine splitting Δ (rad/s).
    pub delta: f64,
    /// Doppler half-linewidth Γ (rad/s).
    pub gamma: f64,
    /// Clebsch-Gordan constant entering α = f·Γ/Δ.
    pub f_cs: f64,
    /// Coupling ratio of |g⟩–|p⟩ relative to the control transition.
    pub a_cs: f64,
    /// Coupling ratio of |r⟩–|p⟩ relative to the signal transition.
    pub b_cs: f64,
    /// Dipole matrix element (C·m).
    pub d_cs: f64,
    pub nuclear_spin: f64,
    pub p_coeff: f64,
    pub q_coeff: f64,
    /// Spin-exchange rate coefficient (cm³/s).
    pub alpha_se: f64,
}

impl Default for CesiumParams {
    fn default() -> Self {
        let p2 = DEFAULT_P_SQUARED;
        Self {
            delta: DEFAULT_DELTA_HZ * 2.0 * PI,
            gamma: DEFAULT_GAMMA_HZ * 2.0 * PI,
            f_cs: DEFAULT_F_CS,
            a_cs: 4.0 / 7f64.sqrt(),
            b_cs: 1.0 / 7f64.sqrt(),
            d_cs: default_dipole(),
            nuclear_spin: DEFAULT_NUCLEAR_SPIN,
            p_coeff: p2.sqrt(),
            q_coeff: (1.0 - p2).sqrt(),
            alpha_se: DEFAULT_ALPHA_SE,
        }
    }
}

impl CesiumParams {
    /// Sets p from p² and q from the completeness relation; both taken positive.
    pub fn with_p_squared(mut self, p_squared: f64) -> Result<Self> {
        if !(p_squared > 0.0 && p_squared < 1.0) {
            return Err(Error::param("p_squared", format!("{p_squared} not in (0, 1)")));
        }
        self.p_coeff = p_squared.sqrt();
        self.q_coeff = (1.0 - p_squared).sqrt();
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("alpha_se", self.alpha_se),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.f_cs.is_finite() && self.f_cs >= 0.0) {
            return Err(Error::param(
                "f_cs",
                format!("must be finite and >= 0, got {}", self.f_cs),
            ));
        }
        if !(self.d_cs.is_finite() && self.d_cs > 0.0) {
            return Err(Error::param("d_cs", format!("must be > 0, got {}", self.d_cs)));
        }
        // the truncated nuclear basis needs three levels below the stretched one
        if !(self.nuclear_spin >= 1.0 && (2.0 * self.nuclear_spin).fract() == 0.0) {
            return Err(Error::param(
                "nuclear_spin",
                format!("must be a half-integer >= 1, got {}", self.nuclear_spin),
            ));
        }
        let norm = self.p_coeff * self.p_coeff + self.q_coeff * self.q_coeff;
        if (norm - 1.0).abs() > 1e-12 || self.p_coeff < 0.0 || self.q_coeff < 0.0 {
            return Err(Error::param("p_coeff", format!("p² + q² = {norm}, expected 1")));
        }
        Ok(())
    }

    pub fn gamma_over_delta(&self) -> f64 {
        self.gamma / self.delta
    }

    /// α = f·Γ/Δ.
    pub fn alpha(&self) -> f64 {
        alpha_ellipticity(self)
    }
}

pub fn alpha_ellipticity(params: &CesiumParams) -> f64 {
    params.f_cs * params.gamma / params.delta
}

/// Control and signal Rabi frequencies for a control field amplitude |E_c|
/// (V/m) and signal ratio η_L e^{iφ_L}.
///
/// Ω_c = d|E_c|/(√2ħ), Ω_s = √2·Ω_c·η_L·e^{iφ_L}.
pub fn rabi_frequencies(control_amplitude: f64, eta_l: f64, phi_l: f64, params: &CesiumParams) -> Result<(f64, C64)> {
    if !(eta_l >= 0.0) {
        return Err(Error::param("eta_l", format!("must be >= 0, got {eta_l}")));
    }
    if !(control_amplitude >= 0.0) {
        return Err(Error::param(
            "control_amplitude",
            format!("must be >= 0, got {control_amplitude}"),
        ));
    }
    let omega_c = params.d_cs * control_amplitude / (2f64.sqrt() * HBAR);
    let omega_s = C64::from_polar(2f64.sqrt() * omega_c * eta_l, phi_l);
    Ok((omega_c, omega_s))
}

/// Inverse of the Ω_c relation: the control amplitude producing a given Ω_c.
pub fn control_amplitude_for(omega_c: f64, params: &CesiumParams) -> f64 {
    2f64.sqrt() * HBAR * omega_c / params.d_cs
}

/// R_SE = α_SE · n, with n in cm⁻³.
pub fn spin_exchange_rate(density: f64, params: &CesiumParams) -> Result<f64> {
    if !(density >= 0.0) {
        return Err(Error::param("density", format!("must be >= 0, got {density}")));
    }
    Ok(params.alpha_se * density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_invariants() {
        let p = CesiumParams::default();
        p.validate().unwrap();
        assert!((p.p_coeff.powi(2) + p.q_coeff.powi(2) - 1.0).abs() < 1e-12);
        assert!((p.a_cs * p.b_cs - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn alpha_default_value() {
        let p = CesiumParams::default();
        assert_relative_eq!(p.alpha(), 0.58 * 124.0 / 1100.0, max_relative = 1e-14);
        assert!((p.alpha() - 0.065382).abs() < 1e-6);
        // "ellipticity of order 0.1"
        assert!(p.alpha() > 0.01 && p.alpha() < 0.3);
    }

    #[test]
    fn alpha_zero_and_scaling() {
        let p = CesiumParams {
            f_cs: 0.0,
            ..Default::default()
        };
        assert_eq!(p.alpha(), 0.0);

        let base = CesiumParams::default();
        let wide = CesiumParams {
            delta: base.delta * 10.0,
            ..base
        };
        assert_relative_eq!(wide.alpha(), base.alpha() / 10.0, max_relative = 1e-14);

        let both = CesiumParams {
            delta: base.delta * 3.7,
            gamma: base.gamma * 3.7,
            ..base
        };
        assert_relative_eq!(both.alpha(), base.alpha(), max_relative = 1e-14);
    }

    #[test]
    fn rabi_ratios_and_phase() {
        let p = CesiumParams::default();
        let (oc, os) = rabi_frequencies(100.0, 0.0, 0.3, &p).unwrap();
        assert!(oc > 0.0);
        assert_eq!(os, C64::new(0.0, 0.0));

        let (oc, os) = rabi_frequencies(100.0, 1e-3, 0.0, &p).unwrap();
        assert!(os.im.abs() < 1e-18 * oc && os.re > 0.0);
        assert_relative_eq!(os.norm() / oc, 2f64.sqrt() * 1e-3, max_relative = 1e-14);

        let (_, os) = rabi_frequencies(100.0, 1e-3, PI / 2.0, &p).unwrap();
        assert!(os.re.abs() < 1e-12 * os.im && os.im > 0.0);

        assert!(rabi_frequencies(100.0, -1e-3, 0.0, &p).is_err());
    }

    #[test]
    fn control_amplitude_inverts_rabi() {
        let p = CesiumParams::default();
        let oc = 1e-2 * p.gamma;
        let e = control_amplitude_for(oc, &p);
        let (back, _) = rabi_frequencies(e, 0.0, 0.0, &p).unwrap();
        assert_relative_eq!(back, oc, max_relative = 1e-14);
    }

    #[test]
    fn spin_exchange_rate_values() {
        let p = CesiumParams::default();
        assert_relative_eq!(spin_exchange_rate(1.4e11, &p).unwrap(), 91.0, max_relative = 1e-12);
        assert_eq!(spin_exchange_rate(0.0, &p).unwrap(), 0.0);
        let r1 = spin_exchange_rate(2.0e11, &p).unwrap();
        assert_relative_eq!(spin_exchange_rate(4.0e11, &p).unwrap(), 2.0 * r1, max_relative = 1e-15);
        assert!(spin_exchange_rate(-1.0, &p).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        let p = CesiumParams {
            gamma: -1.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = CesiumParams {
            p_coeff: 0.5,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        assert!(CesiumParams::default().with_p_squared(1.5).is_err());
    }

    proptest::proptest! {
        #[test]
        fn spin_exchange_rate_is_additive(n1 in 0.0f64..1e13, n2 in 0.0f64..1e13) {
            let p = CesiumParams::default();
            let lhs = spin_exchange_rate(n1 + n2, &p).unwrap();
            let rhs = spin_exchange_rate(n1, &p).unwrap() + spin_exchange_rate(n2, &p).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }

        #[test]
        fn alpha_is_scale_invariant(s in 1e-3f64..1e3) {
            let p = CesiumParams::default();
            let q = CesiumParams { delta: p.delta * s, gamma: p.gamma * s, ..p };
            proptest::prop_assert!((q.alpha() - p.alpha()).abs() <= 1e-14);
        }
    }
}
