//! Storage → dark time → retrieval, the ellipticity eraser, and the Faraday
//! readout of the stored spin.
//!
//! Positive ω_B advances φ_A.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::dark_state::{storage_map, BlochOrientation};
use crate::phase::uniform_grid;
use crate::retrieval::retrieval_map;
use crate::{Error, Result};

pub use crate::fit::{fit_lifetime, LifetimeFit};

pub const DEFAULT_T1: f64 = 0.3;
pub const DEFAULT_MONITOR_OMEGA: f64 = 1.4e3 * 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SequenceConfig {
    pub t_store: f64,
    /// Larmor frequency, rad/s.
    pub omega_b: f64,
    pub tau_s: f64,
    pub t1: f64,
    pub alpha: f64,
}

impl SequenceConfig {
    pub fn new(t_store: f64, omega_b: f64, tau_s: f64, alpha: f64) -> Result<Self> {
        let cfg = Self {
            t_store,
            omega_b,
            tau_s,
            t1: DEFAULT_T1,
            alpha,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_store >= 0.0 && self.t_store.is_finite()) {
            return Err(Error::param("t_store", format!("must be >= 0, got {}", self.t_store)));
        }
        if !(self.tau_s > 0.0) {
            return Err(Error::param("tau_s", format!("must be > 0, got {}", self.tau_s)));
        }
        if !(self.t1 > 0.0) {
            return Err(Error::param("t1", format!("must be > 0, got {}", self.t1)));
        }
        if !self.omega_b.is_finite() {
            return Err(Error::param("omega_b", "must be finite"));
        }
        if !(self.alpha.abs() < 1.0) {
            return Err(Error::param(
                "alpha",
                format!("|alpha| must be < 1, got {}", self.alpha),
            ));
        }
        Ok(())
    }

    pub fn larmor_angle(&self) -> f64 {
        self.omega_b * self.t_store
    }

    pub fn decay_factor(&self) -> f64 {
        (-self.t_store / self.tau_s).exp()
    }
}

/// 1/τ_s = 1/T₁ + κ·R_SE. κ = 0 for the Δm = 1 scheme.
pub fn storage_lifetime(t1: f64, kappa: f64, r_se: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::param("t1", format!("must be > 0, got {t1}")));
    }
    if !(kappa >= 0.0 && r_se >= 0.0) {
        return Err(Error::param("kappa", "kappa and r_se must be >= 0"));
    }
    Ok(1.0 / (1.0 / t1 + kappa * r_se))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    /// Faraday rotation per unit spin.
    pub beta: f64,
    pub omega_b_monitor: f64,
}

impl MeasurementModel {
    pub fn new(beta: f64) -> Result<Self> {
        let m = Self {
            beta,
            omega_b_monitor: DEFAULT_MONITOR_OMEGA,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta == 0.0 || !self.beta.is_finite() {
            return Err(Error::param(
                "beta",
                format!("must be nonzero and finite, got {}", self.beta),
            ));
        }
        if !(self.omega_b_monitor > 0.0 && self.omega_b_monitor.is_finite()) {
            return Err(Error::param("omega_b_monitor", "must be > 0"));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_b_monitor
    }

    /// Uniform grid covering `periods` modulation periods.
    pub fn time_grid(&self, periods: f64, points_per_period: usize) -> Vec<f64> {
        let n = (periods * points_per_period as f64).round() as usize;
        let dt = self.period() / points_per_period as f64;
        (0..=n).map(|k| k as f64 * dt).collect()
    }
}

/// Larmor rotation and exponential decay over the dark time.
pub fn dark_evolution(bloch: &BlochOrientation, cfg: &SequenceConfig) -> BlochOrientation {
    BlochOrientation::new(bloch.eta_a * cfg.decay_factor(), bloch.phi_a + cfg.larmor_angle())
}

/// Storage, dark evolution and retrieval, each exact.
pub fn full_transform_exact(eta_l: f64, phi_l: f64, cfg: &SequenceConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let stored = storage_map(eta_l, phi_l, cfg.alpha)?;
    let evolved = dark_evolution(&stored, cfg);
    retrieval_map(evolved.eta_a, evolved.phi_a, cfg.alpha)
}

/// φ_L^out ≈ φ_L + ω_Bt − 6α − 2α cos(ω_Bt − 3α) cos(2φ_L + ω_Bt),
/// η_L^out ≈ η_L e^{−t/τ_s}(1 − 2α sin(2φ_L + ω_Bt) cos(ω_Bt − 3α)).
pub fn full_transform_first_order(eta_l: f64, phi_l: f64, cfg: &SequenceConfig) -> Result<(f64, f64)> {
    if !(cfg.alpha.abs() < 0.3) {
        return Err(Error::param(
            "alpha",
            format!("first-order transform needs |alpha| < 0.3, got {}", cfg.alpha),
        ));
    }
    let (a, wt) = (cfg.alpha, cfg.larmor_angle());
    let c = (wt - 3.0 * a).cos();
    let phi = phi_l + wt - 6.0 * a - 2.0 * a * c * (2.0 * phi_l + wt).cos();
    let eta = eta_l * cfg.decay_factor() * (1.0 - 2.0 * a * (2.0 * phi_l + wt).sin() * c);
    Ok((eta, phi))
}

/// Field that cancels the elliptical distortion: ω_B t = 3α − π/2.
/// Negative (reversed field) whenever α < π/6.
pub fn eraser_field(alpha: f64, t_store: f64) -> Result<f64> {
    if !(t_store > 0.0 && t_store.is_finite()) {
        return Err(Error::param("t_store", format!("must be > 0, got {t_store}")));
    }
    Ok((3.0 * alpha - FRAC_PI_2) / t_store)
}

/// (max − min)/mean of the output amplitude over a uniform φ_L sweep.
pub fn transform_ellipticity(cfg: &SequenceConfig, grid_size: usize) -> Result<f64> {
    if grid_size < 64 {
        return Err(Error::param(
            "grid_size",
            format!("need at least 64 points, got {grid_size}"),
        ));
    }
    let etas = uniform_grid(grid_size)
        .into_iter()
        .map(|phi| full_transform_exact(1.0, phi, cfg).map(|o| o.0))
        .collect::<Result<Vec<f64>>>()?;
    let max = etas.iter().cloned().fold(f64::MIN, f64::max);
    let min = etas.iter().cloned().fold(f64::MAX, f64::min);
    let mean = etas.iter().sum::<f64>() / etas.len() as f64;
    Ok((max - min) / mean)
}

/// θ(t) = C cos(ω t + φ_A) with C = β√(s_x² + s_y²).
pub fn faraday_trace(bloch: &BlochOrientation, meas: &MeasurementModel, t_grid: &[f64]) -> Vec<(f64, f64)> {
    let c = meas.beta * bloch.s_x().hypot(bloch.s_y());
    t_grid
        .iter()
        .map(|&t| (t, c * (meas.omega_b_monitor * t + bloch.phi_a).cos()))
        .collect()
}

/// Least-squares fit of θ = a cos ωt + b sin ωt, giving s_x = a/β and
/// s_y = −b/β.
pub fn demodulate_trace(trace: &[(f64, f64)], meas: &MeasurementModel) -> Result<(f64, f64)> {
    meas.validate()?;
    if trace.len() < 16 {
        return Err(Error::InsufficientTrace(format!(
            "need at least 16 samples, got {}",
            trace.len()
        )));
    }
    let dt = trace[1].0 - trace[0].0;
    if !(dt > 0.0) {
        return Err(Error::InsufficientTrace("sample times must increase".into()));
    }
    if trace.windows(2).any(|w| ((w[1].0 - w[0].0) / dt - 1.0).abs() > 1e-6) {
        return Err(Error::InsufficientTrace("sampling must be uniform".into()));
    }
    let period = meas.period();
    let span = trace[trace.len() - 1].0 - trace[0].0;
    if span < 2.0 * period * (1.0 - 1e-9) {
        return Err(Error::InsufficientTrace(format!(
            "spans {:.3} modulation periods, need 2",
            span / period
        )));
    }
    if period / dt < 8.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientTrace(format!(
            "{:.2} samples per period, need 8",
            period / dt
        )));
    }

    let (mut cc, mut cs, mut ss, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, y) in trace {
        let (s, c) = (meas.omega_b_monitor * t).sin_cos();
        cc += c * c;
        cs += c * s;
        ss += s * s;
        yc += y * c;
        ys += y * s;
    }
    let det = cc * ss - cs * cs;
    let a = (yc * ss - ys * cs) / det;
    let b = (ys * cc - yc * cs) / det;
    Ok((a / meas.beta, -b / meas.beta))
}
