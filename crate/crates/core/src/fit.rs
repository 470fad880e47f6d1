//! Single-exponential lifetime fit, P(t) = A·exp(−t/τ).
//!
//! Initialised from a log-linear regression, then refined by damped
//! Gauss–Newton (Levenberg–Marquardt) on the linear-scale residuals. The
//! model is parametrised by the decay rate k = 1/τ so that nearly flat
//! traces stay well conditioned.

use serde::Serialize;

use crate::{Error, Result};

const MAX_ITER: usize = 100;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeFit {
    pub tau_s: f64,
    pub stderr: f64,
    pub amplitude: f64,
    pub rate: f64,
    pub rate_stderr: f64,
    pub n_points: usize,
}

fn sse(samples: &[(f64, f64)], amp: f64, rate: f64) -> f64 {
    samples
        .iter()
        .map(|&(t, y)| (amp * (-rate * t).exp() - y).powi(2))
        .sum()
}

pub fn fit_lifetime(samples: &[(f64, f64)]) -> Result<LifetimeFit> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {n}")));
    }
    if let Some(&(t, y)) = samples
        .iter()
        .find(|s| !(s.1 > 0.0) || !s.0.is_finite() || !s.1.is_finite())
    {
        return Err(Error::Fit(format!(
            "sample at t = {t} has non-positive or non-finite power {y}"
        )));
    }
    let t0 = samples[0].0;
    if samples.iter().all(|s| s.0 == t0) {
        return Err(Error::Fit("all samples share the same time".into()));
    }

    // log-linear start
    let ts: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let logs: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (slope, intercept) = crate::phase::linear_fit(&ts, &logs);
    let mut amp = intercept.exp();
    let mut rate = -slope;

    let mut lambda = 1e-3;
    let mut cost = sse(samples, amp, rate);
    let mut converged = false;
    for _ in 0..MAX_ITER {
        // J columns: ∂/∂A = e^{−kt}, ∂/∂k = −A t e^{−kt}
        let (mut jaa, mut jak, mut jkk, mut ga, mut gk) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(t, y) in samples {
            let e = (-rate * t).exp();
            let (da, dk) = (e, -amp * t * e);
            let r = amp * e - y;
            jaa += da * da;
            jak += da * dk;
            jkk += dk * dk;
            ga += da * r;
            gk += dk * r;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let (a11, a22) = (jaa * (1.0 + lambda), jkk * (1.0 + lambda));
            let det = a11 * a22 - jak * jak;
            if det == 0.0 || !det.is_finite() {
                lambda *= 10.0;
                continue;
            }
            let step_a = -(a22 * ga - jak * gk) / det;
            let step_k = -(a11 * gk - jak * ga) / det;
            let (na, nk) = (amp + step_a, rate + step_k);
            let new_cost = sse(samples, na, nk);
            if new_cost.is_finite() && new_cost <= cost {
                let rel = (step_a / amp).abs().max((step_k * ts_span(&ts)).abs());
                amp = na;
                rate = nk;
                cost = new_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < STEP_TOL {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        // no downhill step left: already at the minimum to working precision
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    if !converged || !(amp.is_finite() && rate.is_finite()) {
        return Err(Error::Fit(format!("no convergence after {MAX_ITER} iterations")));
    }

    // covariance σ²(JᵀJ)⁻¹
    let (mut jaa, mut jak, mut jkk) = (0.0, 0.0, 0.0);
    for &(t, _) in samples {
        let e = (-rate * t).exp();
        let (da, dk) = (e, -amp * t * e);
        jaa += da * da;
        jak += da * dk;
        jkk += dk * dk;
    }
    let det = jaa * jkk - jak * jak;
    let dof = (n - 2).max(1) as f64;
    let sigma2 = cost / dof;
    let var_k = if det > 0.0 { sigma2 * jaa / det } else { f64::INFINITY };
    let rate_stderr = var_k.sqrt();
    let tau = 1.0 / rate;
    Ok(LifetimeFit {
        tau_s: tau,
        stderr: rate_stderr / (rate * rate),
        amplitude: amp,
        rate,
        rate_stderr,
        n_points: n,
    })
}

fn ts_span(ts: &[f64]) -> f64 {
    let max = ts.iter().cloned().fold(f64::MIN, f64::max);
    let min = ts.iter().cloned().fold(f64::MAX, f64::min);
    (max - min).max(f64::MIN_POSITIVE)
}
