//! Angle helpers shared by the storage/retrieval maps and the scan statistics.

use std::f64::consts::PI;

/// Branch-continuous `arctan(k·tan u)` for `k > 0`.
///
/// Equals `u` at every multiple of π and is smooth and strictly increasing in
/// `u`, so it never hits the tangent poles.
pub fn arctan_k_tan(k: f64, u: f64) -> f64 {
    let (s, c) = u.sin_cos();
    u + ((k - 1.0) * s * c).atan2(c * c + k * s * s)
}

/// Wraps into (−π, π].
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Nearest-branch continuation along a sequence of angles.
pub fn unwrap(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut prev: Option<f64> = None;
    for &p in phases {
        let v = match prev {
            None => p,
            Some(q) => q + wrap_pi(p - q),
        };
        out.push(v);
        prev = Some(v);
    }
    out
}

/// Uniform grid of `n` points on [0, 2π), endpoint excluded.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Ordinary least-squares line; returns (slope, intercept).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_matches_principal_value_inside_branch() {
        for &k in &[0.3, 0.8181, 1.0, 1.5] {
            for i in -40..=40 {
                let u = i as f64 * 0.0375;
                let direct = (k * u.tan()).atan();
                assert!((arctan_k_tan(k, u) - direct).abs() < 1e-13, "k={k} u={u}");
            }
        }
    }

    #[test]
    fn arctan_is_continuous_across_poles() {
        let k = 0.8;
        let mut prev = arctan_k_tan(k, -7.0);
        let mut u = -7.0;
        while u < 7.0 {
            u += 1e-3;
            let v = arctan_k_tan(k, u);
            assert!(v.is_finite());
            assert!(v > prev && v - prev < 2e-3);
            prev = v;
        }
        assert!((arctan_k_tan(k, PI / 2.0) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let raw: Vec<f64> = (0..50).map(|i| wrap_pi(0.3 * i as f64)).collect();
        let u = unwrap(&raw);
        for (i, v) in u.iter().enumerate() {
            assert!((v - 0.3 * i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_pi(PI), PI);
        assert!((wrap_pi(-PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }
}
