//! Algebraic least-squares conic fit for scan images in the transverse plane.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};

use crate::phase::wrap_pi;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseFit {
    pub center: (f64, f64),
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Direction of the major axis, in (−π/2, π/2].
    pub orientation: f64,
    /// Largest Sampson (first-order geometric) distance of any input point.
    pub max_residual: f64,
}

fn conic_value(c: &[f64; 6], x: f64, y: f64) -> (f64, f64, f64) {
    let v = c[0] * x * x + c[1] * x * y + c[2] * y * y + c[3] * x + c[4] * y + c[5];
    let gx = 2.0 * c[0] * x + c[1] * y + c[3];
    let gy = c[1] * x + 2.0 * c[2] * y + c[4];
    (v, gx, gy)
}

pub fn fit_ellipse(points: &[(f64, f64)]) -> Result<EllipseFit> {
    let n = points.len();
    if n < 6 {
        return Err(Error::param("points", format!("need at least 6 points, got {n}")));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let scale = (points
        .iter()
        .map(|p| (p.0 - mx).powi(2) + (p.1 - my).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    if !(scale > 0.0) {
        return Err(Error::param("points", "all points coincide"));
    }
    let norm: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((p.0 - mx) / scale, (p.1 - my) / scale))
        .collect();

    let design = DMatrix::from_fn(n, 6, |i, j| {
        let (x, y) = norm[i];
        match j {
            0 => x * x,
            1 => x * y,
            2 => y * y,
            3 => x,
            4 => y,
            _ => 1.0,
        }
    });
    let svd = design.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::param("points", "SVD failed"))?;
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("six singular values");
    let c: [f64; 6] = std::array::from_fn(|j| v_t[(k, j)]);

    // centre: ∇Q = 0
    let det = 4.0 * c[0] * c[2] - c[1] * c[1];
    if !(det > 0.0) {
        return Err(Error::param("points", "best-fit conic is not an ellipse"));
    }
    let xc = (c[1] * c[4] - 2.0 * c[2] * c[3]) / det;
    let yc = (c[1] * c[3] - 2.0 * c[0] * c[4]) / det;
    let f0 = c[5] + 0.5 * (c[3] * xc + c[4] * yc);

    let quad = Matrix2::new(c[0], 0.5 * c[1], 0.5 * c[1], c[2]);
    let eig = SymmetricEigen::new(quad);
    let (i_major, i_minor) = if eig.eigenvalues[0].abs() < eig.eigenvalues[1].abs() {
        (0, 1)
    } else {
        (1, 0)
    };
    let axis = |i: usize| (-f0 / eig.eigenvalues[i]).sqrt();
    let (a, b) = (axis(i_major), axis(i_minor));
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::param("points", "best-fit conic is not an ellipse"));
    }
    let v = eig.eigenvectors.column(i_major);
    let mut theta = v[1].atan2(v[0]);
    if theta <= -std::f64::consts::FRAC_PI_2 {
        theta += std::f64::consts::PI;
    } else if theta > std::f64::consts::FRAC_PI_2 {
        theta -= std::f64::consts::PI;
    }

    let max_residual = norm
        .iter()
        .map(|&(x, y)| {
            let (val, gx, gy) = conic_value(&c, x, y);
            val.abs() / gx.hypot(gy)
        })
        .fold(0.0, f64::max)
        * scale;

    Ok(EllipseFit {
        center: (mx + scale * xc, my + scale * yc),
        semi_major: a * scale,
        semi_minor: b * scale,
        orientation: theta,
        max_residual,
    })
}

impl EllipseFit {
    /// Eccentric anomaly of a point, measured from the major axis.
    pub fn eccentric_anomaly(&self, p: (f64, f64)) -> f64 {
        let (dx, dy) = (p.0 - self.center.0, p.1 - self.center.1);
        let (s, c) = self.orientation.sin_cos();
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (v / self.semi_minor).atan2(u / self.semi_major)
    }

    /// Rotation between a scan parameter and the eccentric anomaly of its
    /// image point, E = t + offset. Returns the offset (mod π, since the
    /// major axis has no preferred direction) in (−π/2, π/2] and the largest
    /// departure of any point from it. A small departure means the scan
    /// parameter is the eccentric anomaly up to that rotation.
    pub fn anomaly_offset(&self, params: &[f64], points: &[(f64, f64)]) -> (f64, f64) {
        let diffs: Vec<f64> = params
            .iter()
            .zip(points)
            .map(|(&t, &p)| self.eccentric_anomaly(p) - t)
            .collect();
        let (s, c) = diffs
            .iter()
            .fold((0.0, 0.0), |(s, c), d| (s + (2.0 * d).sin(), c + (2.0 * d).cos()));
        let mut off = 0.5 * s.atan2(c);
        if off <= -std::f64::consts::FRAC_PI_2 {
            off += std::f64::consts::PI;
        }
        let spread = diffs
            .iter()
            .map(|d| 0.5 * wrap_pi(2.0 * (d - off)).abs())
            .fold(0.0, f64::max);
        (off, spread)
    }
}
