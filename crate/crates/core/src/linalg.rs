//! Eigen-decomposition of small dense non-Hermitian complex matrices.
//!
//! nalgebra's complex Schur form gives the eigenvalues on the diagonal of an
//! upper-triangular `T` with `A = Q T Q†`; eigenvectors come from
//! back-substitution in `T` followed by a rotation with `Q`.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub(crate) struct EigenPair {
    pub value: C64,
    pub vector: DVector<C64>,
}

pub(crate) fn eig(a: &DMatrix<C64>) -> Result<Vec<EigenPair>> {
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let schur = a
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or(Error::EigenNonConvergence(n))?;
    let (q, t) = schur.unpack();

    let tiny = f64::EPSILON * scale;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = DVector::<C64>::zeros(n);
        y[k] = C64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < tiny {
                d = C64::new(tiny, 0.0);
            }
            y[j] = -acc / d;
        }
        let mut v = &q * y;
        let norm = v.norm();
        v /= C64::new(norm, 0.0);
        out.push(EigenPair {
            value: lambda,
            vector: v,
        });
    }
    Ok(out)
}

/// Picks the pair minimising `key`, erroring when the runner-up is within
/// `rel_tol` (relative to the largest eigenvalue modulus) of the minimum.
pub(crate) fn select_unique(pairs: Vec<EigenPair>, key: impl Fn(C64) -> f64, rel_tol: f64) -> Result<EigenPair> {
    let scale = pairs.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
    let mut idx: Vec<usize> = (0..pairs.len()).collect();
    idx.sort_by(|&i, &j| key(pairs[i].value).total_cmp(&key(pairs[j].value)));
    if idx.len() >= 2 {
        let (a, b) = (&pairs[idx[0]], &pairs[idx[1]]);
        if (key(b.value) - key(a.value)).abs() <= rel_tol * scale {
            return Err(Error::DegenerateEigenvalue(
                format!("{}", a.value),
                format!("{}", b.value),
            ));
        }
    }
    Ok(pairs.into_iter().nth(idx[0]).expect("non-empty"))
}
