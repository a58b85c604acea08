use crate::error::{Error, Result};
use crate::model::Matrix;

/// Result of singular value thresholding: the shrunk matrix and its nuclear
/// norm (the sum of the kept, shrunk singular values).
#[derive(Debug, Clone)]
pub struct Shrunk {
    pub matrix: Matrix,
    pub nuclear_norm: f64,
    pub rank: usize,
}

/// Proximal map of `tau |.|_*`: `A max(Σ - tau, 0) B^T` from a full SVD.
pub fn svt(x: &Matrix, tau: f64) -> Result<Matrix> {
    svt_with_norm(x, tau).map(|s| s.matrix)
}

pub fn svt_with_norm(x: &Matrix, tau: f64) -> Result<Shrunk> {
    if !(tau >= 0.0) {
        return Err(Error::param(format!("threshold {tau} must be non-negative")));
    }
    let svd = x
        .clone()
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numerical("SVD factors missing".into())),
    };
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tau)
        .collect();
    let (rows, cols) = x.shape();
    let mut out = Matrix::zeros(rows, cols);
    let mut nuclear_norm = 0.0;
    for &k in &keep {
        let s = svd.singular_values[k] - tau;
        nuclear_norm += s;
        out += (u.column(k) * s) * vt.row(k);
    }
    Ok(Shrunk {
        matrix: out,
        nuclear_norm,
        rank: keep.len(),
    })
}

/// Proximal map of `tau |.|_1`, entrywise `sgn(x) max(|x| - tau, 0)`.
pub fn soft_threshold(x: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau >= 0.0) {
        return Err(Error::param(format!("threshold {tau} must be non-negative")));
    }
    Ok(x.map(|v| shrink(v, tau)))
}

#[inline]
pub(crate) fn shrink(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}
