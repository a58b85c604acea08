use super::prox::{shrink, svt_with_norm};
use super::{RecoveryResult, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{check_finite, check_square, l1_norm, Matrix, SamplingMask};

/// Alternating-direction splitting with variables `(L, S, Z)` and constraint
/// `L + S + Z = P_O[Y]`, where `S` lives on `O` and `Z` on its complement.
///
/// Each sweep updates `L` by singular value thresholding at `1/mu`, then
/// `(S, Z)` jointly (they act on disjoint entries), then the multiplier. The
/// penalty `mu` is fixed for the whole run.
pub fn solve_rmc(y_obs: &Matrix, mask: &SamplingMask, config: &SolverConfig) -> Result<RecoveryResult> {
    let n = mask.n();
    let m = prepare(y_obs, mask, config)?;
    let m_l1 = l1_norm(&m);
    if m_l1 == 0.0 {
        return Ok(RecoveryResult::zero(n));
    }
    let mu = config.mu.unwrap_or((n * n) as f64 / (4.0 * m_l1));
    let inv_mu = 1.0 / mu;
    let scale = 1.0 + m.norm();
    let grid = mask.to_grid();

    let mut l = Matrix::zeros(n, n);
    // `S + Z` kept in one matrix: the entries on `O` are `S`, the rest `Z`.
    let mut sz = Matrix::zeros(n, n);
    let mut dual = Matrix::zeros(n, n);
    let mut history = Vec::new();
    let mut result = RecoveryResult::zero(n);
    result.converged = false;

    for iter in 1..=config.max_iters {
        let mut target = &m - &sz + &dual * inv_mu;
        let shrunk = svt_with_norm(&target, inv_mu)?;
        l = shrunk.matrix;

        // target becomes M - L + Y/mu
        target.copy_from(&m);
        target -= &l;
        target += &dual * inv_mu;
        let tau = config.lambda * inv_mu;
        let mut change = 0.0;
        let mut primal_sq = 0.0;
        let mut s_l1 = 0.0;
        for idx in 0..n * n {
            // nalgebra storage is column-major: idx = j * n + i
            let (i, j) = (idx % n, idx / n);
            let w = target[idx];
            let new = if grid[i * n + j] { shrink(w, tau) } else { w };
            let d = new - sz[idx];
            change += d * d;
            sz[idx] = new;
            let r = m[idx] - l[idx] - new;
            primal_sq += r * r;
            dual[idx] += mu * r;
            if grid[i * n + j] {
                s_l1 += new.abs();
            }
        }
        let objective = shrunk.nuclear_norm + config.lambda * s_l1;
        if config.record_history {
            history.push(objective);
        }
        let primal = primal_sq.sqrt();
        let dual_res = mu * change.sqrt();
        result.iterations = iter;
        result.primal_residual = primal;
        result.dual_residual = dual_res;
        result.objective = objective;
        if !primal.is_finite() || !dual_res.is_finite() {
            break;
        }
        if primal <= config.primal_tol * scale && dual_res <= config.dual_tol * scale {
            result.converged = true;
            break;
        }
    }

    let s = mask.apply(&sz);
    // The reported residual is the constraint violation on `O` only.
    result.primal_residual = mask.apply(&(&l + &s - &m)).norm();
    result.l = l;
    result.s = s;
    result.history = history;
    Ok(result)
}

/// Validates inputs and returns `P_O[Y]`.
pub(super) fn prepare(y_obs: &Matrix, mask: &SamplingMask, config: &SolverConfig) -> Result<Matrix> {
    config.validate()?;
    if mask.is_empty() {
        return Err(Error::input("observation mask is empty"));
    }
    check_square(y_obs, mask.n())?;
    let m = mask.apply(y_obs);
    check_finite(&m)?;
    Ok(m)
}
