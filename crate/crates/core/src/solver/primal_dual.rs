use super::admm::prepare;
use super::prox::{shrink, svt_with_norm};
use super::{RecoveryResult, SolverConfig};
use crate::error::Result;
use crate::model::{Matrix, SamplingMask};

/// Primal-dual hybrid gradient on the saddle point
/// `min_{L,S} max_P |L|_* + lambda |S|_1 + <P, P_O[L] + S - P_O[Y]>` with `S`
/// and `P` living on `O`.
///
/// The coupling operator `(L, S) -> P_O[L] + S` has norm `sqrt(2)`, so steps
/// satisfy `tau * sigma * 2 < 1`. `mu` (or its default) sets the ratio
/// `tau / sigma`, balancing primal against dual scale.
pub fn solve_rmc_reference(
    y_obs: &Matrix,
    mask: &SamplingMask,
    config: &SolverConfig,
) -> Result<RecoveryResult> {
    let n = mask.n();
    let m = prepare(y_obs, mask, config)?;
    let m_norm = m.norm();
    if m_norm == 0.0 {
        return Ok(RecoveryResult::zero(n));
    }
    // A dual optimum has entries of size about lambda on O.
    let ratio = config
        .mu
        .map(|mu| 1.0 / mu)
        .unwrap_or(m_norm / (config.lambda * (mask.len() as f64).sqrt()));
    let tau = 0.99 * ratio.sqrt() / 2f64.sqrt();
    let sigma = 0.99 / (ratio.sqrt() * 2f64.sqrt());
    let scale = 1.0 + m_norm;
    let grid = mask.to_grid();
    let on = |idx: usize| grid[(idx % n) * n + idx / n];

    let mut l = Matrix::zeros(n, n);
    let mut s = Matrix::zeros(n, n);
    let mut p = Matrix::zeros(n, n);
    let mut history = Vec::new();
    let mut result = RecoveryResult::zero(n);
    result.converged = false;

    for iter in 1..=config.max_iters {
        let shrunk = svt_with_norm(&(&l - &p * tau), tau)?;
        let l_new = shrunk.matrix;
        let mut s_new = Matrix::zeros(n, n);
        let mut s_l1 = 0.0;
        for idx in 0..n * n {
            if on(idx) {
                let v = shrink(s[idx] - tau * p[idx], tau * config.lambda);
                s_new[idx] = v;
                s_l1 += v.abs();
            }
        }

        // Residuals of the optimality system, measured in the same units as
        // the constraint.
        let mut dual_sq = 0.0;
        let mut primal_sq = 0.0;
        let mut p_change_sq = 0.0;
        let mut feas_sq = 0.0;
        for idx in 0..n * n {
            let dl = l[idx] - l_new[idx];
            let ds = s[idx] - s_new[idx];
            let bar_l = 2.0 * l_new[idx] - l[idx];
            let bar_s = 2.0 * s_new[idx] - s[idx];
            if on(idx) {
                let step = sigma * (bar_l + bar_s - m[idx]);
                p[idx] += step;
                p_change_sq += step * step;
                let r = l_new[idx] + s_new[idx] - m[idx];
                feas_sq += r * r;
                primal_sq += dl * dl + ds * ds;
                let k = dl + ds;
                dual_sq += k * k;
            } else {
                primal_sq += dl * dl;
            }
        }
        l = l_new;
        s = s_new;

        let objective = shrunk.nuclear_norm + config.lambda * s_l1;
        if config.record_history {
            history.push(objective);
        }
        let primal = feas_sq.sqrt();
        let dual_res = primal_sq.sqrt() / tau + p_change_sq.sqrt() / sigma + dual_sq.sqrt();
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

    result.l = l;
    result.s = mask.apply(&s);
    result.history = history;
    Ok(result)
}
