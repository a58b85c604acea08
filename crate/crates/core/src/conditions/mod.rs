//! Estimators for the quantitative recovery conditions.
//!
//! Isomerism enters the recovery argument only through the bound
//! `|P_T P_{O^perp} P_T| <= 2 (1 - gamma)`, so it is operationalized here as
//! `gamma_eff = 1 - |P_T P_{O^perp} P_T| / 2`; `gamma_eff > 3/4` is the same
//! statement as `|P_T P_{O^perp} P_T| < 1/2`. Relative well-conditionedness is
//! not estimated separately.

mod power;
mod raiip;
mod report;

pub use power::{operator_norm, operator_norm_from, operator_norm_general, PowerOptions};
pub use raiip::{raiip_estimate, raiip_upper_bound, restricted_ratio, RaiipOptions};
pub use report::{check_conditions, ConditionConfig, ConditionReport};

use crate::error::{Error, Result};
use crate::model::{check_square, inf_norm, IndexSet, Matrix, SamplingMask, TangentSpace};

fn check_set(t: &TangentSpace, set: &IndexSet) -> Result<()> {
    if set.n() != t.n() {
        return Err(Error::Shape {
            expected: (t.n(), t.n()),
            found: (set.n(), set.n()),
        });
    }
    Ok(())
}

/// `|P_T P_{O^perp} P_T|`.
pub fn opnorm_pt_poc_pt(t: &TangentSpace, mask: &SamplingMask, opts: &PowerOptions) -> Result<f64> {
    check_set(t, mask)?;
    operator_norm(t.n(), |x| t.apply(&mask.apply_complement(&t.apply(x))), opts)
}

/// `gamma_eff = 1 - |P_T P_{O^perp} P_T| / 2`.
pub fn gamma_isomeric(t: &TangentSpace, mask: &SamplingMask, opts: &PowerOptions) -> Result<f64> {
    Ok(1.0 - opnorm_pt_poc_pt(t, mask, opts)? / 2.0)
}

/// `|P_S P_T| = sqrt(|P_T P_S P_T|)` for an index set `S`.
pub fn opnorm_set_pt(t: &TangentSpace, set: &IndexSet, opts: &PowerOptions) -> Result<f64> {
    check_set(t, set)?;
    if set.is_empty() {
        return Ok(0.0);
    }
    operator_norm(t.n(), |x| t.apply(&set.apply(&t.apply(x))), opts).map(f64::sqrt)
}

/// `|P_V P_T|` for the corrupted observed set `V`.
pub fn opnorm_pv_pt(t: &TangentSpace, v_set: &IndexSet, opts: &PowerOptions) -> Result<f64> {
    opnorm_set_pt(t, v_set, opts)
}

/// `|P_{N^perp} P_T|`; below one means `N^perp ∩ T = {0}`.
pub fn opnorm_nperp_pt(t: &TangentSpace, n_set: &IndexSet, opts: &PowerOptions) -> Result<f64> {
    opnorm_set_pt(t, &n_set.complement(), opts)
}

fn check_pi(pi: f64) -> Result<()> {
    if pi > 0.0 && pi <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("batch probability {pi} outside (0, 1]")))
    }
}

/// `P_T - pi^{-1} P_T P_O P_M P_T` applied to `x`.
pub(crate) fn batch_deviation_map(
    t: &TangentSpace,
    mask: &SamplingMask,
    batch: &IndexSet,
    pi: f64,
    x: &Matrix,
) -> Matrix {
    let tx = t.apply(x);
    let sampled = mask.apply(&batch.apply(&tx));
    &tx - t.apply(&sampled) / pi
}

/// `|P_T - pi^{-1} P_T P_O P_M P_T|`.
pub fn prop1_deviation(
    t: &TangentSpace,
    mask: &SamplingMask,
    batch: &IndexSet,
    pi: f64,
    opts: &PowerOptions,
) -> Result<f64> {
    check_pi(pi)?;
    check_set(t, mask)?;
    check_set(t, batch)?;
    operator_norm(t.n(), |x| batch_deviation_map(t, mask, batch, pi, x), opts)
}

/// `|(I - pi^{-1} P_T P_O P_M)[D]|_inf / |D|_inf` with `D` first projected onto `T`.
pub fn prop2_contraction(
    t: &TangentSpace,
    mask: &SamplingMask,
    batch: &IndexSet,
    pi: f64,
    d: &Matrix,
) -> Result<f64> {
    check_pi(pi)?;
    check_set(t, mask)?;
    check_set(t, batch)?;
    check_square(d, t.n())?;
    let d = t.apply(d);
    let denom = inf_norm(&d);
    if denom == 0.0 {
        return Err(Error::input("prop2_contraction needs a nonzero tangent matrix"));
    }
    let out = &d - t.apply(&mask.apply(&batch.apply(&d))) / pi;
    Ok(inf_norm(&out) / denom)
}

/// `(|P_T[P]|_F, (n+1)|P_N[P]|_F + n |P_{T^perp}[P]|_F)`; the recovery
/// argument needs `lhs <= rhs`.
pub fn prop3_inequality(t: &TangentSpace, n_set: &IndexSet, p: &Matrix) -> Result<(f64, f64)> {
    check_set(t, n_set)?;
    check_square(p, t.n())?;
    let n = t.n() as f64;
    let tp = t.apply(p);
    let lhs = tp.norm();
    let rhs = (n + 1.0) * n_set.apply(p).norm() + n * (p - tp).norm();
    Ok((lhs, rhs))
}
