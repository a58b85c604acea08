use super::{opnorm_pt_poc_pt, opnorm_pv_pt, raiip_estimate, raiip_upper_bound, PowerOptions, RaiipOptions};
use crate::error::{Error, Result};
use crate::harness::record::{Field, Record};
use crate::model::{incoherence, CorruptionModel, LowRankModel, SamplingMask};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionConfig {
    /// Stand-in for the unspecified small-corruption threshold.
    pub rho_threshold: f64,
    pub power: PowerOptions,
    pub raiip: RaiipOptions,
}

impl Default for ConditionConfig {
    fn default() -> Self {
        Self {
            rho_threshold: 0.1,
            power: PowerOptions::default(),
            raiip: RaiipOptions::default(),
        }
    }
}

/// Every hypothesis of the exact-recovery theorem that can be measured on an
/// instance. Estimator failures leave the field as NaN and are listed in
/// `failures`; a NaN field never passes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConditionReport {
    pub n: usize,
    pub rank: usize,
    pub nu: f64,
    /// Smallest coherence constant satisfying both incoherence bounds.
    pub nu_joint: f64,
    /// `nu_joint <= n / r`.
    pub nu_ok: bool,
    pub uv_inf: f64,
    /// Strengthened `|UV^T|_inf` bound evaluated at the row-norm `nu`.
    pub uv_inf_ok: bool,
    pub opnorm_pt_poc_pt: f64,
    pub gamma_eff: f64,
    /// Lower bound on the restricted infinity-norm of `P_T P_{O^perp}`.
    pub raiip_estimate: f64,
    /// Certified upper bound; below one proves the property.
    pub raiip_upper: f64,
    pub raiip_ok: bool,
    pub opnorm_pv_pt: f64,
    pub rho: f64,
    pub rho_threshold: f64,
    pub all_pass: bool,
    pub failures: Vec<String>,
}

pub fn check_conditions(
    model: &LowRankModel,
    mask: &SamplingMask,
    corruption: &CorruptionModel,
    config: &ConditionConfig,
) -> Result<ConditionReport> {
    let n = model.n();
    if mask.n() != n || corruption.n != n {
        return Err(Error::input(format!(
            "inconsistent sizes: model {n}, mask {}, corruption {}",
            mask.n(),
            corruption.n
        )));
    }
    let r = model.rank();
    let t = model.tangent();
    let inc = incoherence(model);
    let (v_set, _) = corruption.split(mask)?;
    let mut failures = Vec::new();
    let mut field = |name: &str, value: Result<f64>| match value {
        Ok(v) => v,
        Err(e) => {
            failures.push(format!("{name}: {e}"));
            f64::NAN
        }
    };

    let poc = field("opnorm_pt_poc_pt", opnorm_pt_poc_pt(&t, mask, &config.power));
    let gamma_eff = 1.0 - poc / 2.0;
    let raiip = field("raiip_estimate", raiip_estimate(&t, mask, &config.raiip));
    let raiip_upper = field("raiip_upper", raiip_upper_bound(&t, mask, config.raiip.exec));
    let pv_pt = field("opnorm_pv_pt", opnorm_pv_pt(&t, &v_set, &config.power));

    let nu_ok = inc.nu_joint <= n as f64 / r as f64;
    let raiip_ok = raiip < 1.0;
    let all_pass = nu_ok && gamma_eff > 0.75 && raiip_ok && corruption.rho < config.rho_threshold;
    Ok(ConditionReport {
        n,
        rank: r,
        nu: inc.nu,
        nu_joint: inc.nu_joint,
        nu_ok,
        uv_inf: inc.uv_inf,
        uv_inf_ok: inc.passes_strong,
        opnorm_pt_poc_pt: poc,
        gamma_eff,
        raiip_estimate: raiip,
        raiip_upper,
        raiip_ok,
        opnorm_pv_pt: pv_pt,
        rho: corruption.rho,
        rho_threshold: config.rho_threshold,
        all_pass,
        failures,
    })
}

impl Record for ConditionReport {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        vec![
            ("n", Field::Int(self.n as i64)),
            ("rank", Field::Int(self.rank as i64)),
            ("nu", Field::Float(self.nu)),
            ("nu_joint", Field::Float(self.nu_joint)),
            ("nu_ok", Field::Bool(self.nu_ok)),
            ("uv_inf", Field::Float(self.uv_inf)),
            ("uv_inf_ok", Field::Bool(self.uv_inf_ok)),
            ("opnorm_pt_poc_pt", Field::Float(self.opnorm_pt_poc_pt)),
            ("gamma_eff", Field::Float(self.gamma_eff)),
            ("raiip_estimate", Field::Float(self.raiip_estimate)),
            ("raiip_upper", Field::Float(self.raiip_upper)),
            ("raiip_ok", Field::Bool(self.raiip_ok)),
            ("opnorm_pv_pt", Field::Float(self.opnorm_pv_pt)),
            ("rho", Field::Float(self.rho)),
            ("rho_threshold", Field::Float(self.rho_threshold)),
            ("all_pass", Field::Bool(self.all_pass)),
            ("failures", Field::Text(self.failures.join("; "))),
        ]
    }
}
