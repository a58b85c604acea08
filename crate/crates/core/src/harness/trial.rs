use std::time::Instant;

use super::record::{Field, Record};
use super::{threads_for, ExperimentSpec};
use crate::certificate::{
    golfing_certificate, least_squares_certificate, verify_kkt, GolfingDiagnostics, GolfingOptions, KKTReport,
    LeastSquaresDiagnostics, Truncation,
};
use crate::conditions::{check_conditions, opnorm_nperp_pt, ConditionConfig, ConditionReport, PowerOptions, RaiipOptions};
use crate::error::Result;
use crate::model::{generate_corruption, generate_mask, generate_model, CorruptionModel, LowRankModel, ModelKind, SamplingMask};
use crate::par::Execution;
use crate::rng::{derive_seed, streams};
use crate::solver::{optimality_gap, solve_rmc, SolverConfig};

/// One row of an experiment table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub rank: usize,
    pub rho: f64,
    pub mask: String,
    pub rate: Option<f64>,
    pub model: ModelKind,
    pub lambda: f64,
    pub threads: usize,
    pub observed: usize,
    pub conditions: Option<ConditionReport>,
    /// `|L* - L0|_F / |L0|_F`.
    pub rel_error: f64,
    /// `|S* - S̄0|_F / (1 + |S̄0|_F)`.
    pub sparse_error: f64,
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub gap: f64,
    pub success: bool,
    pub kkt: Option<KKTReport>,
    /// `"ok"` or the first error met.
    pub status: String,
    /// Not part of the CSV row, which stays reproducible.
    pub wall_time_s: f64,
}

fn blank<R: Record + Default>(skip: &[&str]) -> Vec<(&'static str, Field)> {
    R::default()
        .fields()
        .into_iter()
        .filter(|(k, _)| !skip.contains(k))
        .map(|(k, _)| (k, Field::Text(String::new())))
        .collect()
}

const SHARED: [&str; 3] = ["n", "rank", "rho"];

impl Record for TrialRecord {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        let mut out = vec![
            ("seed", Field::Text(self.seed.to_string())),
            ("n", Field::Int(self.n as i64)),
            ("rank", Field::Int(self.rank as i64)),
            ("rho", Field::Float(self.rho)),
            ("mask", Field::Text(self.mask.clone())),
            ("rate", self.rate.map_or(Field::Text(String::new()), Field::Float)),
            ("model", Field::Text(format!("{:?}", self.model).to_lowercase())),
            ("lambda", Field::Float(self.lambda)),
            ("threads", Field::Int(self.threads as i64)),
            ("observed", Field::Int(self.observed as i64)),
        ];
        match &self.conditions {
            Some(c) => out.extend(c.fields().into_iter().filter(|(k, _)| !SHARED.contains(k))),
            None => out.extend(blank::<ConditionReport>(&SHARED)),
        }
        out.extend([
            ("rel_error", Field::Float(self.rel_error)),
            ("sparse_error", Field::Float(self.sparse_error)),
            ("converged", Field::Bool(self.converged)),
            ("iterations", Field::Int(self.iterations as i64)),
            ("objective", Field::Float(self.objective)),
            ("gap", Field::Float(self.gap)),
            ("success", Field::Bool(self.success)),
        ]);
        match &self.kkt {
            Some(k) => out.extend(k.fields()),
            None => out.extend(blank::<KKTReport>(&[])),
        }
        out.push(("status", Field::Text(self.status.clone())));
        out
    }
}

/// Everything [`verify_pipeline`] measured on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub record: TrialRecord,
    pub golfing: Option<GolfingDiagnostics>,
    pub least_squares: Option<LeastSquaresDiagnostics>,
    /// `|P_{N^perp} P_T|`.
    pub nperp_pt: f64,
    /// `Some(holds)` when the certificate passes and `|P_{N^perp} P_T| < 1`,
    /// i.e. when exact recovery is implied.
    pub implication: Option<bool>,
    /// Certificate conditions that failed.
    pub failed_margins: Vec<String>,
}

impl PipelineReport {
    /// A passing certificate paired with a failed recovery.
    pub fn is_counterexample(&self) -> bool {
        self.implication == Some(false)
    }
}

impl Record for PipelineReport {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        let mut out = self.record.fields();
        let status = out.pop();
        match &self.golfing {
            Some(g) => out.extend(g.fields()),
            None => out.extend(blank::<GolfingDiagnostics>(&[])),
        }
        match &self.least_squares {
            Some(l) => out.extend(l.fields()),
            None => out.extend(blank::<LeastSquaresDiagnostics>(&[])),
        }
        out.push(("nperp_pt", Field::Float(self.nperp_pt)));
        out.push((
            "implication",
            Field::Text(match self.implication {
                Some(true) => "holds".into(),
                Some(false) => "violated".into(),
                None => "vacuous".into(),
            }),
        ));
        out.push(("failed_margins", Field::Text(self.failed_margins.join(" "))));
        out.extend(status);
        out
    }
}

/// The model, mask and corruption of trial `seed`, each drawn from its own
/// named stream of the seed.
pub fn generate_instance(spec: &ExperimentSpec, seed: u64) -> Result<(LowRankModel, SamplingMask, CorruptionModel)> {
    let model = generate_model(spec.n, spec.rank, spec.model_kind, derive_seed(seed, streams::MODEL))?;
    let mask = generate_mask(spec.n, &spec.mask.kind(derive_seed(seed, streams::MASK)))?;
    let corruption = generate_corruption(
        spec.n,
        spec.rho,
        spec.magnitude_scale,
        derive_seed(seed, streams::CORRUPTION),
    )?;
    Ok((model, mask, corruption))
}

/// Generates the instance for `seed`, solves it and scores the result.
/// Failures are recorded in `status`; the function itself only errs on an
/// invalid spec.
pub fn run_trial(spec: &ExperimentSpec, seed: u64) -> Result<TrialRecord> {
    execute(spec, seed, false).map(|r| r.record)
}

/// [`run_trial`] plus golfing and least-squares certificates, KKT
/// verification and the cross-check between certificate and recovery.
pub fn verify_pipeline(spec: &ExperimentSpec, seed: u64) -> Result<PipelineReport> {
    let mut spec = spec.clone();
    spec.stages.certificate = true;
    execute(&spec, seed, true)
}

fn execute(spec: &ExperimentSpec, seed: u64, detailed: bool) -> Result<PipelineReport> {
    spec.validate()?;
    let start = Instant::now();
    let lambda = spec.lambda();
    let mut record = TrialRecord {
        seed,
        n: spec.n,
        rank: spec.rank,
        rho: spec.rho,
        mask: spec.mask.label(),
        rate: spec.mask.rate(),
        model: spec.model_kind,
        lambda,
        threads: threads_for(spec.exec),
        observed: 0,
        conditions: None,
        rel_error: f64::NAN,
        sparse_error: f64::NAN,
        converged: false,
        iterations: 0,
        objective: f64::NAN,
        gap: f64::NAN,
        success: false,
        kkt: None,
        status: "ok".into(),
        wall_time_s: 0.0,
    };
    let mut report = PipelineReport {
        record: record.clone(),
        golfing: None,
        least_squares: None,
        nperp_pt: f64::NAN,
        implication: None,
        failed_margins: Vec::new(),
    };
    let note = |status: &mut String, stage: &str, e: &dyn std::fmt::Display| {
        if status == "ok" {
            *status = format!("{stage}: {e}");
        }
    };

    let generated = generate_instance(spec, seed);
    let (model, mask, corruption) = match generated {
        Ok(v) => v,
        Err(e) => {
            note(&mut record.status, "generate", &e);
            record.wall_time_s = start.elapsed().as_secs_f64();
            report.record = record;
            return Ok(report);
        }
    };
    record.observed = mask.len();
    let power = PowerOptions::default().with_seed(derive_seed(seed, streams::CONDITIONS));

    if spec.stages.conditions {
        let config = ConditionConfig {
            power,
            raiip: RaiipOptions {
                seed: derive_seed(seed, streams::CONDITIONS),
                exec: Execution::Sequential,
                ..Default::default()
            },
            ..Default::default()
        };
        match check_conditions(&model, &mask, &corruption, &config) {
            Ok(c) => record.conditions = Some(c),
            Err(e) => note(&mut record.status, "conditions", &e),
        }
    }

    let l0 = model.matrix();
    let y = &l0 + corruption.matrix();
    let solver = SolverConfig {
        lambda,
        ..spec.solver
    };
    let s0_bar = corruption.observed(&mask)?;
    match solve_rmc(&y, &mask, &solver) {
        Ok(res) => {
            record.rel_error = (&res.l - &l0).norm() / l0.norm();
            record.sparse_error = (&res.s - &s0_bar).norm() / (1.0 + s0_bar.norm());
            record.converged = res.converged;
            record.iterations = res.iterations;
            record.objective = res.objective;
            record.gap = optimality_gap(&res, &l0, &s0_bar, lambda);
            record.success = res.converged && record.rel_error <= spec.success_tol;
        }
        Err(e) => note(&mut record.status, "solve", &e),
    }

    if spec.stages.certificate {
        let t = model.tangent();
        let certified = (|| {
            let (v_set, n_set) = corruption.split(&mask)?;
            let sigma_bar = corruption.observed_signs(&mask)?;
            let golf_opts = GolfingOptions {
                seed: derive_seed(seed, streams::CERTIFICATE),
                measure_deviation: detailed,
                power,
                ..Default::default()
            };
            let (lambda_l, golf) = golfing_certificate(&t, &mask, corruption.support(), corruption.rho, &golf_opts)?;
            report.golfing = Some(golf);
            let (lambda_s, ls) =
                least_squares_certificate(&t, &mask, &v_set, &sigma_bar, lambda, Truncation::Adaptive, &power)?;
            report.least_squares = Some(ls);
            let kkt = verify_kkt(&(lambda_l + lambda_s), &t, &v_set, &n_set, &sigma_bar, lambda)?;
            report.nperp_pt = opnorm_nperp_pt(&t, &n_set, &power)?;
            Ok::<_, crate::Error>(kkt)
        })();
        match certified {
            Ok(kkt) => {
                report.failed_margins = kkt.failures().iter().map(|s| s.to_string()).collect();
                if kkt.pass && report.nperp_pt < 1.0 {
                    report.implication = Some(record.success);
                }
                record.kkt = Some(kkt);
            }
            Err(e) => note(&mut record.status, "certificate", &e),
        }
    }

    record.wall_time_s = start.elapsed().as_secs_f64();
    report.record = record;
    Ok(report)
}
