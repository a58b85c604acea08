use super::record::{to_csv, Field, Record};
use super::{run_trial, ExperimentSpec, MaskSpec, TrialRecord};
use crate::error::{Error, Result};
use crate::par::map_indexed;

/// Parameter grid; every combination is a cell and each cell runs every seed
/// of the base spec.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub rhos: Vec<f64>,
    /// Bernoulli sampling rates.
    pub rates: Vec<f64>,
    pub ranks: Vec<usize>,
}

impl SweepGrid {
    fn cells(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        for &rank in &self.ranks {
            for &rate in &self.rates {
                for &rho in &self.rhos {
                    out.push((rho, rate, rank));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub rho: f64,
    pub rate: f64,
    pub rank: usize,
    pub trials: usize,
    pub successes: usize,
    pub fraction: f64,
    pub kkt_passes: usize,
    pub conditions_passing: usize,
    pub errors: usize,
}

impl Record for CellSummary {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        vec![
            ("rho", Field::Float(self.rho)),
            ("rate", Field::Float(self.rate)),
            ("rank", Field::Int(self.rank as i64)),
            ("trials", Field::Int(self.trials as i64)),
            ("successes", Field::Int(self.successes as i64)),
            ("fraction", Field::Float(self.fraction)),
            ("kkt_passes", Field::Int(self.kkt_passes as i64)),
            ("conditions_passing", Field::Int(self.conditions_passing as i64)),
            ("errors", Field::Int(self.errors as i64)),
        ]
    }
}

/// Soft monotonicity of the success fraction: non-increasing in `rho` and
/// non-decreasing in the sampling rate, allowing at most one inversion of
/// size at most `0.1` per slice.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrendCheck {
    pub rho_inversions: usize,
    pub rho_max_inversion: f64,
    pub rho_ok: bool,
    pub rate_inversions: usize,
    pub rate_max_inversion: f64,
    pub rate_ok: bool,
}

impl Record for TrendCheck {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        vec![
            ("rho_inversions", Field::Int(self.rho_inversions as i64)),
            ("rho_max_inversion", Field::Float(self.rho_max_inversion)),
            ("rho_ok", Field::Bool(self.rho_ok)),
            ("rate_inversions", Field::Int(self.rate_inversions as i64)),
            ("rate_max_inversion", Field::Float(self.rate_max_inversion)),
            ("rate_ok", Field::Bool(self.rate_ok)),
        ]
    }
}

pub const TREND_SLACK: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
    pub trend: TrendCheck,
}

impl SweepResult {
    pub fn records_csv(&self) -> String {
        to_csv(&self.records)
    }

    pub fn summary_csv(&self) -> String {
        to_csv(&self.summary)
    }
}

/// Runs every `(cell, seed)` pair. Trials are distributed according to
/// `spec.exec`; rows come back in grid order (rank, rate, rho, seed).
pub fn run_sweep(spec: &ExperimentSpec, grid: &SweepGrid) -> Result<SweepResult> {
    if grid.rhos.is_empty() || grid.rates.is_empty() || grid.ranks.is_empty() {
        return Err(Error::param("sweep grid is empty"));
    }
    let cells = grid.cells();
    let specs: Vec<ExperimentSpec> = cells
        .iter()
        .map(|&(rho, rate, rank)| ExperimentSpec {
            rho,
            rank,
            mask: MaskSpec::Bernoulli(rate),
            ..spec.clone()
        })
        .collect();
    for s in &specs {
        s.validate()?;
    }
    let per_cell = spec.seeds.len();
    let records = map_indexed(spec.exec, cells.len() * per_cell, |k| {
        let cell = &specs[k / per_cell];
        run_trial(cell, spec.seeds[k % per_cell])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let summary: Vec<CellSummary> = cells
        .iter()
        .zip(records.chunks(per_cell))
        .map(|(&(rho, rate, rank), rows)| {
            let successes = rows.iter().filter(|r| r.success).count();
            CellSummary {
                rho,
                rate,
                rank,
                trials: rows.len(),
                successes,
                fraction: successes as f64 / rows.len() as f64,
                kkt_passes: rows.iter().filter(|r| r.kkt.as_ref().is_some_and(|k| k.pass)).count(),
                conditions_passing: rows
                    .iter()
                    .filter(|r| r.conditions.as_ref().is_some_and(|c| c.all_pass))
                    .count(),
                errors: rows.iter().filter(|r| r.status != "ok").count(),
            }
        })
        .collect();
    let trend = trend_check(&summary);
    Ok(SweepResult {
        records,
        summary,
        trend,
    })
}

/// Counts trend inversions over the summary table.
pub fn trend_check(summary: &[CellSummary]) -> TrendCheck {
    // (count, max size) of increases along `key` within slices fixed by `group`
    fn scan(
        summary: &[CellSummary],
        group: impl Fn(&CellSummary) -> (u64, usize),
        key: impl Fn(&CellSummary) -> f64,
        sign: f64,
    ) -> (usize, f64) {
        let mut slices: Vec<((u64, usize), Vec<(f64, f64)>)> = Vec::new();
        for c in summary {
            let g = group(c);
            match slices.iter_mut().find(|(k, _)| *k == g) {
                Some((_, v)) => v.push((key(c), c.fraction)),
                None => slices.push((g, vec![(key(c), c.fraction)])),
            }
        }
        let mut count = 0;
        let mut worst = 0.0f64;
        for (_, mut v) in slices {
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in v.windows(2) {
                let rise = sign * (w[1].1 - w[0].1);
                if rise > 0.0 {
                    count += 1;
                    worst = worst.max(rise);
                }
            }
        }
        (count, worst)
    }
    let (rho_inversions, rho_max_inversion) = scan(summary, |c| (c.rate.to_bits(), c.rank), |c| c.rho, 1.0);
    let (rate_inversions, rate_max_inversion) = scan(summary, |c| (c.rho.to_bits(), c.rank), |c| c.rate, -1.0);
    TrendCheck {
        rho_inversions,
        rho_max_inversion,
        rho_ok: rho_inversions <= 1 && rho_max_inversion <= TREND_SLACK,
        rate_inversions,
        rate_max_inversion,
        rate_ok: rate_inversions <= 1 && rate_max_inversion <= TREND_SLACK,
    }
}
