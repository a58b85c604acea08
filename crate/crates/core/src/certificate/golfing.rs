use rand::Rng as _;

use crate::conditions::{batch_deviation_map, operator_norm_from, PowerOptions};
use crate::error::{Error, Result};
use crate::harness::record::{Field, Record};
use crate::model::{inf_norm, spectral_norm, IndexSet, Matrix, SamplingMask, TangentSpace};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GolfingOptions {
    /// Number of batches; `None` means `ceil(5 ln n)`.
    pub batches: Option<usize>,
    pub seed: u64,
    /// Measure `|P_T - eta^{-1} P_T P_O P_{M_i} P_T|` for every batch.
    pub measure_deviation: bool,
    pub power: PowerOptions,
}

pub fn default_batches(n: usize) -> usize {
    ((5.0 * (n as f64).ln()).ceil() as usize).max(1)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GolfingDiagnostics {
    pub batches: usize,
    pub eta: f64,
    pub batch_sizes: Vec<usize>,
    /// `|D_i|_F` for `i = 0..=k`.
    pub d_norms: Vec<f64>,
    /// Per-batch deviation norms; empty unless requested.
    pub deviations: Vec<f64>,
    /// `|Lambda_k|_inf`.
    pub lambda_inf: f64,
    /// `|P_{T^perp}[Lambda_k]|` (spectral).
    pub t_perp_op: f64,
    /// `|D_i|_F` grew three times in a row.
    pub diverged: bool,
}

impl GolfingDiagnostics {
    pub fn final_residual(&self) -> f64 {
        *self.d_norms.last().unwrap_or(&f64::NAN)
    }
}

impl Record for GolfingDiagnostics {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        let max_dev = self.deviations.iter().copied().fold(f64::NAN, f64::max);
        vec![
            ("golf_batches", Field::Int(self.batches as i64)),
            ("golf_eta", Field::Float(self.eta)),
            ("golf_d0", Field::Float(self.d_norms.first().copied().unwrap_or(f64::NAN))),
            ("golf_dk", Field::Float(self.final_residual())),
            ("golf_max_deviation", Field::Float(max_dev)),
            ("golf_lambda_inf", Field::Float(self.lambda_inf)),
            ("golf_t_perp_op", Field::Float(self.t_perp_op)),
            ("golf_diverged", Field::Bool(self.diverged)),
        ]
    }
}

/// Draws `k` batches whose union is exactly the complement of `w`.
///
/// Each cell outside `w` gets `k` independent `Bernoulli(eta)` indicators
/// conditioned on not all being zero, so each batch is marginally close to
/// `Bernoulli(eta)` and together they reproduce `W^perp = M_1 ∪ ... ∪ M_k`.
pub fn draw_batches(w: &IndexSet, k: usize, eta: f64, seed: u64) -> Vec<IndexSet> {
    let n = w.n();
    let mut rng = rng_from_seed(seed);
    let mut members: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
    let mut picks = vec![false; k];
    for i in 0..n {
        for j in 0..n {
            if w.contains(i, j) {
                continue;
            }
            loop {
                let mut any = false;
                for p in picks.iter_mut() {
                    *p = eta >= 1.0 || rng.random::<f64>() < eta;
                    any |= *p;
                }
                if any {
                    break;
                }
            }
            for (b, &p) in picks.iter().enumerate() {
                if p {
                    members[b].push((i, j));
                }
            }
        }
    }
    members
        .into_iter()
        .map(|m| IndexSet::new(n, m).expect("row-major cells are valid"))
        .collect()
}

/// Golfing construction of `Lambda_L`.
///
/// With `Lambda_0 = 0` and `D_0 = -UV^T`, each batch updates
/// `Lambda_i = Lambda_{i-1} - eta^{-1} P_O P_{M_i}[D_{i-1}]` and
/// `D_i = P_T P_O P_M[Lambda_i] - UV^T`, where `M` is the complement of the
/// corruption support `w` and `eta = 1 - rho^{1/k}`. Returns
/// `Lambda_L = P_N[Lambda_k]` with `N = O \ W`.
///
/// When deviations are measured, the power iteration for batch `i` is
/// started from `D_{i-1}`; its first estimate is `|D_i|_F / |D_{i-1}|_F` and
/// later ones never decrease, so the reported deviation always bounds the
/// observed step ratio.
pub fn golfing_certificate(
    t: &TangentSpace,
    mask: &SamplingMask,
    w: &IndexSet,
    rho: f64,
    opts: &GolfingOptions,
) -> Result<(Matrix, GolfingDiagnostics)> {
    let n = t.n();
    if mask.n() != n || w.n() != n {
        return Err(Error::Shape {
            expected: (n, n),
            found: (mask.n(), w.n()),
        });
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param(format!("rho {rho} outside [0, 1)")));
    }
    let k = opts.batches.unwrap_or_else(|| default_batches(n));
    if k == 0 {
        return Err(Error::param("golfing needs at least one batch"));
    }
    let eta = 1.0 - rho.powf(1.0 / k as f64);
    let batches = draw_batches(w, k, eta, opts.seed);
    let m_set = w.complement();
    let n_set = mask.difference(w)?;
    let uv = t.uv_t();

    let mut lambda = Matrix::zeros(n, n);
    let mut d = -&uv;
    let mut d_norms = vec![d.norm()];
    let mut deviations = Vec::new();
    let mut increases = 0;
    let mut diverged = false;
    for batch in &batches {
        let step = mask.apply(&batch.apply(&d)) / eta;
        lambda -= step;
        let d_next = t.apply(&mask.apply(&m_set.apply(&lambda))) - &uv;
        if opts.measure_deviation {
            let c = operator_norm_from(
                |x| batch_deviation_map(t, mask, batch, eta, x),
                d.clone(),
                &opts.power,
            )?;
            deviations.push(c);
        }
        let norm = d_next.norm();
        if norm > *d_norms.last().unwrap() {
            increases += 1;
            diverged |= increases >= 3;
        } else {
            increases = 0;
        }
        d_norms.push(norm);
        d = d_next;
    }

    let lambda_inf = inf_norm(&lambda);
    let t_perp_op = spectral_norm(&t.apply_complement(&lambda));
    let lambda_l = n_set.apply(&lambda);
    Ok((
        lambda_l,
        GolfingDiagnostics {
            batches: k,
            eta,
            batch_sizes: batches.iter().map(IndexSet::len).collect(),
            d_norms,
            deviations,
            lambda_inf,
            t_perp_op,
            diverged,
        },
    ))
}
