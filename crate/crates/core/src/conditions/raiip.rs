//! Lower-bound estimation of the restricted infinity-norm
//! `sup_{D in T} |P_T P_{O^perp}[D]|_inf / |D|_inf`.
//!
//! For a fixed output entry `(a, b)` the supremum is the linear program
//! `max <h_ab, D>` over `D in T, |D|_inf <= 1` with
//! `h_ab = P_T P_{O^perp} P_T[E_ab]`, whose dual is the basis-pursuit problem
//! `min |Z|_1 s.t. P_T[Z] = h_ab`. Each restart runs a sign-pattern ascent to
//! pick a promising entry and then polishes with ADMM on the dual; the
//! multiplier, projected onto `T`, is a feasible `D`. Every reported value is
//! the exact ratio at some `D in T`, so the estimate is a lower bound.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{inf_norm, l1_norm, unit, Matrix, SamplingMask, TangentSpace};
use crate::par::{map_indexed, Execution};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaiipOptions {
    pub restarts: usize,
    pub ascent_iters: usize,
    /// ADMM iterations on the per-entry dual problem; 0 disables polishing.
    pub polish_iters: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for RaiipOptions {
    fn default() -> Self {
        Self {
            restarts: 100,
            ascent_iters: 20,
            polish_iters: 100,
            seed: 0,
            exec: Execution::Parallel,
        }
    }
}

const MAX_REDRAWS: usize = 8;
const POLISH_EVERY: usize = 10;

/// `|P_T P_{O^perp}[D]|_inf / |D|_inf`.
pub fn restricted_ratio(t: &TangentSpace, mask: &SamplingMask, d: &Matrix) -> f64 {
    let denom = inf_norm(d);
    if denom == 0.0 {
        return 0.0;
    }
    inf_norm(&t.apply(&mask.apply_complement(d))) / denom
}

/// Ratio at `d` together with the signed largest output entry.
fn evaluate(t: &TangentSpace, mask: &SamplingMask, d: &Matrix) -> (f64, (usize, usize), f64) {
    let out = t.apply(&mask.apply_complement(d));
    let n = t.n();
    let (mut arg, mut val) = ((0, 0), 0.0_f64);
    for j in 0..n {
        for i in 0..n {
            if out[(i, j)].abs() > val.abs() {
                val = out[(i, j)];
                arg = (i, j);
            }
        }
    }
    let denom = inf_norm(d);
    let ratio = if denom > 0.0 { val.abs() / denom } else { 0.0 };
    (ratio, arg, val)
}

fn signs(x: &Matrix, s: f64) -> Matrix {
    x.map(|g| s * sign(g))
}

/// Best ratio from the `restart`-th start. Randomness is addressed by
/// `(seed, restart)` only.
fn single_restart(t: &TangentSpace, mask: &SamplingMask, opts: &RaiipOptions, restart: usize) -> Result<f64> {
    let n = t.n();
    let mut rng = rng_from_seed(derive_seed(opts.seed, restart as u64));
    let mut d = None;
    for _ in 0..MAX_REDRAWS {
        let g: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
        let cand = t.apply(&Matrix::from_row_slice(n, n, &g));
        let scale = inf_norm(&cand);
        if scale > 0.0 && scale.is_finite() {
            d = Some(cand / scale);
            break;
        }
    }
    let mut d = d.ok_or_else(|| Error::Sampling("every tangent draw was zero".into()))?;

    let (mut best, mut best_entry) = (0.0_f64, (0, 0));
    for step in 0..=opts.ascent_iters {
        let (ratio, arg, val) = evaluate(t, mask, &d);
        if ratio > best {
            best = ratio;
            best_entry = arg;
        }
        if step == opts.ascent_iters || val == 0.0 {
            break;
        }
        // entry (a, b) of the output is <G, D> with G = P_{O^perp} P_T[E_ab];
        // on T this equals <P_T G, D>, so both sign patterns are candidates
        let grad = mask.apply_complement(&t.apply(&unit(n, arg.0, arg.1)));
        let mut next: Option<(f64, Matrix)> = None;
        for pattern in [signs(&grad, val.signum()), signs(&t.apply(&grad), val.signum())] {
            let cand = t.apply(&pattern);
            let scale = inf_norm(&cand);
            if scale == 0.0 {
                continue;
            }
            let cand = cand / scale;
            let r = evaluate(t, mask, &cand).0;
            if next.as_ref().is_none_or(|(b, _)| r > *b) {
                next = Some((r, cand));
            }
        }
        match next {
            Some((_, cand)) => d = cand,
            None => break,
        }
    }
    if opts.polish_iters > 0 && best > 0.0 {
        best = best.max(polish(t, mask, best_entry, opts.polish_iters));
    }
    Ok(best)
}

/// ADMM on `min |W|_1 s.t. W = Z, P_T[Z] = h` for the entry `e`; returns the
/// best ratio seen at the projected multiplier.
fn polish(t: &TangentSpace, mask: &SamplingMask, e: (usize, usize), iters: usize) -> f64 {
    let n = t.n();
    let h = t.apply(&mask.apply_complement(&t.apply(&unit(n, e.0, e.1))));
    let mass = l1_norm(&h);
    if mass == 0.0 {
        return 0.0;
    }
    let rho = 0.1 * (n * n) as f64 / mass;
    let mut w = h.clone();
    let mut u = Matrix::zeros(n, n);
    let mut best = 0.0_f64;
    for k in 1..=iters {
        let a = &w - &u;
        let z = &a - t.apply(&a) + &h;
        let zu = &z + &u;
        w = zu.map(|v| v.signum() * (v.abs() - 1.0 / rho).max(0.0));
        u += &z - &w;
        if k % POLISH_EVERY == 0 || k == iters {
            best = best.max(restricted_ratio(t, mask, &t.apply(&u)));
        }
    }
    best
}

/// Max over restarts. Monotone in `restarts` for a fixed seed, and
/// independent of the execution mode.
pub fn raiip_estimate(t: &TangentSpace, mask: &SamplingMask, opts: &RaiipOptions) -> Result<f64> {
    if opts.restarts == 0 {
        return Err(Error::param("raiip_estimate needs at least one restart"));
    }
    if mask.n() != t.n() {
        return Err(Error::Shape {
            expected: (t.n(), t.n()),
            found: (mask.n(), mask.n()),
        });
    }
    if mask.len() == t.n() * t.n() {
        return Ok(0.0);
    }
    let per_restart = map_indexed(opts.exec, opts.restarts, |k| single_restart(t, mask, opts, k));
    per_restart
        .into_iter()
        .try_fold(0.0_f64, |best, r| r.map(|v| best.max(v)))
}

/// Certified upper bound on the restricted infinity-norm: for each entry,
/// both `P_{O^perp} P_T[E_ab]` and `h_ab` are feasible for the dual problem,
/// so the smaller of their l1 norms bounds that entry's supremum.
pub fn raiip_upper_bound(t: &TangentSpace, mask: &SamplingMask, exec: Execution) -> Result<f64> {
    if mask.n() != t.n() {
        return Err(Error::Shape {
            expected: (t.n(), t.n()),
            found: (mask.n(), mask.n()),
        });
    }
    let n = t.n();
    if mask.len() == n * n {
        return Ok(0.0);
    }
    let per_entry = map_indexed(exec, n * n, |k| {
        let g = mask.apply_complement(&t.apply(&unit(n, k % n, k / n)));
        l1_norm(&g).min(l1_norm(&t.apply(&g)))
    });
    Ok(per_entry.into_iter().fold(0.0_f64, f64::max))
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
