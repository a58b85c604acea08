use crate::error::{Error, Result};
use crate::harness::record::{Field, Record};
use crate::model::{check_square, inf_norm, spectral_norm, IndexSet, Matrix, TangentSpace};

/// Residuals of the relaxed optimality system for a candidate dual matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KKTReport {
    pub n: usize,
    pub lambda: f64,
    /// `|P_T[Lambda] - UV^T|_F`, needs `< 1/n^2`.
    pub t_fro: f64,
    /// `|P_{T^perp}[Lambda]|` (spectral), needs `< 1/2`.
    pub t_perp_op: f64,
    /// `|P_V[Lambda] - lambda Sigma|_F`, needs `<= 1e-6 lambda`.
    pub v_exact: f64,
    /// `|P_N[Lambda]|_inf`, needs `< lambda / 2`.
    pub n_inf: f64,
    pub thr_fro: f64,
    pub thr_perp: f64,
    pub thr_v: f64,
    pub thr_inf: f64,
    pub pass: bool,
}

pub const KKT_EQ_RELATIVE: f64 = 1e-6;

impl KKTReport {
    /// Names of the conditions that fail.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !(self.t_fro < self.thr_fro) {
            out.push("t_fro");
        }
        if !(self.t_perp_op < self.thr_perp) {
            out.push("t_perp_op");
        }
        if !(self.v_exact <= self.thr_v) {
            out.push("v_exact");
        }
        if !(self.n_inf < self.thr_inf) {
            out.push("n_inf");
        }
        out
    }
}

impl Record for KKTReport {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        vec![
            ("kkt_t_fro", Field::Float(self.t_fro)),
            ("kkt_t_perp_op", Field::Float(self.t_perp_op)),
            ("kkt_v_exact", Field::Float(self.v_exact)),
            ("kkt_n_inf", Field::Float(self.n_inf)),
            ("kkt_thr_fro", Field::Float(self.thr_fro)),
            ("kkt_thr_perp", Field::Float(self.thr_perp)),
            ("kkt_thr_v", Field::Float(self.thr_v)),
            ("kkt_thr_inf", Field::Float(self.thr_inf)),
            ("kkt_pass", Field::Bool(self.pass)),
        ]
    }
}

/// Evaluates the four conditions on `lambda_mat`, which must be supported on
/// `V ∪ N`. `sigma_bar` holds the corruption signs on `V`.
pub fn verify_kkt(
    lambda_mat: &Matrix,
    t: &TangentSpace,
    v_set: &IndexSet,
    n_set: &IndexSet,
    sigma_bar: &Matrix,
    lambda: f64,
) -> Result<KKTReport> {
    let n = t.n();
    check_square(lambda_mat, n)?;
    check_square(sigma_bar, n)?;
    if !(lambda > 0.0) {
        return Err(Error::param(format!("lambda {lambda} must be positive")));
    }
    let observed = v_set.union(n_set)?;
    if !observed.supports(lambda_mat) {
        return Err(Error::input("dual matrix has entries outside the observation set"));
    }
    let tl = t.apply(lambda_mat);
    let t_fro = (&tl - t.uv_t()).norm();
    let t_perp_op = spectral_norm(&(lambda_mat - &tl));
    let v_exact = (v_set.apply(lambda_mat) - v_set.apply(sigma_bar) * lambda).norm();
    let n_inf = inf_norm(&n_set.apply(lambda_mat));
    let nf = n as f64;
    let mut report = KKTReport {
        n,
        lambda,
        t_fro,
        t_perp_op,
        v_exact,
        n_inf,
        thr_fro: 1.0 / (nf * nf),
        thr_perp: 0.5,
        thr_v: KKT_EQ_RELATIVE * lambda,
        thr_inf: lambda / 2.0,
        pass: false,
    };
    report.pass = report.failures().is_empty();
    Ok(report)
}
