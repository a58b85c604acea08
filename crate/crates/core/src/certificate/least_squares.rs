use super::neumann::{SumSpace, Truncation};
use crate::conditions::{operator_norm, PowerOptions};
use crate::error::{Error, Result};
use crate::harness::record::{Field, Record};
use crate::model::{check_square, inf_norm, spectral_norm, IndexSet, Matrix, SamplingMask, TangentSpace};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LeastSquaresDiagnostics {
    /// `|P_V P_{T+O^perp} P_V|`, measured.
    pub series_norm: f64,
    /// Index of the last series term included.
    pub terms: usize,
    /// `|P_V[Lambda_S] - lambda Sigma|_F`.
    pub v_residual: f64,
    /// `|P_{T^perp}[Lambda_S]|` (spectral).
    pub t_perp_op: f64,
    /// `|P_T[Lambda_S]|_F`; zero in exact arithmetic.
    pub t_leak: f64,
    /// `|P_N[Lambda_S]|_inf` where `N = O \ V`.
    pub n_inf: f64,
    /// Geometric bound on the omitted tail, `lambda |last term| c / (1 - c)`.
    pub tail_estimate: f64,
}

impl Record for LeastSquaresDiagnostics {
    fn fields(&self) -> Vec<(&'static str, Field)> {
        vec![
            ("ls_series_norm", Field::Float(self.series_norm)),
            ("ls_terms", Field::Int(self.terms as i64)),
            ("ls_v_residual", Field::Float(self.v_residual)),
            ("ls_t_perp_op", Field::Float(self.t_perp_op)),
            ("ls_t_leak", Field::Float(self.t_leak)),
            ("ls_n_inf", Field::Float(self.n_inf)),
            ("ls_tail_estimate", Field::Float(self.tail_estimate)),
        ]
    }
}

/// `Lambda_S = lambda (I - P~) sum_i (P_V P~ P_V)^i [Sigma]` with
/// `P~ = P_{T+O^perp}`, restricted to `O`.
///
/// The sum is accumulated term by term as `A^i Sigma - P~ A^i Sigma`, which
/// reuses the projection needed for the next power, so that
/// `P_V[Lambda_S] = lambda (Sigma - A^{K+1} Sigma)` holds to rounding for any
/// truncation order `K`.
pub fn least_squares_certificate(
    t: &TangentSpace,
    mask: &SamplingMask,
    v_set: &IndexSet,
    sigma_bar: &Matrix,
    lambda: f64,
    truncation: Truncation,
    power: &PowerOptions,
) -> Result<(Matrix, LeastSquaresDiagnostics)> {
    let n = t.n();
    check_square(sigma_bar, n)?;
    if v_set.n() != n || mask.n() != n {
        return Err(Error::Shape {
            expected: (n, n),
            found: (v_set.n(), mask.n()),
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::param(format!("lambda {lambda} must be positive")));
    }
    if !v_set.supports(sigma_bar) {
        return Err(Error::input("sign matrix has entries outside V"));
    }
    if v_set.difference(mask)?.len() > 0 {
        return Err(Error::input("V must be a subset of the observation set"));
    }
    let space = SumSpace::new(t, mask, Truncation::Adaptive, power)?;
    let series_norm = if v_set.is_empty() {
        0.0
    } else {
        operator_norm(n, |x| v_set.apply(&space.apply(&v_set.apply(x))), power)?
    };
    if series_norm >= 1.0 {
        return Err(Error::Divergence { norm: series_norm });
    }

    let mut acc = Matrix::zeros(n, n);
    let mut term = sigma_bar.clone();
    let first = term.norm();
    let mut index = 0;
    if first > 0.0 {
        loop {
            let projected = space.apply(&term);
            acc += &term - &projected;
            if truncation.stop(index, term.norm(), first) {
                break;
            }
            term = v_set.apply(&projected);
            index += 1;
        }
    }
    let lambda_s = mask.apply(&(acc * lambda));

    let n_set = mask.difference(v_set)?;
    let perp = t.apply_complement(&lambda_s);
    let last = term.norm();
    let diagnostics = LeastSquaresDiagnostics {
        series_norm,
        terms: index,
        v_residual: (v_set.apply(&lambda_s) - sigma_bar * lambda).norm(),
        t_perp_op: spectral_norm(&perp),
        t_leak: t.apply(&lambda_s).norm(),
        n_inf: inf_norm(&n_set.apply(&lambda_s)),
        tail_estimate: if first > 0.0 {
            lambda * last * series_norm / (1.0 - series_norm)
        } else {
            0.0
        },
    };
    Ok((lambda_s, diagnostics))
}
