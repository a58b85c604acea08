use crate::conditions::{opnorm_pt_poc_pt, PowerOptions};
use crate::error::{Error, Result};
use crate::model::{check_square, Matrix, SamplingMask, TangentSpace};

/// Truncation rule for a Neumann series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Truncation {
    /// Terms `0..=k`.
    Fixed(usize),
    /// Stop once a term falls below `1e-10` times the first one, at most 500 terms.
    #[default]
    Adaptive,
}

pub(crate) const ADAPTIVE_RELATIVE: f64 = 1e-10;
pub(crate) const ADAPTIVE_CAP: usize = 500;

impl Truncation {
    /// Whether to stop after term `index` with norm `term` (first term `first`).
    pub(crate) fn stop(&self, index: usize, term: f64, first: f64) -> bool {
        match *self {
            Truncation::Fixed(k) => index >= k,
            Truncation::Adaptive => term <= ADAPTIVE_RELATIVE * first || index + 1 >= ADAPTIVE_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannOutput {
    /// Index of the last term included.
    pub terms: usize,
    /// `|P_T P_O P_T[result] - X|_F`.
    pub residual: f64,
}

/// The geometry of `T` against `O`: inverts `P_T P_O P_T` on `T` and projects
/// onto `T + O^perp`.
///
/// Construction measures `|P_T P_{O^perp} P_T|` once and refuses to build when
/// it is not below one, since the series would not converge.
#[derive(Debug, Clone)]
pub struct SumSpace<'a> {
    t: &'a TangentSpace,
    mask: &'a SamplingMask,
    contraction: f64,
    truncation: Truncation,
}

impl<'a> SumSpace<'a> {
    pub fn new(t: &'a TangentSpace, mask: &'a SamplingMask, truncation: Truncation, power: &PowerOptions) -> Result<Self> {
        let contraction = opnorm_pt_poc_pt(t, mask, power)?;
        if contraction >= 1.0 {
            return Err(Error::Divergence { norm: contraction });
        }
        Ok(Self {
            t,
            mask,
            contraction,
            truncation,
        })
    }

    /// `|P_T P_{O^perp} P_T|` as measured at construction.
    pub fn contraction(&self) -> f64 {
        self.contraction
    }

    /// `sum_{i=0}^{terms} (P_T P_{O^perp} P_T)^i [P_T X]`.
    pub fn inverse_on_t(&self, x: &Matrix) -> Result<(Matrix, NeumannOutput)> {
        check_square(x, self.t.n())?;
        let x = self.t.apply(x);
        let (sum, terms) = self.series(&x);
        let forward = self.t.apply(&self.mask.apply(&sum));
        let residual = (forward - &x).norm();
        Ok((sum, NeumannOutput { terms, residual }))
    }

    fn series(&self, x: &Matrix) -> (Matrix, usize) {
        let mut sum = x.clone();
        let mut term = x.clone();
        let first = x.norm();
        if first == 0.0 {
            return (sum, 0);
        }
        let mut index = 0;
        while !self.truncation.stop(index, term.norm(), first) {
            term = self.t.apply(&self.mask.apply_complement(&term));
            sum += &term;
            index += 1;
        }
        (sum, index)
    }

    /// `P_{T + O^perp}[M] = D + P_{O^perp}[M - D]` with
    /// `D = (P_T P_O P_T)^{-1} P_T P_O [M]`.
    pub fn project(&self, m: &Matrix) -> Result<Matrix> {
        check_square(m, self.t.n())?;
        Ok(self.apply(m))
    }

    pub(crate) fn apply(&self, m: &Matrix) -> Matrix {
        let rhs = self.t.apply(&self.mask.apply(m));
        let (d, _) = self.series(&rhs);
        let rest = self.mask.apply_complement(&(m - &d));
        d + rest
    }
}

/// One-shot form of [`SumSpace::inverse_on_t`].
pub fn neumann_inverse_on_t(
    t: &TangentSpace,
    mask: &SamplingMask,
    x: &Matrix,
    truncation: Truncation,
) -> Result<(Matrix, NeumannOutput)> {
    SumSpace::new(t, mask, truncation, &PowerOptions::default())?.inverse_on_t(x)
}

/// One-shot form of [`SumSpace::project`].
pub fn project_sum_space(t: &TangentSpace, mask: &SamplingMask, m: &Matrix) -> Result<Matrix> {
    SumSpace::new(t, mask, Truncation::Adaptive, &PowerOptions::default())?.project(m)
}
