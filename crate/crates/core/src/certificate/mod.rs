//! Dual certificates and their verification.
//!
//! `Lambda = Lambda_L + Lambda_S`: the golfing part drives the tangent-space
//! residual to zero using only uncorrupted observed entries, the
//! least-squares part matches `lambda * sign(S0)` on the corrupted observed
//! entries while staying orthogonal to `T + O^perp`. [`verify_kkt`] checks the
//! relaxed optimality system that makes `(L0, S0 restricted to O)` the unique
//! solution.
//!
//! Golfing batches are drawn so that their union is exactly the complement of
//! the corruption support, which makes every residual update the exact
//! operator `P_T - eta^{-1} P_T P_O P_{M_i} P_T` applied to the previous
//! residual.

mod golfing;
mod kkt;
mod least_squares;
mod neumann;

pub use golfing::{default_batches, draw_batches, golfing_certificate, GolfingDiagnostics, GolfingOptions};
pub use kkt::{verify_kkt, KKTReport, KKT_EQ_RELATIVE};
pub use least_squares::{least_squares_certificate, LeastSquaresDiagnostics};
pub use neumann::{neumann_inverse_on_t, project_sum_space, NeumannOutput, SumSpace, Truncation};

use crate::conditions::PowerOptions;
use crate::error::Result;
use crate::model::{CorruptionModel, LowRankModel, Matrix, SamplingMask};

#[derive(Debug, Clone, PartialEq)]
pub struct CertificatePair {
    /// Supported on `N = O \ W`.
    pub lambda_l: Matrix,
    /// Supported on `O`.
    pub lambda_s: Matrix,
    pub k_golf: usize,
    pub eta: f64,
    pub neumann_terms: usize,
}

impl CertificatePair {
    pub fn total(&self) -> Matrix {
        &self.lambda_l + &self.lambda_s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRun {
    pub pair: CertificatePair,
    pub golfing: GolfingDiagnostics,
    pub least_squares: LeastSquaresDiagnostics,
    pub kkt: KKTReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CertificateOptions {
    pub golfing: GolfingOptions,
    pub truncation: Truncation,
}

/// Builds both parts for a synthetic instance and verifies their sum.
pub fn certify(
    model: &LowRankModel,
    mask: &SamplingMask,
    corruption: &CorruptionModel,
    lambda: f64,
    opts: &CertificateOptions,
) -> Result<CertificateRun> {
    let t = model.tangent();
    let (v_set, n_set) = corruption.split(mask)?;
    let sigma_bar = corruption.observed_signs(mask)?;
    let (lambda_l, golfing) = golfing_certificate(&t, mask, corruption.support(), corruption.rho, &opts.golfing)?;
    let power: PowerOptions = opts.golfing.power;
    let (lambda_s, least_squares) =
        least_squares_certificate(&t, mask, &v_set, &sigma_bar, lambda, opts.truncation, &power)?;
    let pair = CertificatePair {
        lambda_l,
        lambda_s,
        k_golf: golfing.batches,
        eta: golfing.eta,
        neumann_terms: least_squares.terms,
    };
    let kkt = verify_kkt(&pair.total(), &t, &v_set, &n_set, &sigma_bar, lambda)?;
    Ok(CertificateRun {
        pair,
        golfing,
        least_squares,
        kkt,
    })
}
