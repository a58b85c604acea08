//! Robust matrix completion under deterministic sampling.
//!
//! Recovers a low-rank `L0` and the observed part of a sparse corruption `S0`
//! from `P_O[L0 + S0]` by solving
//!
//! ```text
//! min |L|_* + lambda |S|_1   s.t.   P_O[L + S] = P_O[Y]
//! ```
//!
//! and turns the recovery theory for this program into executable checks:
//! condition estimators ([`conditions`]), dual-certificate construction and
//! KKT verification ([`certificate`]), and an experiment harness
//! ([`harness`]).

pub mod certificate;
pub mod conditions;
pub mod error;
pub mod harness;
pub mod model;
pub mod par;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use model::Matrix;

/// `1 / sqrt(n log n)`.
pub fn theorem_lambda(n: usize) -> f64 {
    let n = n as f64;
    1.0 / (n * n.ln()).sqrt()
}
