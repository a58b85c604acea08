//! Dense-matrix substrate, problem generation, index sets and projectors.

mod corruption;
mod io;
mod lowrank;
mod mask;
mod tangent;

pub use corruption::{generate_corruption, CorruptionModel};
pub use io::{
    format_f64, format_mask, format_matrix, parse_mask, parse_matrix, read_mask, read_matrix,
    write_mask, write_matrix,
};
pub use lowrank::{generate_low_rank, generate_model, incoherence, Incoherence, LowRankModel, ModelKind};
pub use mask::{generate_mask, IndexSet, MaskKind, SamplingMask};
pub use tangent::TangentSpace;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square or rectangular dense matrix of finite reals.
pub type Matrix = DMatrix<f64>;

pub fn zeros(n: usize) -> Matrix {
    Matrix::zeros(n, n)
}

/// `E_ij` in an `n x n` grid.
pub fn unit(n: usize, i: usize, j: usize) -> Matrix {
    let mut e = zeros(n);
    e[(i, j)] = 1.0;
    e
}

/// Largest absolute entry.
pub fn inf_norm(x: &Matrix) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Sum of absolute entries.
pub fn l1_norm(x: &Matrix) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

pub fn nuclear_norm(x: &Matrix) -> f64 {
    x.singular_values().iter().sum()
}

/// Largest singular value.
pub fn spectral_norm(x: &Matrix) -> f64 {
    x.singular_values().iter().fold(0.0_f64, |m, v| m.max(*v))
}

pub fn check_square(x: &Matrix, n: usize) -> Result<()> {
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::Shape {
            expected: (n, n),
            found: (x.nrows(), x.ncols()),
        });
    }
    Ok(())
}

pub fn check_finite(x: &Matrix) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::input("matrix has non-finite entries"))
    }
}
