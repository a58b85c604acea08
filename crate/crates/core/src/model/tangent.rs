use super::{check_square, Matrix};
use crate::error::{Error, Result};

/// Tangent space `T = { U R^T + Q V^T }` of the rank-`r` manifold at `U Σ V^T`.
///
/// `P_T[X] = U U^T X + X V V^T - U U^T X V V^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSpace {
    u: Matrix,
    v: Matrix,
}

impl TangentSpace {
    /// `u` and `v` must be `n x r` with orthonormal columns.
    pub fn new(u: Matrix, v: Matrix) -> Result<Self> {
        let (n, r) = u.shape();
        if v.shape() != (n, r) {
            return Err(Error::Shape {
                expected: (n, r),
                found: v.shape(),
            });
        }
        if n != u.nrows() || r == 0 || r > n {
            return Err(Error::InvalidRank { n, rank: r });
        }
        for m in [&u, &v] {
            let err = (m.transpose() * m - Matrix::identity(r, r)).abs().max();
            if err > 1e-10 {
                return Err(Error::input("tangent factors must have orthonormal columns"));
            }
        }
        Ok(Self { u, v })
    }

    pub(crate) fn from_orthonormal(u: Matrix, v: Matrix) -> Self {
        Self { u, v }
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// `dim T = 2nr - r^2`.
    pub fn dim(&self) -> usize {
        let (n, r) = (self.n(), self.rank());
        2 * n * r - r * r
    }

    pub fn uv_t(&self) -> Matrix {
        &self.u * self.v.transpose()
    }

    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        check_square(x, self.n())?;
        Ok(self.apply(x))
    }

    pub fn project_complement(&self, x: &Matrix) -> Result<Matrix> {
        check_square(x, self.n())?;
        Ok(self.apply_complement(x))
    }

    /// Unchecked `P_T`.
    pub(crate) fn apply(&self, x: &Matrix) -> Matrix {
        let ut_x = self.u.transpose() * x; // r x n
        let x_v = x * &self.v; // n x r
        let core = &ut_x * &self.v; // r x r
        let left = &self.u * ut_x;
        let right = (x_v - &self.u * core) * self.v.transpose();
        left + right
    }

    /// Unchecked `P_{T^perp}`.
    pub(crate) fn apply_complement(&self, x: &Matrix) -> Matrix {
        x - self.apply(x)
    }

    /// `|P_T[E_ij]|_F^2 = a_i + b_j - a_i b_j` with `a_i = |U^T e_i|^2`, `b_j = |V^T e_j|^2`.
    pub fn unit_leverage(&self, i: usize, j: usize) -> f64 {
        let a = self.u.row(i).norm_squared();
        let b = self.v.row(j).norm_squared();
        a + b - a * b
    }
}
