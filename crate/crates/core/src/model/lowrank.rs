use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::StandardNormal;

use super::{Matrix, TangentSpace};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Ground-truth factorization `L0 = U diag(sigma) V^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankModel {
    u: Matrix,
    sigma: DVector<f64>,
    v: Matrix,
}

/// How the singular vectors are drawn before orthonormalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    /// Independent standard Gaussian entries.
    #[default]
    Gaussian,
    /// Independent `±1` entries. For `r = 1` the vectors are exactly flat,
    /// which gives the smallest possible coherence.
    Rademacher,
}

const ORTHO_TOL: f64 = 1e-10;

impl LowRankModel {
    /// Validates orthonormal columns and positive, non-increasing `sigma`.
    pub fn from_factors(u: Matrix, sigma: Vec<f64>, v: Matrix) -> Result<Self> {
        let n = u.nrows();
        let r = sigma.len();
        if r == 0 || r > n {
            return Err(Error::InvalidRank { n, rank: r });
        }
        for (name, m) in [("U", &u), ("V", &v)] {
            if m.nrows() != n || m.ncols() != r {
                return Err(Error::Shape {
                    expected: (n, r),
                    found: (m.nrows(), m.ncols()),
                });
            }
            let gram = m.transpose() * m;
            let err = (gram - Matrix::identity(r, r)).abs().max();
            if err > ORTHO_TOL {
                return Err(Error::input(format!(
                    "{name} columns not orthonormal (max deviation {err:e})"
                )));
            }
        }
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::input("singular values must be positive"));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::input("singular values must be non-increasing"));
        }
        Ok(Self {
            u,
            sigma: DVector::from_vec(sigma),
            v,
        })
    }

    pub fn n(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn sigma(&self) -> &[f64] {
        self.sigma.as_slice()
    }

    /// `L0 = U diag(sigma) V^T`.
    pub fn matrix(&self) -> Matrix {
        let mut us = self.u.clone();
        for (k, s) in self.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// `U V^T`, the sign matrix of `L0` on its row/column spaces.
    pub fn uv_t(&self) -> Matrix {
        &self.u * self.v.transpose()
    }

    pub fn tangent(&self) -> TangentSpace {
        TangentSpace::from_orthonormal(self.u.clone(), self.v.clone())
    }
}

/// Gaussian model with `sigma ~ U[1, 2]`, deterministic in `(n, r, seed)`.
pub fn generate_low_rank(n: usize, r: usize, seed: u64) -> Result<LowRankModel> {
    generate_model(n, r, ModelKind::Gaussian, seed)
}

pub fn generate_model(n: usize, r: usize, kind: ModelKind, seed: u64) -> Result<LowRankModel> {
    if r < 1 || r > n {
        return Err(Error::InvalidRank { n, rank: r });
    }
    let mut rng = rng_from_seed(seed);
    let draw = |rng: &mut crate::rng::Rng| -> Matrix {
        // row-major fill so the draw order is explicit
        let data: Vec<f64> = (0..n * r)
            .map(|_| match kind {
                ModelKind::Gaussian => rng.sample(StandardNormal),
                ModelKind::Rademacher => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect();
        Matrix::from_row_slice(n, r, &data)
    };
    let gu = draw(&mut rng);
    let gv = draw(&mut rng);
    let mut sigma: Vec<f64> = (0..r).map(|_| rng.random_range(1.0..=2.0)).collect();
    sigma.sort_by(|a, b| b.total_cmp(a));

    let u = orthonormalize(gu)?;
    let v = orthonormalize(gv)?;
    LowRankModel::from_factors(u, sigma, v)
}

/// Thin QR with each column's first nonzero component made positive.
pub(crate) fn orthonormalize(g: Matrix) -> Result<Matrix> {
    let r = g.ncols();
    let qr = g.qr();
    let rdiag_min = qr.r().diagonal().iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    if rdiag_min < 1e-12 {
        return Err(Error::Numerical("draw is rank deficient".into()));
    }
    let mut q = qr.q();
    for k in 0..r {
        let mut col = q.column_mut(k);
        if let Some(first) = col.iter().copied().find(|x| x.abs() > 1e-14) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
    Ok(q)
}

/// Coherence summary of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Incoherence {
    /// `(n/r) * max(max_i |U^T e_i|^2, max_i |V^T e_i|^2)`.
    pub nu: f64,
    /// `|U V^T|_inf`.
    pub uv_inf: f64,
    /// `uv_inf <= sqrt(nu r) / (n sqrt(log n))` with `nu` as above.
    pub passes_strong: bool,
    /// Smallest `nu` for which both the row-norm bound and the strengthened
    /// `|UV^T|_inf` bound hold simultaneously.
    pub nu_joint: f64,
}

pub fn incoherence(model: &LowRankModel) -> Incoherence {
    let n = model.n();
    let r = model.rank();
    let (nf, rf) = (n as f64, r as f64);
    let row_max = |m: &Matrix| {
        m.row_iter()
            .map(|row| row.norm_squared())
            .fold(0.0_f64, f64::max)
    };
    let nu = nf / rf * row_max(model.u()).max(row_max(model.v()));
    let uv_inf = super::inf_norm(&model.uv_t());
    let log_n = nf.ln();
    let passes_strong = if log_n > 0.0 {
        uv_inf <= (nu * rf).sqrt() / (nf * log_n.sqrt())
    } else {
        true
    };
    let nu_uv = nf * nf * log_n * uv_inf * uv_inf / rf;
    Incoherence {
        nu,
        uv_inf,
        passes_strong,
        nu_joint: nu.max(nu_uv),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_columns(n: usize, r: usize) -> Matrix {
        Matrix::from_fn(n, r, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[test]
    fn one_by_one_model() {
        let m = generate_low_rank(1, 1, 0).unwrap();
        assert_eq!(m.u()[(0, 0)].abs(), 1.0);
        assert_eq!(m.v()[(0, 0)].abs(), 1.0);
        assert_eq!(incoherence(&m).nu, 1.0);
    }

    #[test]
    fn orthonormal_and_deterministic() {
        let a = generate_low_rank(8, 2, 7).unwrap();
        let b = generate_low_rank(8, 2, 7).unwrap();
        assert_eq!(a, b);
        let gram = a.u().transpose() * a.u();
        assert!((gram - Matrix::identity(2, 2)).abs().max() <= 1e-10);
        let gram = a.v().transpose() * a.v();
        assert!((gram - Matrix::identity(2, 2)).abs().max() <= 1e-10);
        assert!(a.sigma()[0] >= a.sigma()[1]);
        assert!(a.sigma().iter().all(|s| (1.0..=2.0).contains(s)));
        assert_ne!(a, generate_low_rank(8, 2, 8).unwrap());
    }

    #[test]
    fn sign_fixed_columns() {
        let m = generate_low_rank(10, 3, 1).unwrap();
        for k in 0..3 {
            let first = m.u().column(k).iter().copied().find(|x| x.abs() > 1e-14).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn reconstructed_rank_is_r() {
        let m = generate_low_rank(12, 3, 5).unwrap();
        let sv = m.matrix().singular_values();
        let big = sv.iter().filter(|s| **s > 1e-8).count();
        assert_eq!(big, 3);
    }

    #[test]
    fn rejects_bad_rank() {
        assert!(matches!(generate_low_rank(4, 0, 0), Err(Error::InvalidRank { .. })));
        assert!(matches!(generate_low_rank(4, 5, 0), Err(Error::InvalidRank { .. })));
    }

    #[test]
    fn coherent_identity_columns() {
        let (n, r) = (6, 2);
        let m = LowRankModel::from_factors(identity_columns(n, r), vec![2.0, 1.0], identity_columns(n, r))
            .unwrap();
        assert!((incoherence(&m).nu - n as f64 / r as f64).abs() < 1e-12);
    }

    #[test]
    fn flat_vector_incoherence() {
        let u = Matrix::from_element(4, 1, 0.5);
        let m = LowRankModel::from_factors(u.clone(), vec![1.0], u).unwrap();
        let inc = incoherence(&m);
        assert!((inc.nu - 1.0).abs() < 1e-12);
        assert!((inc.uv_inf - 0.25).abs() < 1e-12);
        // 1/4 > 1/(4 sqrt(ln 4)) fails the strengthened bound at nu = 1
        assert!(!inc.passes_strong);
        assert!((inc.nu_joint - 4.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn nu_matches_independent_loop() {
        let m = generate_low_rank(64, 2, 3).unwrap();
        let (n, r) = (64usize, 2usize);
        let mut best = 0.0_f64;
        // column-outer accumulation, reverse row order
        for i in (0..n).rev() {
            let mut su = 0.0;
            let mut sv = 0.0;
            for k in 0..r {
                su += m.u()[(i, k)] * m.u()[(i, k)];
                sv += m.v()[(i, k)] * m.v()[(i, k)];
            }
            best = best.max(su).max(sv);
        }
        let expected = best * n as f64 / r as f64;
        assert!((incoherence(&m).nu - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn rademacher_rank_one_is_flat() {
        let m = generate_model(16, 1, ModelKind::Rademacher, 9).unwrap();
        let inc = incoherence(&m);
        assert!((inc.nu - 1.0).abs() < 1e-12);
        assert!((inc.uv_inf - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn from_factors_validates() {
        let u = Matrix::from_element(3, 1, 1.0);
        assert!(LowRankModel::from_factors(u.clone(), vec![1.0], u).is_err());
        let e = identity_columns(3, 2);
        assert!(LowRankModel::from_factors(e.clone(), vec![1.0, 2.0], e.clone()).is_err());
        assert!(LowRankModel::from_factors(e.clone(), vec![1.0, 0.0], e).is_err());
    }
}
