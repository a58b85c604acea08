//! Power iteration on linear maps over `n x n` matrices.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Matrix;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Stop when successive estimates differ by at most `tol * estimate`.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 5000,
            seed: 0,
        }
    }
}

impl PowerOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Absolute slack in the stopping rule so maps that are zero up to rounding
/// still terminate.
const NOISE_FLOOR: f64 = 1e-14;

fn random_start(n: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let data: Vec<f64> = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_slice(n, n, &data)
}

/// Largest `|eigenvalue|` of a self-adjoint map, i.e. its operator norm
/// `sup |op[X]|_F / |X|_F`.
///
/// Runs the power sequence `x, op[x], op^2[x], ...` and reads the estimate
/// off the Krylov space it spans (Lanczos with full reorthogonalization,
/// restarted from the top Ritz vector every [`KRYLOV_CAP`] steps). The
/// largest `|Ritz value|` dominates the plain power estimate
/// `|op^k[x]| / |op^{k-1}[x]|`, never decreases, and lies in the spectrum's
/// hull, so every returned value is a lower bound on the norm. Stops when the
/// Ritz residual is at most `tol * estimate`, or when the Krylov space
/// becomes invariant.
pub fn operator_norm<F>(n: usize, op: F, opts: &PowerOptions) -> Result<f64>
where
    F: Fn(&Matrix) -> Matrix,
{
    operator_norm_from(op, random_start(n, opts.seed), opts)
}

/// Krylov dimension before a restart.
pub const KRYLOV_CAP: usize = 64;

fn dot(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Ritz value of largest magnitude and its eigenvector in the Lanczos basis.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, nalgebra::DVector<f64>) {
    let k = alpha.len();
    let t = Matrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(t);
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i].abs() > eig.eigenvalues[best].abs() {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Same as [`operator_norm`] but starting from `start`. A zero start falls
/// back to the seeded random start. The first step alone already gives
/// `|op[start]| / |start|`.
pub fn operator_norm_from<F>(op: F, start: Matrix, opts: &PowerOptions) -> Result<f64>
where
    F: Fn(&Matrix) -> Matrix,
{
    if !(opts.tol > 0.0) {
        return Err(Error::param("power iteration tolerance must be positive"));
    }
    let n = start.nrows();
    let norm = start.norm();
    let mut x = if norm > 0.0 && norm.is_finite() {
        start / norm
    } else {
        let r = random_start(n, opts.seed);
        let rn = r.norm();
        r / rn
    };
    let cap = KRYLOV_CAP.min(x.len()).max(1);
    let mut applied = 0;
    let mut est = 0.0_f64;
    loop {
        let mut basis = vec![x];
        let (mut alpha, mut beta) = (Vec::new(), Vec::new());
        loop {
            if applied == opts.max_iters {
                return Err(Error::Convergence {
                    iterations: opts.max_iters,
                    last_estimate: est,
                });
            }
            let j = basis.len() - 1;
            let mut w = op(&basis[j]);
            applied += 1;
            let wn = w.norm();
            if !wn.is_finite() {
                return Err(Error::Numerical("operator produced non-finite output".into()));
            }
            if applied == 1 {
                est = wn;
            }
            alpha.push(dot(&w, &basis[j]));
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w -= q * c;
                }
            }
            let b = w.norm();
            let (theta, s) = top_ritz(&alpha, &beta);
            est = est.max(theta.abs());
            if est == 0.0 && b <= NOISE_FLOOR {
                return Ok(0.0);
            }
            let residual = b * s[j].abs();
            if residual <= opts.tol * est + NOISE_FLOOR || b <= NOISE_FLOOR * wn.max(1.0) {
                return Ok(est);
            }
            if basis.len() == cap {
                let mut y = Matrix::zeros(n, basis[0].ncols());
                for (q, c) in basis.iter().zip(s.iter()) {
                    y += q * *c;
                }
                let yn = y.norm();
                x = y / yn;
                break;
            }
            beta.push(b);
            basis.push(w / b);
        }
    }
}

/// Norm of a general map, `sqrt(|op^* op|)`.
pub fn operator_norm_general<F, G>(n: usize, op: F, adjoint: G, opts: &PowerOptions) -> Result<f64>
where
    F: Fn(&Matrix) -> Matrix,
    G: Fn(&Matrix) -> Matrix,
{
    operator_norm(n, |x| adjoint(&op(x)), opts).map(f64::sqrt)
}
