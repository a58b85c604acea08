use rand::Rng as _;

use super::{IndexSet, Matrix, SamplingMask};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Sparse corruption `S0` supported on `W ~ Ber(rho)` with Rademacher signs
/// and magnitudes uniform in `[scale/2, scale]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorruptionModel {
    pub n: usize,
    pub rho: f64,
    pub magnitude_scale: f64,
    pub seed: u64,
    support: IndexSet,
    /// `±1`, aligned with `support.entries()`.
    signs: Vec<i8>,
    magnitudes: Vec<f64>,
}

pub fn generate_corruption(
    n: usize,
    rho: f64,
    magnitude_scale: f64,
    seed: u64,
) -> Result<CorruptionModel> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param(format!("corruption probability {rho} outside [0, 1)")));
    }
    if !(magnitude_scale > 0.0 && magnitude_scale.is_finite()) {
        return Err(Error::param(format!("magnitude scale {magnitude_scale} must be positive")));
    }
    let mut rng = rng_from_seed(seed);
    let mut signs = Vec::new();
    let mut magnitudes = Vec::new();
    let support = IndexSet::from_predicate(n, |_, _| {
        if rng.random::<f64>() < rho {
            signs.push(if rng.random::<bool>() { 1 } else { -1 });
            magnitudes.push(rng.random_range(magnitude_scale / 2.0..=magnitude_scale));
            true
        } else {
            false
        }
    });
    Ok(CorruptionModel {
        n,
        rho,
        magnitude_scale,
        seed,
        support,
        signs,
        magnitudes,
    })
}

impl CorruptionModel {
    /// The realized support `W`.
    pub fn support(&self) -> &IndexSet {
        &self.support
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    /// Full corruption matrix `S0`.
    pub fn matrix(&self) -> Matrix {
        let mut s = Matrix::zeros(self.n, self.n);
        for (k, (i, j)) in self.support.iter().enumerate() {
            s[(i, j)] = f64::from(self.signs[k]) * self.magnitudes[k];
        }
        s
    }

    fn check_mask(&self, mask: &SamplingMask) -> Result<()> {
        if mask.n() != self.n {
            return Err(Error::Shape {
                expected: (self.n, self.n),
                found: (mask.n(), mask.n()),
            });
        }
        Ok(())
    }

    /// Observed corruption `S̄0 = P_O[S0]`.
    pub fn observed(&self, mask: &SamplingMask) -> Result<Matrix> {
        self.check_mask(mask)?;
        Ok(mask.apply(&self.matrix()))
    }

    /// `Σ̄0 = sgn(P_O[S0])`: `±1` on `V = O ∩ W`, zero elsewhere.
    pub fn observed_signs(&self, mask: &SamplingMask) -> Result<Matrix> {
        self.check_mask(mask)?;
        let mut s = Matrix::zeros(self.n, self.n);
        for (k, (i, j)) in self.support.iter().enumerate() {
            if mask.contains(i, j) {
                s[(i, j)] = f64::from(self.signs[k]);
            }
        }
        Ok(s)
    }

    /// `(V, N) = (O ∩ W, O \ W)`.
    pub fn split(&self, mask: &SamplingMask) -> Result<(IndexSet, IndexSet)> {
        self.check_mask(mask)?;
        Ok((
            mask.intersection(&self.support)?,
            mask.difference(&self.support)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{generate_mask, MaskKind};
    use super::*;

    #[test]
    fn zero_rate_is_clean() {
        let mask = generate_mask(10, &MaskKind::Decimation(3)).unwrap();
        let c = generate_corruption(10, 0.0, 1.0, 5).unwrap();
        assert!(c.support().is_empty());
        assert_eq!(c.observed(&mask).unwrap(), Matrix::zeros(10, 10));
        let (v, nset) = c.split(&mask).unwrap();
        assert!(v.is_empty());
        assert_eq!(nset, mask);
    }

    #[test]
    fn signs_and_magnitudes() {
        let c = generate_corruption(30, 0.2, 4.0, 1).unwrap();
        assert!(c.signs().iter().all(|s| *s == 1 || *s == -1));
        assert!(c.magnitudes().iter().all(|m| (2.0..=4.0).contains(m)));
        let mask = generate_mask(30, &MaskKind::Bernoulli { rate: 0.6, seed: 2 }).unwrap();
        let sig = c.observed_signs(&mask).unwrap();
        let (v, nset) = c.split(&mask).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                let s = sig[(i, j)];
                assert!(s == 0.0 || s == 1.0 || s == -1.0);
                assert_eq!(s != 0.0, v.contains(i, j));
            }
        }
        assert!(v.intersection(&nset).unwrap().is_empty());
        assert_eq!(v.union(&nset).unwrap(), mask);
    }

    #[test]
    fn support_rate_concentrates() {
        let c = generate_corruption(200, 0.1, 1.0, 77).unwrap();
        // binomial(40000, 0.1): sd 60, window is +-13 sd
        assert!((0.08..=0.12).contains(&c.support().density()));
        assert_eq!(c, generate_corruption(200, 0.1, 1.0, 77).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_corruption(4, 1.0, 1.0, 0).is_err());
        assert!(generate_corruption(4, -0.1, 1.0, 0).is_err());
        assert!(generate_corruption(4, 0.1, 0.0, 0).is_err());
    }
}
