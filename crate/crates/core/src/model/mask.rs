use std::path::PathBuf;

use rand::Rng as _;

use super::{check_square, Matrix};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// A set of `(row, col)` positions in an `n x n` grid.
///
/// Stored as a sorted (row-major) list without duplicates so that applying the
/// projector costs `O(|set|)`. A boolean grid is built on demand for set
/// algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    n: usize,
    entries: Vec<(usize, usize)>,
}

/// The observation set `O`.
pub type SamplingMask = IndexSet;

impl IndexSet {
    /// Rejects out-of-range and duplicate pairs; input order is irrelevant.
    pub fn new(n: usize, mut entries: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, j)) = entries.iter().find(|(i, j)| *i >= n || *j >= n) {
            return Err(Error::input(format!("index ({i}, {j}) outside [0, {n})")));
        }
        entries.sort_unstable();
        if let Some(w) = entries.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!("duplicate index {:?}", w[0])));
        }
        Ok(Self { n, entries })
    }

    fn from_sorted(n: usize, entries: Vec<(usize, usize)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0] < w[1]));
        Self { n, entries }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted(n, Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self::from_predicate(n, |_, _| true)
    }

    /// All `(i, j)` in row-major order for which `keep(i, j)` holds.
    pub fn from_predicate(n: usize, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if keep(i, j) {
                    entries.push((i, j));
                }
            }
        }
        Self::from_sorted(n, entries)
    }

    fn from_grid(n: usize, grid: &[bool]) -> Self {
        Self::from_predicate(n, |i, j| grid[i * n + j])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Fraction of the grid covered.
    pub fn density(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.len() as f64 / (self.n * self.n) as f64
        }
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().copied()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries.binary_search(&(i, j)).is_ok()
    }

    /// Row-major membership grid.
    pub fn to_grid(&self) -> Vec<bool> {
        let mut grid = vec![false; self.n * self.n];
        for &(i, j) in &self.entries {
            grid[i * self.n + j] = true;
        }
        grid
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Shape {
                expected: (self.n, self.n),
                found: (other.n, other.n),
            });
        }
        Ok(())
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let grid = other.to_grid();
        let entries = self
            .iter()
            .filter(|&(i, j)| grid[i * self.n + j])
            .collect();
        Ok(Self::from_sorted(self.n, entries))
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let grid = other.to_grid();
        let entries = self
            .iter()
            .filter(|&(i, j)| !grid[i * self.n + j])
            .collect();
        Ok(Self::from_sorted(self.n, entries))
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mut grid = self.to_grid();
        for (i, j) in other.iter() {
            grid[i * self.n + j] = true;
        }
        Ok(Self::from_grid(self.n, &grid))
    }

    pub fn complement(&self) -> Self {
        let grid = self.to_grid();
        Self::from_predicate(self.n, |i, j| !grid[i * self.n + j])
    }

    /// `P_set[X]`: entries on the set copied, all others zero.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        check_square(x, self.n)?;
        Ok(self.apply(x))
    }

    /// `X - P_set[X]`.
    pub fn project_complement(&self, x: &Matrix) -> Result<Matrix> {
        check_square(x, self.n)?;
        Ok(self.apply_complement(x))
    }

    pub(crate) fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.n, self.n);
        for &(i, j) in &self.entries {
            out[(i, j)] = x[(i, j)];
        }
        out
    }

    pub(crate) fn apply_complement(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for &(i, j) in &self.entries {
            out[(i, j)] = 0.0;
        }
        out
    }

    /// Whether every nonzero of `x` lies on the set.
    pub fn supports(&self, x: &Matrix) -> bool {
        let grid = self.to_grid();
        (0..self.n).all(|i| (0..self.n).all(|j| grid[i * self.n + j] || x[(i, j)] == 0.0))
    }
}

/// Deterministic sampling pattern families.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskKind {
    Full,
    /// Keep `(i, j)` iff `(i + j) mod m != 0`.
    Decimation(usize),
    /// Remove the `b x b` top-left block.
    Block(usize),
    /// Each position kept independently with probability `rate`, drawn once
    /// from `seed` and frozen thereafter.
    Bernoulli { rate: f64, seed: u64 },
    /// Mask file; its declared `n` must match.
    FromFile(PathBuf),
}

pub fn generate_mask(n: usize, kind: &MaskKind) -> Result<SamplingMask> {
    match *kind {
        MaskKind::Full => Ok(IndexSet::full(n)),
        MaskKind::Decimation(m) => {
            if m < 2 {
                return Err(Error::param(format!("decimation factor {m} < 2")));
            }
            Ok(IndexSet::from_predicate(n, |i, j| (i + j) % m != 0))
        }
        MaskKind::Block(b) => {
            if b >= n {
                return Err(Error::param(format!("block size {b} >= n = {n}")));
            }
            Ok(IndexSet::from_predicate(n, |i, j| i >= b || j >= b))
        }
        MaskKind::Bernoulli { rate, seed } => {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::param(format!("sampling rate {rate} outside (0, 1]")));
            }
            let mut rng = rng_from_seed(seed);
            Ok(IndexSet::from_predicate(n, |_, _| rng.random::<f64>() < rate))
        }
        MaskKind::FromFile(ref path) => {
            let mask = super::read_mask(path)?;
            if mask.n() != n {
                return Err(Error::param(format!(
                    "mask file has n = {}, expected {n}",
                    mask.n()
                )));
            }
            Ok(mask)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_decimation_counts() {
        assert_eq!(generate_mask(2, &MaskKind::Full).unwrap().len(), 4);
        let d = generate_mask(4, &MaskKind::Decimation(2)).unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|(i, j)| (i + j) % 2 == 1));
    }

    #[test]
    fn block_removes_corner() {
        let b = generate_mask(5, &MaskKind::Block(2)).unwrap();
        assert_eq!(b.len(), 25 - 4);
        assert!(!b.contains(1, 1));
        assert!(b.contains(1, 2));
    }

    #[test]
    fn parameter_errors() {
        for kind in [
            MaskKind::Decimation(1),
            MaskKind::Block(4),
            MaskKind::Bernoulli { rate: 0.0, seed: 1 },
            MaskKind::Bernoulli { rate: 1.5, seed: 1 },
        ] {
            assert!(matches!(generate_mask(4, &kind), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn bernoulli_concentrates_and_repeats() {
        let kind = MaskKind::Bernoulli { rate: 0.5, seed: 42 };
        let a = generate_mask(100, &kind).unwrap();
        let b = generate_mask(100, &kind).unwrap();
        assert_eq!(a, b);
        // binomial(10^4, 1/2) has sd 50, so [4500, 5500] is a 10-sigma window
        assert!((0.45..=0.55).contains(&a.density()), "density {}", a.density());
    }

    #[test]
    fn new_validates() {
        assert!(IndexSet::new(2, vec![(0, 2)]).is_err());
        assert!(IndexSet::new(2, vec![(0, 1), (0, 1)]).is_err());
        let s = IndexSet::new(3, vec![(2, 0), (0, 1)]).unwrap();
        assert_eq!(s.entries(), &[(0, 1), (2, 0)]);
    }

    #[test]
    fn projection_examples() {
        let x = Matrix::from_element(2, 2, 1.0);
        assert_eq!(IndexSet::full(2).project(&x).unwrap(), x);
        assert_eq!(IndexSet::empty(2).project(&x).unwrap(), Matrix::zeros(2, 2));
        let single = IndexSet::new(2, vec![(0, 0)]).unwrap();
        assert_eq!(
            single.project(&x).unwrap(),
            Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
        );
        assert!(single.project(&Matrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn set_algebra() {
        let a = generate_mask(6, &MaskKind::Decimation(3)).unwrap();
        let b = generate_mask(6, &MaskKind::Bernoulli { rate: 0.5, seed: 3 }).unwrap();
        let i = a.intersection(&b).unwrap();
        let d = a.difference(&b).unwrap();
        assert_eq!(i.len() + d.len(), a.len());
        assert!(i.intersection(&d).unwrap().is_empty());
        assert_eq!(i.union(&d).unwrap(), a);
        assert_eq!(a.complement().len(), 36 - a.len());
        assert!(a.intersection(&IndexSet::full(5)).is_err());
    }
}
