//! Truncated product bases and sparse complex operators over them.
//!
//! Basis ordering: electronic index slowest, then oscillators in the order they
//! were registered (for models, `(site, k)` lexicographic), each as a mixed-radix
//! digit with the first oscillator most significant.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Fock cutoff per oscillator.
pub const DEFAULT_FOCK_DIM: usize = 8;
/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 2_000_000;

const PAR_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// One electronic excitation shared among the sites: `N` electronic states.
    SingleExcitation,
    /// Every site is a two-level system: `2^N` electronic states.
    FullTwoLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FockDims {
    Uniform(usize),
    PerMode(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSpec {
    pub fock: FockDims,
    pub sector: Sector,
    pub dim_cap: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self::uniform(DEFAULT_FOCK_DIM)
    }
}

impl TruncationSpec {
    pub fn uniform(d: usize) -> Self {
        Self { fock: FockDims::Uniform(d), sector: Sector::SingleExcitation, dim_cap: DEFAULT_DIM_CAP }
    }

    pub fn per_mode(dims: Vec<usize>) -> Self {
        Self { fock: FockDims::PerMode(dims), sector: Sector::SingleExcitation, dim_cap: DEFAULT_DIM_CAP }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    /// Resolve per-oscillator cutoffs for `n_modes` oscillators.
    pub fn resolve(&self, n_modes: usize) -> Result<Vec<usize>> {
        let dims = match &self.fock {
            FockDims::Uniform(d) => vec![*d; n_modes],
            FockDims::PerMode(v) => {
                if v.len() != n_modes {
                    return Err(Error::Truncation(format!(
                        "{} Fock cutoffs given for {} modes",
                        v.len(),
                        n_modes
                    )));
                }
                v.clone()
            }
        };
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::Truncation("Fock cutoff must be >= 1".into()));
        }
        Ok(dims)
    }
}

/// Index ↔ physical-state map for an electronic register ⊗ truncated oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDescriptor {
    sector: Sector,
    n_sites: usize,
    fock_dims: Vec<usize>,
    strides: Vec<usize>,
    fock_total: usize,
    electronic_dim: usize,
}

impl BasisDescriptor {
    pub fn new(sector: Sector, n_sites: usize, fock_dims: Vec<usize>, cap: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidArgument("basis needs at least one site".into()));
        }
        let electronic: u128 = match sector {
            Sector::SingleExcitation => n_sites as u128,
            Sector::FullTwoLevel => {
                if n_sites >= 64 {
                    return Err(Error::DimensionCap { dim: u128::MAX, cap });
                }
                1u128 << n_sites
            }
        };
        let mut total = electronic;
        for &d in &fock_dims {
            if d == 0 {
                return Err(Error::Truncation("Fock cutoff must be >= 1".into()));
            }
            total = total.saturating_mul(d as u128);
        }
        if total > cap as u128 {
            return Err(Error::DimensionCap { dim: total, cap });
        }
        let mut strides = vec![1; fock_dims.len()];
        for k in (0..fock_dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * fock_dims[k + 1];
        }
        let fock_total = fock_dims.iter().product();
        Ok(Self {
            sector,
            n_sites,
            fock_dims,
            strides,
            fock_total,
            electronic_dim: electronic as usize,
        })
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        self.fock_dims.len()
    }

    pub fn fock_dims(&self) -> &[usize] {
        &self.fock_dims
    }

    pub fn dim(&self) -> usize {
        self.electronic_dim * self.fock_total
    }

    pub fn electronic_dim(&self) -> usize {
        self.electronic_dim
    }

    pub fn fock_total(&self) -> usize {
        self.fock_total
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    pub fn index(&self, electronic: usize, fock: usize) -> usize {
        electronic * self.fock_total + fock
    }

    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.fock_total, index % self.fock_total)
    }

    /// Occupation of `mode` in a Fock index.
    pub fn occupation(&self, fock: usize, mode: usize) -> usize {
        (fock / self.strides[mode]) % self.fock_dims[mode]
    }

    pub fn fock_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.fock_dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.fock_dims.len(),
                got: occupations.len(),
            });
        }
        let mut idx = 0;
        for (k, &n) in occupations.iter().enumerate() {
            if n >= self.fock_dims[k] {
                return Err(Error::Truncation(format!(
                    "occupation {n} of mode {k} exceeds cutoff {}",
                    self.fock_dims[k]
                )));
            }
            idx += n * self.strides[k];
        }
        Ok(idx)
    }

    /// Whether `site` is excited in electronic state `e`.
    pub fn is_excited(&self, e: usize, site: usize) -> bool {
        match self.sector {
            Sector::SingleExcitation => e == site,
            Sector::FullTwoLevel => (e >> (self.n_sites - 1 - site)) & 1 == 1,
        }
    }

    /// `σz` eigenvalue of `site` in electronic state `e` (`+1` excited).
    pub fn sigma_z(&self, e: usize, site: usize) -> f64 {
        if self.is_excited(e, site) {
            1.0
        } else {
            -1.0
        }
    }

    /// Electronic state with exactly `site` excited.
    pub fn single_excitation(&self, site: usize) -> usize {
        match self.sector {
            Sector::SingleExcitation => site,
            Sector::FullTwoLevel => 1 << (self.n_sites - 1 - site),
        }
    }

    /// Electronic state with all sites in the ground state (full two-level sector only).
    pub fn ground(&self) -> Option<usize> {
        match self.sector {
            Sector::SingleExcitation => None,
            Sector::FullTwoLevel => Some(0),
        }
    }

    /// Electronic state reached by moving the excitation `from → to`, if allowed.
    pub fn hop(&self, e: usize, from: usize, to: usize) -> Option<usize> {
        match self.sector {
            Sector::SingleExcitation => (e == from).then_some(to),
            Sector::FullTwoLevel => {
                if self.is_excited(e, from) && !self.is_excited(e, to) {
                    let bf = 1 << (self.n_sites - 1 - from);
                    let bt = 1 << (self.n_sites - 1 - to);
                    Some((e & !bf) | bt)
                } else {
                    None
                }
            }
        }
    }
}

/// Sparse complex matrix in CSR layout, tied to a basis.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: BasisDescriptor,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        basis: BasisDescriptor,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Result<Self> {
        let dim = basis.dim();
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::InvalidArgument(format!(
                "entry ({r}, {c}) outside dimension {dim}"
            )));
        }
        triplets.par_sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { basis, row_ptr, cols, vals })
    }

    pub fn from_real_triplets(basis: BasisDescriptor, triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        Self::from_triplets(
            basis,
            triplets.into_iter().map(|(r, c, v)| (r, c, Complex64::new(v, 0.0))).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &BasisDescriptor {
        &self.basis
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim());
        assert_eq!(y.len(), self.dim());
        let row = |(r, out): (usize, &mut Complex64)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        };
        if self.dim() >= PAR_THRESHOLD {
            y.par_iter_mut().enumerate().for_each(|(r, out)| row((r, out)));
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    pub fn apply_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// `max |A_ij − conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() < 1e-12
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[Complex64]) -> Complex64 {
        let ax = self.apply_vec(x);
        x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Gershgorin bounds on the real spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.dim() {
            let mut center = 0.0;
            let mut radius = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    center = self.vals[k].re;
                } else {
                    radius += self.vals[k].norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }

    /// `A + shift·I`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut t: Vec<_> = self.triplets().collect();
        t.extend((0..self.dim()).map(|i| (i, i, Complex64::new(shift, 0.0))));
        Self::from_triplets(self.basis.clone(), t).expect("indices already validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn mixed_radix_indexing() {
        let b = BasisDescriptor::new(Sector::SingleExcitation, 2, vec![3, 2, 4], 1000).unwrap();
        assert_eq!(b.dim(), 2 * 24);
        let f = b.fock_index(&[2, 1, 3]).unwrap();
        assert_eq!(f, 2 * 8 + 4 + 3);
        assert_eq!(b.occupation(f, 0), 2);
        assert_eq!(b.occupation(f, 1), 1);
        assert_eq!(b.occupation(f, 2), 3);
        assert_eq!(b.split(b.index(1, f)), (1, f));
        assert!(b.fock_index(&[3, 0, 0]).is_err());
    }

    #[test]
    fn dimension_cap() {
        let e = BasisDescriptor::new(Sector::SingleExcitation, 3, vec![10; 6], 2_000_000);
        assert!(matches!(e, Err(Error::DimensionCap { dim: 3_000_000, .. })));
        let e = BasisDescriptor::new(Sector::FullTwoLevel, 80, vec![], usize::MAX);
        assert!(e.is_err());
    }

    #[test]
    fn two_level_bits() {
        let b = BasisDescriptor::new(Sector::FullTwoLevel, 3, vec![], 100).unwrap();
        let e = b.single_excitation(0);
        assert_eq!(e, 0b100);
        assert!(b.is_excited(e, 0));
        assert_eq!(b.hop(e, 0, 2), Some(0b001));
        assert_eq!(b.hop(e, 1, 2), None);
        assert_eq!(b.sigma_z(0b010, 1), 1.0);
        assert_eq!(b.sigma_z(0b010, 0), -1.0);
    }

    #[test]
    fn csr_merges_and_applies() {
        let b = BasisDescriptor::new(Sector::SingleExcitation, 3, vec![], 100).unwrap();
        let op = SparseOperator::from_triplets(
            b,
            vec![(0, 1, c(1.0)), (1, 0, c(1.0)), (0, 1, c(0.5)), (1, 0, c(0.5)), (2, 2, c(2.0))],
        )
        .unwrap();
        assert_eq!(op.nnz(), 3);
        assert_eq!(op.get(0, 1), c(1.5));
        let y = op.apply_vec(&[c(1.0), c(2.0), c(3.0)]);
        assert_eq!(y, vec![c(3.0), c(1.5), c(6.0)]);
        assert!(op.is_hermitian());
    }

    #[test]
    fn detects_non_hermitian() {
        let b = BasisDescriptor::new(Sector::SingleExcitation, 2, vec![], 100).unwrap();
        let op = SparseOperator::from_triplets(b, vec![(0, 1, Complex64::new(0.0, 1.0)), (1, 0, Complex64::new(0.0, 1.0))])
            .unwrap();
        assert!((op.hermiticity_error() - 2.0).abs() < 1e-15);
    }
}
