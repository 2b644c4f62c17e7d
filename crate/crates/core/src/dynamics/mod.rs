//! Exact closed-system time evolution, `ψ(t) = exp(−2πi H t) ψ₀` with `H` in
//! GHz and `t` in ns.

mod dense;
mod krylov;
mod rwa;
mod spectrum;
mod thermal;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{BasisDescriptor, Sector, SparseOperator};
use crate::spectral::fmt_g12;

pub use dense::{dense_evolve, dense_oracle, DENSE_MAX_DIM};
pub use krylov::{krylov_evolve, propagate, KrylovOptions};
pub use rwa::{rwa_error, rwa_hamiltonians};
pub use spectrum::{absorption_spectrum, Spectrum, SpectrumOptions};
pub use thermal::{
    boltzmann_weights, bose_occupation, propagate_ensemble, sample_occupations, thermal_initial_state, EnsembleMember,
    ThermalEnsemble,
};

pub(crate) const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagator {
    #[default]
    Krylov,
    Dense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    /// `|electronic⟩ ⊗ |fock⟩` basis vector.
    pub fn basis_state(basis: &BasisDescriptor, electronic: usize, fock: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amps[basis.index(electronic, fock)] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Excitation on `site`, all oscillators in vacuum.
    pub fn site_excitation(basis: &BasisDescriptor, site: usize) -> Self {
        Self::basis_state(basis, basis.single_excitation(site), 0)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Site populations (and optionally states and coherences) on a time grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub states: Option<Vec<StateVector>>,
    /// Single-excitation reduced electronic density matrices, row-major `N×N`.
    pub coherences: Option<Vec<Vec<Complex64>>>,
}

impl Trajectory {
    pub fn from_states(basis: &BasisDescriptor, times: &[f64], states: Vec<StateVector>, keep_states: bool) -> Self {
        let populations = states.iter().map(|s| site_populations(basis, s)).collect();
        let coherences = (basis.sector() == Sector::SingleExcitation)
            .then(|| states.iter().map(|s| electronic_density(basis, s)).collect());
        Self {
            times: times.to_vec(),
            populations,
            states: keep_states.then_some(states),
            coherences,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    pub fn max_population_deviation(&self, other: &Trajectory) -> f64 {
        self.populations
            .iter()
            .zip(&other.populations)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV with header `t_ns,p_site_1,…,p_site_N`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["t_ns".to_string()];
        header.extend((1..=self.n_sites()).map(|n| format!("p_site_{n}")));
        wtr.write_record(&header)?;
        for (t, p) in self.times.iter().zip(&self.populations) {
            let mut row = vec![fmt_g12(*t)];
            row.extend(p.iter().map(|x| fmt_g12(*x)));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `⟨n̂_site⟩` for every site.
pub fn site_populations(basis: &BasisDescriptor, state: &StateVector) -> Vec<f64> {
    let mut p = vec![0.0; basis.n_sites()];
    let fock = basis.fock_total();
    for (e, chunk) in state.amplitudes().chunks(fock).enumerate() {
        let w: f64 = chunk.iter().map(|a| a.norm_sqr()).sum();
        for (site, ps) in p.iter_mut().enumerate() {
            if basis.is_excited(e, site) {
                *ps += w;
            }
        }
    }
    p
}

/// `ρ_nm = Σ_f ψ_{n,f} ψ*_{m,f}` in the single-excitation sector, row-major.
pub fn electronic_density(basis: &BasisDescriptor, state: &StateVector) -> Vec<Complex64> {
    let n = basis.electronic_dim();
    let fock = basis.fock_total();
    let a = state.amplitudes();
    let mut rho = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            rho[i * n + j] = (0..fock).map(|f| a[i * fock + f] * a[j * fock + f].conj()).sum();
        }
    }
    rho
}

/// Reduced 2×2 density matrix of one site in `(g, e)` order.
pub fn reduced_site_state(basis: &BasisDescriptor, state: &StateVector, site: usize) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    let mut rho = [[zero; 2]; 2];
    let fock = basis.fock_total();
    let a = state.amplitudes();
    for e in 0..basis.electronic_dim() {
        let excited = basis.is_excited(e, site);
        let w: f64 = a[e * fock..(e + 1) * fock].iter().map(|x| x.norm_sqr()).sum();
        rho[usize::from(excited)][usize::from(excited)] += w;
        if excited && basis.sector() == Sector::FullTwoLevel {
            let g = e & !(1 << (basis.n_sites() - 1 - site));
            let c: Complex64 = (0..fock).map(|f| a[e * fock + f] * a[g * fock + f].conj()).sum();
            rho[1][0] += c;
            rho[0][1] += c.conj();
        }
    }
    rho
}

/// `½ ‖ρ − σ‖₁` for 2×2 Hermitian matrices.
pub fn trace_distance_2x2(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> f64 {
    let d00 = (a[0][0] - b[0][0]).re;
    let d11 = (a[1][1] - b[1][1]).re;
    let d01 = a[0][1] - b[0][1];
    let mean = 0.5 * (d00 + d11);
    let r = (0.25 * (d00 - d11).powi(2) + d01.norm_sqr()).sqrt();
    0.5 * ((mean + r).abs() + (mean - r).abs())
}

pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and >= 0")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    Ok(())
}

pub(crate) fn check_operator(h: &SparseOperator, psi0: &StateVector) -> Result<()> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.len() });
    }
    let herm = h.hermiticity_error();
    if herm >= 1e-12 {
        return Err(Error::NotHermitian(herm));
    }
    Ok(())
}

/// States at every time in `times` with the chosen propagator.
pub fn evolve(h: &SparseOperator, psi0: &StateVector, times: &[f64], propagator: Propagator) -> Result<Vec<StateVector>> {
    match propagator {
        Propagator::Krylov => krylov_evolve(h, psi0, times, &KrylovOptions::default()),
        Propagator::Dense => dense_evolve(h, psi0, times),
    }
}

/// Uniform grid `0, dt, …` up to and including `t_max` (within rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_max >= 0.0) || !dt.is_finite() || !t_max.is_finite() {
        return Err(Error::InvalidArgument(format!("bad time grid t_max={t_max}, dt={dt}")));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * dt).collect())
}
