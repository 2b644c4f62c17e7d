//! Linear absorption from the dipole autocorrelation function.
//!
//! The ground manifold is the electronic vacuum with uncoupled oscillators in
//! their vacuum (`E_g = 0`). The excited manifold is the single-excitation
//! Hamiltonian with each site's constant offset `C_n` restored as its
//! transition energy. Then
//! `C(t) = ⟨μ|exp(−2πi H_e t)|μ⟩`, `|μ⟩ = Σ_n μ_n |n⟩ ⊗ |0⟩`, and
//! `I(f) = 2 Re ∫₀^∞ C(t) w(t) e^{2πi f t} dt` with a Gaussian window `w`.

use num_complex::Complex64;

use super::{evolve, time_grid, Propagator, StateVector, TWO_PI};
use crate::error::{Error, Result};
use crate::hamiltonian::SpinBosonNetwork;
use crate::model::GeneralizedHolsteinModel;
use crate::operator::{Sector, TruncationSpec};
use crate::spectral::fmt_g12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOptions {
    pub t_max: f64,
    pub dt: f64,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub n_freq: usize,
    pub propagator: Propagator,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self { t_max: 40.0, dt: 0.02, f_min: None, f_max: None, n_freq: 2001, propagator: Propagator::Krylov }
    }
}

impl SpectrumOptions {
    /// Gaussian window width: `w(t_max) = exp(−12.5)`.
    pub fn window_width(&self) -> f64 {
        self.t_max / 5.0
    }

    /// Standard deviation of the resulting Gaussian line shape in GHz.
    pub fn linewidth(&self) -> f64 {
        1.0 / (TWO_PI * self.window_width())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequency: Vec<f64>,
    pub intensity: Vec<f64>,
}

impl Spectrum {
    /// Trapezoidal area of the spectrum over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        self.frequency
            .windows(2)
            .zip(self.intensity.windows(2))
            .filter(|(f, _)| f[0] >= lo && f[1] <= hi)
            .map(|(f, i)| 0.5 * (i[0] + i[1]) * (f[1] - f[0]))
            .sum()
    }

    /// Frequency of the largest intensity inside `[lo, hi]`.
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.frequency
            .iter()
            .zip(&self.intensity)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(f, _)| *f)
    }

    /// CSV with header `omega_ghz,intensity`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["omega_ghz", "intensity"])?;
        for (f, i) in self.frequency.iter().zip(&self.intensity) {
            wtr.write_record([fmt_g12(*f), fmt_g12(*i)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn absorption_spectrum(
    model: &GeneralizedHolsteinModel,
    trunc: &TruncationSpec,
    dipoles: &[f64],
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    let n = model.n_sites();
    if dipoles.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dipoles.len() });
    }
    if opts.n_freq < 2 {
        return Err(Error::InvalidArgument("need at least two frequency points".into()));
    }
    let mut net = SpinBosonNetwork::from_model(model);
    net.site_energy = (0..n).map(|s| model.constant_offset(s)).collect();
    let trunc = trunc.clone().with_sector(Sector::SingleExcitation);
    let h = net.assemble(&trunc)?;
    let basis = h.basis();

    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    for (site, &mu) in dipoles.iter().enumerate() {
        amps[basis.index(site, 0)] = Complex64::new(mu, 0.0);
    }
    let weight: f64 = dipoles.iter().map(|m| m * m).sum();
    let (lo, hi) = h.spectral_bounds();
    let sigma = opts.linewidth();
    let f_min = opts.f_min.unwrap_or(lo - 6.0 * sigma);
    let f_max = opts.f_max.unwrap_or(hi + 6.0 * sigma);
    if !(f_max > f_min) {
        return Err(Error::InvalidArgument(format!("empty frequency range [{f_min}, {f_max}]")));
    }
    let frequency: Vec<f64> = (0..opts.n_freq)
        .map(|k| f_min + (f_max - f_min) * k as f64 / (opts.n_freq - 1) as f64)
        .collect();
    if weight == 0.0 {
        return Ok(Spectrum { intensity: vec![0.0; frequency.len()], frequency });
    }

    let psi0 = StateVector::new(amps).normalized();
    let times = time_grid(opts.t_max, opts.dt)?;
    let states = evolve(&h, &psi0, &times, opts.propagator)?;
    let tau = opts.window_width();
    let corr: Vec<Complex64> = states
        .iter()
        .zip(&times)
        .map(|(s, &t)| psi0.inner(s) * weight * (-0.5 * (t / tau).powi(2)).exp())
        .collect();

    let intensity = frequency
        .iter()
        .map(|&f| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, (c, &t)) in corr.iter().zip(&times).enumerate() {
                let wgt = if k == 0 { 0.5 } else { 1.0 };
                acc += c * Complex64::from_polar(wgt, TWO_PI * f * t);
            }
            2.0 * opts.dt * acc.re
        })
        .collect();
    Ok(Spectrum { frequency, intensity })
}
