//! Standard and generalized (multi-mode) Holstein models.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-electron chain with one local mode per site and nearest-neighbour hopping.
#[derive(Debug, Clone, PartialEq)]
pub struct HolsteinModel {
    hop: Vec<f64>,
    mode_freq: Vec<f64>,
    mode_coupling: Vec<f64>,
}

impl HolsteinModel {
    pub fn new(hop: Vec<f64>, mode_freq: Vec<f64>, mode_coupling: Vec<f64>) -> Result<Self> {
        let n = mode_freq.len();
        if n == 0 {
            return Err(Error::InvalidModel("at least one site is required".into()));
        }
        if hop.len() + 1 != n {
            return Err(Error::InvalidModel(format!(
                "{} sites need {} hopping terms, got {}",
                n,
                n - 1,
                hop.len()
            )));
        }
        if mode_coupling.len() != n {
            return Err(Error::InvalidModel(format!(
                "{} sites need {} mode couplings, got {}",
                n,
                n,
                mode_coupling.len()
            )));
        }
        if let Some(w) = mode_freq.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel(format!("mode frequency must be > 0, got {w}")));
        }
        if hop.iter().chain(&mode_coupling).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        Ok(Self { hop, mode_freq, mode_coupling })
    }

    /// Uniform chain: every hop `v`, every mode `(omega, kappa)`.
    pub fn uniform(n_sites: usize, v: f64, omega: f64, kappa: f64) -> Result<Self> {
        Self::new(
            vec![v; n_sites.saturating_sub(1)],
            vec![omega; n_sites],
            vec![kappa; n_sites],
        )
    }

    pub fn n_sites(&self) -> usize {
        self.mode_freq.len()
    }

    pub fn hop(&self) -> &[f64] {
        &self.hop
    }

    pub fn mode_freq(&self) -> &[f64] {
        &self.mode_freq
    }

    pub fn mode_coupling(&self) -> &[f64] {
        &self.mode_coupling
    }

    /// Embed into the multi-mode model: `J` on the first off-diagonals,
    /// `R = (κ/ω)²`, zero transition energies and shifts.
    pub fn promote(&self) -> GeneralizedHolsteinModel {
        let n = self.n_sites();
        let mut couplings = DMatrix::zeros(n, n);
        for (i, &v) in self.hop.iter().enumerate() {
            couplings[(i, i + 1)] = v;
            couplings[(i + 1, i)] = v;
        }
        let modes = self
            .mode_freq
            .iter()
            .zip(&self.mode_coupling)
            .map(|(&omega, &kappa)| {
                let r = kappa / omega;
                vec![Mode { omega, huang_rhys: r * r }]
            })
            .collect();
        GeneralizedHolsteinModel {
            couplings,
            site_energy: vec![0.0; n],
            shift: vec![0.0; n],
            modes,
        }
    }
}

/// One vibrational mode attached to a site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub omega: f64,
    pub huang_rhys: f64,
}

impl Mode {
    /// `κ = ω √R`.
    pub fn kappa(&self) -> f64 {
        self.omega * self.huang_rhys.sqrt()
    }

    pub fn from_kappa(omega: f64, kappa: f64) -> Self {
        let r = kappa / omega;
        Mode { omega, huang_rhys: r * r }
    }
}

/// Multi-mode Holstein model with an arbitrary symmetric coupling graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedHolsteinModel {
    couplings: DMatrix<f64>,
    site_energy: Vec<f64>,
    shift: Vec<f64>,
    modes: Vec<Vec<Mode>>,
}

impl GeneralizedHolsteinModel {
    pub fn new(
        couplings: DMatrix<f64>,
        site_energy: Vec<f64>,
        shift: Vec<f64>,
        modes: Vec<Vec<Mode>>,
    ) -> Result<Self> {
        let n = couplings.nrows();
        if n == 0 {
            return Err(Error::InvalidModel("at least one site is required".into()));
        }
        if couplings.ncols() != n || site_energy.len() != n || shift.len() != n || modes.len() != n
        {
            return Err(Error::InvalidModel(format!(
                "inconsistent lengths: J is {}x{}, {} energies, {} shifts, {} mode lists",
                couplings.nrows(),
                couplings.ncols(),
                site_energy.len(),
                shift.len(),
                modes.len()
            )));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidModel(format!("J[{i},{i}] must be zero")));
            }
            for j in 0..i {
                if couplings[(i, j)] != couplings[(j, i)] {
                    return Err(Error::InvalidModel(format!("J not symmetric at ({i},{j})")));
                }
            }
        }
        if couplings.iter().chain(&site_energy).chain(&shift).any(|x| !x.is_finite()) {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        for (site, list) in modes.iter().enumerate() {
            for m in list {
                if !(m.omega > 0.0) || !m.omega.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "site {}: mode frequency must be > 0, got {}",
                        site + 1,
                        m.omega
                    )));
                }
                if !(m.huang_rhys >= 0.0) || !m.huang_rhys.is_finite() {
                    return Err(Error::InvalidModel(format!(
                        "site {}: Huang-Rhys factor must be >= 0, got {}",
                        site + 1,
                        m.huang_rhys
                    )));
                }
            }
        }
        Ok(Self { couplings, site_energy, shift, modes })
    }

    pub fn n_sites(&self) -> usize {
        self.couplings.nrows()
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[(i, j)]
    }

    pub fn site_energy(&self) -> &[f64] {
        &self.site_energy
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn modes(&self) -> &[Vec<Mode>] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.iter().map(Vec::len).sum()
    }

    /// Constant offset `C_n = ε_n + Σ_k ω_nk R_nk + D_n`. Not part of the assembled dynamics.
    pub fn constant_offset(&self, site: usize) -> f64 {
        self.site_energy[site]
            + self.modes[site].iter().map(|m| m.omega * m.huang_rhys).sum::<f64>()
            + self.shift[site]
    }

    /// Connected pairs `(i, j, J_ij)` with `i < j`.
    pub fn coupled_pairs(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_sites();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let v = self.couplings[(i, j)];
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Same model with every site's mode list replaced.
    pub fn with_modes(&self, modes: Vec<Vec<Mode>>) -> Result<Self> {
        Self::new(self.couplings.clone(), self.site_energy.clone(), self.shift.clone(), modes)
    }

    /// Scale every energy-dimensioned parameter by `factor`; Huang–Rhys factors are untouched.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            couplings: &self.couplings * factor,
            site_energy: self.site_energy.iter().map(|e| e * factor).collect(),
            shift: self.shift.iter().map(|d| d * factor).collect(),
            modes: self
                .modes
                .iter()
                .map(|list| {
                    list.iter()
                        .map(|m| Mode { omega: m.omega * factor, huang_rhys: m.huang_rhys })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        file.into_model()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            sites: (0..self.n_sites())
                .map(|n| SiteEntry {
                    epsilon_ghz: self.site_energy[n],
                    d_shift_ghz: self.shift[n],
                    modes: self.modes[n]
                        .iter()
                        .map(|m| ModeEntry { omega_ghz: m.omega, huang_rhys: m.huang_rhys })
                        .collect(),
                })
                .collect(),
            couplings: self
                .coupled_pairs()
                .into_iter()
                .map(|(i, j, v)| CouplingEntry { i: i + 1, j: j + 1, j_ghz: v })
                .collect(),
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }
}

/// On-disk model schema. Site indices in `couplings` are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub sites: Vec<SiteEntry>,
    #[serde(default)]
    pub couplings: Vec<CouplingEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    #[serde(default)]
    pub epsilon_ghz: f64,
    #[serde(default)]
    pub d_shift_ghz: f64,
    #[serde(default)]
    pub modes: Vec<ModeEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeEntry {
    pub omega_ghz: f64,
    pub huang_rhys: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    #[serde(rename = "J_ghz")]
    pub j_ghz: f64,
}

impl ModelFile {
    pub fn into_model(self) -> Result<GeneralizedHolsteinModel> {
        let n = self.sites.len();
        let mut couplings = DMatrix::zeros(n, n);
        let mut seen = DMatrix::from_element(n, n, false);
        for c in &self.couplings {
            if c.i == 0 || c.j == 0 || c.i > n || c.j > n {
                return Err(Error::InvalidModel(format!(
                    "coupling ({}, {}) out of range 1..={n}",
                    c.i, c.j
                )));
            }
            if c.i == c.j {
                return Err(Error::InvalidModel(format!("self-coupling on site {}", c.i)));
            }
            let (i, j) = (c.i - 1, c.j - 1);
            if seen[(i, j)] {
                return Err(Error::InvalidModel(format!("duplicate coupling ({}, {})", c.i, c.j)));
            }
            seen[(i, j)] = true;
            seen[(j, i)] = true;
            couplings[(i, j)] = c.j_ghz;
            couplings[(j, i)] = c.j_ghz;
        }
        let site_energy = self.sites.iter().map(|s| s.epsilon_ghz).collect();
        let shift = self.sites.iter().map(|s| s.d_shift_ghz).collect();
        let modes = self
            .sites
            .iter()
            .map(|s| {
                s.modes
                    .iter()
                    .map(|m| Mode { omega: m.omega_ghz, huang_rhys: m.huang_rhys })
                    .collect()
            })
            .collect();
        GeneralizedHolsteinModel::new(couplings, site_energy, shift, modes)
    }
}
