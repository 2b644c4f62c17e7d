//! Spectral densities: ingestion, thermal weighting, temperature rescaling and
//! discretization into mode sets.
//!
//! A spectral density is normalized so that `J(ω) dω` carries `κ²`: for a
//! discrete set `J(ω) = Σ_k κ_k² δ(ω − ω_k)`, and the reorganization energy is
//! `∫ J(ω)/ω dω = Σ_k κ_k²/ω_k`. Sampled densities are piecewise linear between
//! samples.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeneralizedHolsteinModel, Mode};
use crate::units::{GHZ_PER_CM1, KB_OVER_H_GHZ_PER_K};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// Each sample is a delta line `(ω_k, κ_k²)`.
    DiscreteModes,
    /// Samples of a continuous `J(ω)`.
    SampledContinuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    kind: DensityKind,
    samples: Vec<(f64, f64)>,
}

impl SpectralDensity {
    pub fn new(kind: DensityKind, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Spectral("no samples".into()));
        }
        for &(w, v) in &samples {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Spectral(format!("frequency must be > 0, got {w}")));
            }
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Spectral(format!("negative or non-finite value {v} at {w}")));
            }
        }
        if samples.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(Error::Spectral("non-strictly-increasing frequency grid".into()));
        }
        Ok(Self { kind, samples })
    }

    /// Discrete line set from `(ω_k, κ_k)` pairs.
    pub fn from_modes(modes: &ModeSet) -> Result<Self> {
        let mut s: Vec<_> = modes.modes().iter().map(|m| (m.omega, m.kappa * m.kappa)).collect();
        s.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::new(DensityKind::DiscreteModes, s)
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Read a two-column CSV with header `wavenumber_cm1,value_cm1` or
    /// `omega_ghz,value_ghz`. For discrete files the value column is the
    /// coupling `κ_k`; it is stored squared.
    pub fn read_csv<R: Read>(reader: R, kind: DensityKind) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let scale = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
            ["wavenumber_cm1", "value_cm1"] => GHZ_PER_CM1,
            ["omega_ghz", "value_ghz"] => 1.0,
            _ => {
                return Err(Error::Spectral(format!(
                    "unknown header {:?}; expected wavenumber_cm1,value_cm1 or omega_ghz,value_ghz",
                    header.join(",")
                )))
            }
        };
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Spectral(format!("expected 2 columns, got {}", rec.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Spectral(format!("not a number: {s:?}")))
            };
            let w = parse(&rec[0])? * scale;
            let v = parse(&rec[1])? * scale;
            if v < 0.0 {
                return Err(Error::Spectral(format!("negative value at row {}", samples.len() + 1)));
            }
            samples.push((w, if kind == DensityKind::DiscreteModes { v * v } else { v }));
        }
        Self::new(kind, samples)
    }

    pub fn load_csv(path: impl AsRef<Path>, kind: DensityKind) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, kind)
    }

    /// `∫ J dω` (sum of weights for discrete sets).
    pub fn total_weight(&self) -> f64 {
        match self.kind {
            DensityKind::DiscreteModes => self.samples.iter().map(|s| s.1).sum(),
            DensityKind::SampledContinuous => {
                self.samples.windows(2).map(|p| segment_weight(p[0], p[1], p[0].0, p[1].0)).sum()
            }
        }
    }

    /// `∫ J/ω dω`.
    pub fn reorganization_energy(&self) -> f64 {
        match self.kind {
            DensityKind::DiscreteModes => self.samples.iter().map(|s| s.1 / s.0).sum(),
            DensityKind::SampledContinuous => self
                .samples
                .windows(2)
                .map(|p| segment_reorg(p[0], p[1], p[0].0, p[1].0))
                .sum(),
        }
    }

    /// `∫ ω J dω`.
    pub fn first_moment(&self) -> f64 {
        match self.kind {
            DensityKind::DiscreteModes => self.samples.iter().map(|s| s.1 * s.0).sum(),
            DensityKind::SampledContinuous => self
                .samples
                .windows(2)
                .map(|p| segment_first_moment(p[0], p[1], p[0].0, p[1].0))
                .sum(),
        }
    }

    /// `C(ω, T) = [1 + coth(hω / 2k_BT)] J^A(ω)` on the signed grid `−ω_k … ω_k`.
    pub fn thermal_transform(&self, kelvin: f64) -> Result<ThermalSpectralDensity> {
        if !(kelvin > 0.0) || !kelvin.is_finite() {
            return Err(Error::Spectral(format!("temperature must be > 0 K, got {kelvin}")));
        }
        let kt = kelvin * KB_OVER_H_GHZ_PER_K;
        let mut neg = Vec::with_capacity(self.samples.len());
        let mut pos = Vec::with_capacity(self.samples.len());
        for &(w, j) in &self.samples {
            let (up, down) = thermal_factors(w, kt);
            pos.push((w, up * j));
            neg.push((-w, down * j));
        }
        neg.reverse();
        let mut samples = neg;
        if self.kind == DensityKind::SampledContinuous {
            // ω → 0: (1 + coth x) J(ω) → (2 k_BT / hω) J(ω), J extrapolated linearly
            // from the lowest sample through the origin.
            let (w0, j0) = self.samples[0];
            samples.push((0.0, 2.0 * kt * j0 / w0));
        }
        samples.extend(pos);
        Ok(ThermalSpectralDensity { samples, kelvin })
    }
}

/// `1 + coth(ω / 2kT)` and `(1 + coth(−ω / 2kT))·(−1)` for `ω > 0`, in the
/// cancellation-free form `2(1 + n̄)` and `2n̄`.
pub fn thermal_factors(omega: f64, kt_ghz: f64) -> (f64, f64) {
    let x = omega / kt_ghz;
    if x.is_infinite() || x > 1400.0 {
        return (2.0, 0.0);
    }
    let nbar = 1.0 / x.exp_m1();
    (2.0 * (1.0 + nbar), 2.0 * nbar)
}

fn lerp(a: (f64, f64), b: (f64, f64), w: f64) -> f64 {
    a.1 + (b.1 - a.1) * (w - a.0) / (b.0 - a.0)
}

/// `∫_{lo}^{hi} J` on the linear segment through `a`, `b`.
fn segment_weight(a: (f64, f64), b: (f64, f64), lo: f64, hi: f64) -> f64 {
    0.5 * (lerp(a, b, lo) + lerp(a, b, hi)) * (hi - lo)
}

/// `∫_{lo}^{hi} J/ω` on the linear segment `J = p + qω`.
fn segment_reorg(a: (f64, f64), b: (f64, f64), lo: f64, hi: f64) -> f64 {
    let q = (b.1 - a.1) / (b.0 - a.0);
    let p = a.1 - q * a.0;
    p * (hi / lo).ln() + q * (hi - lo)
}

/// `∫_{lo}^{hi} ω J`.
fn segment_first_moment(a: (f64, f64), b: (f64, f64), lo: f64, hi: f64) -> f64 {
    let q = (b.1 - a.1) / (b.0 - a.0);
    let p = a.1 - q * a.0;
    p * (hi * hi - lo * lo) / 2.0 + q * (hi.powi(3) - lo.powi(3)) / 3.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpectralDensity {
    samples: Vec<(f64, f64)>,
    kelvin: f64,
}

impl ThermalSpectralDensity {
    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn temperature(&self) -> f64 {
        self.kelvin
    }

    pub fn value_at(&self, omega: f64) -> Option<f64> {
        self.samples.iter().find(|s| s.0 == omega).map(|s| s.1)
    }

    /// Largest relative violation of `C(−ω)/C(ω) = exp(−hω/k_BT)` over the grid.
    pub fn detailed_balance_error(&self) -> f64 {
        let kt = self.kelvin * KB_OVER_H_GHZ_PER_K;
        self.samples
            .iter()
            .filter(|s| s.0 > 0.0 && s.1 > 0.0)
            .filter_map(|&(w, c)| {
                let cm = self.value_at(-w)?;
                let expected = (-w / kt).exp();
                if expected == 0.0 {
                    return Some(cm.abs());
                }
                Some(((cm / c) - expected).abs() / expected)
            })
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["omega_ghz", "value_ghz"])?;
        for &(x, c) in &self.samples {
            wtr.write_record([fmt_g12(x), fmt_g12(c)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// A site's bath as explicit `(ω_k, κ_k)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    modes: Vec<BathMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub omega: f64,
    pub kappa: f64,
}

impl ModeSet {
    pub fn new(modes: Vec<BathMode>) -> Result<Self> {
        for m in &modes {
            if !(m.omega > 0.0) || !m.omega.is_finite() {
                return Err(Error::Spectral(format!("mode frequency must be > 0, got {}", m.omega)));
            }
            if !(m.kappa >= 0.0) || !m.kappa.is_finite() {
                return Err(Error::Spectral(format!("mode coupling must be >= 0, got {}", m.kappa)));
            }
        }
        Ok(Self { modes })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(omega, kappa)| BathMode { omega, kappa }).collect())
    }

    pub fn from_model_site(model: &GeneralizedHolsteinModel, site: usize) -> Self {
        Self {
            modes: model.modes()[site]
                .iter()
                .map(|m| BathMode { omega: m.omega, kappa: m.kappa() })
                .collect(),
        }
    }

    pub fn modes(&self) -> &[BathMode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.omega).collect()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.kappa).collect()
    }

    pub fn reorganization_energy(&self) -> f64 {
        self.modes.iter().map(|m| m.kappa * m.kappa / m.omega).sum()
    }

    pub fn to_model_modes(&self) -> Vec<Mode> {
        self.modes.iter().map(|m| Mode::from_kappa(m.omega, m.kappa)).collect()
    }
}

/// Temperature rescaling `A_target = (T_target / T_source) A_source` of every
/// energy-dimensioned parameter.
pub trait Rescale: Sized {
    fn scaled_by(&self, factor: f64) -> Self;

    fn rescale(&self, source_kelvin: f64, target_kelvin: f64) -> Result<Self> {
        Ok(self.scaled_by(rescale_factor(source_kelvin, target_kelvin)?))
    }
}

pub fn rescale_factor(source_kelvin: f64, target_kelvin: f64) -> Result<f64> {
    for t in [source_kelvin, target_kelvin] {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::Spectral(format!("temperature must be > 0 K, got {t}")));
        }
    }
    Ok(target_kelvin / source_kelvin)
}

impl Rescale for ModeSet {
    fn scaled_by(&self, factor: f64) -> Self {
        Self {
            modes: self
                .modes
                .iter()
                .map(|m| BathMode { omega: m.omega * factor, kappa: m.kappa * factor })
                .collect(),
        }
    }
}

impl Rescale for GeneralizedHolsteinModel {
    fn scaled_by(&self, factor: f64) -> Self {
        self.scaled(factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscretizationScheme {
    /// Discrete input passed through unchanged.
    Direct,
    /// Bins holding equal `∫ J dω`.
    EqualWeight,
    /// Equal-width bins over the sampled range.
    LinearGrid,
}

/// Collapse `J` into `n_modes` oscillators.
///
/// Each bin becomes one mode with `κ² = ∫_bin J dω` and
/// `ω = ∫_bin J dω / ∫_bin J/ω dω`, which keeps both the total weight and the
/// reorganization energy of the piecewise-linear density exact.
pub fn to_mode_set(j: &SpectralDensity, n_modes: usize, scheme: DiscretizationScheme) -> Result<ModeSet> {
    if n_modes == 0 {
        return Err(Error::Spectral("n_modes must be >= 1".into()));
    }
    match (scheme, j.kind()) {
        (DiscretizationScheme::Direct, DensityKind::DiscreteModes) => {
            if n_modes > j.samples().len() {
                return Err(Error::Spectral(format!(
                    "{n_modes} modes requested from {} discrete lines",
                    j.samples().len()
                )));
            }
            ModeSet::new(
                j.samples().iter().map(|&(omega, w)| BathMode { omega, kappa: w.sqrt() }).collect(),
            )
        }
        (DiscretizationScheme::Direct, DensityKind::SampledContinuous) => Err(Error::Spectral(
            "direct scheme needs a discrete mode list".into(),
        )),
        (_, DensityKind::DiscreteModes) => Err(Error::Spectral(
            "binning schemes need a sampled continuous density".into(),
        )),
        (scheme, DensityKind::SampledContinuous) => {
            let s = j.samples();
            if s.len() < 2 {
                return Err(Error::Spectral("need at least two samples to integrate".into()));
            }
            let edges = match scheme {
                DiscretizationScheme::EqualWeight => equal_weight_edges(s, n_modes)?,
                _ => {
                    let (lo, hi) = (s[0].0, s[s.len() - 1].0);
                    (0..=n_modes).map(|i| lo + (hi - lo) * i as f64 / n_modes as f64).collect()
                }
            };
            let mut modes = Vec::with_capacity(n_modes);
            for pair in edges.windows(2) {
                let (w, r) = integrate_range(s, pair[0], pair[1]);
                let omega = if w > 0.0 && r > 0.0 { w / r } else { 0.5 * (pair[0] + pair[1]) };
                modes.push(BathMode { omega, kappa: w.max(0.0).sqrt() });
            }
            ModeSet::new(modes)
        }
    }
}

/// `(∫ J, ∫ J/ω)` over `[lo, hi]`.
fn integrate_range(s: &[(f64, f64)], lo: f64, hi: f64) -> (f64, f64) {
    let mut w = 0.0;
    let mut r = 0.0;
    for p in s.windows(2) {
        let a = lo.max(p[0].0);
        let b = hi.min(p[1].0);
        if b > a {
            w += segment_weight(p[0], p[1], a, b);
            r += segment_reorg(p[0], p[1], a, b);
        }
    }
    (w, r)
}

/// Bin edges splitting the cumulative weight into `n` equal parts.
fn equal_weight_edges(s: &[(f64, f64)], n: usize) -> Result<Vec<f64>> {
    let seg: Vec<f64> = s.windows(2).map(|p| segment_weight(p[0], p[1], p[0].0, p[1].0)).collect();
    let total: f64 = seg.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Spectral("spectral density has zero total weight".into()));
    }
    let mut edges = vec![s[0].0];
    let mut cum = 0.0;
    let mut k = 0;
    for i in 1..n {
        let target = total * i as f64 / n as f64;
        while k < seg.len() - 1 && cum + seg[k] < target {
            cum += seg[k];
            k += 1;
        }
        // Solve ∫_{x0}^{x} (j0 + q (t − x0)) dt = need for x on segment k.
        let (a, b) = (s[k], s[k + 1]);
        let need = (target - cum).max(0.0);
        let q = (b.1 - a.1) / (b.0 - a.0);
        let dx = if q.abs() < 1e-300 {
            if a.1 > 0.0 { need / a.1 } else { 0.0 }
        } else {
            // q/2 dx² + j0 dx − need = 0, stable root
            let disc = (a.1 * a.1 + 2.0 * q * need).max(0.0).sqrt();
            2.0 * need / (a.1 + disc)
        };
        edges.push((a.0 + dx).clamp(a.0, b.0).max(*edges.last().unwrap()));
    }
    edges.push(s[s.len() - 1].0);
    Ok(edges)
}

/// `%.12g`-style formatting used for every numeric CSV/JSON output.
pub fn fmt_g12(x: f64) -> String {
    const SIG: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (SIG - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -5 || exp >= SIG {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (SIG - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
