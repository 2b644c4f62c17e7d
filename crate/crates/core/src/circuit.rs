//! Compilation of Holstein models onto flux-qubit / LC-oscillator circuits and
//! hardware feasibility checks.
//!
//! In the qubit energy eigenbasis the circuit Hamiltonian reads
//! `½ Σ g (σxσx + σyσy) + Σ_i [Δ_i/2 σz_i + η σz_i (c + c†) + ω' c†c]`, so
//! `g ↔ J`, `η ↔ κ`, `ω' ↔ ω`. Indices in the design are 0-based.

use serde::{Deserialize, Serialize};

use crate::bath::ChainBath;
use crate::error::{Error, Result};
use crate::model::{GeneralizedHolsteinModel, Mode};
use crate::operator::{BasisDescriptor, SparseOperator, TruncationSpec};

/// Uniform qubit tunnel splitting recorded in compiled designs.
pub const DEFAULT_DELTA_GHZ: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub delta_ghz: f64,
    #[serde(default)]
    pub bias_ghz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupler {
    pub i: usize,
    pub j: usize,
    pub g_ghz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitOscillator {
    pub qubit: usize,
    /// Chain index within the qubit's bath, `None` for a directly coupled mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
    /// Position along the chain (0 = head).
    #[serde(default)]
    pub position: usize,
    pub omega_prime_ghz: f64,
    /// Qubit coupling; zero for chain members behind the head.
    pub eta_ghz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorLink {
    pub a: usize,
    pub b: usize,
    pub coupling_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitDesign {
    pub qubits: Vec<Qubit>,
    #[serde(default)]
    pub couplers: Vec<Coupler>,
    #[serde(default)]
    pub oscillators: Vec<CircuitOscillator>,
    #[serde(default)]
    pub links: Vec<OscillatorLink>,
}

impl CircuitDesign {
    pub fn validate(&self) -> Result<()> {
        let nq = self.qubits.len();
        if nq == 0 {
            return Err(Error::Topology("design has no qubits".into()));
        }
        for c in &self.couplers {
            if c.i >= nq || c.j >= nq || c.i == c.j {
                return Err(Error::Topology(format!("coupler ({}, {}) invalid", c.i, c.j)));
            }
        }
        for (k, o) in self.oscillators.iter().enumerate() {
            if o.qubit >= nq {
                return Err(Error::Topology(format!("oscillator {k} on missing qubit {}", o.qubit)));
            }
            if !(o.omega_prime_ghz > 0.0) {
                return Err(Error::Topology(format!("oscillator {k}: ω' must be > 0")));
            }
        }
        let no = self.oscillators.len();
        for l in &self.links {
            if l.a >= no || l.b >= no || l.a == l.b {
                return Err(Error::Topology(format!("link ({}, {}) invalid", l.a, l.b)));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Read `(J, per-qubit (ω, κ))` back out of a star-form design.
    pub fn model_parameters(&self) -> (Vec<(usize, usize, f64)>, Vec<Vec<(f64, f64)>>) {
        let pairs = self.couplers.iter().map(|c| (c.i, c.j, c.g_ghz)).collect();
        let mut modes = vec![Vec::new(); self.qubits.len()];
        for o in &self.oscillators {
            modes[o.qubit].push((o.omega_prime_ghz, o.eta_ghz));
        }
        (pairs, modes)
    }
}

/// Map a model onto circuit parameters. When `baths` is given it holds one
/// chain bath per site and replaces that site's star-coupled modes.
pub fn compile(model: &GeneralizedHolsteinModel, baths: Option<&[ChainBath]>) -> Result<CircuitDesign> {
    let n = model.n_sites();
    if let Some(b) = baths {
        if b.len() != n {
            return Err(Error::Topology(format!("{} chain baths for {} sites", b.len(), n)));
        }
    }
    let qubits = vec![Qubit { delta_ghz: DEFAULT_DELTA_GHZ, bias_ghz: 0.0 }; n];
    let couplers = model.coupled_pairs().into_iter().map(|(i, j, g)| Coupler { i, j, g_ghz: g }).collect();
    let mut oscillators = Vec::new();
    let mut links = Vec::new();
    for site in 0..n {
        match baths {
            None => oscillators.extend(model.modes()[site].iter().map(|m| CircuitOscillator {
                qubit: site,
                chain: None,
                position: 0,
                omega_prime_ghz: m.omega,
                eta_ghz: m.kappa(),
            })),
            Some(b) => {
                for (ci, chain) in b[site].chains.iter().enumerate() {
                    let start = oscillators.len();
                    for (pos, &w) in chain.site_freq.iter().enumerate() {
                        oscillators.push(CircuitOscillator {
                            qubit: site,
                            chain: Some(ci),
                            position: pos,
                            omega_prime_ghz: w,
                            eta_ghz: if pos == 0 { chain.head_coupling } else { 0.0 },
                        });
                    }
                    links.extend(chain.link_coupling.iter().enumerate().map(|(k, &l)| OscillatorLink {
                        a: start + k,
                        b: start + k + 1,
                        coupling_ghz: l,
                    }));
                }
            }
        }
    }
    Ok(CircuitDesign { qubits, couplers, oscillators, links })
}

/// Assemble the circuit Hamiltonian in the qubit eigenbasis over the same basis
/// layout as model assembly (qubit register slowest, oscillators in design
/// order). `include_splitting` adds `Σ Δ_i/2 σz_i`.
pub fn circuit_hamiltonian(
    design: &CircuitDesign,
    trunc: &TruncationSpec,
    include_splitting: bool,
) -> Result<SparseOperator> {
    design.validate()?;
    if design.qubits.iter().any(|q| q.bias_ghz != 0.0) {
        return Err(Error::InvalidArgument(
            "non-zero energy bias breaks the excitation-conserving form".into(),
        ));
    }
    let dims = trunc.resolve(design.oscillators.len())?;
    let basis = BasisDescriptor::new(trunc.sector, design.qubits.len(), dims, trunc.dim_cap)?;
    let mut t: Vec<(usize, usize, f64)> = Vec::new();
    for e in 0..basis.electronic_dim() {
        let splitting: f64 = if include_splitting {
            design.qubits.iter().enumerate().map(|(i, q)| 0.5 * q.delta_ghz * basis.sigma_z(e, i)).sum()
        } else {
            0.0
        };
        for f in 0..basis.fock_total() {
            let col = basis.index(e, f);
            let mut d = splitting;
            for (k, o) in design.oscillators.iter().enumerate() {
                let n = basis.occupation(f, k);
                d += o.omega_prime_ghz * n as f64;
                let amp = o.eta_ghz * basis.sigma_z(e, o.qubit);
                if amp != 0.0 {
                    if n + 1 < basis.fock_dims()[k] {
                        t.push((basis.index(e, f + basis.stride(k)), col, amp * ((n + 1) as f64).sqrt()));
                    }
                    if n > 0 {
                        t.push((basis.index(e, f - basis.stride(k)), col, amp * (n as f64).sqrt()));
                    }
                }
            }
            if d != 0.0 {
                t.push((col, col, d));
            }
            for c in &design.couplers {
                for (from, to) in [(c.i, c.j), (c.j, c.i)] {
                    if let Some(e2) = basis.hop(e, from, to) {
                        t.push((basis.index(e2, f), col, c.g_ghz));
                    }
                }
            }
            for l in &design.links {
                for (up, down) in [(l.a, l.b), (l.b, l.a)] {
                    let nu = basis.occupation(f, up);
                    let nd = basis.occupation(f, down);
                    if nd > 0 && nu + 1 < basis.fock_dims()[up] {
                        let f2 = f + basis.stride(up) - basis.stride(down);
                        t.push((basis.index(e, f2), col, l.coupling_ghz * (((nu + 1) * nd) as f64).sqrt()));
                    }
                }
            }
        }
    }
    SparseOperator::from_real_triplets(basis, t)
}

/// Inductive coupling hardware of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorHardware {
    /// Inductive division ratio β.
    pub beta: f64,
    /// Effective persistent current `I_p` in nA.
    pub persistent_current_na: f64,
    /// Oscillator impedance `Z_r` in Ω.
    pub impedance_ohm: f64,
}

impl OscillatorHardware {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument(format!("β must be in [0, 1), got {}", self.beta)));
        }
        if !(self.persistent_current_na > 0.0) || !self.persistent_current_na.is_finite() {
            return Err(Error::InvalidArgument("persistent current must be > 0".into()));
        }
        if !(self.impedance_ohm > 0.0) || !self.impedance_ohm.is_finite() {
            return Err(Error::InvalidArgument("impedance must be > 0".into()));
        }
        Ok(())
    }
}

/// `√R = κ/ħω = 5.48 β (I_p / 50 nA) (Z_r / 100 Ω)^½ (f / 1 GHz)^−1`, with `f` the
/// ordinary oscillator frequency.
pub fn coupling_ratio(hw: &OscillatorHardware, freq_ghz: f64) -> Result<f64> {
    hw.validate()?;
    if !(freq_ghz > 0.0) || !freq_ghz.is_finite() {
        return Err(Error::InvalidArgument(format!("frequency must be > 0, got {freq_ghz}")));
    }
    Ok(5.48 * hw.beta * (hw.persistent_current_na / 50.0) * (hw.impedance_ohm / 100.0).sqrt() / freq_ghz)
}

/// β needed to reach `sqrt_r` at the given current, impedance and frequency.
pub fn required_beta(sqrt_r: f64, persistent_current_na: f64, impedance_ohm: f64, freq_ghz: f64) -> Result<f64> {
    if !(persistent_current_na > 0.0) || !(impedance_ohm > 0.0) || !(freq_ghz > 0.0) {
        return Err(Error::InvalidArgument("current, impedance and frequency must be > 0".into()));
    }
    if !(sqrt_r >= 0.0) {
        return Err(Error::InvalidArgument(format!("√R must be >= 0, got {sqrt_r}")));
    }
    Ok(sqrt_r * freq_ghz / (5.48 * (persistent_current_na / 50.0) * (impedance_ohm / 100.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityLimits {
    pub g_max_ghz: f64,
    /// Strict upper bound on η.
    pub eta_max_ghz: f64,
    pub beta_max: f64,
    pub z_max_ohm: f64,
}

impl Default for FeasibilityLimits {
    fn default() -> Self {
        Self { g_max_ghz: 1.0, eta_max_ghz: 10.0, beta_max: 0.2, z_max_ohm: 100.0 }
    }
}

pub const CHECK_G_RANGE: &str = "g range";
pub const CHECK_ETA_RANGE: &str = "eta range";
pub const CHECK_BETA: &str = "beta";
pub const CHECK_IMPEDANCE: &str = "impedance";
pub const CHECK_REQUIRED_BETA: &str = "required beta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub subject: String,
    pub value: f64,
    pub limit: f64,
    /// Distance to the violated side; negative when failing.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl FeasibilityReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

pub fn check_feasibility(
    design: &CircuitDesign,
    hardware: &[OscillatorHardware],
    limits: &FeasibilityLimits,
) -> Result<FeasibilityReport> {
    design.validate()?;
    if hardware.len() != design.oscillators.len() {
        return Err(Error::Topology(format!(
            "{} hardware entries for {} oscillators",
            hardware.len(),
            design.oscillators.len()
        )));
    }
    let mut checks = Vec::new();
    let mut push = |name: &str, subject: String, value: f64, limit: f64, margin: f64, pass: bool| {
        checks.push(Check { name: name.into(), subject, value, limit, margin, pass });
    };
    for c in &design.couplers {
        let margin = c.g_ghz.min(limits.g_max_ghz - c.g_ghz);
        push(CHECK_G_RANGE, format!("coupler {}-{}", c.i, c.j), c.g_ghz, limits.g_max_ghz, margin, margin >= 0.0);
    }
    for (k, (o, hw)) in design.oscillators.iter().zip(hardware).enumerate() {
        hw.validate()?;
        let subject = format!("oscillator {k}");
        let m = limits.eta_max_ghz - o.eta_ghz;
        push(CHECK_ETA_RANGE, subject.clone(), o.eta_ghz, limits.eta_max_ghz, m, m > 0.0 && o.eta_ghz >= 0.0);
        let m = limits.beta_max - hw.beta;
        push(CHECK_BETA, subject.clone(), hw.beta, limits.beta_max, m, m >= 0.0);
        let m = limits.z_max_ohm - hw.impedance_ohm;
        push(CHECK_IMPEDANCE, subject.clone(), hw.impedance_ohm, limits.z_max_ohm, m, m >= 0.0);
        if o.eta_ghz > 0.0 {
            let sqrt_r = o.eta_ghz / o.omega_prime_ghz;
            let need = required_beta(sqrt_r, hw.persistent_current_na, hw.impedance_ohm, o.omega_prime_ghz)?;
            let m = limits.beta_max - need;
            push(CHECK_REQUIRED_BETA, subject, need, limits.beta_max, m, m >= 0.0);
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(FeasibilityReport { checks, pass })
}

/// Hardware that realizes each oscillator's coupling exactly at fixed current and impedance.
pub fn matched_hardware(design: &CircuitDesign, persistent_current_na: f64, impedance_ohm: f64) -> Result<Vec<OscillatorHardware>> {
    design
        .oscillators
        .iter()
        .map(|o| {
            let beta = required_beta(o.eta_ghz / o.omega_prime_ghz, persistent_current_na, impedance_ohm, o.omega_prime_ghz)?;
            Ok(OscillatorHardware { beta, persistent_current_na, impedance_ohm })
        })
        .collect()
}

/// Rebuild star-form modes from a design (inverse of [`compile`] without baths).
pub fn modes_from_design(design: &CircuitDesign) -> Vec<Vec<Mode>> {
    design
        .model_parameters()
        .1
        .into_iter()
        .map(|l| l.into_iter().map(|(w, k)| Mode::from_kappa(w, k)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HolsteinModel;

    fn hw(beta: f64, ip: f64, z: f64) -> OscillatorHardware {
        OscillatorHardware { beta, persistent_current_na: ip, impedance_ohm: z }
    }

    #[test]
    fn coupling_formula() {
        assert!((coupling_ratio(&hw(0.1, 50.0, 100.0), 1.0).unwrap() - 0.548).abs() < 1e-12);
        assert!((coupling_ratio(&hw(0.05, 100.0, 25.0), 2.0).unwrap() - 0.137).abs() < 1e-12);
        assert_eq!(coupling_ratio(&hw(0.0, 50.0, 100.0), 1.0).unwrap(), 0.0);
        assert!(coupling_ratio(&hw(0.1, 0.0, 100.0), 1.0).is_err());
        assert!(coupling_ratio(&hw(0.1, 50.0, -1.0), 1.0).is_err());
        assert!(coupling_ratio(&hw(0.1, 50.0, 100.0), 0.0).is_err());
    }

    #[test]
    fn required_beta_inverts_formula() {
        let b = required_beta(0.548, 50.0, 100.0, 1.0).unwrap();
        assert!((b - 0.1).abs() < 1e-12);
        let fwd = coupling_ratio(&hw(b, 50.0, 100.0), 1.0).unwrap();
        assert!((fwd - 0.548).abs() < 1e-12);
    }

    #[test]
    fn compile_two_sites() {
        let m = HolsteinModel::new(vec![0.5], vec![1.5, 1.5], vec![0.2, 0.2]).unwrap().promote();
        let d = compile(&m, None).unwrap();
        assert_eq!(d.couplers, vec![Coupler { i: 0, j: 1, g_ghz: 0.5 }]);
        assert_eq!(d.oscillators.len(), 2);
        for o in &d.oscillators {
            assert!((o.eta_ghz - 0.2).abs() < 1e-15);
            assert_eq!(o.omega_prime_ghz, 1.5);
        }
        assert!(d.qubits.iter().all(|q| q.delta_ghz == DEFAULT_DELTA_GHZ && q.bias_ghz == 0.0));
    }

    #[test]
    fn compile_without_modes() {
        let m = HolsteinModel::new(vec![0.5], vec![1.0, 1.0], vec![0.0, 0.0]).unwrap().promote();
        let m = m.with_modes(vec![vec![], vec![]]).unwrap();
        let d = compile(&m, None).unwrap();
        assert!(d.oscillators.is_empty() && d.links.is_empty());
    }

    #[test]
    fn compile_with_chain() {
        use crate::bath::{star_to_chain, ChainBath};
        use crate::spectral::ModeSet;
        let modes = ModeSet::from_pairs(&[(1.0, 0.1), (1.3, 0.2), (1.7, 0.15)]).unwrap();
        let m = GeneralizedHolsteinModel::new(
            nalgebra::DMatrix::zeros(1, 1),
            vec![0.0],
            vec![0.0],
            vec![modes.to_model_modes()],
        )
        .unwrap();
        let chain = star_to_chain(&modes).unwrap();
        let bath = ChainBath { chains: vec![chain.clone()] };
        let d = compile(&m, Some(std::slice::from_ref(&bath))).unwrap();
        assert_eq!(d.oscillators.len(), 3);
        assert_eq!(d.oscillators[0].eta_ghz, chain.head_coupling);
        assert!(d.oscillators[1..].iter().all(|o| o.eta_ghz == 0.0));
        assert_eq!(d.links.len(), 2);
        assert_eq!(d.links[1].coupling_ghz, chain.link_coupling[1]);
        assert!(compile(&m, Some(&[])).is_err());
    }

    #[test]
    fn feasibility_g_range() {
        let m = HolsteinModel::new(vec![0.5], vec![1.0, 1.0], vec![0.1, 0.1]).unwrap().promote();
        let d = compile(&m, None).unwrap();
        let hw = matched_hardware(&d, 50.0, 100.0).unwrap();
        let r = check_feasibility(&d, &hw, &FeasibilityLimits::default()).unwrap();
        assert!(r.pass);
        let g = r.checks.iter().find(|c| c.name == CHECK_G_RANGE).unwrap();
        assert!((g.margin - 0.5).abs() < 1e-15);

        let m = HolsteinModel::new(vec![1.2], vec![1.0, 1.0], vec![0.1, 0.1]).unwrap().promote();
        let d = compile(&m, None).unwrap();
        let r = check_feasibility(&d, &hw, &FeasibilityLimits::default()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.failures().next().unwrap().name, CHECK_G_RANGE);
        assert!(check_feasibility(&d, &hw[..1], &FeasibilityLimits::default()).is_err());
    }

    #[test]
    fn feasibility_required_beta() {
        // √R = 0.548 at 1 GHz: η = 0.548
        let design = CircuitDesign {
            qubits: vec![Qubit { delta_ghz: 5.0, bias_ghz: 0.0 }],
            couplers: vec![],
            oscillators: vec![CircuitOscillator { qubit: 0, chain: None, position: 0, omega_prime_ghz: 1.0, eta_ghz: 0.548 }],
            links: vec![],
        };
        let r = check_feasibility(&design, &[hw(0.1, 50.0, 100.0)], &FeasibilityLimits::default()).unwrap();
        let c = r.checks.iter().find(|c| c.name == CHECK_REQUIRED_BETA).unwrap();
        assert!((c.value - 0.1).abs() < 1e-12);
        assert!(c.pass && r.pass);
        let strict = FeasibilityLimits { beta_max: 0.05, ..Default::default() };
        let r = check_feasibility(&design, &[hw(0.01, 50.0, 100.0)], &strict).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn design_json_round_trip() {
        let m = HolsteinModel::new(vec![0.5], vec![1.5, 1.2], vec![0.2, 0.1]).unwrap().promote();
        let d = compile(&m, None).unwrap();
        let back = CircuitDesign::from_json_str(&d.to_json_string().unwrap()).unwrap();
        assert_eq!(back, d);
        assert!(CircuitDesign::from_json_str(r#"{"qubits":[]}"#).is_err());
    }
}
