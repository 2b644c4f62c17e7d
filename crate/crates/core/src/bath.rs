//! Star-to-chain bath transformation.
//!
//! A qubit coupled to many independent oscillators (`Σ κ_k σz (b_k + b_k†)`) is
//! mapped by an orthogonal mode rotation onto parallel nearest-neighbour chains
//! where only each chain head touches the qubit. Each chain is the Lanczos
//! tridiagonalization of `diag(ω)` started from `κ/‖κ‖`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, Propagator, StateVector};
use crate::error::{Error, Result};
use crate::hamiltonian::{Oscillator, SpinBosonNetwork};
use crate::model::GeneralizedHolsteinModel;
use crate::operator::{Sector, TruncationSpec};
use crate::spectral::{BathMode, ModeSet};

/// Relative Lanczos breakdown threshold on `β_j / max|ω|`.
pub const BREAKDOWN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionStrategy {
    /// Frequency-sorted round-robin; each chain samples the whole band.
    #[default]
    RoundRobin,
    /// Contiguous frequency bands.
    Contiguous,
}

/// Split `modes` into `n_chains` groups whose sizes differ by at most one.
/// Ties in frequency keep input order.
pub fn partition(modes: &ModeSet, n_chains: usize, strategy: PartitionStrategy) -> Result<Vec<ModeSet>> {
    let m = modes.len();
    if n_chains == 0 {
        return Err(Error::Bath("need at least one chain".into()));
    }
    if n_chains > m {
        return Err(Error::Bath(format!("{n_chains} chains requested for {m} modes")));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| modes.modes()[a].omega.total_cmp(&modes.modes()[b].omega).then(a.cmp(&b)));
    let mut groups: Vec<Vec<BathMode>> = vec![Vec::new(); n_chains];
    match strategy {
        PartitionStrategy::RoundRobin => {
            for (pos, &idx) in order.iter().enumerate() {
                groups[pos % n_chains].push(modes.modes()[idx]);
            }
        }
        PartitionStrategy::Contiguous => {
            let base = m / n_chains;
            let extra = m % n_chains;
            let mut it = order.iter();
            for (c, g) in groups.iter_mut().enumerate() {
                let len = base + usize::from(c < extra);
                g.extend(it.by_ref().take(len).map(|&i| modes.modes()[i]));
            }
        }
    }
    groups.into_iter().map(ModeSet::new).collect()
}

/// One nearest-neighbour oscillator chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    #[serde(rename = "head_ghz")]
    pub head_coupling: f64,
    #[serde(rename = "omegas_ghz")]
    pub site_freq: Vec<f64>,
    #[serde(rename = "links_ghz")]
    pub link_coupling: Vec<f64>,
    /// Set when Lanczos broke down before consuming every mode; the remaining
    /// modes are decoupled from the qubit and dropped.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.site_freq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.site_freq.is_empty()
    }

    /// Spectral moment `head² (T^p)_{00}`.
    pub fn moment(&self, p: usize) -> f64 {
        self.moments(p)[p]
    }

    /// Moments `m_0 … m_{p_max}` via repeated tridiagonal products on `e_0`.
    pub fn moments(&self, p_max: usize) -> Vec<f64> {
        let l = self.len();
        let mut v = vec![0.0; l];
        if l == 0 {
            return vec![0.0; p_max + 1];
        }
        v[0] = 1.0;
        let h2 = self.head_coupling * self.head_coupling;
        let mut out = Vec::with_capacity(p_max + 1);
        // (T^p)_{00} = ⟨T^a e0, T^b e0⟩ with a + b = p; use ⟨v_p, e0⟩ directly.
        for _ in 0..=p_max {
            out.push(h2 * v[0]);
            let mut next = vec![0.0; l];
            for i in 0..l {
                next[i] += self.site_freq[i] * v[i];
                if i + 1 < l {
                    next[i] += self.link_coupling[i] * v[i + 1];
                    next[i + 1] += self.link_coupling[i] * v[i];
                }
            }
            v = next;
        }
        out
    }
}

/// Parallel chains replacing one site's star-coupled bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBath {
    pub chains: Vec<Chain>,
}

impl ChainBath {
    pub fn n_oscillators(&self) -> usize {
        self.chains.iter().map(Chain::len).sum()
    }

    pub fn max_chain_len(&self) -> usize {
        self.chains.iter().map(Chain::len).max().unwrap_or(0)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let bath: ChainBath = serde_json::from_str(s)?;
        for (i, c) in bath.chains.iter().enumerate() {
            if c.site_freq.is_empty() || c.link_coupling.len() + 1 != c.site_freq.len() {
                return Err(Error::Bath(format!(
                    "chain {i}: {} frequencies need {} links, got {}",
                    c.site_freq.len(),
                    c.site_freq.len().saturating_sub(1),
                    c.link_coupling.len()
                )));
            }
        }
        Ok(bath)
    }
}

/// Star moment `Σ κ_k² ω_k^p`.
pub fn star_moment(modes: &ModeSet, p: usize) -> f64 {
    modes.modes().iter().map(|m| m.kappa * m.kappa * m.omega.powi(p as i32)).sum()
}

/// Tridiagonalize `diag(ω)` from the start vector `κ/‖κ‖` with full
/// reorthogonalization.
pub fn star_to_chain(modes: &ModeSet) -> Result<Chain> {
    let m = modes.len();
    if m == 0 {
        return Err(Error::Bath("empty mode set".into()));
    }
    let omega = modes.omegas();
    let kappa = modes.kappas();
    let head = kappa.iter().map(|k| k * k).sum::<f64>().sqrt();
    if head == 0.0 {
        return Err(Error::Bath("all couplings are zero".into()));
    }
    let scale = omega.iter().fold(0.0f64, |a, w| a.max(w.abs()));
    let tol = BREAKDOWN_TOL * scale;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m.saturating_sub(1));
    let mut v: Vec<f64> = kappa.iter().map(|k| k / head).collect();
    let mut truncated = false;
    loop {
        let mut w: Vec<f64> = omega.iter().zip(&v).map(|(o, x)| o * x).collect();
        let a = dot(&v, &w);
        alpha.push(a);
        basis.push(v);
        if basis.len() == m {
            break;
        }
        // Two passes of classical Gram–Schmidt against every previous vector.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        if b < tol {
            truncated = true;
            break;
        }
        beta.push(b);
        v = w.into_iter().map(|x| x / b).collect();
    }
    Ok(Chain { head_coupling: head, site_freq: alpha, link_coupling: beta, truncated })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Partition and tridiagonalize each part independently.
pub fn transform(modes: &ModeSet, n_chains: usize, strategy: PartitionStrategy) -> Result<ChainBath> {
    let parts = partition(modes, n_chains, strategy)?;
    let chains = parts.par_iter().map(star_to_chain).collect::<Result<Vec<_>>>()?;
    Ok(ChainBath { chains })
}

/// Network for a single site whose bath is given in chain form.
pub fn chain_network(bath: &ChainBath) -> SpinBosonNetwork {
    let mut oscillators = Vec::with_capacity(bath.n_oscillators());
    let mut links = Vec::new();
    for c in &bath.chains {
        let start = oscillators.len();
        for (i, &w) in c.site_freq.iter().enumerate() {
            let coupling = if i == 0 { c.head_coupling } else { 0.0 };
            oscillators.push(Oscillator { site: 0, omega: w, coupling });
        }
        for (i, &l) in c.link_coupling.iter().enumerate() {
            links.push((start + i, start + i + 1, l));
        }
    }
    SpinBosonNetwork { n_sites: 1, oscillators, links, ..Default::default() }
}

/// Propagate `(|g⟩ + |e⟩)/√2 ⊗ vacuum` under the star form and the chain form of
/// a one-site model and return the largest trace distance between the reduced
/// qubit states over `times`.
pub fn chain_dynamics_equivalence(
    model: &GeneralizedHolsteinModel,
    trunc: &TruncationSpec,
    times: &[f64],
    n_chains: usize,
    propagator: Propagator,
) -> Result<f64> {
    if model.n_sites() != 1 {
        return Err(Error::InvalidArgument("chain equivalence needs a one-site model".into()));
    }
    let trunc = trunc.clone().with_sector(Sector::FullTwoLevel);
    let star_net = SpinBosonNetwork::from_model(model);
    let modes = ModeSet::from_model_site(model, 0);
    let chain_net = if modes.modes().iter().all(|m| m.kappa == 0.0) {
        star_net.clone()
    } else {
        chain_network(&transform(&modes, n_chains, PartitionStrategy::RoundRobin)?)
    };
    let star_h = star_net.assemble(&trunc)?;
    let chain_h = chain_net.assemble(&trunc)?;

    let plus = |basis: &crate::operator::BasisDescriptor| {
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        amps[basis.index(0, 0)] = Complex64::new(r, 0.0);
        amps[basis.index(1, 0)] = Complex64::new(r, 0.0);
        StateVector::new(amps)
    };
    let star_states = dynamics::evolve(&star_h, &plus(star_h.basis()), times, propagator)?;
    let chain_states = dynamics::evolve(&chain_h, &plus(chain_h.basis()), times, propagator)?;
    let mut worst: f64 = 0.0;
    for (a, b) in star_states.iter().zip(&chain_states) {
        let ra = dynamics::reduced_site_state(star_h.basis(), a, 0);
        let rb = dynamics::reduced_site_state(chain_h.basis(), b, 0);
        worst = worst.max(dynamics::trace_distance_2x2(&ra, &rb));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes(pairs: &[(f64, f64)]) -> ModeSet {
        ModeSet::from_pairs(pairs).unwrap()
    }

    #[test]
    fn single_mode_chain() {
        let c = star_to_chain(&modes(&[(1.0, 0.3)])).unwrap();
        assert_eq!(c.head_coupling, 0.3);
        assert_eq!(c.site_freq, vec![1.0]);
        assert!(c.link_coupling.is_empty());
        assert!(!c.truncated);
    }

    #[test]
    fn two_mode_chain_by_hand() {
        let c = star_to_chain(&modes(&[(1.0, 0.3), (2.0, 0.4)])).unwrap();
        assert!((c.head_coupling - 0.5).abs() < 1e-15);
        assert!((c.site_freq[0] - 1.64).abs() < 1e-14);
        // Remaining entries from the 2x2 similarity: trace and determinant.
        assert!((c.site_freq[0] + c.site_freq[1] - 3.0).abs() < 1e-14);
        let det = c.site_freq[0] * c.site_freq[1] - c.link_coupling[0].powi(2);
        assert!((det - 2.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_modes_collapse() {
        let c = star_to_chain(&modes(&[(1.0, 0.3), (1.0, 0.4)])).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.truncated);
        assert!((c.head_coupling - 0.5).abs() < 1e-15);
        assert!((c.site_freq[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_couplings_rejected() {
        assert!(star_to_chain(&modes(&[(1.0, 0.0), (2.0, 0.0)])).is_err());
        assert!(star_to_chain(&modes(&[])).is_err());
    }

    #[test]
    fn partition_sizes() {
        let ms: Vec<(f64, f64)> = (0..253).map(|i| (1.0 + i as f64 * 0.01, 0.1)).collect();
        let p = partition(&modes(&ms), 6, PartitionStrategy::RoundRobin).unwrap();
        assert_eq!(p.iter().map(ModeSet::len).max(), Some(43));
        assert_eq!(p.iter().map(ModeSet::len).sum::<usize>(), 253);
        let p = partition(&modes(&ms), 6, PartitionStrategy::Contiguous).unwrap();
        assert_eq!(p.iter().map(ModeSet::len).max(), Some(43));
        assert!(p[0].modes().last().unwrap().omega < p[1].modes()[0].omega);

        let four = modes(&[(1.0, 0.1), (2.0, 0.2), (3.0, 0.3), (4.0, 0.4)]);
        assert_eq!(partition(&four, 1, PartitionStrategy::RoundRobin).unwrap()[0].len(), 4);
        let singles = partition(&four, 4, PartitionStrategy::RoundRobin).unwrap();
        assert!(singles.iter().all(|s| s.len() == 1));
        let bath = transform(&four, 4, PartitionStrategy::RoundRobin).unwrap();
        for (c, m) in bath.chains.iter().zip(four.modes()) {
            assert_eq!((c.head_coupling, c.site_freq[0]), (m.kappa, m.omega));
        }
        assert!(partition(&four, 5, PartitionStrategy::RoundRobin).is_err());
        assert!(partition(&four, 0, PartitionStrategy::RoundRobin).is_err());
    }

    #[test]
    fn round_robin_ties_keep_input_order() {
        let m = modes(&[(1.0, 0.1), (1.0, 0.2), (1.0, 0.3), (1.0, 0.4)]);
        let p = partition(&m, 2, PartitionStrategy::RoundRobin).unwrap();
        assert_eq!(p[0].kappas(), vec![0.1, 0.3]);
        assert_eq!(p[1].kappas(), vec![0.2, 0.4]);
    }

    #[test]
    fn chain_json_schema() {
        let bath = ChainBath {
            chains: vec![Chain {
                head_coupling: 0.5,
                site_freq: vec![1.64, 1.36],
                link_coupling: vec![0.48],
                truncated: false,
            }],
        };
        let s = serde_json::to_string(&bath).unwrap();
        assert_eq!(s, r#"{"chains":[{"head_ghz":0.5,"omegas_ghz":[1.64,1.36],"links_ghz":[0.48]}]}"#);
        assert_eq!(ChainBath::from_json_str(&s).unwrap(), bath);
        let bad = r#"{"chains":[{"head_ghz":0.5,"omegas_ghz":[1.0],"links_ghz":[0.1]}]}"#;
        assert!(ChainBath::from_json_str(bad).is_err());
    }
}
