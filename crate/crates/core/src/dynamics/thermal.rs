//! Finite-temperature bath initial states by pure-state sampling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{evolve, Propagator, StateVector, Trajectory};
use crate::error::{Error, Result};
use crate::model::GeneralizedHolsteinModel;
use crate::operator::{BasisDescriptor, SparseOperator, TruncationSpec};
use crate::units::thermal_ghz;

/// Bose–Einstein occupation `1/(e^{hω/k_BT} − 1)`; zero at `T = 0`.
pub fn bose_occupation(omega: f64, kelvin: f64) -> f64 {
    if kelvin <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / thermal_ghz(kelvin)).exp_m1()
}

/// Gibbs populations of a truncated oscillator, `P(n) ∝ exp(−n hω/k_BT)`, `n < d`.
pub fn boltzmann_weights(omega: f64, kelvin: f64, d: usize) -> Vec<f64> {
    let mut w = vec![0.0; d];
    if d == 0 {
        return w;
    }
    if kelvin <= 0.0 {
        w[0] = 1.0;
        return w;
    }
    let x = omega / thermal_ghz(kelvin);
    for (n, p) in w.iter_mut().enumerate() {
        *p = (-(n as f64) * x).exp();
    }
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|p| *p /= z);
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    /// Fock occupation of every oscillator, in basis order.
    pub occupations: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    pub members: Vec<EnsembleMember>,
}

impl ThermalEnsemble {
    pub fn state(&self, member: usize, basis: &BasisDescriptor, electronic: usize) -> Result<StateVector> {
        let f = basis.fock_index(&self.members[member].occupations)?;
        Ok(StateVector::basis_state(basis, electronic, f))
    }

    /// Weighted mean occupation of one oscillator.
    pub fn mean_occupation(&self, mode: usize) -> f64 {
        self.members.iter().map(|m| m.weight * m.occupations[mode] as f64).sum()
    }
}

/// Sample `n_samples` Fock product states from the bath Gibbs distribution at
/// `kelvin`. `T = 0` gives the vacuum with weight 1. Reproducible from `seed`.
pub fn thermal_initial_state(
    model: &GeneralizedHolsteinModel,
    trunc: &TruncationSpec,
    kelvin: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ThermalEnsemble> {
    let omegas: Vec<f64> = model.modes().iter().flatten().map(|m| m.omega).collect();
    sample_occupations(&omegas, trunc, kelvin, n_samples, seed)
}

/// Same as [`thermal_initial_state`] for an explicit list of oscillator frequencies.
pub fn sample_occupations(
    omegas: &[f64],
    trunc: &TruncationSpec,
    kelvin: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ThermalEnsemble> {
    if !(kelvin >= 0.0) || !kelvin.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature must be >= 0 K, got {kelvin}")));
    }
    let dims = trunc.resolve(omegas.len())?;
    if kelvin == 0.0 {
        return Ok(ThermalEnsemble {
            members: vec![EnsembleMember { occupations: vec![0; omegas.len()], weight: 1.0 }],
        });
    }
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one thermal sample".into()));
    }
    let dists = omegas
        .iter()
        .zip(&dims)
        .map(|(&w, &d)| {
            WeightedIndex::new(boltzmann_weights(w, kelvin, d))
                .map_err(|e| Error::Numerical(format!("Boltzmann weights: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weight = 1.0 / n_samples as f64;
    let members = (0..n_samples)
        .map(|_| EnsembleMember {
            occupations: dists.iter().map(|d| d.sample(&mut rng)).collect(),
            weight,
        })
        .collect();
    Ok(ThermalEnsemble { members })
}

/// Ensemble-averaged populations with the excitation initially on `site`.
pub fn propagate_ensemble(
    h: &SparseOperator,
    ensemble: &ThermalEnsemble,
    site: usize,
    times: &[f64],
    propagator: Propagator,
) -> Result<Trajectory> {
    let basis = h.basis();
    if site >= basis.n_sites() {
        return Err(Error::InvalidArgument(format!("initial site {} out of range", site + 1)));
    }
    let electronic = basis.single_excitation(site);
    let runs = (0..ensemble.members.len())
        .into_par_iter()
        .map(|i| {
            let psi0 = ensemble.state(i, basis, electronic)?;
            let states = evolve(h, &psi0, times, propagator)?;
            Ok(Trajectory::from_states(basis, times, states, false))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut avg = Trajectory {
        times: times.to_vec(),
        populations: vec![vec![0.0; basis.n_sites()]; times.len()],
        states: None,
        coherences: None,
    };
    for (run, member) in runs.iter().zip(&ensemble.members) {
        for (acc, p) in avg.populations.iter_mut().zip(&run.populations) {
            for (a, x) in acc.iter_mut().zip(p) {
                *a += member.weight * x;
            }
        }
    }
    Ok(avg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HolsteinModel;

    #[test]
    fn boltzmann_ratio() {
        let omega = 1.3;
        let kelvin = omega / crate::units::KB_OVER_H_GHZ_PER_K;
        let w = boltzmann_weights(omega, kelvin, 10);
        assert!((w[1] / w[0] - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn zero_temperature_is_vacuum() {
        let m = HolsteinModel::uniform(2, 1.0, 1.0, 0.2).unwrap().promote();
        let e = thermal_initial_state(&m, &TruncationSpec::uniform(4), 0.0, 10, 1).unwrap();
        assert_eq!(e.members.len(), 1);
        assert_eq!(e.members[0].weight, 1.0);
        assert!(e.members[0].occupations.iter().all(|&n| n == 0));
        assert!(thermal_initial_state(&m, &TruncationSpec::uniform(4), -1.0, 10, 1).is_err());
    }

    #[test]
    fn seeded_sampling_is_reproducible() {
        let m = HolsteinModel::uniform(2, 1.0, 1.0, 0.2).unwrap().promote();
        let t = TruncationSpec::uniform(5);
        let a = thermal_initial_state(&m, &t, 0.05, 50, 7).unwrap();
        let b = thermal_initial_state(&m, &t, 0.05, 50, 7).unwrap();
        assert_eq!(a, b);
    }
}
