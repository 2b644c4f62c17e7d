use num_complex::Complex64;

use super::{dense_oracle, StateVector};
use crate::error::{Error, Result};
use crate::operator::{BasisDescriptor, Sector, SparseOperator};

/// Two identical qubits in their energy eigenbasis:
/// full `Σ Δ/2 σz + g σxσx` and rotating-wave `Σ Δ/2 σz + (g/2)(σxσx + σyσy)`.
pub fn rwa_hamiltonians(g: f64, delta: f64) -> Result<(SparseOperator, SparseOperator)> {
    let basis = BasisDescriptor::new(Sector::FullTwoLevel, 2, vec![], 4)?;
    let mut diag = Vec::new();
    for e in 0..4 {
        let z: f64 = (0..2).map(|q| basis.sigma_z(e, q)).sum();
        diag.push((e, e, 0.5 * delta * z));
    }
    // σxσx flips both bits: |00⟩↔|11⟩ and |01⟩↔|10⟩.
    let mut full = diag.clone();
    full.extend([(0b00, 0b11, g), (0b11, 0b00, g), (0b01, 0b10, g), (0b10, 0b01, g)]);
    let mut rwa = diag;
    rwa.extend([(0b01, 0b10, g), (0b10, 0b01, g)]);
    Ok((
        SparseOperator::from_real_triplets(basis.clone(), full)?,
        SparseOperator::from_real_triplets(basis, rwa)?,
    ))
}

/// Largest single-qubit population difference between full and rotating-wave
/// coupling, starting from `(|g⟩ + |e⟩)/√2 ⊗ |g⟩`.
///
/// A single excitation alone never sees the counter-rotating terms for two
/// qubits, so the initial state carries a zero-excitation component that
/// `σxσx` couples to `|ee⟩` across the `2Δ` gap.
pub fn rwa_error(g: f64, delta: f64, times: &[f64]) -> Result<f64> {
    if !g.is_finite() || !delta.is_finite() {
        return Err(Error::InvalidArgument("non-finite g or Δ".into()));
    }
    let (full, rwa) = rwa_hamiltonians(g, delta)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(0.0, 0.0); 4];
    amps[0b00] = Complex64::new(r, 0.0);
    amps[0b10] = Complex64::new(r, 0.0);
    let psi0 = StateVector::new(amps);
    let a = dense_oracle(&full, &psi0, times)?;
    let b = dense_oracle(&rwa, &psi0, times)?;
    Ok(a.max_population_deviation(&b))
}
