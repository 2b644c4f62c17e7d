use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{check_operator, validate_times, StateVector, Trajectory, TWO_PI};
use crate::error::{Error, Result};
use crate::operator::SparseOperator;

pub const DENSE_MAX_DIM: usize = 4096;

/// Exact propagation by full eigendecomposition; reference for the Krylov path.
pub fn dense_oracle(h: &SparseOperator, psi0: &StateVector, times: &[f64]) -> Result<Trajectory> {
    let states = dense_evolve(h, psi0, times)?;
    Ok(Trajectory::from_states(h.basis(), times, states, false))
}

pub fn dense_evolve(h: &SparseOperator, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    if h.dim() > DENSE_MAX_DIM {
        return Err(Error::DimensionCap { dim: h.dim() as u128, cap: DENSE_MAX_DIM });
    }
    check_operator(h, psi0)?;
    validate_times(times)?;
    let dense = h.to_dense();
    let (evals, evecs): (Vec<f64>, DMatrix<Complex64>) = if dense.iter().all(|z| z.im == 0.0) {
        let eig = SymmetricEigen::new(dense.map(|z| z.re));
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(dense);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let psi = DVector::from_column_slice(psi0.amplitudes());
    let coeffs = evecs.adjoint() * psi;
    Ok(times
        .iter()
        .map(|&t| {
            let phased = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(&evals)
                    .map(|(c, &e)| c * Complex64::from_polar(1.0, -TWO_PI * e * t)),
            );
            StateVector::new((&evecs * phased).iter().copied().collect())
        })
        .collect())
}
