//! Lanczos–Krylov stepping for `exp(−2πi H τ) v` with Hermitian `H`.
//!
//! Each step builds an orthonormal Krylov basis `V_m` with full
//! reorthogonalization, exponentiates the real tridiagonal projection exactly,
//! and estimates the local error as `β_m |[exp(−2πiτT)]_{m,1}|`. The basis is
//! independent of `τ`, so a rejected step only re-exponentiates `T`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{check_operator, validate_times, StateVector, Trajectory, TWO_PI};
use crate::error::{Error, Result};
use crate::operator::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Maximum Krylov subspace dimension.
    pub subspace_dim: usize,
    /// Target local error per step (absolute, unit-norm state).
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { subspace_dim: 30, tolerance: 1e-10, max_steps: 10_000_000 }
    }
}

pub fn propagate(h: &SparseOperator, psi0: &StateVector, times: &[f64]) -> Result<Trajectory> {
    let states = krylov_evolve(h, psi0, times, &KrylovOptions::default())?;
    Ok(Trajectory::from_states(h.basis(), times, states, false))
}

pub fn krylov_evolve(
    h: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
    opts: &KrylovOptions,
) -> Result<Vec<StateVector>> {
    check_operator(h, psi0)?;
    validate_times(times)?;
    if opts.subspace_dim == 0 {
        return Err(Error::InvalidArgument("Krylov subspace dimension must be >= 1".into()));
    }
    let mut psi: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut t = 0.0;
    let (lo, hi) = h.spectral_bounds();
    let spread = (hi - lo).abs().max(1e-12);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let mut tau = (opts.subspace_dim as f64 / (TWO_PI * spread)).max(1e-9);
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while target - t > 1e-15 * target.max(1.0) {
            if steps >= opts.max_steps {
                return Err(Error::Numerical("Krylov step limit reached".into()));
            }
            let remaining = target - t;
            let tau_try = tau.min(remaining);
            let (next, taken, tau_next) = step(h, &psi, tau_try, scale, opts)?;
            psi = next;
            t += taken;
            if taken >= remaining {
                t = target;
            }
            // A step clipped to the output grid says nothing about the admissible size.
            if taken < tau_try || tau_try == tau {
                tau = tau_next;
            }
            steps += 1;
        }
        out.push(StateVector::new(psi.clone()));
    }
    Ok(out)
}

/// One accepted step. Returns the new vector, the step taken and a suggested next step.
fn step(
    h: &SparseOperator,
    v0: &[Complex64],
    tau_try: f64,
    scale: f64,
    opts: &KrylovOptions,
) -> Result<(Vec<Complex64>, f64, f64)> {
    let beta0 = v0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if beta0 == 0.0 {
        return Ok((v0.to_vec(), tau_try, tau_try));
    }
    let m_max = opts.subspace_dim.min(h.dim());
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
    let mut alpha = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    basis.push(v0.iter().map(|a| a / beta0).collect());
    let mut w = vec![Complex64::new(0.0, 0.0); h.dim()];
    let residual;
    loop {
        let j = basis.len() - 1;
        h.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if b <= 1e-14 * scale {
            residual = 0.0;
            break;
        }
        if basis.len() == m_max {
            residual = b;
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let coeffs = |tau: f64| -> Vec<Complex64> {
        (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| {
                        let u = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                        Complex64::from_polar(u, -TWO_PI * eig.eigenvalues[k] * tau)
                    })
                    .sum()
            })
            .collect()
    };
    let mut tau = tau_try;
    let mut c;
    let mut err;
    let mut tries = 0;
    loop {
        c = coeffs(tau);
        err = beta0 * residual * c[m - 1].norm();
        if err <= opts.tolerance || residual == 0.0 {
            break;
        }
        tries += 1;
        if tries > 60 {
            return Err(Error::Numerical("Krylov step size underflow".into()));
        }
        let shrink = 0.9 * (opts.tolerance / err).powf(1.0 / m as f64);
        tau *= shrink.clamp(0.1, 0.9);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); h.dim()];
    for (q, &cj) in basis.iter().zip(&c) {
        let s = cj * beta0;
        for (o, x) in out.iter_mut().zip(q) {
            *o += s * x;
        }
    }
    let grow = if err > 0.0 {
        (0.9 * (opts.tolerance / err).powf(1.0 / m as f64)).clamp(1.0, 2.0)
    } else {
        2.0
    };
    Ok((out, tau, tau * grow))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
