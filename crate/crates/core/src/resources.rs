//! Memory estimates for hierarchical-equations-of-motion style solvers.
//!
//! The hierarchy has one auxiliary density operator (ADO) per multi-index over
//! `K = n_sites · n_peaks · (1 + matsubara)` dissipator terms with total order
//! at most `depth`, i.e. `C(depth + K, K)` of them. Each ADO is an
//! `n_sites × n_sites` complex matrix; solver workspace is not counted.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::fmt_g12;

pub const DEFAULT_DEPTH: usize = 4;
pub const DEFAULT_MATSUBARA: usize = 0;
/// Largest peak count probed when the hierarchy size does not grow with peaks.
pub const DEFAULT_PEAK_CAP: usize = 100_000;
const BYTES_PER_ENTRY: u32 = 16;

/// Binomial coefficient `C(n, k)` computed exactly.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn dissipator_terms(n_sites: usize, n_peaks: usize, matsubara: usize) -> BigUint {
    BigUint::from(n_sites) * n_peaks * (matsubara + 1)
}

pub fn ado_count(n_sites: usize, n_peaks: usize, depth: usize, matsubara: usize) -> BigUint {
    let k = dissipator_terms(n_sites, n_peaks, matsubara);
    match k.to_usize() {
        Some(k) => binomial(depth + k, depth),
        // C(depth + K, depth) for huge K; depth is small in practice.
        None => {
            let mut acc = BigUint::one();
            for i in 0..depth {
                acc *= &k + (depth - i);
                acc /= i + 1;
            }
            acc
        }
    }
}

/// `ado_count` clamped to `u128::MAX`.
pub fn ado_count_saturating(n_sites: usize, n_peaks: usize, depth: usize, matsubara: usize) -> u128 {
    ado_count(n_sites, n_peaks, depth, matsubara).to_u128().unwrap_or(u128::MAX)
}

pub fn memory_bytes(n_sites: usize, ado: &BigUint) -> BigUint {
    ado * BigUint::from(n_sites) * n_sites * BYTES_PER_ENTRY
}

fn saturate(x: &BigUint) -> u128 {
    x.to_u128().unwrap_or(u128::MAX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub n_sites: usize,
    pub n_peaks: usize,
    pub hierarchy_depth: usize,
    pub ado_count: u128,
    pub memory_bytes: u128,
    pub feasible: bool,
}

impl FrontierPoint {
    pub fn evaluate(n_sites: usize, n_peaks: usize, depth: usize, matsubara: usize, budget_bytes: u128) -> Self {
        let ado = ado_count(n_sites, n_peaks, depth, matsubara);
        let mem = memory_bytes(n_sites, &ado);
        Self {
            n_sites,
            n_peaks,
            hierarchy_depth: depth,
            ado_count: saturate(&ado),
            memory_bytes: saturate(&mem),
            feasible: mem <= BigUint::from(budget_bytes),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontierConfig {
    pub depth: usize,
    pub matsubara: usize,
    pub min_sites: usize,
    pub max_sites: usize,
    pub peak_cap: usize,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        Self { depth: DEFAULT_DEPTH, matsubara: DEFAULT_MATSUBARA, min_sites: 1, max_sites: 64, peak_cap: DEFAULT_PEAK_CAP }
    }
}

/// Largest feasible peak count for every `n_sites` in the configured range.
/// A site count where not even the bare density matrix fits gets `n_peaks = 0`
/// and `feasible = false`.
pub fn frontier(budget_bytes: u128, cfg: &FrontierConfig) -> Result<Vec<FrontierPoint>> {
    if budget_bytes == 0 {
        return Err(Error::InvalidArgument("memory budget must be > 0".into()));
    }
    if cfg.min_sites == 0 || cfg.min_sites > cfg.max_sites {
        return Err(Error::InvalidArgument(format!(
            "invalid site range {}..={}",
            cfg.min_sites, cfg.max_sites
        )));
    }
    let pts = (cfg.min_sites..=cfg.max_sites)
        .into_par_iter()
        .map(|n| {
            let fits = |p: usize| FrontierPoint::evaluate(n, p, cfg.depth, cfg.matsubara, budget_bytes).feasible;
            if !fits(0) {
                return FrontierPoint::evaluate(n, 0, cfg.depth, cfg.matsubara, budget_bytes);
            }
            // fits(lo) holds; find the largest such p up to the cap.
            let (mut lo, mut hi) = (0usize, cfg.peak_cap);
            if fits(hi) {
                lo = hi;
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            FrontierPoint::evaluate(n, lo, cfg.depth, cfg.matsubara, budget_bytes)
        })
        .collect();
    Ok(pts)
}

/// CSV with header `n_sites,max_peaks,memory_bytes`.
pub fn write_frontier_csv<W: std::io::Write>(points: &[FrontierPoint], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["n_sites", "max_peaks", "memory_bytes"])?;
    for p in points {
        wtr.write_record([p.n_sites.to_string(), p.n_peaks.to_string(), fmt_g12(p.memory_bytes as f64)])?;
    }
    wtr.flush()?;
    Ok(())
}
