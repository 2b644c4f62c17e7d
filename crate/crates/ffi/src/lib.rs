//! C ABI over the polaron library.
//!
//! Objects are opaque heap handles released with the matching `*_free`
//! function. Every fallible call returns a [`PolaronStatus`]; on failure the
//! message is available from [`polaron_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polaron::bath::{transform, ChainBath, PartitionStrategy};
use polaron::circuit::{coupling_ratio, OscillatorHardware};
use polaron::dynamics::{evolve, time_grid, Propagator, StateVector, Trajectory};
use polaron::hamiltonian::assemble_hamiltonian;
use polaron::resources::ado_count_saturating;
use polaron::spectral::ModeSet;
use polaron::{Error, GeneralizedHolsteinModel, TruncationSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolaronStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidModel = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

pub struct PolaronModel(GeneralizedHolsteinModel);
pub struct PolaronTrajectory(Trajectory);
pub struct PolaronChainBath(ChainBath);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PolaronStatus {
    match e {
        Error::InvalidModel(_) | Error::Json(_) | Error::Topology(_) => PolaronStatus::InvalidModel,
        Error::Numerical(_) | Error::NotHermitian(_) => PolaronStatus::Numerical,
        Error::Io(_) | Error::Csv(_) => PolaronStatus::Io,
        _ => PolaronStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PolaronStatus, String)>) -> PolaronStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PolaronStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            PolaronStatus::Panic
        }
    }
}

fn lib<T>(r: polaron::Result<T>) -> Result<T, (PolaronStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PolaronStatus, String) {
    (PolaronStatus::NullPointer, format!("{what} is null"))
}

/// Message of the most recent failure on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn polaron_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a model from a NUL-terminated JSON string.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polaron_model_from_json(json: *const c_char, out: *mut *mut PolaronModel) -> PolaronStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (PolaronStatus::InvalidArgument, e.to_string()))?;
        let m = lib(GeneralizedHolsteinModel::from_json_str(s))?;
        *out = Box::into_raw(Box::new(PolaronModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from `polaron_model_from_json`.
#[no_mangle]
pub unsafe extern "C" fn polaron_model_free(model: *mut PolaronModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaron_model_n_sites(model: *const PolaronModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.n_sites())
}

/// Propagate an excitation starting on `initial_site` (0-based) with the Fock
/// cutoff `fock_dim` on the grid `0, dt, …, t_max`. `use_dense` selects the
/// exact-diagonalization propagator.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polaron_simulate(
    model: *const PolaronModel,
    fock_dim: usize,
    initial_site: usize,
    t_max: f64,
    dt: f64,
    use_dense: bool,
    out: *mut *mut PolaronTrajectory,
) -> PolaronStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if fock_dim == 0 {
            return Err((PolaronStatus::InvalidArgument, "fock_dim must be >= 1".into()));
        }
        if initial_site >= m.0.n_sites() {
            return Err((PolaronStatus::InvalidArgument, format!("initial site {initial_site} out of range")));
        }
        let h = lib(assemble_hamiltonian(&m.0, &TruncationSpec::uniform(fock_dim)))?;
        let times = lib(time_grid(t_max, dt))?;
        let psi0 = StateVector::site_excitation(h.basis(), initial_site);
        let prop = if use_dense { Propagator::Dense } else { Propagator::Krylov };
        let states = lib(evolve(&h, &psi0, &times, prop))?;
        let traj = Trajectory::from_states(h.basis(), &times, states, false);
        *out = Box::into_raw(Box::new(PolaronTrajectory(traj)));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from `polaron_simulate`.
#[no_mangle]
pub unsafe extern "C" fn polaron_trajectory_free(traj: *mut PolaronTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaron_trajectory_n_times(traj: *const PolaronTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.times.len())
}

/// # Safety
/// `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaron_trajectory_n_sites(traj: *const PolaronTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.n_sites())
}

/// Copy the time grid into `buf` (length `len` ≥ n_times).
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn polaron_trajectory_times(traj: *const PolaronTrajectory, buf: *mut f64, len: usize) -> PolaronStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        copy_out(&t.0.times, buf, len)
    })
}

/// Copy populations row-major (`n_times × n_sites`) into `buf`.
///
/// # Safety
/// `traj` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn polaron_trajectory_populations(
    traj: *const PolaronTrajectory,
    buf: *mut f64,
    len: usize,
) -> PolaronStatus {
    guard(|| {
        let t = traj.as_ref().ok_or_else(|| null("traj"))?;
        let flat: Vec<f64> = t.0.populations.iter().flatten().copied().collect();
        copy_out(&flat, buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), (PolaronStatus, String)> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err((PolaronStatus::InvalidArgument, format!("buffer holds {len}, need {}", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Coupling ratio `√R` of an inductively coupled oscillator at frequency `freq_ghz`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polaron_coupling_ratio(
    beta: f64,
    persistent_current_na: f64,
    impedance_ohm: f64,
    freq_ghz: f64,
    out: *mut f64,
) -> PolaronStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let hw = OscillatorHardware { beta, persistent_current_na, impedance_ohm };
        *out = lib(coupling_ratio(&hw, freq_ghz))?;
        Ok(())
    })
}

/// Transform `n` star modes `(omegas[k], kappas[k])` into `n_chains` chains.
///
/// # Safety
/// `omegas` and `kappas` must be valid for `n` reads and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polaron_star_to_chain(
    omegas: *const f64,
    kappas: *const f64,
    n: usize,
    n_chains: usize,
    out: *mut *mut PolaronChainBath,
) -> PolaronStatus {
    guard(|| {
        if omegas.is_null() || kappas.is_null() {
            return Err(null("modes"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let w = std::slice::from_raw_parts(omegas, n);
        let k = std::slice::from_raw_parts(kappas, n);
        let pairs: Vec<(f64, f64)> = w.iter().copied().zip(k.iter().copied()).collect();
        let modes = lib(ModeSet::from_pairs(&pairs))?;
        let bath = lib(transform(&modes, n_chains, PartitionStrategy::RoundRobin))?;
        *out = Box::into_raw(Box::new(PolaronChainBath(bath)));
        Ok(())
    })
}

/// # Safety
/// `bath` must be null or a handle from `polaron_star_to_chain`.
#[no_mangle]
pub unsafe extern "C" fn polaron_chain_bath_free(bath: *mut PolaronChainBath) {
    if !bath.is_null() {
        drop(Box::from_raw(bath));
    }
}

/// # Safety
/// `bath` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaron_chain_bath_n_chains(bath: *const PolaronChainBath) -> usize {
    bath.as_ref().map_or(0, |b| b.0.chains.len())
}

/// # Safety
/// `bath` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn polaron_chain_bath_max_len(bath: *const PolaronChainBath) -> usize {
    bath.as_ref().map_or(0, |b| b.0.max_chain_len())
}

/// Serialize to JSON. The returned string must be released with `polaron_string_free`.
///
/// # Safety
/// `bath` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn polaron_chain_bath_to_json(bath: *const PolaronChainBath, out: *mut *mut c_char) -> PolaronStatus {
    guard(|| {
        let b = bath.as_ref().ok_or_else(|| null("bath"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lib(b.0.to_json_string())?;
        *out = CString::new(s).map_err(|e| (PolaronStatus::Numerical, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn polaron_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of auxiliary density operators, saturating at `UINT64_MAX`.
#[no_mangle]
pub extern "C" fn polaron_ado_count(n_sites: usize, n_peaks: usize, depth: usize, matsubara: usize) -> u64 {
    catch_unwind(|| ado_count_saturating(n_sites, n_peaks, depth, matsubara))
        .map(|c| u64::try_from(c).unwrap_or(u64::MAX))
        .unwrap_or(u64::MAX)
}
