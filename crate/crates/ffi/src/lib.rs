//! C ABI over the optomechanical dynamics library.
//!
//! Handles are opaque pointers created by `omidyn_system_new` and released by
//! `omidyn_system_free`; every computation returns an `OmidynStatus` and
//! writes results through caller-supplied pointers. The header shipped at
//! `include/omidyn.h` is generated from this file.

use std::ffi::{c_char, CStr};

use num_complex::Complex64 as C64;
use omidyn::error::Error;
use omidyn::model::{Gamma, SystemParams};
use omidyn::observables::{self, InitialState};
use omidyn::spectrum::{self, SpectrumParams};

/// Outcome of an ABI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OmidynStatus {
    Ok = 0,
    /// A photon sector in play has an inverted effective potential.
    Stability = 1,
    /// A truncated series exceeded its term cap before converging.
    NonConvergence = 2,
    /// An argument violates a documented precondition.
    InvalidArgument = 3,
    /// A required pointer was null.
    NullPointer = 4,
}

fn status_of(err: &Error) -> OmidynStatus {
    match err {
        Error::Stability { .. } => OmidynStatus::Stability,
        Error::NonConvergence { .. } => OmidynStatus::NonConvergence,
        _ => OmidynStatus::InvalidArgument,
    }
}

/// Opaque system handle.
pub struct OmidynSystem {
    params: SystemParams,
}

/// Initial-state selector for the dynamics entry points.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OmidynStateKind {
    /// Number states in the field and the mirror; uses `photons`, `phonons`.
    NumberNumber = 0,
    /// Number state in the field, coherent mirror; uses `photons`, `beta_*`.
    NumberCoherent = 1,
    /// Coherent photon distribution and coherent mirror; uses `alpha`,
    /// `beta_*`.
    CoherentCoherent = 2,
}

/// Plain-data initial-state descriptor.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct OmidynState {
    pub kind: OmidynStateKind,
    pub photons: u32,
    pub phonons: u32,
    /// Real coherent field amplitude (CoherentCoherent only).
    pub alpha: f64,
    pub beta_re: f64,
    pub beta_im: f64,
}

impl OmidynState {
    fn to_initial_state(self) -> InitialState {
        let beta = C64::new(self.beta_re, self.beta_im);
        match self.kind {
            OmidynStateKind::NumberNumber => InitialState::NumberNumber {
                photons: self.photons,
                phonons: self.phonons,
            },
            OmidynStateKind::NumberCoherent => InitialState::NumberCoherent {
                photons: self.photons,
                beta,
            },
            OmidynStateKind::CoherentCoherent => InitialState::CoherentCoherent {
                alpha: self.alpha,
                beta,
            },
        }
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(r) => r,
            None => return OmidynStatus::NullPointer,
        }
    };
}

/// Create a system handle. `gamma` is the pure-dephasing rate; pass positive
/// infinity for the unitary limit. On success writes the handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer to an `OmidynSystem*` slot.
#[no_mangle]
pub unsafe extern "C" fn omidyn_system_new(
    omega_c: f64,
    omega_m: f64,
    g_l: f64,
    g_q: f64,
    gamma: f64,
    out: *mut *mut OmidynSystem,
) -> OmidynStatus {
    if out.is_null() {
        return OmidynStatus::NullPointer;
    }
    let gamma = match Gamma::from_f64(gamma) {
        Ok(g) => g,
        Err(e) => return status_of(&e),
    };
    match SystemParams::new(omega_c, omega_m, g_l, g_q, gamma) {
        Ok(params) => {
            let handle = Box::new(OmidynSystem { params });
            unsafe { out.write(Box::into_raw(handle)) };
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a handle created by `omidyn_system_new`. A null handle is a no-op.
///
/// # Safety
/// `system` must be null or a pointer previously returned by
/// `omidyn_system_new` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn omidyn_system_free(system: *mut OmidynSystem) {
    if !system.is_null() {
        drop(unsafe { Box::from_raw(system) });
    }
}

macro_rules! scalar_getter {
    ($(#[$doc:meta])* $name:ident, |$params:ident, $n:ident| $body:expr) => {
        $(#[$doc])*
        ///
        /// # Safety
        /// `system` must be a live handle and `out` a valid `double` slot.
        #[no_mangle]
        pub unsafe extern "C" fn $name(
            system: *const OmidynSystem,
            photons: u32,
            out: *mut f64,
        ) -> OmidynStatus {
            let sys = nonnull!(system);
            if out.is_null() {
                return OmidynStatus::NullPointer;
            }
            let $params = &sys.params;
            let $n = photons;
            match $body {
                Ok(v) => {
                    unsafe { out.write(v) };
                    OmidynStatus::Ok
                }
                Err(e) => status_of(&e),
            }
        }
    };
}

scalar_getter!(
    /// Squeeze argument of the given photon sector.
    omidyn_squeeze_param,
    |p, n| p.squeeze_param(n)
);
scalar_getter!(
    /// Dressed mechanical frequency of the given photon sector.
    omidyn_dressed_frequency,
    |p, n| p.dressed_frequency(n)
);
scalar_getter!(
    /// Mirror displacement of the given photon sector.
    omidyn_displacement,
    |p, n| p.displacement(n)
);

/// Dressed-ladder energy of the level `(photons, phonons)`.
///
/// # Safety
/// `system` must be a live handle and `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn omidyn_eigenvalue(
    system: *const OmidynSystem,
    photons: u32,
    phonons: u32,
    out: *mut f64,
) -> OmidynStatus {
    let sys = nonnull!(system);
    if out.is_null() {
        return OmidynStatus::NullPointer;
    }
    match sys.params.eigenvalue(photons, phonons) {
        Ok(v) => {
            unsafe { out.write(v) };
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Mean phonon number at time `t`.
///
/// # Safety
/// `system` must be a live handle, `state` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omidyn_phonon_number(
    system: *const OmidynSystem,
    state: *const OmidynState,
    t: f64,
    out: *mut f64,
) -> OmidynStatus {
    let sys = nonnull!(system);
    let state = nonnull!(state);
    if out.is_null() {
        return OmidynStatus::NullPointer;
    }
    match observables::phonon_number(&sys.params, &state.to_initial_state(), t) {
        Ok(v) => {
            unsafe { out.write(v) };
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Mean position quadrature at time `t`.
///
/// # Safety
/// `system` must be a live handle, `state` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn omidyn_quadrature(
    system: *const OmidynSystem,
    state: *const OmidynState,
    t: f64,
    out: *mut f64,
) -> OmidynStatus {
    let sys = nonnull!(system);
    let state = nonnull!(state);
    if out.is_null() {
        return OmidynStatus::NullPointer;
    }
    match observables::quadrature(&sys.params, &state.to_initial_state(), t) {
        Ok(v) => {
            unsafe { out.write(v) };
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Evaluate both observables over a strictly increasing time grid of length
/// `len`, filling the caller's `phonon_out` and `quadrature_out` buffers
/// (each of length `len`).
///
/// # Safety
/// `system` must be a live handle; `times`, `phonon_out` and
/// `quadrature_out` must point to `len` readable/writable doubles.
#[no_mangle]
pub unsafe extern "C" fn omidyn_dynamics(
    system: *const OmidynSystem,
    state: *const OmidynState,
    times: *const f64,
    len: usize,
    phonon_out: *mut f64,
    quadrature_out: *mut f64,
) -> OmidynStatus {
    let sys = nonnull!(system);
    let state = nonnull!(state);
    if times.is_null() || phonon_out.is_null() || quadrature_out.is_null() {
        return OmidynStatus::NullPointer;
    }
    let grid = unsafe { std::slice::from_raw_parts(times, len) };
    match observables::dynamics_sweep(&sys.params, &state.to_initial_state(), grid) {
        Ok(samples) => {
            for (i, s) in samples.iter().enumerate() {
                unsafe {
                    phonon_out.add(i).write(s.phonon_number);
                    quadrature_out.add(i).write(s.quadrature);
                }
            }
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Time-dependent spectrum of the mirror for a fixed photon number and
/// coherent mirror amplitude, one value per detection frequency.
///
/// # Safety
/// `system` must be a live handle; `omegas` must point to `len` readable
/// doubles forming a strictly increasing grid and `out` to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn omidyn_spectrum_number(
    system: *const OmidynSystem,
    photons: u32,
    beta_re: f64,
    beta_im: f64,
    filter_linewidth: f64,
    omegas: *const f64,
    len: usize,
    t: f64,
    out: *mut f64,
) -> OmidynStatus {
    let sys = nonnull!(system);
    if omegas.is_null() || out.is_null() {
        return OmidynStatus::NullPointer;
    }
    let sp = SpectrumParams {
        filter_linewidth,
        omega_grid: unsafe { std::slice::from_raw_parts(omegas, len) }.to_vec(),
        t,
    };
    match spectrum::spectrum_number(&sys.params, photons, C64::new(beta_re, beta_im), &sp) {
        Ok(values) => {
            for (i, v) in values.iter().enumerate() {
                unsafe { out.add(i).write(*v) };
            }
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Long-time spectral limit at one detection frequency; requires a finite
/// dephasing rate.
///
/// # Safety
/// `system` must be a live handle and `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn omidyn_longtime_spectrum(
    system: *const OmidynSystem,
    photons: u32,
    filter_linewidth: f64,
    omega: f64,
    out: *mut f64,
) -> OmidynStatus {
    let sys = nonnull!(system);
    if out.is_null() {
        return OmidynStatus::NullPointer;
    }
    match spectrum::longtime_spectrum(&sys.params, photons, filter_linewidth, omega) {
        Ok(v) => {
            unsafe { out.write(v) };
            OmidynStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn omidyn_status_message(status: OmidynStatus) -> *const c_char {
    let msg: &'static CStr = match status {
        OmidynStatus::Ok => c"ok",
        OmidynStatus::Stability => c"photon sector is dynamically unstable",
        OmidynStatus::NonConvergence => c"series truncation failed to converge",
        OmidynStatus::InvalidArgument => c"invalid argument",
        OmidynStatus::NullPointer => c"required pointer was null",
    };
    msg.as_ptr()
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn omidyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
