//! Exact dynamics and time-dependent spectra of a linear-quadratic
//! optomechanical system under pure-dephasing (intrinsic) decoherence.
//!
//! The photon number is conserved, so each photon sector reduces to a
//! displaced, squeezed harmonic ladder. Closed forms for the evolved mirror
//! observables and their filtered spectra live in [`model`],
//! [`coefficients`], [`observables`] and [`spectrum`]; an independent
//! truncated-Fock-space matrix oracle for cross-validation lives in
//! [`oracle`]; [`cli`] drives reproducible experiment runs.

pub mod cli;
pub mod coefficients;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod poisson;
pub mod spectrum;

pub use coefficients::{
    damping_kernel, evolved_coeffs, step_coeffs, unitary_coeffs, OperatorCoeffs,
};
pub use error::{Error, Result};
pub use model::{Dressed, Gamma, SystemParams};
pub use observables::{dynamics_sweep, phonon_number, quadrature, DynamicsSample, InitialState};
pub use spectrum::{
    correlation, longtime_spectrum, spectrum_coherent, spectrum_number, SpectrumParams,
};
