use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the numerical layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor argument violates a domain invariant.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The phonon sector at this photon number has an inverted effective
    /// potential; the dressed frequency would be imaginary.
    #[error("photon sector n = {photons} is unstable: omega_m + 4 g_q n = {margin:.6e} <= 0")]
    Stability { photons: u32, margin: f64 },

    /// The requested quantity is only defined for a finite decoherence rate.
    #[error("operation requires a finite decoherence rate, got the unitary limit")]
    RequiresFiniteRate,

    /// A truncated series would need more terms than the configured cap.
    #[error("series truncation needs {needed} terms, exceeding the cap of {cap}")]
    NonConvergence { needed: u64, cap: u64 },

    /// Matrix or vector shapes are incompatible.
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A truncated Fock basis cannot represent the requested state.
    #[error(
        "phonon cutoff {dim} leaves norm residue {residue:.3e} for coherent amplitude |beta| = {amplitude:.3}"
    )]
    Truncation {
        dim: usize,
        residue: f64,
        amplitude: f64,
    },
}
