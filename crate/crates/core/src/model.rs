//! System parameters and the squeeze-displace diagonalization.
//!
//! The optomechanical Hamiltonian conserves the photon number, so every
//! quantity here is resolved per photon sector `n`. A one-mode squeezing
//! followed by a one-mode displacement brings each sector to a harmonic
//! ladder; the three transformation parameters (squeeze argument, dressed
//! frequency, displacement) fix all downstream dynamics.

use crate::error::{Error, Result};

/// Decoherence rate: a finite pure-dephasing rate, or the unitary limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gamma {
    Finite(f64),
    Infinite,
}

impl Gamma {
    pub fn is_finite(self) -> bool {
        matches!(self, Gamma::Finite(_))
    }

    /// The rate when finite.
    pub fn rate(self) -> Option<f64> {
        match self {
            Gamma::Finite(g) => Some(g),
            Gamma::Infinite => None,
        }
    }

    /// Value as a float, mapping the unitary limit to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            Gamma::Finite(g) => g,
            Gamma::Infinite => f64::INFINITY,
        }
    }

    /// Classify a float, treating `inf` as the unitary limit.
    pub fn from_f64(value: f64) -> Result<Self> {
        if value.is_nan() {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: "must not be NaN".into(),
            });
        }
        if value.is_infinite() {
            if value > 0.0 {
                Ok(Gamma::Infinite)
            } else {
                Err(Error::InvalidParameter {
                    name: "gamma",
                    reason: "must be positive".into(),
                })
            }
        } else if value > 0.0 {
            Ok(Gamma::Finite(value))
        } else {
            Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be positive, got {value}"),
            })
        }
    }
}

/// Physical constants of the coupled cavity-resonator system, in units where
/// hbar = 1 and all frequencies share one angular-frequency unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    /// Cavity frequency.
    pub omega_c: f64,
    /// Bare mechanical frequency, > 0.
    pub omega_m: f64,
    /// Linear coupling strength.
    pub g_l: f64,
    /// Quadratic coupling strength.
    pub g_q: f64,
    /// Pure-dephasing rate.
    pub gamma: Gamma,
}

impl SystemParams {
    pub fn new(omega_c: f64, omega_m: f64, g_l: f64, g_q: f64, gamma: Gamma) -> Result<Self> {
        for (name, v) in [
            ("omega_c", omega_c),
            ("omega_m", omega_m),
            ("g_l", g_l),
            ("g_q", g_q),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        if omega_m <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "omega_m",
                reason: format!("must be positive, got {omega_m}"),
            });
        }
        if let Gamma::Finite(g) = gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "gamma",
                    reason: format!("must be positive and finite, got {g}"),
                });
            }
        }
        Ok(Self {
            omega_c,
            omega_m,
            g_l,
            g_q,
            gamma,
        })
    }

    /// `omega_m + 4 g_q n`; the sector is stable iff this is positive.
    pub fn stability_margin(&self, photons: u32) -> f64 {
        self.omega_m + 4.0 * self.g_q * f64::from(photons)
    }

    pub fn check_stability(&self, photons: u32) -> Result<()> {
        let margin = self.stability_margin(photons);
        if margin > 0.0 {
            Ok(())
        } else {
            Err(Error::Stability { photons, margin })
        }
    }

    /// Squeeze argument `r(n) = ln(1 + 4 g_q n / omega_m) / 4` that removes
    /// the quadratic coupling in sector `n`.
    pub fn squeeze_param(&self, photons: u32) -> Result<f64> {
        self.check_stability(photons)?;
        Ok(0.25 * (self.stability_margin(photons) / self.omega_m).ln())
    }

    /// Dressed mechanical frequency `sqrt(omega_m (omega_m + 4 g_q n))`.
    pub fn dressed_frequency(&self, photons: u32) -> Result<f64> {
        self.check_stability(photons)?;
        Ok((self.omega_m * self.stability_margin(photons)).sqrt())
    }

    /// Real displacement `-g_l n e^{-r(n)} / omega_bar(n)` that removes the
    /// residual linear coupling.
    pub fn displacement(&self, photons: u32) -> Result<f64> {
        let d = self.dressed(photons)?;
        Ok(d.displacement)
    }

    /// Energy of the dressed level `(n, N)`:
    /// `omega_c n + omega_bar(n) N - g_l^2 n^2 e^{-2 r(n)} / omega_bar(n)`.
    pub fn eigenvalue(&self, photons: u32, phonons: u32) -> Result<f64> {
        let d = self.dressed(photons)?;
        let n = f64::from(photons);
        Ok(self.omega_c * n + d.frequency * f64::from(phonons)
            - d.frequency * d.displacement * d.displacement)
    }

    /// Constant offset between the dressed-ladder energies of sector `n` and
    /// the absolute spectrum of the sector Hamiltonian:
    /// `(omega_bar(n) - omega_m) / 2`. The squeezing transformation
    /// contributes it as a c-number, so it shifts every level of the sector
    /// equally and never enters the dynamics.
    pub fn zero_point_offset(&self, photons: u32) -> Result<f64> {
        Ok(0.5 * (self.dressed_frequency(photons)? - self.omega_m))
    }

    /// All three sector-`n` transformation parameters at once.
    pub fn dressed(&self, photons: u32) -> Result<Dressed> {
        let squeeze = self.squeeze_param(photons)?;
        let frequency = (self.omega_m * self.stability_margin(photons)).sqrt();
        let displacement = -self.g_l * f64::from(photons) * (-squeeze).exp() / frequency;
        Ok(Dressed {
            photons,
            squeeze,
            frequency,
            displacement,
        })
    }
}

/// Photon-number-dressed quantities of one sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dressed {
    pub photons: u32,
    /// Squeeze argument; zero without quadratic coupling.
    pub squeeze: f64,
    /// Dressed mechanical frequency, > 0.
    pub frequency: f64,
    /// Real displacement; zero without linear coupling.
    pub displacement: f64,
}
