//! Expectation values of the phonon number and position quadrature.
//!
//! The evolved phonon-number operator assembles from the Poisson-averaged
//! coefficient products; the quadrature from the resummed operator
//! coefficients alone. Both expressions are Hermitian by construction — the
//! `b` coefficient is the conjugate of the `b†` coefficient — and the
//! assembled imaginary residue is checked to vanish.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::coefficients::{Sector, SectorCache};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::poisson;

/// Hard cap on retained photon sectors for coherent-field averages.
pub const FIELD_SECTOR_CAP: u64 = 1_000_000;

/// Supported initial product states of cavity field and mirror.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    /// Number state in the field, number state in the mirror.
    NumberNumber { photons: u32, phonons: u32 },
    /// Number state in the field, coherent state in the mirror.
    NumberCoherent { photons: u32, beta: C64 },
    /// Coherent photon distribution of real amplitude `alpha`, coherent
    /// mirror state `beta`.
    CoherentCoherent { alpha: f64, beta: C64 },
}

impl InitialState {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialState::NumberNumber { .. } => Ok(()),
            InitialState::NumberCoherent { beta, .. } => {
                if beta.re.is_finite() && beta.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "beta",
                        reason: "must be finite".into(),
                    })
                }
            }
            InitialState::CoherentCoherent { alpha, beta } => {
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter {
                        name: "alpha",
                        reason: format!("field amplitude must be >= 0, got {alpha}"),
                    });
                }
                if beta.re.is_finite() && beta.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "beta",
                        reason: "must be finite".into(),
                    })
                }
            }
        }
    }

    /// Photon sectors carrying weight, with their probabilities.
    pub(crate) fn sector_weights(&self) -> Result<Vec<(u32, f64)>> {
        self.validate()?;
        match *self {
            InitialState::NumberNumber { photons, .. }
            | InitialState::NumberCoherent { photons, .. } => Ok(vec![(photons, 1.0)]),
            InitialState::CoherentCoherent { alpha, .. } => {
                let window = poisson::window(alpha * alpha, FIELD_SECTOR_CAP)?;
                Ok(window.iter().map(|(n, w)| (n as u32, w)).collect())
            }
        }
    }

    /// Mirror-mode moments entering the quadratic observable assembly.
    fn mirror_moments(&self) -> MirrorMoments {
        match *self {
            InitialState::NumberNumber { phonons, .. } => MirrorMoments {
                number: f64::from(phonons),
                amp: C64::new(0.0, 0.0),
                amp_sq: C64::new(0.0, 0.0),
            },
            InitialState::NumberCoherent { beta, .. }
            | InitialState::CoherentCoherent { beta, .. } => MirrorMoments {
                number: beta.norm_sqr(),
                amp: beta,
                amp_sq: beta * beta,
            },
        }
    }
}

/// `<N>`, `<b>`, `<b^2>` of the mirror mode at t = 0.
#[derive(Clone, Copy, Debug)]
struct MirrorMoments {
    number: f64,
    amp: C64,
    amp_sq: C64,
}

/// One row of a dynamics sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsSample {
    pub t: f64,
    pub phonon_number: f64,
    pub quadrature: f64,
}

/// Residue bound for the Hermitian observable assembly.
const HERMITICITY_TOL: f64 = 1e-10;

fn sector_phonon_number(sector: &Sector, m: &MirrorMoments, t: f64) -> f64 {
    let z = sector.averaged_products(t);
    let full = m.number * (z.uu + z.vv)
        + 2.0 * (m.amp_sq.conj() * z.uv).re
        + 2.0 * (m.amp.conj() * (z.u_shift + z.v_shift.conj())).re
        + z.vv
        + z.shift_shift;
    debug_assert!(
        full.im.abs() < HERMITICITY_TOL,
        "phonon-number residue {}",
        full.im
    );
    full.re
}

fn sector_quadrature(sector: &Sector, m: &MirrorMoments, t: f64) -> f64 {
    let nu = sector.evolved(t);
    2.0 * (m.amp.conj() * (nu.u + nu.v.conj())).re + 2.0 * nu.shift.re
}

/// Imaginary residue of the assembled phonon-number expression; exposed for
/// the hermiticity checks.
pub fn phonon_number_residue(params: &SystemParams, state: &InitialState, t: f64) -> Result<f64> {
    let engine = DynamicsEngine::new(*params, state)?;
    let mut worst: f64 = 0.0;
    for (weight, sector) in &engine.terms {
        let z = sector.averaged_products(t);
        let m = engine.moments;
        let full = m.number * (z.uu + z.vv)
            + 2.0 * (m.amp_sq.conj() * z.uv).re
            + 2.0 * (m.amp.conj() * (z.u_shift + z.v_shift.conj())).re
            + z.vv
            + z.shift_shift;
        worst = worst.max((weight * full.im).abs());
    }
    Ok(worst)
}

/// Sector data resolved once per initial state, reused across a time grid.
pub(crate) struct DynamicsEngine {
    terms: Vec<(f64, std::sync::Arc<Sector>)>,
    moments: MirrorMoments,
}

impl DynamicsEngine {
    pub fn new(params: SystemParams, state: &InitialState) -> Result<Self> {
        let cache = SectorCache::new(params);
        let mut terms = Vec::new();
        for (n, w) in state.sector_weights()? {
            // Surfaces the lowest unstable sector in the support.
            terms.push((w, cache.sector(n)?));
        }
        Ok(Self {
            terms,
            moments: state.mirror_moments(),
        })
    }

    pub fn phonon_number(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, s)| w * sector_phonon_number(s, &self.moments, t))
            .sum()
    }

    pub fn quadrature(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(w, s)| w * sector_quadrature(s, &self.moments, t))
            .sum()
    }
}

/// Mean phonon number at time `t`.
pub fn phonon_number(params: &SystemParams, state: &InitialState, t: f64) -> Result<f64> {
    Ok(DynamicsEngine::new(*params, state)?.phonon_number(t))
}

/// Mean position quadrature `<b† + b>` at time `t`.
pub fn quadrature(params: &SystemParams, state: &InitialState, t: f64) -> Result<f64> {
    Ok(DynamicsEngine::new(*params, state)?.quadrature(t))
}

/// Evaluate both observables over a strictly increasing, non-negative time
/// grid. Grid points evaluate in parallel; the output keeps grid order.
pub fn dynamics_sweep(
    params: &SystemParams,
    state: &InitialState,
    grid: &[f64],
) -> Result<Vec<DynamicsSample>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    if !grid[0].is_finite() || grid[0] < 0.0 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("times must be >= 0, got {}", grid[0]),
        });
    }
    for pair in grid.windows(2) {
        if !(pair[1] > pair[0]) || !pair[1].is_finite() {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!(
                    "must be strictly increasing, got {} after {}",
                    pair[1], pair[0]
                ),
            });
        }
    }
    let engine = DynamicsEngine::new(*params, state)?;
    Ok(grid
        .par_iter()
        .map(|&t| DynamicsSample {
            t,
            phonon_number: engine.phonon_number(t),
            quadrature: engine.quadrature(t),
        })
        .collect())
}
