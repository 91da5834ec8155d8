//! Time-dependent physical spectrum of the mirror.
//!
//! A Lorentzian filter of linewidth `Gamma` applied to the two-time
//! correlation `<b†(t1) b(t2)>` over the window `[0, t]`. Because each
//! evolved coefficient is a short sum of exponentials in time, the double
//! filter integral collapses to products of three closed-form single
//! integrals, one per coefficient channel.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::coefficients::{Sector, SectorCache};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::observables::InitialState;

/// Filter linewidth, detection-frequency grid, and observation time.
#[derive(Clone, Debug)]
pub struct SpectrumParams {
    pub filter_linewidth: f64,
    pub omega_grid: Vec<f64>,
    pub t: f64,
}

impl SpectrumParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.filter_linewidth > 0.0 && self.filter_linewidth.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "filter_linewidth",
                reason: format!("must be positive, got {}", self.filter_linewidth),
            });
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("observation time must be >= 0, got {}", self.t),
            });
        }
        for pair in self.omega_grid.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidParameter {
                    name: "omega_grid",
                    reason: "must be strictly increasing".into(),
                });
            }
        }
        Ok(())
    }

    /// Default detection grid: 801 points spanning four dressed frequencies
    /// either side of zero, evaluated at the largest photon sector in play.
    pub fn default_omega_grid(params: &SystemParams, max_photons: u32) -> Result<Vec<f64>> {
        let w = params.dressed_frequency(max_photons)?;
        let half = 4.0 * w;
        Ok(linspace(-half, half, 801))
    }
}

pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    let h = (stop - start) / (steps - 1) as f64;
    (0..steps).map(|i| start + h * i as f64).collect()
}

/// The three filter integrals at one `(n, omega, t)` point: integrals of
/// `e^{(Gamma - i omega) tau}` against each evolved-coefficient channel.
#[derive(Clone, Copy, Debug)]
pub struct FilteredCoeffs {
    /// Integral against the `b†` channel.
    pub u: C64,
    /// Integral against the `b` channel.
    pub v: C64,
    /// Integral against the scalar channel.
    pub shift: C64,
}

/// `(e^{z t} - 1)/z` with the removable singularity handled by a four-term
/// Taylor series.
fn phi(z: C64, t: f64) -> C64 {
    let zt = z * t;
    if z.norm() < 1e-8 || zt.norm() < 1e-6 {
        t * (1.0 + zt / 2.0 + zt * zt / 6.0 + zt * zt * zt / 24.0)
    } else {
        (zt.exp() - 1.0) / z
    }
}

/// `e^{-Gamma t} (e^{z t} - 1)/z` evaluated without overflow: with
/// `z = s + Gamma - i omega` and `Re s <= 0`, both surviving exponentials
/// have non-positive real exponents.
fn phi_scaled(z: C64, t: f64, filter: f64) -> C64 {
    let zt = z * t;
    if z.norm() < 1e-8 || zt.norm() < 1e-6 {
        (-filter * t).exp() * t * (1.0 + zt / 2.0 + zt * zt / 6.0 + zt * zt * zt / 24.0)
    } else {
        (((z - filter) * t).exp() - (-filter * t).exp()) / z
    }
}

fn assemble_filtered(
    sector: &Sector,
    filter: f64,
    omega: f64,
    t: f64,
    scaled: bool,
) -> FilteredCoeffs {
    let base = C64::new(filter, -omega);
    let zp = sector.exponent(1) + base;
    let zm = sector.exponent(-1) + base;
    let eval = |z: C64| {
        if scaled {
            phi_scaled(z, t, filter)
        } else {
            phi(z, t)
        }
    };
    let fp = eval(zp);
    let fm = eval(zm);
    let f0 = eval(base);
    let c = sector.cosh_r;
    let s = sector.sinh_r;
    FilteredCoeffs {
        u: c * c * fp - s * s * fm,
        v: s * c * (fp - fm),
        shift: sector.dressed.displacement * (c * fp - s * fm - sector.exp_neg_r * f0),
    }
}

/// Raw filter integrals for sector `n`.
pub fn filter_integrals(
    params: &SystemParams,
    photons: u32,
    filter_linewidth: f64,
    omega: f64,
    t: f64,
) -> Result<FilteredCoeffs> {
    if !(filter_linewidth > 0.0) {
        return Err(Error::InvalidParameter {
            name: "filter_linewidth",
            reason: format!("must be positive, got {filter_linewidth}"),
        });
    }
    let sector = Sector::new(params, photons)?;
    Ok(assemble_filtered(
        &sector,
        filter_linewidth,
        omega,
        t,
        false,
    ))
}

/// Fixed-sector spectrum value already including the `2 Gamma e^{-2 Gamma t}`
/// prefactor, assembled from the scaled integrals.
fn sector_spectrum_value(sector: &Sector, filter: f64, omega: f64, t: f64, beta: C64) -> f64 {
    let l = assemble_filtered(sector, filter, omega, t, true);
    let direct = l.v.norm_sqr() + l.shift.norm_sqr();
    let number = beta.norm_sqr() * (l.u.norm_sqr() + l.v.norm_sqr());
    let squeeze_pair = 2.0 * ((beta.conj() * beta.conj()) * l.u * l.v.conj()).re;
    let linear_pair = 2.0 * (beta.conj() * (l.u * l.shift.conj() + l.shift * l.v.conj())).re;
    2.0 * filter * (number + squeeze_pair + linear_pair + direct)
}

/// Spectrum for a number state of `n` photons and coherent mirror amplitude
/// `beta`, one non-negative value per grid frequency.
pub fn spectrum_number(
    params: &SystemParams,
    photons: u32,
    beta: C64,
    sp: &SpectrumParams,
) -> Result<Vec<f64>> {
    sp.validate()?;
    let sector = Sector::new(params, photons)?;
    Ok(sp
        .omega_grid
        .par_iter()
        .map(|&w| sector_spectrum_value(&sector, sp.filter_linewidth, w, sp.t, beta))
        .collect())
}

/// Spectrum for a coherent photon distribution: the Poisson-weighted average
/// of the fixed-sector spectra.
pub fn spectrum_coherent(
    params: &SystemParams,
    alpha: f64,
    beta: C64,
    sp: &SpectrumParams,
) -> Result<Vec<f64>> {
    sp.validate()?;
    let state = InitialState::CoherentCoherent { alpha, beta };
    let cache = SectorCache::new(*params);
    let mut sectors = Vec::new();
    for (n, w) in state.sector_weights()? {
        sectors.push((w, cache.sector(n)?));
    }
    Ok(sp
        .omega_grid
        .par_iter()
        .map(|&omega| {
            sectors
                .iter()
                .map(|(w, sec)| {
                    w * sector_spectrum_value(sec, sp.filter_linewidth, omega, sp.t, beta)
                })
                .sum()
        })
        .collect())
}

/// Two-time correlation `<b†(t1) b(t2)>` of the dephasing-averaged Heisenberg
/// operators in the given initial state.
pub fn correlation(params: &SystemParams, state: &InitialState, t1: f64, t2: f64) -> Result<C64> {
    if t1 < 0.0 || t2 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: "correlation times must be >= 0".into(),
        });
    }
    let cache = SectorCache::new(*params);
    let (number, amp, amp_sq) = match *state {
        InitialState::NumberNumber { phonons, .. } => {
            (f64::from(phonons), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
        }
        InitialState::NumberCoherent { beta, .. } | InitialState::CoherentCoherent { beta, .. } => {
            (beta.norm_sqr(), beta, beta * beta)
        }
    };
    let mut acc = C64::new(0.0, 0.0);
    for (n, w) in state.sector_weights()? {
        let sector = cache.sector(n)?;
        let a = sector.evolved(t1);
        let b = sector.evolved(t2);
        let value = number * (a.u * b.u.conj() + a.v * b.v.conj())
            + amp_sq.conj() * a.u * b.v.conj()
            + amp_sq * a.v * b.u.conj()
            + amp.conj() * (a.u * b.shift.conj() + a.shift * b.v.conj())
            + amp * (a.v * b.shift.conj() + a.shift * b.u.conj())
            + a.v * b.v.conj()
            + a.shift * b.shift.conj();
        acc += w * value;
    }
    Ok(acc)
}

/// Long-time limit of the dephasing spectrum: the Lorentzian
/// `2 Gamma alpha(n)^2 e^{-2 r(n)} / (Gamma^2 + omega^2)` left behind by the
/// displacement channel. Identically zero without linear coupling.
pub fn longtime_spectrum(
    params: &SystemParams,
    photons: u32,
    filter_linewidth: f64,
    omega: f64,
) -> Result<f64> {
    if params.gamma.rate().is_none() {
        return Err(Error::RequiresFiniteRate);
    }
    if !(filter_linewidth > 0.0) {
        return Err(Error::InvalidParameter {
            name: "filter_linewidth",
            reason: format!("must be positive, got {filter_linewidth}"),
        });
    }
    let d = params.dressed(photons)?;
    let weight = d.displacement * d.displacement * (-2.0 * d.squeeze).exp();
    Ok(2.0 * filter_linewidth * weight / (filter_linewidth * filter_linewidth + omega * omega))
}
