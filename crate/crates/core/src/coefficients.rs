//! Evolution coefficients of the mirror operators.
//!
//! Under the dephasing evolution the annihilation/creation pair stays closed:
//! the evolved creation operator is `u b† + v b + shift` with sector-dependent
//! complex coefficients. Per dephasing step `k` the triplet is a squeezed
//! rotation (`step_coeffs`); the Poisson-weighted sum over steps has a closed
//! form because every term is a pure harmonic `e^{i j w k / gamma}` that
//! resums to `exp(gamma t (e^{i j w / gamma} - 1))` (`evolved_coeffs`).
//! Quadratic products of step coefficients average the same way after
//! expanding into harmonics `j in -2..=2` (`product_average`).
//!
//! The unitary limit replaces each resummed exponent `gamma (e^{i j w/gamma}
//! - 1)` by `i j w`, so one kernel serves both regimes.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{Dressed, Gamma, SystemParams};
use crate::poisson;

/// Hard cap on dephasing-step series lengths unless the caller overrides it.
pub const DEFAULT_SERIES_CAP: u64 = 20_000_000;

/// Coefficients of `b†`, `b`, and the identity in an evolved creation
/// operator; the evolved annihilation operator is the elementwise conjugate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorCoeffs {
    /// Coefficient of `b†`.
    pub u: C64,
    /// Coefficient of `b`.
    pub v: C64,
    /// Scalar offset.
    pub shift: C64,
}

impl OperatorCoeffs {
    pub const IDENTITY: Self = Self {
        u: C64::new(1.0, 0.0),
        v: C64::new(0.0, 0.0),
        shift: C64::new(0.0, 0.0),
    };

    /// `|u|^2 - |v|^2 - 1`; zero for any canonical transformation.
    pub fn bogoliubov_defect(&self) -> f64 {
        self.u.norm_sqr() - self.v.norm_sqr() - 1.0
    }
}

/// `E = e^{i omega_bar(n)/gamma} - 1`, the per-step dephasing factor. Its
/// real part is never positive, so resummed exponentials `e^{gamma t E}`
/// stay bounded.
pub fn damping_kernel(params: &SystemParams, photons: u32) -> Result<C64> {
    let gamma = params.gamma.rate().ok_or(Error::RequiresFiniteRate)?;
    let w = params.dressed_frequency(photons)?;
    Ok((C64::i() * (w / gamma)).exp() - 1.0)
}

/// Indices of the three step-coefficient channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    /// The `b†` mixing amplitude.
    U = 0,
    /// The `b` mixing amplitude.
    V = 1,
    /// The scalar offset.
    Shift = 2,
}

impl Channel {
    pub fn from_index(l: usize) -> Result<Self> {
        match l {
            1 => Ok(Channel::U),
            2 => Ok(Channel::V),
            3 => Ok(Channel::Shift),
            _ => Err(Error::InvalidParameter {
                name: "channel",
                reason: format!("must be 1, 2 or 3, got {l}"),
            }),
        }
    }
}

/// Everything the closed forms need about one photon sector, including the
/// five resummed harmonic exponents and the product-average tables.
pub(crate) struct Sector {
    pub dressed: Dressed,
    pub cosh_r: f64,
    pub sinh_r: f64,
    /// `e^{-r} = cosh r - sinh r`.
    pub exp_neg_r: f64,
    /// Resummed exponent per harmonic `j = idx - 2`:
    /// `gamma (e^{i j w/gamma} - 1)` for a finite rate, `i j w` for unitary.
    exponents: [C64; 5],
    /// Harmonic coefficients of the six averaged products, rows indexed by
    /// `ProductKind`, columns by `j = idx - 2`.
    table: [[C64; 5]; 6],
}

#[derive(Clone, Copy)]
enum ProductKind {
    UU = 0,
    VV = 1,
    ShiftShift = 2,
    UV = 3,
    UShift = 4,
    VShift = 5,
}

fn product_kind(a: Channel, b: Channel) -> (ProductKind, bool) {
    // (kind, conjugate?) for the average of chan_a * conj(chan_b)
    use Channel::*;
    match (a, b) {
        (U, U) => (ProductKind::UU, false),
        (V, V) => (ProductKind::VV, false),
        (Shift, Shift) => (ProductKind::ShiftShift, false),
        (U, V) => (ProductKind::UV, false),
        (V, U) => (ProductKind::UV, true),
        (U, Shift) => (ProductKind::UShift, false),
        (Shift, U) => (ProductKind::UShift, true),
        (V, Shift) => (ProductKind::VShift, false),
        (Shift, V) => (ProductKind::VShift, true),
    }
}

impl Sector {
    pub fn new(params: &SystemParams, photons: u32) -> Result<Self> {
        let dressed = params.dressed(photons)?;
        let c = dressed.squeeze.cosh();
        let s = dressed.squeeze.sinh();
        let e = c - s;
        let a = dressed.displacement;
        let w = dressed.frequency;

        let mut exponents = [C64::new(0.0, 0.0); 5];
        for (idx, slot) in exponents.iter_mut().enumerate() {
            let j = idx as f64 - 2.0;
            *slot = match params.gamma {
                Gamma::Finite(g) => g * ((C64::i() * (j * w / g)).exp() - 1.0),
                Gamma::Infinite => C64::i() * (j * w),
            };
        }

        // Harmonic expansion of chan_a(theta) * conj(chan_b(theta)) in powers
        // of z = e^{i theta}; worked out once from the step coefficients.
        let c2 = c * c;
        let s2 = s * s;
        let r = |x: f64| C64::new(x, 0.0);
        let mut table = [[C64::new(0.0, 0.0); 5]; 6];
        table[ProductKind::UU as usize] = [
            r(-c2 * s2),
            r(0.0),
            r(c2 * c2 + s2 * s2),
            r(0.0),
            r(-c2 * s2),
        ];
        table[ProductKind::VV as usize] =
            [r(-c2 * s2), r(0.0), r(2.0 * c2 * s2), r(0.0), r(-c2 * s2)];
        table[ProductKind::ShiftShift as usize] = [
            r(-a * a * c * s),
            r(-a * a * e * e),
            r(a * a * (c2 + s2 + e * e)),
            r(-a * a * e * e),
            r(-a * a * c * s),
        ];
        table[ProductKind::UV as usize] = [
            r(-s2 * s * c),
            r(0.0),
            r(s * c * (c2 + s2)),
            r(0.0),
            r(-c2 * c * s),
        ];
        table[ProductKind::UShift as usize] = [
            r(-a * c * s2),
            r(a * s2 * e),
            r(a * (c2 * c + s2 * s)),
            r(-a * c2 * e),
            r(-a * c2 * s),
        ];
        table[ProductKind::VShift as usize] = [
            r(-a * s * c * c),
            r(a * s * c * e),
            r(a * s * c * (c + s)),
            r(-a * s * c * e),
            r(-a * s * c * s),
        ];

        Ok(Self {
            dressed,
            cosh_r: c,
            sinh_r: s,
            exp_neg_r: e,
            exponents,
            table,
        })
    }

    /// `e^{s_j t}` for the five harmonics.
    fn harmonics(&self, t: f64) -> [C64; 5] {
        let mut h = [C64::new(0.0, 0.0); 5];
        for (idx, slot) in h.iter_mut().enumerate() {
            *slot = (self.exponents[idx] * t).exp();
        }
        h
    }

    /// Resummed exponent of harmonic `j`.
    pub fn exponent(&self, j: i32) -> C64 {
        self.exponents[(j + 2) as usize]
    }

    /// Assemble the operator coefficients given the `j = +1` and `j = -1`
    /// harmonic values.
    fn assemble(&self, hp: C64, hm: C64) -> OperatorCoeffs {
        let c = self.cosh_r;
        let s = self.sinh_r;
        OperatorCoeffs {
            u: c * c * hp - s * s * hm,
            v: s * c * (hp - hm),
            shift: self.dressed.displacement * (c * hp - s * hm - self.exp_neg_r),
        }
    }

    /// Time-resummed coefficients (finite rate) or the unitary-evolution
    /// coefficients (unitary branch).
    pub fn evolved(&self, t: f64) -> OperatorCoeffs {
        let hp = (self.exponents[3] * t).exp();
        let hm = (self.exponents[1] * t).exp();
        self.assemble(hp, hm)
    }

    /// Poisson average of `chan_a * conj(chan_b)` at time `t`.
    pub fn product_average(&self, a: Channel, b: Channel, t: f64) -> C64 {
        let (kind, conj) = product_kind(a, b);
        let h = self.harmonics(t);
        let row = &self.table[kind as usize];
        let mut acc = C64::new(0.0, 0.0);
        for idx in 0..5 {
            acc += row[idx] * h[idx];
        }
        if conj {
            acc.conj()
        } else {
            acc
        }
    }

    /// All six averaged products at once.
    pub fn averaged_products(&self, t: f64) -> AveragedProducts {
        let h = self.harmonics(t);
        let eval = |kind: ProductKind| {
            let row = &self.table[kind as usize];
            let mut acc = C64::new(0.0, 0.0);
            for idx in 0..5 {
                acc += row[idx] * h[idx];
            }
            acc
        };
        AveragedProducts {
            uu: eval(ProductKind::UU),
            vv: eval(ProductKind::VV),
            shift_shift: eval(ProductKind::ShiftShift),
            uv: eval(ProductKind::UV),
            u_shift: eval(ProductKind::UShift),
            v_shift: eval(ProductKind::VShift),
        }
    }
}

/// The six Poisson-averaged quadratic products at a fixed time. Diagonal
/// entries are real up to rounding; their imaginary parts are kept so the
/// caller can verify hermiticity.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AveragedProducts {
    pub uu: C64,
    pub vv: C64,
    pub shift_shift: C64,
    pub uv: C64,
    pub u_shift: C64,
    pub v_shift: C64,
}

/// Read-mostly cache of per-sector data, keyed by photon number. Parameters
/// are fixed at construction; spectrum and dynamics sweeps reuse the sector
/// tables across every grid point.
pub struct SectorCache {
    params: SystemParams,
    inner: RwLock<HashMap<u32, Arc<Sector>>>,
}

impl SectorCache {
    pub fn new(params: SystemParams) -> Self {
        Self {
            params,
            inner: RwLock::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub(crate) fn sector(&self, photons: u32) -> Result<Arc<Sector>> {
        if let Some(s) = self.inner.read().unwrap().get(&photons) {
            return Ok(Arc::clone(s));
        }
        let fresh = Arc::new(Sector::new(&self.params, photons)?);
        let mut guard = self.inner.write().unwrap();
        Ok(Arc::clone(guard.entry(photons).or_insert(fresh)))
    }
}

/// Step coefficients at dephasing step `k`: a squeezed rotation by the angle
/// `k omega_bar(n) / gamma`.
pub fn step_coeffs(params: &SystemParams, photons: u32, k: u64) -> Result<OperatorCoeffs> {
    let gamma = params.gamma.rate().ok_or(Error::RequiresFiniteRate)?;
    let sector = Sector::new(params, photons)?;
    let theta = k as f64 * sector.dressed.frequency / gamma;
    let hp = (C64::i() * theta).exp();
    Ok(sector.assemble(hp, hp.conj()))
}

/// Closed-form time-domain coefficients: each step harmonic
/// `e^{± i k omega_bar/gamma}` resums to `e^{gamma t (e^{± i omega_bar/gamma} - 1)}`.
/// In the unitary limit these are the Heisenberg-evolution coefficients.
pub fn evolved_coeffs(params: &SystemParams, photons: u32, t: f64) -> Result<OperatorCoeffs> {
    Ok(Sector::new(params, photons)?.evolved(t))
}

/// Unitary-evolution coefficients, independent of the decoherence rate.
pub fn unitary_coeffs(params: &SystemParams, photons: u32, t: f64) -> Result<OperatorCoeffs> {
    let unitary = SystemParams {
        gamma: Gamma::Infinite,
        ..*params
    };
    Ok(Sector::new(&unitary, photons)?.evolved(t))
}

/// Direct truncated Poisson sum of the step coefficients, with the upper
/// tail mass below `tol`. Cross-checks `evolved_coeffs`; the closed form is
/// what production paths use.
pub fn evolved_coeffs_series(
    params: &SystemParams,
    photons: u32,
    t: f64,
    tol: f64,
    cap: u64,
) -> Result<OperatorCoeffs> {
    let gamma = params.gamma.rate().ok_or(Error::RequiresFiniteRate)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {tol}"),
        });
    }
    let sector = Sector::new(params, photons)?;
    let window = poisson::window(gamma * t, cap)?;
    let keep = window.truncate_upper(tol);

    let step = (C64::i() * (sector.dressed.frequency / gamma)).exp();
    let mut hp = pow_c64(step, window.first_index());
    let mut acc = OperatorCoeffs {
        u: C64::new(0.0, 0.0),
        v: C64::new(0.0, 0.0),
        shift: C64::new(0.0, 0.0),
    };
    for (i, &w) in window.weights().iter().take(keep).enumerate() {
        if i > 0 {
            hp *= step;
        }
        let c = sector.assemble(hp, hp.conj());
        acc.u += w * c.u;
        acc.v += w * c.v;
        acc.shift += w * c.shift;
    }
    Ok(acc)
}

fn pow_c64(base: C64, mut exp: u64) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b *= b;
        exp >>= 1;
    }
    acc
}

/// Poisson-averaged product of step-coefficient channels: the diagonal call
/// (`m = None`) averages `|chan_l|^2`, which is real and non-negative; the
/// off-diagonal call averages `chan_l * conj(chan_m)`.
pub fn product_average(
    params: &SystemParams,
    photons: u32,
    t: f64,
    l: usize,
    m: Option<usize>,
) -> Result<C64> {
    let a = Channel::from_index(l)?;
    let b = match m {
        Some(m) => Channel::from_index(m)?,
        None => a,
    };
    Ok(Sector::new(params, photons)?.product_average(a, b, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(omega_m: f64, g_l: f64, g_q: f64, gamma: f64) -> SystemParams {
        SystemParams::new(1.0, omega_m, g_l, g_q, Gamma::Finite(gamma)).unwrap()
    }

    fn approx(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn step_is_identity_at_k0() {
        let p = params(1.0, 0.7, 0.3, 2.0);
        let c = step_coeffs(&p, 2, 0).unwrap();
        assert!(approx(c.u, C64::new(1.0, 0.0), 1e-15));
        assert!(approx(c.v, C64::new(0.0, 0.0), 1e-15));
        assert!(approx(c.shift, C64::new(0.0, 0.0), 1e-15));
    }

    #[test]
    fn no_squeezing_means_no_v_channel() {
        let p = params(1.0, 0.9, 0.0, 1.5);
        for k in [1, 3, 17] {
            let c = step_coeffs(&p, 1, k).unwrap();
            assert_eq!(c.v, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn step_v_channel_closed_form() {
        // omega_m = 1, g_q = 1, g_l = 0, n = 1, gamma = 1, k = 1:
        // v = i sinh(ln(5)/2) sin(sqrt 5)
        let p = params(1.0, 0.0, 1.0, 1.0);
        let c = step_coeffs(&p, 1, 1).unwrap();
        let expected = C64::i() * (0.5 * 5.0_f64.ln()).sinh() * 5.0_f64.sqrt().sin();
        assert!(approx(c.v, expected, 1e-14), "{:?} vs {expected:?}", c.v);
    }

    #[test]
    fn evolved_is_identity_at_t0() {
        let p = params(1.0, 1.0, 1.0, 0.7);
        let c = evolved_coeffs(&p, 1, 0.0).unwrap();
        assert!(approx(c.u, C64::new(1.0, 0.0), 1e-15));
        assert!(approx(c.v, C64::new(0.0, 0.0), 1e-15));
        assert!(approx(c.shift, C64::new(0.0, 0.0), 1e-15));
    }

    #[test]
    fn shift_settles_to_displaced_origin() {
        // Linear-only coupling: shift(t -> inf) = -alpha.
        let p = params(1.0, 1.0, 0.0, 1.0);
        let alpha = p.displacement(1).unwrap();
        let c = evolved_coeffs(&p, 1, 80.0).unwrap();
        assert!(approx(c.shift, C64::new(-alpha, 0.0), 1e-12));
        assert!(c.u.norm() < 1e-12);
    }

    #[test]
    fn series_identity_at_t0_with_single_term() {
        let p = params(1.0, 0.5, 0.5, 1.0);
        let c = evolved_coeffs_series(&p, 1, 0.0, 1e-12, 10).unwrap();
        assert_eq!(c.u, C64::new(1.0, 0.0));
    }

    #[test]
    fn series_matches_closed_form() {
        for (gq, gl, gamma, t) in [
            (1.0, 1.0, 0.5, 5.0),
            (0.3, 0.7, 2.0, 11.0),
            (0.0, 1.0, 1.0, 3.0),
            (1.0, 0.0, 4.0, 20.0),
        ] {
            let p = params(1.0, gl, gq, gamma);
            let closed = evolved_coeffs(&p, 1, t).unwrap();
            let series = evolved_coeffs_series(&p, 1, t, 1e-12, 1_000_000).unwrap();
            assert!(approx(closed.u, series.u, 1e-11));
            assert!(approx(closed.v, series.v, 1e-11));
            assert!(approx(closed.shift, series.shift, 1e-11));
        }
    }

    #[test]
    fn series_cap_breach_errors() {
        let p = params(1.0, 1.0, 0.0, 1.0);
        let err = evolved_coeffs_series(&p, 1, 1e6, 1e-12, 1000).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn damping_kernel_limits() {
        let p = params(1.0, 1.0, 0.3, 1.3);
        let e = damping_kernel(&p, 1).unwrap();
        assert!(e.re <= 0.0);

        // Unitary limit: gamma * E -> i omega_bar, within 1e-6 relative at 1e6.
        let p = SystemParams {
            gamma: Gamma::Finite(1e6),
            ..params(1.0, 1.0, 0.0, 1.0)
        };
        let e = damping_kernel(&p, 1).unwrap();
        let w = p.dressed_frequency(1).unwrap();
        let rel = (1e6 * e - C64::i() * w).norm() / w;
        assert!(rel < 1e-6, "relative deviation {rel}");
    }

    #[test]
    fn resummed_coefficients_approach_unitary_ones() {
        // Moderate dressed frequency and a short horizon keep the O(w^2 t /
        // gamma) limit error inside 1e-5 at gamma = 1e6.
        let base = params(1.0, 0.8, 0.4, 1.0);
        let near = SystemParams {
            gamma: Gamma::Finite(1e6),
            ..base
        };
        for i in 0..=50 {
            let t = 5.0 * f64::from(i) / 50.0;
            let a = evolved_coeffs(&near, 1, t).unwrap();
            let b = unitary_coeffs(&base, 1, t).unwrap();
            assert!(approx(a.u, b.u, 1e-5));
            assert!(approx(a.v, b.v, 1e-5));
            assert!(approx(a.shift, b.shift, 1e-5));
        }
    }

    #[test]
    fn unitary_u_channel_closed_form() {
        // u = cos(w t) + i cosh(2r) sin(w t), |u|^2 - |v|^2 = 1.
        let p = params(1.0, 0.6, 0.8, 1.0);
        let d = p.dressed(1).unwrap();
        for t in [0.3, 1.7, 4.1] {
            let c = unitary_coeffs(&p, 1, t).unwrap();
            let expected = C64::new(
                (d.frequency * t).cos(),
                (2.0 * d.squeeze).cosh() * (d.frequency * t).sin(),
            );
            assert!(approx(c.u, expected, 1e-13));
            assert!(c.bogoliubov_defect().abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_shift_is_periodic_for_linear_coupling() {
        let p = params(1.0, 1.0, 0.0, 1.0);
        let period = 2.0 * std::f64::consts::PI / p.dressed_frequency(1).unwrap();
        for t in [0.2, 0.9, 2.5] {
            let a = unitary_coeffs(&p, 1, t).unwrap().shift;
            let b = unitary_coeffs(&p, 1, t + period).unwrap().shift;
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_average_initial_values() {
        let p = params(1.0, 1.0, 1.0, 0.9);
        let z1 = product_average(&p, 1, 0.0, 1, None).unwrap();
        let z2 = product_average(&p, 1, 0.0, 2, None).unwrap();
        let z3 = product_average(&p, 1, 0.0, 3, None).unwrap();
        assert!(approx(z1, C64::new(1.0, 0.0), 1e-14));
        assert!(approx(z2, C64::new(0.0, 0.0), 1e-14));
        assert!(approx(z3, C64::new(0.0, 0.0), 1e-14));
        for (l, m) in [(1, 2), (1, 3), (2, 3)] {
            let z = product_average(&p, 1, 0.0, l, Some(m)).unwrap();
            assert!(approx(z, C64::new(0.0, 0.0), 1e-14), "({l},{m}) -> {z}");
        }
    }

    #[test]
    fn product_average_longtime_limits() {
        // Linear-only: |shift|^2 average -> 2 alpha^2 = 2.
        let p = params(1.0, 1.0, 0.0, 1.0);
        let z3 = product_average(&p, 1, 120.0, 3, None).unwrap();
        assert!(approx(z3, C64::new(2.0, 0.0), 1e-10), "{z3}");

        // Quadratic-only: |v|^2 average -> sinh^2(2r)/2 = 0.4.
        let p = params(1.0, 0.0, 1.0, 1.0);
        let z2 = product_average(&p, 1, 60.0, 2, None).unwrap();
        assert!(approx(z2, C64::new(0.4, 0.0), 1e-10), "{z2}");
    }

    #[test]
    fn averaged_bogoliubov_content_is_exactly_conserved() {
        // |u|^2 - |v|^2 = 1 holds per step, and the average is linear in the
        // squared magnitudes, so it survives at every time.
        let p = params(1.0, 0.8, 1.3, 0.6);
        for t in [0.0, 0.4, 2.2, 17.0] {
            let z1 = product_average(&p, 1, t, 1, None).unwrap();
            let z2 = product_average(&p, 1, t, 2, None).unwrap();
            assert!((z1 - z2 - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn swapped_product_indices_conjugate() {
        let p = params(1.0, 1.0, 1.0, 0.8);
        let a = product_average(&p, 1, 1.3, 1, Some(3)).unwrap();
        let b = product_average(&p, 1, 1.3, 3, Some(1)).unwrap();
        assert!(approx(a, b.conj(), 1e-15));
    }

    #[test]
    fn channel_index_validation() {
        let p = params(1.0, 1.0, 1.0, 1.0);
        assert!(product_average(&p, 1, 1.0, 0, None).is_err());
        assert!(product_average(&p, 1, 1.0, 4, None).is_err());
    }

    #[test]
    fn series_requires_finite_rate() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 1.0, Gamma::Infinite).unwrap();
        assert_eq!(
            evolved_coeffs_series(&p, 1, 1.0, 1e-12, 100).unwrap_err(),
            Error::RequiresFiniteRate
        );
        assert_eq!(
            step_coeffs(&p, 1, 1).unwrap_err(),
            Error::RequiresFiniteRate
        );
    }

    #[test]
    fn sector_cache_reuses_entries() {
        let cache = SectorCache::new(params(1.0, 1.0, 1.0, 1.0));
        let a = cache.sector(1).unwrap();
        let b = cache.sector(1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(cache.sector(u32::MAX / 8).is_ok());
    }

    proptest! {
        #[test]
        fn bogoliubov_identity_per_step(
            omega_m in 0.2_f64..3.0,
            g_l in -1.5_f64..1.5,
            g_q in 0.0_f64..1.5,
            gamma in 0.1_f64..10.0,
            n in 0_u32..5,
            k in 0_u64..200,
        ) {
            let p = params(omega_m, g_l, g_q, gamma);
            let c = step_coeffs(&p, n, k).unwrap();
            prop_assert!(c.bogoliubov_defect().abs() < 1e-12);
        }

        #[test]
        fn resummed_exponents_never_grow(
            omega_m in 0.2_f64..3.0,
            g_q in 0.0_f64..1.5,
            gamma in 0.05_f64..20.0,
            n in 0_u32..5,
            t in 0.0_f64..50.0,
        ) {
            let p = params(omega_m, 0.3, g_q, gamma);
            let sector = Sector::new(&p, n).unwrap();
            for j in -2..=2_i32 {
                prop_assert!(sector.exponent(j).re <= 1e-12);
            }
            let c = sector.evolved(t);
            let bound = sector.cosh_r.powi(2) + sector.sinh_r.powi(2);
            prop_assert!(c.u.norm() <= bound + 1e-12);
        }

        #[test]
        fn diagonal_averages_stay_real_nonnegative(
            g_l in -1.5_f64..1.5,
            g_q in 0.0_f64..1.5,
            gamma in 0.1_f64..10.0,
            t in 0.0_f64..30.0,
        ) {
            let p = params(1.0, g_l, g_q, gamma);
            for l in 1..=3 {
                let z = product_average(&p, 1, t, l, None).unwrap();
                prop_assert!(z.im.abs() < 1e-12);
                prop_assert!(z.re >= -1e-12);
            }
        }
    }
}
