//! Brute-force ground truth on a truncated phonon basis.
//!
//! The Hamiltonian conserves the photon number, so each sector `n` is a dense
//! Hermitian matrix over phonon states `0..=N_max`. One eigendecomposition
//! per sector drives everything else: dephasing-step sums, their closed-form
//! resummation, and plain unitary evolution. Nothing here knows about the
//! squeeze-displace closed forms it is used to check.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{Gamma, SystemParams};
use crate::observables::InitialState;
use crate::poisson;
use crate::spectrum::SpectrumParams;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Dense Hamiltonian of one photon sector on the truncated phonon basis.
#[derive(Clone, Debug)]
pub struct FockBlock {
    pub photons: u32,
    pub matrix: CMat,
}

impl FockBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Max |H - H†| entry; zero up to assembly rounding.
    pub fn hermiticity_defect(&self) -> f64 {
        let h = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// `omega_c n + omega_m N + g_q n (2N+1)` on the diagonal, `-g_l n sqrt(N+1)`
/// on the first off-diagonals, `g_q n sqrt((N+1)(N+2))` on the second.
pub fn build_block(params: &SystemParams, photons: u32, phonon_cutoff: usize) -> FockBlock {
    let dim = phonon_cutoff + 1;
    let n = f64::from(photons);
    let mut h = CMat::zeros(dim, dim);
    for big_n in 0..dim {
        let nn = big_n as f64;
        h[(big_n, big_n)] = C64::new(
            params.omega_c * n + params.omega_m * nn + params.g_q * n * (2.0 * nn + 1.0),
            0.0,
        );
        if big_n + 1 < dim {
            let val = -params.g_l * n * (nn + 1.0).sqrt();
            h[(big_n, big_n + 1)] = C64::new(val, 0.0);
            h[(big_n + 1, big_n)] = C64::new(val, 0.0);
        }
        if big_n + 2 < dim {
            let val = params.g_q * n * ((nn + 1.0) * (nn + 2.0)).sqrt();
            h[(big_n, big_n + 2)] = C64::new(val, 0.0);
            h[(big_n + 2, big_n)] = C64::new(val, 0.0);
        }
    }
    FockBlock { photons, matrix: h }
}

/// Annihilation operator on the truncated basis.
pub fn lower_op(dim: usize) -> CMat {
    let mut b = CMat::zeros(dim, dim);
    for n in 1..dim {
        b[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    b
}

/// Phonon-number operator.
pub fn number_op(dim: usize) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(
        dim,
        (0..dim).map(|n| C64::new(n as f64, 0.0)),
    ))
}

/// Position quadrature `b† + b`.
pub fn position_op(dim: usize) -> CMat {
    let b = lower_op(dim);
    &b + b.adjoint()
}

/// Phonon number state |N> as a truncated vector.
pub fn number_vector(phonons: u32, dim: usize) -> Result<CVec> {
    if (phonons as usize) >= dim {
        return Err(Error::DimensionMismatch {
            left: phonons as usize,
            right: dim,
        });
    }
    let mut v = CVec::zeros(dim);
    v[phonons as usize] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Truncated coherent state, renormalized; errors when the cutoff leaves a
/// norm residue above 1e-10.
pub fn coherent_vector(beta: C64, dim: usize) -> Result<CVec> {
    let mut v = CVec::zeros(dim);
    let mut amp = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    v[0] = amp;
    for n in 1..dim {
        amp *= beta / (n as f64).sqrt();
        v[n] = amp;
    }
    let norm_sq: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let residue = (1.0 - norm_sq).abs();
    if residue > 1e-10 {
        return Err(Error::Truncation {
            dim,
            residue,
            amplitude: beta.norm(),
        });
    }
    Ok(v / C64::new(norm_sq.sqrt(), 0.0))
}

/// `<psi| A |psi>`.
pub fn expectation_vec(psi: &CVec, op: &CMat) -> Result<C64> {
    if psi.len() != op.nrows() {
        return Err(Error::DimensionMismatch {
            left: psi.len(),
            right: op.nrows(),
        });
    }
    Ok((psi.adjoint() * op * psi)[(0, 0)])
}

/// Eigendecomposed sector with the annihilation operator pre-rotated into
/// the energy eigenbasis.
pub struct SectorOracle {
    pub photons: u32,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMat,
    lower_eig: CMat,
    rotated_ops: OnceLock<(CMat, CMat)>,
}

impl SectorOracle {
    pub fn new(params: &SystemParams, photons: u32, phonon_cutoff: usize) -> Self {
        let block = build_block(params, photons, phonon_cutoff);
        let se = block.matrix.symmetric_eigen();
        let lower = lower_op(phonon_cutoff + 1);
        let lower_eig = se.eigenvectors.adjoint() * lower * &se.eigenvectors;
        Self {
            photons,
            eigenvalues: se.eigenvalues,
            eigenvectors: se.eigenvectors,
            lower_eig,
            rotated_ops: OnceLock::new(),
        }
    }

    /// Number and position operators rotated into the eigenbasis, shared by
    /// every evolver built on this sector.
    fn rotated_observables(&self) -> &(CMat, CMat) {
        self.rotated_ops.get_or_init(|| {
            let dim = self.dim();
            (
                self.eigenvectors.adjoint() * number_op(dim) * &self.eigenvectors,
                self.eigenvectors.adjoint() * position_op(dim) * &self.eigenvectors,
            )
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn sorted_eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    fn from_eigen(&self, m: &CMat) -> CMat {
        &self.eigenvectors * m * self.eigenvectors.adjoint()
    }

    /// Dephasing-averaged Heisenberg annihilation operator at time `t`,
    /// summed step by step with the Poisson tail rule.
    pub fn heisenberg_lower(&self, gamma: Gamma, t: f64, step_cap: u64) -> Result<CMat> {
        let g = match gamma {
            Gamma::Finite(g) => g,
            Gamma::Infinite => return Ok(self.heisenberg_lower_unitary(t)),
        };
        let dim = self.dim();
        let window = poisson::window(g * t, step_cap)?;
        // Phase vector e^{-i lambda k / g} per eigenvalue, advanced one step
        // per term; the accumulation is elementwise conj(phi_i) phi_j b_ij.
        let step: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| (-C64::i() * (l / g)).exp())
            .collect();
        let mut phase: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| (-C64::i() * (l / g * window.first_index() as f64)).exp())
            .collect();
        let mut acc = CMat::zeros(dim, dim);
        for (idx, &w) in window.weights().iter().enumerate() {
            if idx > 0 {
                for (p, s) in phase.iter_mut().zip(&step) {
                    *p *= s;
                }
            }
            for i in 0..dim {
                let pi = phase[i].conj() * w;
                for j in 0..dim {
                    acc[(i, j)] += pi * phase[j] * self.lower_eig[(i, j)];
                }
            }
        }
        Ok(self.from_eigen(&acc))
    }

    /// Same operator with the Poisson series resummed per matrix element:
    /// element `(i, j)` just picks up `exp(g t (e^{i (l_i - l_j)/g} - 1))`.
    pub fn heisenberg_lower_resummed(&self, gamma: Gamma, t: f64) -> CMat {
        let dim = self.dim();
        let mut acc = self.lower_eig.clone();
        match gamma {
            Gamma::Finite(g) => {
                for i in 0..dim {
                    for j in 0..dim {
                        let delta = self.eigenvalues[i] - self.eigenvalues[j];
                        let factor = (g * t * ((C64::i() * (delta / g)).exp() - 1.0)).exp();
                        acc[(i, j)] *= factor;
                    }
                }
            }
            Gamma::Infinite => return self.heisenberg_lower_unitary(t),
        }
        self.from_eigen(&acc)
    }

    /// Plain Heisenberg evolution `e^{iHt} b e^{-iHt}`.
    pub fn heisenberg_lower_unitary(&self, t: f64) -> CMat {
        let dim = self.dim();
        let mut acc = self.lower_eig.clone();
        for i in 0..dim {
            for j in 0..dim {
                let delta = self.eigenvalues[i] - self.eigenvalues[j];
                acc[(i, j)] *= (C64::i() * (delta * t)).exp();
            }
        }
        self.from_eigen(&acc)
    }

    /// Dephasing evolution of a pure initial vector; the k-sum analogue of
    /// `heisenberg_lower` acting on the density matrix.
    pub fn evolve_density(&self, psi0: &CVec, gamma: Gamma, t: f64, step_cap: u64) -> Result<CMat> {
        let dim = self.dim();
        if psi0.len() != dim {
            return Err(Error::DimensionMismatch {
                left: psi0.len(),
                right: dim,
            });
        }
        let psi_eig = self.eigenvectors.adjoint() * psi0;
        let rho0 = &psi_eig * psi_eig.adjoint();
        let g = match gamma {
            Gamma::Finite(g) => g,
            Gamma::Infinite => {
                return Ok(self.from_eigen(&self.phase_conjugated(&rho0, t)));
            }
        };
        let window = poisson::window(g * t, step_cap)?;
        let step: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| (-C64::i() * (l / g)).exp())
            .collect();
        let mut phase: Vec<C64> = self
            .eigenvalues
            .iter()
            .map(|&l| (-C64::i() * (l / g * window.first_index() as f64)).exp())
            .collect();
        let mut acc = CMat::zeros(dim, dim);
        for (idx, &w) in window.weights().iter().enumerate() {
            if idx > 0 {
                for (p, s) in phase.iter_mut().zip(&step) {
                    *p *= s;
                }
            }
            for i in 0..dim {
                let pi = phase[i] * w;
                for j in 0..dim {
                    acc[(i, j)] += pi * phase[j].conj() * rho0[(i, j)];
                }
            }
        }
        Ok(self.from_eigen(&acc))
    }

    /// Closed-form dephasing evolution of a pure initial vector, per element.
    pub fn evolve_density_resummed(&self, psi0: &CVec, gamma: Gamma, t: f64) -> Result<CMat> {
        let dim = self.dim();
        if psi0.len() != dim {
            return Err(Error::DimensionMismatch {
                left: psi0.len(),
                right: dim,
            });
        }
        let psi_eig = self.eigenvectors.adjoint() * psi0;
        let mut rho = &psi_eig * psi_eig.adjoint();
        match gamma {
            Gamma::Finite(g) => {
                for i in 0..dim {
                    for j in 0..dim {
                        let delta = self.eigenvalues[i] - self.eigenvalues[j];
                        let factor = (g * t * ((-C64::i() * (delta / g)).exp() - 1.0)).exp();
                        rho[(i, j)] *= factor;
                    }
                }
            }
            Gamma::Infinite => rho = self.phase_conjugated(&rho, t),
        }
        Ok(self.from_eigen(&rho))
    }

    /// Precompute everything needed to evaluate `<N>(t)` and `<X>(t)` for a
    /// fixed initial vector and rate across many times: expectations reduce
    /// to elementwise sums in the eigenbasis, so each time costs one complex
    /// exponential per matrix element instead of a fresh evolution.
    pub fn observable_evolver(&self, psi0: &CVec, gamma: Gamma) -> Result<ObservableEvolver> {
        let dim = self.dim();
        if psi0.len() != dim {
            return Err(Error::DimensionMismatch {
                left: psi0.len(),
                right: dim,
            });
        }
        let psi_eig = self.eigenvectors.adjoint() * psi0;
        let (number_eig, position_eig) = self.rotated_observables();

        let mut m_number = Vec::with_capacity(dim * dim);
        let mut m_position = Vec::with_capacity(dim * dim);
        let mut exponents = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                let rho0 = psi_eig[i] * psi_eig[j].conj();
                m_number.push(number_eig[(j, i)] * rho0);
                m_position.push(position_eig[(j, i)] * rho0);
                let delta = self.eigenvalues[i] - self.eigenvalues[j];
                exponents.push(match gamma {
                    Gamma::Finite(g) => g * ((-C64::i() * (delta / g)).exp() - 1.0),
                    Gamma::Infinite => -C64::i() * delta,
                });
            }
        }
        Ok(ObservableEvolver {
            m_number,
            m_position,
            exponents,
        })
    }

    fn phase_conjugated(&self, rho_eig: &CMat, t: f64) -> CMat {
        let dim = self.dim();
        let mut rho = rho_eig.clone();
        for i in 0..dim {
            for j in 0..dim {
                let delta = self.eigenvalues[i] - self.eigenvalues[j];
                rho[(i, j)] *= (-C64::i() * (delta * t)).exp();
            }
        }
        rho
    }
}

/// Flattened eigenbasis sums for repeated `(N, X)` evaluation; see
/// [`SectorOracle::observable_evolver`].
pub struct ObservableEvolver {
    m_number: Vec<C64>,
    m_position: Vec<C64>,
    exponents: Vec<C64>,
}

impl ObservableEvolver {
    /// `(<N>(t), <X>(t))` under the dephasing evolution.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        let mut n = C64::new(0.0, 0.0);
        let mut x = C64::new(0.0, 0.0);
        for ((mn, mx), s) in self
            .m_number
            .iter()
            .zip(&self.m_position)
            .zip(&self.exponents)
        {
            let factor = (s * t).exp();
            n += mn * factor;
            x += mx * factor;
        }
        (n.re, x.re)
    }
}

/// Weighted family of sector density matrices. For single-sector initial
/// states the family has one member of weight one; a coherent photon
/// distribution carries one member per retained sector.
#[derive(Clone, Debug)]
pub struct MilburnState {
    pub components: Vec<SectorComponent>,
}

#[derive(Clone, Debug)]
pub struct SectorComponent {
    pub photons: u32,
    pub weight: f64,
    pub rho: CMat,
}

impl MilburnState {
    pub fn trace(&self) -> C64 {
        self.components
            .iter()
            .map(|c| c.rho.trace() * c.weight)
            .sum()
    }

    /// Weighted expectation of a phonon-space operator.
    pub fn expectation(&self, op: &CMat) -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        for c in &self.components {
            if c.rho.nrows() != op.nrows() {
                return Err(Error::DimensionMismatch {
                    left: c.rho.nrows(),
                    right: op.nrows(),
                });
            }
            acc += c.weight * (op * &c.rho).trace();
        }
        Ok(acc)
    }

    /// Purity `tr rho^2` of the weighted family, treating sectors as
    /// orthogonal blocks.
    pub fn purity(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let sq = &c.rho * &c.rho;
                c.weight * c.weight * sq.trace().re
            })
            .sum()
    }

    /// Largest hermiticity defect across components.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.components {
            for i in 0..c.rho.nrows() {
                for j in 0..c.rho.ncols() {
                    worst = worst.max((c.rho[(i, j)] - c.rho[(j, i)].conj()).norm());
                }
            }
        }
        worst
    }
}

fn initial_components(state: &InitialState, dim: usize) -> Result<Vec<(u32, f64, CVec)>> {
    match *state {
        InitialState::NumberNumber { photons, phonons } => {
            Ok(vec![(photons, 1.0, number_vector(phonons, dim)?)])
        }
        InitialState::NumberCoherent { photons, beta } => {
            Ok(vec![(photons, 1.0, coherent_vector(beta, dim)?)])
        }
        InitialState::CoherentCoherent { alpha, beta } => {
            let window = poisson::window(alpha * alpha, crate::observables::FIELD_SECTOR_CAP)?;
            let mirror = coherent_vector(beta, dim)?;
            Ok(window
                .iter()
                .map(|(n, w)| (n as u32, w, mirror.clone()))
                .collect())
        }
    }
}

/// Dephasing evolution of an initial product state, step-summed per sector.
/// The phonon cutoff is raised (up to three doublings) when a coherent
/// mirror amplitude does not fit.
pub fn evolve_milburn(
    params: &SystemParams,
    state: &InitialState,
    t: f64,
    phonon_cutoff: usize,
    step_cap: u64,
) -> Result<MilburnState> {
    evolve_impl(params, state, t, phonon_cutoff, step_cap, false)
}

/// Same evolution with the Poisson series resummed per matrix element;
/// exactly the same object, usable at arbitrarily large `gamma t`.
pub fn evolve_milburn_resummed(
    params: &SystemParams,
    state: &InitialState,
    t: f64,
    phonon_cutoff: usize,
) -> Result<MilburnState> {
    evolve_impl(params, state, t, phonon_cutoff, 0, true)
}

fn evolve_impl(
    params: &SystemParams,
    state: &InitialState,
    t: f64,
    phonon_cutoff: usize,
    step_cap: u64,
    resummed: bool,
) -> Result<MilburnState> {
    let mut cutoff = phonon_cutoff;
    let components = loop {
        match initial_components(state, cutoff + 1) {
            Ok(c) => break c,
            Err(Error::Truncation { .. }) if cutoff < 8 * phonon_cutoff.max(1) => {
                cutoff = (2 * cutoff).max(8);
            }
            Err(e) => return Err(e),
        }
    };
    let mut out = Vec::with_capacity(components.len());
    for (photons, weight, psi0) in components {
        let oracle = SectorOracle::new(params, photons, cutoff);
        let rho = if resummed {
            oracle.evolve_density_resummed(&psi0, params.gamma, t)?
        } else {
            oracle.evolve_density(&psi0, params.gamma, t, step_cap)?
        };
        out.push(SectorComponent {
            photons,
            weight,
            rho,
        });
    }
    Ok(MilburnState { components: out })
}

/// Project a dense operator onto `a b† + b b + c 1` over the interior block
/// (edge rows/columns are truncation-polluted); returns `(a, b, c, residual)`
/// with the residual Frobenius-relative.
pub fn project_operator(m: &CMat, margin: usize) -> (C64, C64, C64, f64) {
    let dim = m.nrows();
    let keep = dim.saturating_sub(margin);
    let raise = lower_op(dim).adjoint();
    let lower = lower_op(dim);

    let inner = |x: &CMat, y: &CMat| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..keep {
            for j in 0..keep {
                acc += x[(i, j)].conj() * y[(i, j)];
            }
        }
        acc
    };
    // The three basis operators have disjoint support, so the projections
    // decouple.
    let a = inner(&raise, m) / inner(&raise, &raise);
    let b = inner(&lower, m) / inner(&lower, &lower);
    let id = CMat::identity(dim, dim);
    let c = inner(&id, m) / inner(&id, &id);

    let recon = &raise * a + &lower * b + &id * c;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..keep {
        for j in 0..keep {
            num += (m[(i, j)] - recon[(i, j)]).norm_sqr();
            den += m[(i, j)].norm_sqr();
        }
    }
    (a, b, c, (num / den.max(1e-300)).sqrt())
}

/// Direct double quadrature of the filtered two-time correlation on a
/// trapezoidal `(t1, t2)` grid, one value per detection frequency. The
/// correlation is the product of dephasing-averaged Heisenberg operators
/// sandwiched in the initial state.
pub fn spectrum_numeric(
    params: &SystemParams,
    state: &InitialState,
    sp: &SpectrumParams,
    grid_steps: usize,
    phonon_cutoff: usize,
    step_cap: u64,
) -> Result<Vec<f64>> {
    if grid_steps < 100 {
        return Err(Error::InvalidParameter {
            name: "grid_steps",
            reason: format!("need at least 100 quadrature steps, got {grid_steps}"),
        });
    }
    sp.validate()?;
    let t = sp.t;
    let dim = phonon_cutoff + 1;
    let components = initial_components(state, dim)?;
    let h = t / grid_steps as f64;

    let mut out = vec![0.0; sp.omega_grid.len()];
    for (photons, weight, psi0) in components {
        let oracle = SectorOracle::new(params, photons, phonon_cutoff);
        // Filtered vectors u_j = B(t_j) |psi0>, then the double integral
        // factorizes as |sum_j w_j e^{(Gamma + i w)(t_j - t)} u_j|^2 with the
        // decaying prefactor absorbed for stability.
        let mut vectors = Vec::with_capacity(grid_steps + 1);
        for j in 0..=grid_steps {
            let tj = h * j as f64;
            let b = oracle.heisenberg_lower(params.gamma, tj, step_cap)?;
            vectors.push(b * &psi0);
        }
        for (wi, &omega) in sp.omega_grid.iter().enumerate() {
            let mut g = CVec::zeros(dim);
            for (j, u) in vectors.iter().enumerate() {
                let tj = h * j as f64;
                let quad_w = if j == 0 || j == grid_steps {
                    0.5 * h
                } else {
                    h
                };
                let phase = (C64::new(sp.filter_linewidth, omega) * tj
                    - C64::new(sp.filter_linewidth * t, 0.0))
                .exp();
                g += u * (phase * quad_w);
            }
            out[wi] += weight * 2.0 * sp.filter_linewidth * g.norm_squared();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Gamma;

    fn params(omega_m: f64, g_l: f64, g_q: f64, gamma: Gamma) -> SystemParams {
        SystemParams::new(1.0, omega_m, g_l, g_q, gamma).unwrap()
    }

    #[test]
    fn vacuum_sector_is_diagonal() {
        let p = params(1.3, 0.8, 0.5, Gamma::Finite(1.0));
        let block = build_block(&p, 0, 12);
        for i in 0..block.dim() {
            for j in 0..block.dim() {
                if i != j {
                    assert_eq!(block.matrix[(i, j)], C64::new(0.0, 0.0));
                }
            }
            assert!((block.matrix[(i, i)].re - 1.3 * i as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn uncoupled_block_is_diagonal_free_hamiltonian() {
        let p = params(0.7, 0.0, 0.0, Gamma::Finite(1.0));
        let block = build_block(&p, 3, 10);
        for i in 0..block.dim() {
            let expected = 1.0 * 3.0 + 0.7 * i as f64;
            assert!((block.matrix[(i, i)].re - expected).abs() < 1e-14);
        }
        assert!(block.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn ground_level_matches_dressed_energy() {
        // The dense spectrum sits a sector-constant zero-point offset above
        // the dressed-ladder energies.
        let p = params(1.0, 1.0, 1.0, Gamma::Finite(1.0));
        let oracle = SectorOracle::new(&p, 1, 80);
        let lowest = oracle.sorted_eigenvalues()[0];
        let offset = p.zero_point_offset(1).unwrap();
        assert!(
            (lowest - (0.8 + offset)).abs() < 1e-8,
            "lowest = {lowest}, expected {}",
            0.8 + offset
        );

        // cutoff-doubling delta must be well inside the tolerance
        let doubled = SectorOracle::new(&p, 1, 160).sorted_eigenvalues()[0];
        assert!((lowest - doubled).abs() < 1e-9);

        // the ladder spacing is the dressed frequency
        let eig = oracle.sorted_eigenvalues();
        let w = p.dressed_frequency(1).unwrap();
        for big_n in 0..6 {
            assert!((eig[big_n + 1] - eig[big_n] - w).abs() < 1e-8);
        }
    }

    #[test]
    fn heisenberg_at_t0_is_bare_lowering() {
        let p = params(1.0, 0.6, 0.4, Gamma::Finite(2.0));
        let oracle = SectorOracle::new(&p, 1, 24);
        let b = oracle.heisenberg_lower(p.gamma, 0.0, 1_000).unwrap();
        assert!((b - lower_op(25)).norm() < 1e-12);
    }

    #[test]
    fn step_sum_matches_elementwise_resummation() {
        let p = params(1.0, 0.8, 0.7, Gamma::Finite(1.5));
        let oracle = SectorOracle::new(&p, 1, 20);
        for t in [0.4, 2.0, 7.5] {
            let summed = oracle.heisenberg_lower(p.gamma, t, 100_000).unwrap();
            let closed = oracle.heisenberg_lower_resummed(p.gamma, t);
            assert!(
                (&summed - &closed).norm() < 1e-12 * closed.norm().max(1.0),
                "t = {t}"
            );
        }
    }

    #[test]
    fn density_step_sum_matches_resummation_and_preserves_trace() {
        let p = params(1.0, 1.0, 1.0, Gamma::Finite(0.8));
        let oracle = SectorOracle::new(&p, 1, 24);
        let psi0 = number_vector(0, 25).unwrap();
        for t in [0.0, 1.0, 6.0] {
            let a = oracle.evolve_density(&psi0, p.gamma, t, 100_000).unwrap();
            let b = oracle.evolve_density_resummed(&psi0, p.gamma, t).unwrap();
            assert!((&a - &b).norm() < 1e-12);
            assert!((a.trace().re - 1.0).abs() < 1e-10);
            assert!(a.trace().im.abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_at_t0_returns_initial_state() {
        let p = params(1.0, 1.0, 1.0, Gamma::Finite(1.0));
        let state = InitialState::NumberNumber {
            photons: 1,
            phonons: 0,
        };
        let ms = evolve_milburn(&p, &state, 0.0, 16, 1000).unwrap();
        assert_eq!(ms.components.len(), 1);
        assert!((ms.components[0].rho[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((ms.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dephasing_never_raises_purity() {
        let p = params(1.0, 1.0, 0.6, Gamma::Finite(1.2));
        let state = InitialState::NumberCoherent {
            photons: 1,
            beta: C64::new(1.0, 0.3),
        };
        let mut last = f64::INFINITY;
        for i in 0..=12 {
            let t = 1.2 * f64::from(i);
            let ms = evolve_milburn(&p, &state, t, 40, 100_000).unwrap();
            let purity = ms.purity();
            assert!(purity <= last + 1e-10, "t = {t}: {purity} > {last}");
            assert!(ms.hermiticity_defect() < 1e-10);
            last = purity;
        }
    }

    #[test]
    fn near_unitary_rate_matches_unitary_evolution() {
        // Trace-norm agreement at gamma = 1e6 on a small block.
        let p = params(1.0, 1.0, 1.0, Gamma::Finite(1e6));
        let oracle = SectorOracle::new(&p, 1, 16);
        let psi0 = number_vector(0, 17).unwrap();
        let t = 0.4;
        let dephased = oracle
            .evolve_density(&psi0, p.gamma, t, 10_000_000)
            .unwrap();
        let unitary = oracle
            .evolve_density_resummed(&psi0, Gamma::Infinite, t)
            .unwrap();
        let diff = &dephased - &unitary;
        let trace_norm: f64 = diff
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|e| e.abs())
            .sum();
        assert!(trace_norm < 1e-5, "trace norm {trace_norm}");
    }

    #[test]
    fn evolver_matches_full_density_evolution() {
        let p = params(1.0, 0.9, 0.8, Gamma::Finite(1.3));
        let oracle = SectorOracle::new(&p, 1, 30);
        let psi0 = coherent_vector(C64::new(1.1, -0.2), 31).unwrap();
        let evolver = oracle.observable_evolver(&psi0, p.gamma).unwrap();
        let n_op = number_op(31);
        let x_op = position_op(31);
        for t in [0.0, 0.9, 4.4] {
            let rho = oracle.evolve_density_resummed(&psi0, p.gamma, t).unwrap();
            let n_ref = (&n_op * &rho).trace().re;
            let x_ref = (&x_op * &rho).trace().re;
            let (n, x) = evolver.evaluate(t);
            assert!((n - n_ref).abs() < 1e-10);
            assert!((x - x_ref).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_helpers() {
        let dim = 12;
        let psi = number_vector(3, dim).unwrap();
        let id = CMat::identity(dim, dim);
        assert!((expectation_vec(&psi, &id).unwrap().re - 1.0).abs() < 1e-14);
        let n = number_op(dim);
        assert!((expectation_vec(&psi, &n).unwrap().re - 3.0).abs() < 1e-14);
        assert!(expectation_vec(&psi, &CMat::identity(5, 5)).is_err());
    }

    #[test]
    fn coherent_vector_residue_guard() {
        assert!(coherent_vector(C64::new(2.0, 0.0), 41).is_ok());
        let err = coherent_vector(C64::new(6.0, 0.0), 10).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
    }

    #[test]
    fn projection_recovers_planted_coefficients() {
        let dim = 30;
        let a = C64::new(0.3, -1.1);
        let b = C64::new(-0.2, 0.45);
        let c = C64::new(2.0, 0.7);
        let m = lower_op(dim).adjoint() * a + lower_op(dim) * b + CMat::identity(dim, dim) * c;
        let (pa, pb, pc, resid) = project_operator(&m, 6);
        assert!((pa - a).norm() < 1e-12);
        assert!((pb - b).norm() < 1e-12);
        assert!((pc - c).norm() < 1e-12);
        assert!(resid < 1e-12);
    }
}
