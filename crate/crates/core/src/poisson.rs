//! Truncated Poisson weight windows.
//!
//! Every truncated series in this crate (dephasing-step sums, coherent-field
//! sector averages) weights term `k` by a Poisson distribution of some mean
//! `lambda`. The window `[lambda - 10 sqrt(lambda+1) - 20, lambda + 10
//! sqrt(lambda+1) + 20]` carries all but a sub-1e-15 fraction of the mass,
//! which a sub-Gaussian tail bound guarantees with a wide margin.

use crate::error::{Error, Result};

/// Upper truncation index for mean `lambda`.
pub fn upper_cutoff(lambda: f64) -> u64 {
    (lambda + 10.0 * (lambda + 1.0).sqrt() + 20.0).ceil() as u64
}

fn lower_cutoff(lambda: f64) -> u64 {
    (lambda - 10.0 * (lambda + 1.0).sqrt() - 20.0)
        .floor()
        .max(0.0) as u64
}

/// Normalized Poisson weights over the retained index window.
#[derive(Clone, Debug)]
pub struct PoissonWindow {
    k_lo: u64,
    weights: Vec<f64>,
}

impl PoissonWindow {
    pub fn first_index(&self) -> u64 {
        self.k_lo
    }

    pub fn last_index(&self) -> u64 {
        self.k_lo + self.weights.len() as u64 - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(k, w_k)` pairs in ascending `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (self.k_lo + i as u64, w))
    }

    /// Shrink the upper end so the discarded upper-tail mass stays below
    /// `tol`; returns the number of retained weights.
    pub fn truncate_upper(&self, tol: f64) -> usize {
        let mut tail = 0.0;
        let mut keep = self.weights.len();
        for (i, w) in self.weights.iter().enumerate().rev() {
            if tail + w >= tol {
                break;
            }
            tail += w;
            keep = i;
        }
        keep.max(1)
    }
}

/// Build the weight window for mean `lambda`, erroring when the upper cutoff
/// would exceed `cap`.
pub fn window(lambda: f64, cap: u64) -> Result<PoissonWindow> {
    debug_assert!(lambda >= 0.0 && lambda.is_finite());
    if lambda == 0.0 {
        return Ok(PoissonWindow {
            k_lo: 0,
            weights: vec![1.0],
        });
    }
    let k_lo = lower_cutoff(lambda);
    let k_hi = upper_cutoff(lambda);
    if k_hi > cap {
        return Err(Error::NonConvergence { needed: k_hi, cap });
    }
    let len = (k_hi - k_lo + 1) as usize;
    let mode = (lambda.floor() as u64).clamp(k_lo, k_hi);
    let m = (mode - k_lo) as usize;

    // Unnormalized weights by recurrence outward from the mode; every ratio
    // step away from the mode is < 1, so nothing overflows.
    let mut w = vec![0.0; len];
    w[m] = 1.0;
    for i in (0..m).rev() {
        let k = k_lo + i as u64 + 1; // w_{k-1} = w_k * k / lambda
        w[i] = w[i + 1] * (k as f64) / lambda;
    }
    for i in m + 1..len {
        let k = k_lo + i as u64; // w_k = w_{k-1} * lambda / k
        w[i] = w[i - 1] * lambda / (k as f64);
    }
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    Ok(PoissonWindow { k_lo, weights: w })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_weight(lambda: f64, k: u64) -> f64 {
        // log-space to survive large lambda
        let lk = k as f64;
        let mut log_fact = 0.0;
        for j in 1..=k {
            log_fact += (j as f64).ln();
        }
        (-lambda + lk * lambda.ln() - log_fact).exp()
    }

    #[test]
    fn zero_mean_is_a_point_mass() {
        let w = window(0.0, 100).unwrap();
        assert_eq!(w.first_index(), 0);
        assert_eq!(w.weights(), &[1.0]);
    }

    #[test]
    fn matches_direct_evaluation_at_moderate_mean() {
        let lambda = 7.3;
        let w = window(lambda, 10_000).unwrap();
        for (k, wk) in w.iter() {
            let exact = direct_weight(lambda, k);
            assert!((wk - exact).abs() < 1e-13, "k={k}: {wk} vs {exact}");
        }
        let total: f64 = w.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn window_rule_captures_the_mass_at_large_mean() {
        // lambda = 100: the retained window must hold all but < 1e-15.
        let w = window(100.0, 10_000).unwrap();
        assert!(w.last_index() <= 100 + 10 * 11 + 20);
        let kept: f64 = w.weights().iter().sum();
        assert!((kept - 1.0).abs() < 1e-14);
        // Mean and variance of the window reproduce Poisson statistics.
        let mean: f64 = w.iter().map(|(k, wk)| k as f64 * wk).sum();
        assert!((mean - 100.0).abs() < 1e-9);
    }

    #[test]
    fn cap_breach_is_reported() {
        let err = window(1e6, 1000).unwrap_err();
        match err {
            crate::error::Error::NonConvergence { needed, cap } => {
                assert!(needed > cap);
                assert_eq!(cap, 1000);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn upper_truncation_respects_tolerance() {
        let w = window(5.0, 1000).unwrap();
        let keep = w.truncate_upper(1e-6);
        let dropped: f64 = w.weights()[keep..].iter().sum();
        assert!(dropped < 1e-6);
        // and keeping one fewer would breach
        let dropped_more: f64 = w.weights()[keep - 1..].iter().sum();
        assert!(dropped_more >= 1e-6 || keep == 1);
    }
}
