//! Finitely supported Fourier series on the circle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::zq::unit_root;

/// A trigonometric polynomial `Σ c_n e^{2πinx}` stored as a frequency map.
///
/// `q` and `order` record the lacunary base and truncation depth the spectrum
/// was built with; they are metadata only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSpectrum {
    pub q: usize,
    pub order: usize,
    coeffs: BTreeMap<i64, Complex64>,
}

impl SparseSpectrum {
    pub fn new(q: usize, order: usize, coeffs: BTreeMap<i64, Complex64>) -> Self {
        Self { q, order, coeffs }
    }

    /// The constant function 1.
    pub fn unit(q: usize) -> Self {
        Self::new(q, 0, BTreeMap::from([(0, Complex64::new(1.0, 0.0))]))
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, Complex64> {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = i64> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn max_abs_frequency(&self) -> u64 {
        self.coeffs.keys().map(|n| n.unsigned_abs()).max().unwrap_or(0)
    }

    /// Total mass `ĉ(0)` of the density.
    pub fn mass(&self) -> f64 {
        self.coeff(0).re
    }

    /// `c_{-n} = conj(c_n)` for every stored frequency, up to `tol`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        self.coeffs
            .iter()
            .all(|(&n, &c)| (self.coeff(-n) - c.conj()).norm() <= tol)
    }

    /// First frequency that does not satisfy `pred`.
    pub fn find_frequency(&self, mut pred: impl FnMut(i64) -> bool) -> Option<i64> {
        self.frequencies().find(|&n| !pred(n))
    }

    /// Value at an arbitrary point of the circle.
    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| {
                let t = 2.0 * PI * n as f64 * x;
                c * Complex64::new(t.cos(), t.sin())
            })
            .sum()
    }

    /// Value at the rational point `j / denom`, with phases reduced in integer
    /// arithmetic so large frequencies keep full accuracy.
    pub fn eval_ratio(&self, j: u64, denom: u64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| c * unit_root(phase_index(n, j, denom), denom as usize))
            .sum()
    }

    /// `μ([x - r, x + r])` for the density, with `x = j / denom`.
    pub fn centered_mass(&self, j: u64, denom: u64, r: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| {
                if n == 0 {
                    c.re * 2.0 * r
                } else {
                    let w = c * unit_root(phase_index(n, j, denom), denom as usize);
                    w.re * (2.0 * PI * n as f64 * r).sin() / (PI * n as f64)
                }
            })
            .sum()
    }

    /// `μ([lo, hi])` from the antiderivative of each exponential.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| {
                if n == 0 {
                    c.re * (hi - lo)
                } else {
                    let w = 2.0 * PI * n as f64;
                    let diff = Complex64::new((w * hi).cos() - (w * lo).cos(), (w * hi).sin() - (w * lo).sin());
                    (c * diff / Complex64::new(0.0, w)).re
                }
            })
            .sum()
    }
}

/// `(n · j) mod denom` in `0..denom` without overflow.
pub(crate) fn phase_index(n: i64, j: u64, denom: u64) -> usize {
    let prod = (n as i128) * (j as i128);
    prod.rem_euclid(denom as i128) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(k: i64, amp: f64) -> SparseSpectrum {
        let half = Complex64::new(amp / 2.0, 0.0);
        SparseSpectrum::new(
            3,
            1,
            BTreeMap::from([(0, Complex64::new(1.0, 0.0)), (k, half), (-k, half)]),
        )
    }

    #[test]
    fn eval_paths_agree() {
        let s = cosine(7, 0.8);
        for j in 0..50u64 {
            let x = j as f64 / 50.0;
            let direct = 1.0 + 0.8 * (2.0 * PI * 7.0 * x).cos();
            assert!((s.eval(x).re - direct).abs() < 1e-12);
            assert!((s.eval_ratio(j, 50).re - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn masses() {
        let s = cosine(2, 1.0);
        assert!((s.interval_mass(0.0, 1.0) - 1.0).abs() < 1e-14);
        // ∫_0^{1/4} (1 + cos 4πx) dx = 1/4 + sin(π)/(4π)
        assert!((s.interval_mass(0.0, 0.25) - 0.25).abs() < 1e-14);
        // centered at 0 with r = 1/8: 1/4 + 2·sin(π/2)/(4π)
        let expect = 0.25 + 1.0 / (2.0 * PI);
        assert!((s.centered_mass(0, 8, 0.125) - expect).abs() < 1e-14);
        assert!((s.interval_mass(-0.125, 0.125) - expect).abs() < 1e-14);
    }

    #[test]
    fn symmetry_detection() {
        assert!(cosine(3, 0.5).is_conjugate_symmetric(1e-15));
        let mut c = cosine(3, 0.5).coeffs.clone();
        c.insert(5, Complex64::new(0.1, 0.0));
        assert!(!SparseSpectrum::new(3, 1, c).is_conjugate_symmetric(1e-12));
    }

    #[test]
    fn phase_index_wraps_negative() {
        assert_eq!(phase_index(-1, 1, 9), 8);
        assert_eq!(phase_index(i64::MAX, 3, 7), ((i64::MAX as i128 * 3) % 7) as usize);
    }
}
