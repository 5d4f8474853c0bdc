//! Fourier analysis on the cyclic group `Z_q` and the arithmetic of the
//! restricted spectrum `C_B = {k q^v : k mod q in B, v >= 0} ∪ {0}`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectrum::SparseSpectrum;

/// A modulus `q` together with a set `B` of nonzero residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueSet {
    q: usize,
    members: BTreeSet<usize>,
}

impl ResidueSet {
    pub fn new(q: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        if q < 3 {
            return invalid(format!("modulus must be at least 3, got {q}"));
        }
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&m) = members.iter().find(|&&m| m == 0 || m >= q) {
            return invalid(format!("residue {m} outside 1..={}", q - 1));
        }
        Ok(Self { q, members })
    }

    /// `B = {1, …, q-1}`.
    pub fn full(q: usize) -> Result<Self> {
        Self::new(q, 1..q)
    }

    pub fn empty(q: usize) -> Result<Self> {
        Self::new(q, [])
    }

    /// Parses a comma separated residue list such as `"1,3"`; the empty string is `B = ∅`.
    pub fn parse(q: usize, list: &str) -> Result<Self> {
        let mut members = Vec::new();
        for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok.parse::<usize>() {
                Ok(m) => members.push(m),
                Err(_) => return invalid(format!("cannot parse residue {tok:?}")),
            }
        }
        Self::new(q, members)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, m: usize) -> bool {
        self.members.contains(&m)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.members.len() == self.q - 1
    }

    /// True iff `q - m ∈ B` for every `m ∈ B`.
    pub fn is_symmetric(&self) -> bool {
        self.members.iter().all(|&m| self.members.contains(&(self.q - m)))
    }

    pub fn is_subset(&self, other: &ResidueSet) -> bool {
        self.q == other.q && self.members.is_subset(&other.members)
    }

    /// Comma separated listing, e.g. `"1,3"`.
    pub fn label(&self) -> String {
        self.members.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Every symmetric subset of `{1, …, q-1}`, ordered by bitmask of the
    /// conjugate pairs.
    pub fn all_symmetric(q: usize) -> Result<Vec<Self>> {
        let classes: Vec<Vec<usize>> = (1..=q / 2)
            .map(|m| if 2 * m == q { vec![m] } else { vec![m, q - m] })
            .collect();
        let mut out = Vec::with_capacity(1 << classes.len());
        for mask in 0u64..(1u64 << classes.len()) {
            let members = classes
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .flat_map(|(_, c)| c.iter().copied());
            out.push(Self::new(q, members)?);
        }
        Ok(out)
    }
}

/// `ω_m = (e^{2πi m j / q})_{j=0..q-1}`, a row of the inverse Fourier matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicVector {
    pub m: usize,
    pub entries: Vec<Complex64>,
}

impl HarmonicVector {
    pub fn new(q: usize, m: usize) -> Self {
        let entries = (0..q).map(|j| unit_root(m * j, q)).collect();
        Self { m, entries }
    }
}

/// `e^{2πi r / n}` with `r` reduced modulo `n` first.
pub(crate) fn unit_root(r: usize, n: usize) -> Complex64 {
    let angle = 2.0 * PI * ((r % n) as f64) / n as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Unnormalized forward transform `v̂(m) = Σ_j e^{-2πi m j / q} v_j`.
pub fn dft_zq(v: &[Complex64], q: usize) -> Result<Vec<Complex64>> {
    if v.len() != q {
        return invalid(format!("vector of length {} for modulus {q}", v.len()));
    }
    Ok((0..q)
        .map(|m| {
            v.iter()
                .enumerate()
                .map(|(j, &x)| x * unit_root(m * j, q).conj())
                .sum()
        })
        .collect())
}

/// Inverse of [`dft_zq`]: `v_j = (1/q) Σ_m e^{2πi m j / q} v̂(m)`.
pub fn idft_zq(vhat: &[Complex64], q: usize) -> Result<Vec<Complex64>> {
    if vhat.len() != q {
        return invalid(format!("vector of length {} for modulus {q}", vhat.len()));
    }
    let scale = 1.0 / q as f64;
    Ok((0..q)
        .map(|j| {
            vhat.iter()
                .enumerate()
                .map(|(m, &x)| x * unit_root(m * j, q))
                .sum::<Complex64>()
                * scale
        })
        .collect())
}

/// Real-input convenience wrapper for [`dft_zq`].
pub fn dft_zq_real(v: &[f64], q: usize) -> Result<Vec<Complex64>> {
    let v: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dft_zq(&v, q)
}

/// `B ∪ (q - B)`.
pub fn symmetrize(b: &ResidueSet) -> ResidueSet {
    let q = b.q;
    ResidueSet {
        q,
        members: b.members.iter().flat_map(|&m| [m, q - m]).collect(),
    }
}

/// Orthonormal real basis of `W_B`, stored column by column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceBasis {
    q: usize,
    columns: Vec<Vec<f64>>,
}

impl SubspaceBasis {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// `M t` where `M` is the `q × d` matrix of columns.
    pub fn combine(&self, coords: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.q];
        for (c, col) in coords.iter().zip(&self.columns) {
            for (vj, cj) in v.iter_mut().zip(col) {
                *vj += c * cj;
            }
        }
        v
    }

    /// Coordinates `Mᵀ v` of the orthogonal projection onto `W_B`.
    pub fn coordinates(&self, v: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|col| dot(col, v)).collect()
    }

    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.combine(&self.coordinates(v))
    }

    /// Euclidean norm of the component of `v` orthogonal to `W_B`.
    pub fn complement_residual(&self, v: &[f64]) -> f64 {
        let p = self.project(v);
        v.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Analytic orthonormal basis of `W_B = span_R{ω_m : m ∈ B}`.
///
/// Each conjugate pair `{m, q-m}` with `2m ≠ q` contributes normalized cosine
/// and sine vectors; `m = q/2` contributes the alternating vector.
pub fn wb_basis(b: &ResidueSet) -> Result<SubspaceBasis> {
    if !b.is_symmetric() {
        return invalid(format!(
            "residue set {{{}}} mod {} is not symmetric; symmetrize it first",
            b.label(),
            b.q
        ));
    }
    let q = b.q;
    let half_norm = (q as f64 / 2.0).sqrt();
    let mut columns = Vec::new();
    for &m in b.members.iter().filter(|&&m| 2 * m <= q) {
        if 2 * m == q {
            let s = 1.0 / (q as f64).sqrt();
            columns.push((0..q).map(|j| if j % 2 == 0 { s } else { -s }).collect());
        } else {
            let (cos, sin): (Vec<f64>, Vec<f64>) = (0..q)
                .map(|j| {
                    let w = unit_root(m * j, q);
                    (w.re / half_norm, w.im / half_norm)
                })
                .unzip();
            columns.push(cos);
            columns.push(sin);
        }
    }
    Ok(SubspaceBasis { q, columns })
}

/// `(v, k)` with `n = k q^v` and `q ∤ k`.
pub fn q_valuation(n: i64, q: usize) -> Result<(u32, i64)> {
    if n == 0 {
        return invalid("valuation of 0 is undefined");
    }
    if q < 2 {
        return invalid(format!("modulus must be at least 2, got {q}"));
    }
    let q = q as i64;
    let (mut v, mut k) = (0, n);
    while k % q == 0 {
        k /= q;
        v += 1;
    }
    Ok((v, k))
}

/// Membership in `C_B`. Negative `n` is tested literally: its cofactor `k`
/// is reduced into `{0, …, q-1}` before the lookup.
pub fn in_cb(n: i64, b: &ResidueSet) -> bool {
    if n == 0 {
        return true;
    }
    let (_, k) = q_valuation(n, b.q).expect("q >= 3 and n != 0");
    b.contains(k.rem_euclid(b.q as i64) as usize)
}

/// The subgroup `{0, d, 2d, …}` of `Z_q` for a divisor `d` of `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subgroup {
    pub q: usize,
    /// Generator; a divisor of `q`.
    pub step: usize,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.q / self.step
    }

    pub fn elements(&self) -> Vec<usize> {
        (0..self.q).step_by(self.step).collect()
    }

    pub fn contains(&self, r: usize) -> bool {
        r.is_multiple_of(self.step)
    }
}

/// All subgroups of `Z_q`, sorted by order.
pub fn subgroups(q: usize) -> Result<Vec<Subgroup>> {
    if q < 2 {
        return invalid(format!("modulus must be at least 2, got {q}"));
    }
    let mut out: Vec<Subgroup> = (1..=q)
        .rev()
        .filter(|d| q.is_multiple_of(*d))
        .map(|step| Subgroup { q, step })
        .collect();
    out.sort_by_key(Subgroup::order);
    Ok(out)
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The subgroup generated by `B`, i.e. multiples of `gcd(B ∪ {q})`, and whether
/// `B` is a proper subset of `H \ {0}`.
pub fn minimal_subgroup_containing(b: &ResidueSet) -> Result<(Subgroup, bool)> {
    if b.is_empty() {
        return invalid("empty residue set generates no nontrivial subgroup");
    }
    let step = b.members.iter().fold(b.q, |g, &m| gcd(g, m));
    let h = Subgroup { q: b.q, step };
    let proper = b.len() != h.order() - 1;
    Ok((h, proper))
}

/// Residues `m ∈ {1, …, q-1}` such that some frequency in `spectrum` has a
/// positive divisor congruent to `m`. Frequency `0` is ignored.
pub fn spectrum_richness(spectrum: &[i64], q: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for &n in spectrum {
        let n = n.unsigned_abs();
        if n == 0 {
            continue;
        }
        let mut d = 1u64;
        while d * d <= n {
            if n % d == 0 {
                for div in [d, n / d] {
                    let r = (div % q as u64) as usize;
                    if r != 0 {
                        out.insert(r);
                    }
                }
            }
            d += 1;
        }
    }
    out
}

/// The complex atomic measure `μ = (1/q) Σ_k ω^{kl} δ_{k/q}`.
///
/// Its spectrum is `{n ≡ l mod q} ⊂ C_{{l}}`, yet it is purely atomic, so the
/// dimension bounds fail without non-negativity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleMeasure {
    pub q: usize,
    pub l: usize,
    /// `(k, weight)` for the atom at `k / q`.
    pub atoms: Vec<(usize, Complex64)>,
    /// Fourier coefficients for `|n| <= q²`.
    pub spectrum: SparseSpectrum,
}

impl CounterexampleMeasure {
    /// `μ̂(n) = Σ_k w_k e^{-2πi n k / q}`, evaluated from the atoms.
    pub fn coefficient_from_atoms(&self, n: i64) -> Complex64 {
        let q = self.q as i64;
        self.atoms
            .iter()
            .map(|&(k, w)| w * unit_root((n * k as i64).rem_euclid(q) as usize, self.q).conj())
            .sum()
    }

    /// True when some atom weight is not a non-negative real.
    pub fn is_signed_or_complex(&self) -> bool {
        self.atoms.iter().any(|(_, w)| w.im.abs() > 1e-12 || w.re < -1e-12)
    }
}

pub fn counterexample_measure(q: usize, l: usize) -> Result<CounterexampleMeasure> {
    if q < 3 {
        return invalid(format!("modulus must be at least 3, got {q}"));
    }
    if l == 0 || l >= q {
        return invalid(format!("residue {l} outside 1..={}", q - 1));
    }
    let scale = 1.0 / q as f64;
    let atoms = (0..q).map(|k| (k, unit_root(k * l, q) * scale)).collect();
    let bound = (q * q) as i64;
    let coeffs = (-bound..=bound)
        .filter(|n| n.rem_euclid(q as i64) as usize == l)
        .map(|n| (n, Complex64::new(1.0, 0.0)))
        .collect();
    Ok(CounterexampleMeasure {
        q,
        l,
        atoms,
        spectrum: SparseSpectrum::new(q, 0, coeffs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn dft_examples() {
        let d = dft_zq(&[c(1.0), c(0.0), c(0.0), c(0.0)], 4).unwrap();
        assert!(close(&d, &[c(1.0); 4], 1e-12));

        let d = dft_zq(&[c(1.0), c(-1.0), c(1.0), c(-1.0)], 4).unwrap();
        assert!(close(&d, &[c(0.0), c(0.0), c(4.0), c(0.0)], 1e-12));

        // ω_1 is the inverse transform of 3·e_1.
        let w = HarmonicVector::new(3, 1);
        let d = dft_zq(&w.entries, 3).unwrap();
        assert!(close(&d, &[c(0.0), c(3.0), c(0.0)], 1e-12));
    }

    #[test]
    fn dft_length_mismatch() {
        assert!(dft_zq(&[c(1.0); 3], 4).is_err());
        assert!(idft_zq(&[c(1.0); 5], 4).is_err());
    }

    #[test]
    fn harmonic_entries_are_unimodular() {
        for q in 3..10 {
            for m in 0..q {
                let w = HarmonicVector::new(q, m);
                assert_eq!(w.entries[0], c(1.0));
                assert!(w.entries.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn symmetrize_examples() {
        let s = |q, m: &[usize]| symmetrize(&ResidueSet::new(q, m.iter().copied()).unwrap());
        assert_eq!(s(5, &[1]).members().iter().copied().collect::<Vec<_>>(), [1, 4]);
        assert_eq!(s(4, &[2]).members().iter().copied().collect::<Vec<_>>(), [2]);
        assert_eq!(s(6, &[1, 2]).members().iter().copied().collect::<Vec<_>>(), [1, 2, 4, 5]);
    }

    #[test]
    fn residue_set_validation() {
        assert!(ResidueSet::new(2, []).is_err());
        assert!(ResidueSet::new(4, [0]).is_err());
        assert!(ResidueSet::new(4, [4]).is_err());
        assert!(ResidueSet::parse(4, "1,x").is_err());
        assert!(ResidueSet::parse(5, "").unwrap().is_empty());
        assert_eq!(ResidueSet::parse(6, " 1, 5 ").unwrap().label(), "1,5");
    }

    #[test]
    fn wb_basis_examples() {
        let b = wb_basis(&ResidueSet::new(4, [2]).unwrap()).unwrap();
        assert_eq!(b.dim(), 1);
        let col = &b.columns()[0];
        for (x, s) in col.iter().zip([1.0, -1.0, 1.0, -1.0]) {
            assert!((x - s * 0.5).abs() < 1e-15);
        }
        assert_eq!(wb_basis(&ResidueSet::new(4, [1, 3]).unwrap()).unwrap().dim(), 2);
        assert_eq!(wb_basis(&ResidueSet::new(3, [1, 2]).unwrap()).unwrap().dim(), 2);
        assert_eq!(wb_basis(&ResidueSet::empty(7).unwrap()).unwrap().dim(), 0);
        assert!(wb_basis(&ResidueSet::new(5, [1]).unwrap()).is_err());
    }

    #[test]
    fn in_cb_examples() {
        let b = ResidueSet::new(4, [2]).unwrap();
        assert!(in_cb(0, &b));
        assert!(!in_cb(4, &b));
        assert!(in_cb(2, &b));
        assert!(in_cb(8, &b));
        let b = ResidueSet::new(3, [1, 2]).unwrap();
        assert!(in_cb(6, &b));
        // -1 = -1·3^0, -1 mod 3 = 2
        assert!(in_cb(-1, &ResidueSet::new(3, [2]).unwrap()));
        assert!(!in_cb(-1, &ResidueSet::new(3, [1]).unwrap()));
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(q_valuation(54, 3).unwrap(), (3, 2));
        assert_eq!(q_valuation(7, 3).unwrap(), (0, 7));
        assert_eq!(q_valuation(-18, 3).unwrap(), (2, -2));
        assert!(q_valuation(0, 3).is_err());
    }

    #[test]
    fn subgroup_examples() {
        let orders = |q| subgroups(q).unwrap().iter().map(Subgroup::order).collect::<Vec<_>>();
        assert_eq!(orders(4), [1, 2, 4]);
        assert_eq!(orders(6), [1, 2, 3, 6]);
        assert_eq!(orders(5), [1, 5]);
        let h = &subgroups(4).unwrap()[1];
        assert_eq!(h.elements(), [0, 2]);
    }

    #[test]
    fn minimal_subgroup_examples() {
        let (h, proper) = minimal_subgroup_containing(&ResidueSet::new(4, [2]).unwrap()).unwrap();
        assert_eq!((h.elements(), proper), (vec![0, 2], false));
        let (h, proper) = minimal_subgroup_containing(&ResidueSet::new(8, [2]).unwrap()).unwrap();
        assert_eq!((h.elements(), proper), (vec![0, 2, 4, 6], true));
        let (h, proper) = minimal_subgroup_containing(&ResidueSet::new(5, [1, 4]).unwrap()).unwrap();
        assert_eq!((h.order(), proper), (5, true));
        assert!(minimal_subgroup_containing(&ResidueSet::empty(5).unwrap()).is_err());
    }

    #[test]
    fn richness_examples() {
        assert_eq!(spectrum_richness(&[6], 4).into_iter().collect::<Vec<_>>(), [1, 2, 3]);
        assert!(spectrum_richness(&[], 4).is_empty());
        for q in [3usize, 5, 7, 11] {
            let n = (q as i64).pow(4);
            assert_eq!(spectrum_richness(&[n], q).into_iter().collect::<Vec<_>>(), [1]);
        }
        // composite q: 2 | 4^k has residue 2
        assert_eq!(spectrum_richness(&[256], 4).into_iter().collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn all_symmetric_counts() {
        // one bit per conjugate class {m, q-m}, plus {q/2} for even q
        assert_eq!(ResidueSet::all_symmetric(4).unwrap().len(), 4);
        assert_eq!(ResidueSet::all_symmetric(7).unwrap().len(), 8);
        assert!(ResidueSet::all_symmetric(12).unwrap().iter().all(ResidueSet::is_symmetric));
    }

    #[test]
    fn counterexample_examples() {
        let m = counterexample_measure(4, 1).unwrap();
        assert_eq!(m.spectrum.coeff(1), c(1.0));
        assert_eq!(m.spectrum.coeff(5), c(1.0));
        assert_eq!(m.spectrum.coeff(2), c(0.0));
        assert_eq!(m.spectrum.coeff(0), c(0.0));
        let m = counterexample_measure(3, 2).unwrap();
        assert_eq!(m.spectrum.coeff(2), c(1.0));
        assert_eq!(m.spectrum.coeff(3), c(0.0));
        for n in -9..=9 {
            assert!((m.coefficient_from_atoms(n) - m.spectrum.coeff(n)).norm() < 1e-12);
        }
        assert!(m.is_signed_or_complex());
        assert!(counterexample_measure(4, 0).is_err());
        assert!(counterexample_measure(4, 4).is_err());
    }
}
