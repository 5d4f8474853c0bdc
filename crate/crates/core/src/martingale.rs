//! The backwards martingale of a trigonometric polynomial on the `q^N`-point
//! grid, and numerical checks of its structural properties.
//!
//! Grid point `j` (the point `j / q^N`) lies in the level-`k` atom with class
//! `j mod q^k`. The level-`k` function averages `f` over the coset
//! `j + q^k Z`, so it is constant on atoms and stored as one value per class.
//! Child `i` of atom `(k-1, c)` is `(k, c + i q^{k-1})`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::kappa::KappaProblem;
use crate::spectrum::{phase_index, SparseSpectrum};
use crate::sum::neumaier;
use crate::zq::{in_cb, unit_root, wb_basis, ResidueSet};

/// Largest admissible grid size `q^N`.
pub const MAX_GRID_POINTS: u64 = 10_000_000;
/// Relative tolerance for structural identities.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Multiplicative slack for inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Absolute allowance, relative to `‖f‖_∞`, for per-atom inequalities at
/// atoms where the source vanishes and both sides are pure roundoff.
pub const ATOM_ROUNDOFF: f64 = 1e-12;

/// The points `j / q^N`, `j = 0..q^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QadicGrid {
    pub q: usize,
    pub depth: usize,
    pub size: u64,
}

impl QadicGrid {
    pub fn new(q: usize, depth: usize) -> Result<Self> {
        if q < 2 {
            return invalid(format!("q must be at least 2, got {q}"));
        }
        let size = (q as u64)
            .checked_pow(depth as u32)
            .filter(|&s| s <= MAX_GRID_POINTS)
            .ok_or_else(|| Error::Resource(format!("grid {q}^{depth} exceeds {MAX_GRID_POINTS} points")))?;
        Ok(Self { q, depth, size })
    }

    /// Number of atoms at `level`, i.e. `q^level`.
    pub fn atoms(&self, level: usize) -> usize {
        self.q.pow(level as u32)
    }

    pub fn point(&self, j: u64) -> f64 {
        j as f64 / self.size as f64
    }
}

/// A vertex of the `q`-ary tree: the level-`level` atom `{j : j ≡ class mod q^level}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct TreeAddress {
    pub level: usize,
    pub class: usize,
}

impl TreeAddress {
    pub fn new(grid: &QadicGrid, level: usize, class: usize) -> Result<Self> {
        if level > grid.depth || class >= grid.atoms(level) {
            return invalid(format!(
                "address (level {level}, class {class}) outside a depth-{} tree with q={}",
                grid.depth, grid.q
            ));
        }
        Ok(Self { level, class })
    }

    pub fn child(&self, q: usize, i: usize) -> TreeAddress {
        TreeAddress {
            level: self.level + 1,
            class: self.class + i * q.pow(self.level as u32),
        }
    }

    pub fn contains(&self, q: usize, j: u64) -> bool {
        j % q.pow(self.level as u32) as u64 == self.class as u64
    }
}

/// Values `f(j / q^N)` of a real trigonometric polynomial.
pub fn sample_on_grid(spec: &SparseSpectrum, grid: &QadicGrid) -> Result<Vec<f64>> {
    if 2 * spec.max_abs_frequency() >= grid.size {
        return invalid(format!(
            "frequency {} aliases on a grid of {} points",
            spec.max_abs_frequency(),
            grid.size
        ));
    }
    if !spec.is_conjugate_symmetric(1e-12) {
        return invalid("spectrum is not conjugate symmetric, so the function is not real");
    }
    let size = grid.size as usize;
    let table: Vec<Complex64> = (0..size).map(|r| unit_root(r, size)).collect();
    let terms: Vec<(u64, Complex64)> = spec
        .coeffs()
        .iter()
        .map(|(&n, &c)| (n.rem_euclid(grid.size as i64) as u64, c))
        .collect();
    Ok((0..grid.size)
        .into_par_iter()
        .map(|j| {
            let z: Complex64 = terms
                .iter()
                .map(|&(n, c)| c * table[((n as u128 * j as u128) % grid.size as u128) as usize])
                .sum();
            z.re
        })
        .collect())
}

/// Levels `f_0, …, f_N`; level `k` holds one value per atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleSequence {
    pub grid: QadicGrid,
    levels: Vec<Vec<f64>>,
    sup_norm: f64,
}

impl MartingaleSequence {
    pub fn depth(&self) -> usize {
        self.grid.depth
    }

    /// Atom values of `f_k`.
    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn atom_value(&self, addr: TreeAddress) -> f64 {
        self.levels[addr.level][addr.class]
    }

    /// `f_k` as a function on all `q^N` grid points.
    pub fn grid_function(&self, k: usize) -> Vec<f64> {
        let atoms = self.levels[k].len() as u64;
        (0..self.grid.size).map(|j| self.levels[k][(j % atoms) as usize]).collect()
    }

    /// `‖f‖_∞` of the source function `f = f_N`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `‖f_k‖_{L_p(ν_N)}`; atoms carry equal weight.
    pub fn level_norm(&self, k: usize, p: f64) -> Result<f64> {
        lp_norm(&self.levels[k], p)
    }

    /// Largest `|f_{k-1}(α) - mean_i f_k(α[i])|` over all nodes.
    pub fn martingale_residual(&self) -> f64 {
        let q = self.grid.q;
        (1..=self.depth())
            .flat_map(|k| {
                let parent = &self.levels[k - 1];
                let child = &self.levels[k];
                let stride = parent.len();
                (0..stride).map(move |c| {
                    let mean = (0..q).map(|i| child[c + i * stride]).sum::<f64>() / q as f64;
                    (parent[c] - mean).abs()
                })
            })
            .fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.levels.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Bottom-up averaging: `f_k(c) = (1/q) Σ_i f_{k+1}(c + i q^k)`.
pub fn martingale_levels(f: &[f64], grid: &QadicGrid) -> Result<MartingaleSequence> {
    if f.len() as u64 != grid.size {
        return invalid(format!("{} samples for a grid of {} points", f.len(), grid.size));
    }
    let q = grid.q;
    let mut levels = vec![f.to_vec()];
    for k in (0..grid.depth).rev() {
        let finer = levels.last().expect("nonempty");
        let atoms = grid.atoms(k);
        let coarser: Vec<f64> = (0..atoms)
            .map(|c| (0..q).map(|i| finer[c + i * atoms]).sum::<f64>() / q as f64)
            .collect();
        levels.push(coarser);
    }
    levels.reverse();
    let sup_norm = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(MartingaleSequence { grid: *grid, levels, sup_norm })
}

/// `f_k(j) = q^{k-N} Σ_{i < q^{N-k}} f(j + i q^k)`, the literal average.
pub fn direct_average(f: &[f64], grid: &QadicGrid, k: usize, j: u64) -> f64 {
    let stride = grid.atoms(k) as u64;
    let count = grid.size / stride;
    neumaier((0..count).map(|i| f[((j + i * stride) % grid.size) as usize])) / count as f64
}

/// [`direct_average`] at every grid point.
pub fn direct_level(f: &[f64], grid: &QadicGrid, k: usize) -> Vec<f64> {
    (0..grid.size).map(|j| direct_average(f, grid, k, j)).collect()
}

/// `Σ_{l : pred(l)} c_l e^{2πilx}` on the grid.
fn filtered_synthesis(spec: &SparseSpectrum, grid: &QadicGrid, pred: impl Fn(i64) -> bool) -> Vec<f64> {
    let terms: Vec<(i64, Complex64)> = spec.coeffs().iter().filter(|(&n, _)| pred(n)).map(|(&n, &c)| (n, c)).collect();
    (0..grid.size)
        .map(|j| {
            terms
                .iter()
                .map(|&(n, c)| c * unit_root(phase_index(n, j, grid.size), grid.size as usize))
                .sum::<Complex64>()
                .re
        })
        .collect()
}

/// Direct synthesis of `f_k = Σ_{q^{N-k} | l} c_l e^{2πilx}`.
pub fn projected_level(spec: &SparseSpectrum, grid: &QadicGrid, k: usize) -> Vec<f64> {
    let m = (grid.q as i64).pow((grid.depth - k) as u32);
    filtered_synthesis(spec, grid, |l| l % m == 0)
}

/// Direct synthesis of `df_k = Σ_{q^{N-k} ∥ l} c_l e^{2πilx}`.
pub fn projected_difference(spec: &SparseSpectrum, grid: &QadicGrid, k: usize) -> Vec<f64> {
    let m = (grid.q as i64).pow((grid.depth - k) as u32);
    let q = grid.q as i64;
    filtered_synthesis(spec, grid, |l| l % m == 0 && (l / m) % q != 0)
}

/// Largest deviation between `f_k` from the martingale and its spectral projection.
pub fn spectral_projection_check(spec: &SparseSpectrum, seq: &MartingaleSequence, k: usize) -> Result<f64> {
    if k > seq.depth() {
        return invalid(format!("level {k} exceeds depth {}", seq.depth()));
    }
    let direct = projected_level(spec, &seq.grid, k);
    let level = seq.level(k);
    let atoms = level.len() as u64;
    Ok(direct
        .iter()
        .enumerate()
        .map(|(j, d)| (d - level[(j as u64 % atoms) as usize]).abs())
        .fold(0.0, f64::max))
}

/// `(df_k(α[0]), …, df_k(α[q-1]))` for the level-`(k-1)` atom `addr`.
pub fn sibling_difference_vector(seq: &MartingaleSequence, addr: TreeAddress) -> Result<Vec<f64>> {
    if addr.level >= seq.depth() || addr.class >= seq.grid.atoms(addr.level) {
        return invalid(format!("address {addr:?} has no children in a depth-{} tree", seq.depth()));
    }
    let parent = seq.atom_value(addr);
    Ok((0..seq.grid.q)
        .map(|i| seq.atom_value(addr.child(seq.grid.q, i)) - parent)
        .collect())
}

/// The same vector as [`sibling_difference_vector`], synthesized from the
/// spectrum as `Σ_{m=1}^{q-1} e_m ω_m` with
/// `e_m = Σ_n c_{(m+nq)q^{N-k}} e^{2πi(m+nq)q^{N-k} x_0}` and `x_0 = class / q^N ∈ α[0]`.
pub fn dft_lemma_vector(spec: &SparseSpectrum, grid: &QadicGrid, addr: TreeAddress) -> Result<Vec<Complex64>> {
    if addr.level >= grid.depth {
        return invalid(format!("address {addr:?} has no children in a depth-{} tree", grid.depth));
    }
    let q = grid.q;
    let k = addr.level + 1;
    let scale = (q as i64).pow((grid.depth - k) as u32);
    let mut e = vec![Complex64::new(0.0, 0.0); q];
    for (&l, &c) in spec.coeffs() {
        if l % scale != 0 {
            continue;
        }
        let m = (l / scale).rem_euclid(q as i64) as usize;
        if m == 0 {
            continue;
        }
        e[m] += c * unit_root(phase_index(l, addr.class as u64, grid.size), grid.size as usize);
    }
    Ok((0..q)
        .map(|j| (1..q).map(|m| e[m] * unit_root(m * j, q)).sum())
        .collect())
}

/// Largest norm of the component of a sibling difference vector orthogonal to `W_B`.
pub fn wb_membership_check(spec: &SparseSpectrum, seq: &MartingaleSequence, b: &ResidueSet) -> Result<f64> {
    if b.q() != seq.grid.q {
        return invalid(format!("residue set modulus {} differs from grid base {}", b.q(), seq.grid.q));
    }
    if let Some(n) = spec.find_frequency(|n| in_cb(n, b)) {
        return Err(Error::Precondition(format!(
            "frequency {n} is not in C_B for B = {{{}}}",
            b.label()
        )));
    }
    let basis = wb_basis(b)?;
    let q = seq.grid.q;
    let mut worst = 0.0f64;
    for k in 1..=seq.depth() {
        for class in 0..q.pow((k - 1) as u32) {
            let d = sibling_difference_vector(seq, TreeAddress { level: k - 1, class })?;
            worst = worst.max(basis.complement_residual(&d));
        }
    }
    Ok(worst)
}

/// `((1/len) Σ |g_j|^p)^{1/p}`.
pub fn lp_norm(g: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return invalid(format!("exponent must be at least 1, got {p}"));
    }
    if g.is_empty() {
        return invalid("empty grid function");
    }
    let mean = neumaier(g.iter().map(|x| x.abs().powf(p))) / g.len() as f64;
    Ok(mean.powf(1.0 / p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub p: f64,
    /// `κ(1/p)`
    pub kappa: f64,
    /// `‖f_k‖_p / ‖f_{k-1}‖_p` for `k = 1..=N`.
    pub step_ratios: Vec<f64>,
    /// Smallest `e^κ ‖f_{k-1}‖_p - ‖f_k‖_p`, relative to the right side.
    pub worst_step_slack: f64,
    /// Same for the per-atom inequalities, with `ATOM_ROUNDOFF ‖f‖_∞` added
    /// to the right side.
    pub worst_atom_slack: f64,
    /// `‖f_N‖_p`
    pub global_lhs: f64,
    /// `q e^{κN} ‖μ‖`
    pub global_rhs: f64,
    pub worst_slack: f64,
    pub violations: Vec<String>,
    pub pass: bool,
}

fn relative_slack(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        (rhs - lhs) / rhs
    } else if lhs <= 0.0 {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}

/// Checks the single-step, per-atom and global `L_p` growth bounds for a
/// non-negative source with spectrum in `C_B`. `mass` is `‖μ‖ = c_0`.
pub fn growth_check(seq: &MartingaleSequence, problem: &KappaProblem, p: f64, mass: f64) -> Result<GrowthReport> {
    if problem.q() != seq.grid.q {
        return invalid("residue set modulus differs from grid base");
    }
    if seq.min_value() < -STRUCTURAL_TOL * seq.sup_norm().max(1.0) {
        return Err(Error::Precondition(format!("source takes negative value {}", seq.min_value())));
    }
    let kappa = problem.kappa(1.0 / p)?;
    let growth = kappa.exp();
    let q = seq.grid.q;
    let floor = ATOM_ROUNDOFF * seq.sup_norm();
    let mut violations = Vec::new();
    let mut step_ratios = Vec::new();
    let mut worst_step = f64::INFINITY;
    let mut worst_atom = f64::INFINITY;

    for k in 1..=seq.depth() {
        let lhs = seq.level_norm(k, p)?;
        let rhs = growth * seq.level_norm(k - 1, p)?;
        step_ratios.push(lhs / seq.level_norm(k - 1, p)?);
        worst_step = worst_step.min(relative_slack(lhs, rhs));
        if lhs > rhs * (1.0 + INEQUALITY_SLACK) {
            violations.push(format!("step k={k}: {lhs} > {rhs}"));
        }
        let parent = seq.level(k - 1);
        let child = seq.level(k);
        let stride = parent.len();
        for c in 0..stride {
            let local = ((0..q).map(|i| child[c + i * stride].abs().powf(p)).sum::<f64>() / q as f64).powf(1.0 / p);
            let bound = growth * parent[c].abs();
            worst_atom = worst_atom.min(relative_slack(local, bound + floor));
            if local > bound * (1.0 + INEQUALITY_SLACK) + floor {
                violations.push(format!("atom (level {}, class {c}): {local} > {bound}", k - 1));
            }
        }
    }
    let global_lhs = seq.level_norm(seq.depth(), p)?;
    let global_rhs = q as f64 * (kappa * seq.depth() as f64).exp() * mass;
    if global_lhs > global_rhs * (1.0 + INEQUALITY_SLACK) {
        violations.push(format!("global: {global_lhs} > {global_rhs}"));
    }
    let worst_slack = worst_step.min(worst_atom).min(relative_slack(global_lhs, global_rhs));
    Ok(GrowthReport {
        p,
        kappa,
        step_ratios,
        worst_step_slack: worst_step,
        worst_atom_slack: worst_atom,
        global_lhs,
        global_rhs,
        worst_slack,
        pass: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetAverageReport {
    pub size: usize,
    /// `q^{-N} Σ_{x∈C} f(x)`
    pub average: f64,
    /// `‖f‖_p (q^{-N} #C)^{(p-1)/p}`
    pub holder: f64,
    /// `q e^{κ(1/p)N} ‖μ‖ (q^{-N} #C)^{(p-1)/p}`
    pub bound: f64,
    /// The bound rewritten as `q e^{κN} q^{γ(β-1)N} (q^{-βN} #C)^γ ‖μ‖`, `γ = (p-1)/p`.
    pub beta_form: f64,
    pub pass: bool,
}

/// Checks the Hölder chain bounding the average of `f` over a subset `C` of the grid.
pub fn set_average_check(
    seq: &MartingaleSequence,
    subset: &[u64],
    beta: f64,
    p: f64,
    kappa: f64,
    mass: f64,
) -> Result<SetAverageReport> {
    if subset.is_empty() {
        return invalid("subset must be nonempty");
    }
    if p.is_nan() || p <= 1.0 {
        return invalid(format!("exponent must exceed 1, got {p}"));
    }
    let grid = seq.grid;
    if let Some(&j) = subset.iter().find(|&&j| j >= grid.size) {
        return invalid(format!("point {j} outside the grid"));
    }
    let f = seq.level(seq.depth());
    let qn = grid.size as f64;
    let n = grid.depth as f64;
    let q = grid.q as f64;
    let gamma = (p - 1.0) / p;
    let density = subset.len() as f64 / qn;
    let average = neumaier(subset.iter().map(|&j| f[j as usize])) / qn;
    let holder = lp_norm(f, p)? * density.powf(gamma);
    let bound = q * (kappa * n).exp() * mass * density.powf(gamma);
    let beta_form = q
        * (kappa * n).exp()
        * q.powf(gamma * (beta - 1.0) * n)
        * (q.powf(-beta * n) * subset.len() as f64).powf(gamma)
        * mass;
    let tol = 1.0 + INEQUALITY_SLACK;
    let pass = average <= holder * tol
        && holder <= bound * tol
        && (beta_form - bound).abs() <= INEQUALITY_SLACK * bound.abs();
    Ok(SetAverageReport { size: subset.len(), average, holder, bound, beta_form, pass })
}

/// `count` random subsets with densities spread over `(0, 1]`, from one seed.
pub fn random_subsets(grid: &QadicGrid, count: usize, seed: u64) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let density = (i + 1) as f64 / count as f64;
            let mut s: Vec<u64> = (0..grid.size).filter(|_| rng.gen::<f64>() < density).collect();
            if s.is_empty() {
                s.push(rng.gen_range(0..grid.size));
            }
            s
        })
        .collect()
}

/// The plateau kernel: `q^N` on `|t| <= 1/(2q^N)`, linear down to `0` at
/// `|t| = 1/(2q^{N-1})`, zero beyond.
pub fn phi_kernel(t: f64, q: usize, depth: usize) -> f64 {
    let height = (q as f64).powi(depth as i32);
    let inner = 0.5 / height;
    let outer = q as f64 * inner;
    let t = (t - t.round()).abs();
    if t <= inner {
        height
    } else if t < outer {
        height * (outer - t) / (outer - inner)
    } else {
        0.0
    }
}

/// Fourier coefficient of [`phi_kernel`]: the trapezoid is a scaled
/// convolution of two boxes, so its transform is a product of sinc terms.
pub fn phi_kernel_coefficient(n: i64, q: usize, depth: usize) -> f64 {
    let height = (q as f64).powi(depth as i32);
    let inner = 0.5 / height;
    let outer = q as f64 * inner;
    let (wide, narrow) = (0.5 * (outer + inner), 0.5 * (outer - inner));
    if n == 0 {
        return height * 2.0 * wide;
    }
    let w = PI * n as f64;
    height / (2.0 * narrow) * (2.0 * w * wide).sin() / w * (2.0 * w * narrow).sin() / w
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub points: usize,
    /// Largest violation of either inequality (0 when both hold everywhere).
    pub max_violation: f64,
    /// Smallest `q^{-N} Φ*μ(x) - μ(inner interval)`.
    pub min_lower_gap: f64,
    /// Smallest `μ(outer interval) - q^{-N} Φ*μ(x)`.
    pub min_upper_gap: f64,
    pub pass: bool,
}

/// `μ([x ± 1/(2q^N)]) <= q^{-N} (Φ_N * μ)(x) <= μ([x ± 1/(2q^{N-1})])` at every grid point.
pub fn phi_kernel_mass_sandwich(spec: &SparseSpectrum, depth: usize) -> Result<SandwichReport> {
    let q = spec.q;
    let grid = QadicGrid::new(q, depth)?;
    if depth == 0 {
        return invalid("depth must be positive");
    }
    let inner = 0.5 / grid.size as f64;
    let outer = q as f64 * inner;
    let smoothed: Vec<(i64, Complex64)> = spec
        .coeffs()
        .iter()
        .map(|(&n, &c)| (n, c * phi_kernel_coefficient(n, q, depth) / grid.size as f64))
        .collect();
    let smoothed = SparseSpectrum::new(q, spec.order, smoothed.into_iter().collect());

    let rows: Vec<(f64, f64, f64)> = (0..grid.size)
        .into_par_iter()
        .map(|j| {
            (
                spec.centered_mass(j, grid.size, inner),
                smoothed.eval_ratio(j, grid.size).re,
                spec.centered_mass(j, grid.size, outer),
            )
        })
        .collect();
    let mut max_violation = 0.0f64;
    let mut min_lower_gap = f64::INFINITY;
    let mut min_upper_gap = f64::INFINITY;
    for &(lo, mid, hi) in &rows {
        min_lower_gap = min_lower_gap.min(mid - lo);
        min_upper_gap = min_upper_gap.min(hi - mid);
        max_violation = max_violation.max(lo - mid).max(mid - hi);
    }
    Ok(SandwichReport {
        points: rows.len(),
        max_violation,
        min_lower_gap,
        min_upper_gap,
        pass: max_violation <= STRUCTURAL_TOL,
    })
}
