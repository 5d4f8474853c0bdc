//! The growth exponent `κ(θ)`, its left derivative `κ'(1)`, and the dimension
//! bounds built from them.
//!
//! Both `κ(θ)` for `θ ∈ (0, 1]` and `-q κ'(1)` are suprema of convex functions
//! over the bounded polytope `{v ∈ W_B : v_j >= -1}`, so they are attained at a
//! vertex. Vertices are enumerated exhaustively by active sets.

use std::cmp::Ordering;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::zq::{minimal_subgroup_containing, symmetrize, wb_basis, ResidueSet, SubspaceBasis, Subgroup};

/// Feasibility slack for `v_j >= -1`.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Two vertices closer than this in max-norm are the same vertex.
pub const DEDUP_TOL: f64 = 1e-7;
/// Upper limit on the number of active sets examined.
pub const MAX_ACTIVE_SETS: u64 = 50_000_000;

/// `{t ∈ R^d : (M t)_j >= -1 for all j}` for the basis matrix `M` of `W_B`.
#[derive(Debug, Clone)]
pub struct FeasiblePolytope {
    basis: SubspaceBasis,
}

impl FeasiblePolytope {
    pub fn new(basis: SubspaceBasis) -> Self {
        Self { basis }
    }

    pub fn from_residues(b: &ResidueSet) -> Result<Self> {
        Ok(Self::new(wb_basis(b)?))
    }

    pub fn basis(&self) -> &SubspaceBasis {
        &self.basis
    }

    pub fn q(&self) -> usize {
        self.basis.q()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Row `j` of `M`.
    fn row(&self, j: usize) -> Vec<f64> {
        self.basis.columns().iter().map(|c| c[j]).collect()
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.q()
            && v.iter().all(|&x| x >= -1.0 - tol)
            && self.basis.complement_residual(v) <= tol * (1.0 + l2(v))
    }
}

/// Extreme points of a [`FeasiblePolytope`], in lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexSet {
    pub q: usize,
    pub vertices: Vec<Vec<f64>>,
    pub dedup_tol: f64,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Solves the square system `A t = rhs` by Gaussian elimination with partial
/// pivoting. `None` when `A` is numerically singular.
fn solve(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let eps = 1e-10 * scale.max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= eps {
            return None;
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for (r, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                for c in col..n {
                    row[c] -= f * pivot_row[c];
                }
                rhs[col + 1 + r] -= f * rhs[col];
            }
        }
    }
    let mut t = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * t[c]).sum();
        t[r] = (rhs[r] - s) / a[r][r];
    }
    Some(t)
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Enumerates every vertex of `P` by solving `(M t)_S = -1` on each set `S` of
/// `d` linearly independent constraint rows and keeping feasible solutions.
pub fn polytope_vertices(p: &FeasiblePolytope) -> Result<VertexSet> {
    let (q, d) = (p.q(), p.dim());
    if d > q {
        return invalid(format!("subspace dimension {d} exceeds ambient dimension {q}"));
    }
    if d == 0 {
        return Ok(VertexSet { q, vertices: Vec::new(), dedup_tol: DEDUP_TOL });
    }
    let count = binomial(q as u64, d as u64);
    if count > MAX_ACTIVE_SETS {
        return Err(Error::Resource(format!(
            "{count} active sets for q={q}, d={d} exceeds limit {MAX_ACTIVE_SETS}"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..q).map(|j| p.row(j)).collect();

    let mut candidates: Vec<Vec<f64>> = (0..q)
        .combinations(d)
        .par_bridge()
        .filter_map(|active| {
            let a = active.iter().map(|&j| rows[j].clone()).collect();
            let t = solve(a, vec![-1.0; d])?;
            let mut v = p.basis.combine(&t);
            if v.iter().any(|&x| x < -1.0 - FEASIBILITY_TOL) {
                return None;
            }
            for &j in &active {
                v[j] = -1.0;
            }
            Some(v)
        })
        .collect();

    candidates.sort_by(|a, b| lex_cmp(a, b));
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for v in candidates {
        // sorted by first coordinate, so any duplicate sits in the trailing window
        let dup = vertices
            .iter()
            .rev()
            .take_while(|w| v[0] - w[0] <= DEDUP_TOL)
            .any(|w| max_dist(w, &v) <= DEDUP_TOL);
        if !dup {
            vertices.push(v);
        }
    }
    Ok(VertexSet { q, vertices, dedup_tol: DEDUP_TOL })
}

/// `Σ_j u_j log u_j` with `u = 1 + v` and `0 log 0 = 0`.
pub fn entropy_functional(v: &[f64]) -> f64 {
    v.iter()
        .map(|&x| {
            let u = (1.0 + x).max(0.0);
            if u == 0.0 {
                0.0
            } else {
                u * u.ln()
            }
        })
        .sum()
}

/// `θ log((1/q) Σ_j |1 + v_j|^{1/θ})`, evaluated in log space.
pub fn kappa_objective(theta: f64, v: &[f64]) -> f64 {
    let s = 1.0 / theta;
    let u: Vec<f64> = v.iter().map(|&x| (1.0 + x).abs()).collect();
    let umax = u.iter().copied().fold(0.0, f64::max);
    if umax == 0.0 {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = u.iter().filter(|&&x| x > 0.0).map(|&x| (x / umax).powf(s)).sum();
    umax.ln() + theta * (sum.ln() - (v.len() as f64).ln())
}

/// `κ(θ) = max_v θ log((1/q) Σ |1 + v_j|^{1/θ})` over the vertices; `0` when
/// the polytope is the origin alone.
pub fn kappa(theta: f64, vertices: &VertexSet) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) {
        return invalid(format!("theta must lie in (0, 1], got {theta}"));
    }
    if theta == 1.0 {
        return Ok(0.0);
    }
    Ok(vertices
        .vertices
        .iter()
        .map(|v| kappa_objective(theta, v))
        .fold(0.0, f64::max))
}

/// `κ'(1)` together with the maximizing vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaPrime {
    pub value: f64,
    /// Lexicographically smallest maximizer; the zero vector when `W_B = {0}`.
    pub witness: Vec<f64>,
}

/// `κ'(1) = -(1/q) max_v Σ_j (1 + v_j) log(1 + v_j)`.
pub fn kappa_prime_1(vertices: &VertexSet) -> KappaPrime {
    let q = vertices.q as f64;
    let scores: Vec<f64> = vertices.vertices.iter().map(|v| entropy_functional(v)).collect();
    let Some(best) = scores.iter().copied().reduce(f64::max) else {
        return KappaPrime { value: 0.0, witness: vec![0.0; vertices.q] };
    };
    let tie = 1e-12 * best.abs().max(1.0);
    let idx = scores.iter().position(|&s| s >= best - tie).unwrap_or(0);
    KappaPrime {
        value: -best / q,
        witness: vertices.vertices[idx].clone(),
    }
}

/// Secant slope `(κ(1) - κ(1-h)) / h = -κ(1-h)/h`.
///
/// Convexity of `κ` makes this a lower estimate of `κ'(1)` that increases to
/// it as `h` decreases.
pub fn kappa_left_derivative_fd(vertices: &VertexSet, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 0.5) {
        return invalid(format!("step must lie in (0, 1/2), got {h}"));
    }
    Ok(-kappa(1.0 - h, vertices)? / h)
}

/// `B`, its basis, polytope and vertices, computed once.
#[derive(Debug, Clone)]
pub struct KappaProblem {
    pub residues: ResidueSet,
    pub polytope: FeasiblePolytope,
    pub vertices: VertexSet,
}

impl KappaProblem {
    /// Requires a symmetric `B`.
    pub fn new(b: &ResidueSet) -> Result<Self> {
        let polytope = FeasiblePolytope::from_residues(b)?;
        let vertices = polytope_vertices(&polytope)?;
        Ok(Self { residues: b.clone(), polytope, vertices })
    }

    pub fn q(&self) -> usize {
        self.residues.q()
    }

    pub fn kappa(&self, theta: f64) -> Result<f64> {
        kappa(theta, &self.vertices)
    }

    pub fn kappa_prime_1(&self) -> KappaPrime {
        kappa_prime_1(&self.vertices)
    }

    pub fn left_derivative_fd(&self, h: f64) -> Result<f64> {
        kappa_left_derivative_fd(&self.vertices, h)
    }
}

/// Subgroup form of the bound: `1 - log|H| / log q` for the subgroup `H`
/// generated by `B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupBound {
    pub bound: f64,
    pub subgroup: Subgroup,
    /// `B ⊊ H \ {0}`, the case where the bound is strict.
    pub proper: bool,
}

pub fn subgroup_bound(b: &ResidueSet) -> SubgroupBound {
    let q = b.q();
    if b.is_empty() {
        return SubgroupBound { bound: 1.0, subgroup: Subgroup { q, step: q }, proper: false };
    }
    let (subgroup, proper) = minimal_subgroup_containing(b).expect("nonempty residue set");
    let bound = 1.0 - (subgroup.order() as f64).ln() / (q as f64).ln();
    SubgroupBound { bound, subgroup, proper }
}

/// Lower bound `1 + κ'(1)/log q` for measures with spectrum in `C_B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionBound {
    pub q: usize,
    /// The residue set actually used (after symmetrization).
    pub residues: Vec<usize>,
    /// Whether the input set had to be symmetrized.
    pub symmetrized: bool,
    pub kappa_prime_1: f64,
    /// `1 + κ'(1)/log q` before clamping.
    pub raw_bound: f64,
    /// `raw_bound` clamped to `[0, 1]`.
    pub bound: f64,
    pub subgroup_bound: f64,
    pub subgroup_order: usize,
    pub proper_inclusion: bool,
    pub delta: f64,
    pub witness_vertex: Vec<f64>,
    pub vertex_count: usize,
}

pub fn dimension_bound(b: &ResidueSet) -> Result<DimensionBound> {
    let symmetrized = !b.is_symmetric();
    let b = symmetrize(b);
    let problem = KappaProblem::new(&b)?;
    let kp = problem.kappa_prime_1();
    let q = b.q();
    let raw_bound = 1.0 + kp.value / (q as f64).ln();
    let bound = raw_bound.clamp(0.0, 1.0);
    let sg = subgroup_bound(&b);
    Ok(DimensionBound {
        q,
        residues: b.members().iter().copied().collect(),
        symmetrized,
        kappa_prime_1: kp.value,
        raw_bound,
        bound,
        subgroup_bound: sg.bound,
        subgroup_order: sg.subgroup.order(),
        proper_inclusion: sg.proper,
        delta: bound - sg.bound,
        witness_vertex: kp.witness,
        vertex_count: problem.vertices.len(),
    })
}

/// Outcome of [`def_reform_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefReformOutcome {
    /// `((1/q) Σ |a + b_j|^p)^{1/p}`
    pub lhs: f64,
    /// `a e^{κ(1/p)}`
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `((1/q) Σ |a + b_j|^p)^{1/p} <= a e^{κ(1/p)}` for `b ∈ W_B`,
/// `b_j >= -a`. Violated preconditions are reported as errors.
pub fn def_reform_check(problem: &KappaProblem, a: f64, b: &[f64], p: f64) -> Result<DefReformOutcome> {
    let q = problem.q();
    let pre = |msg: String| Err(Error::Precondition(msg));
    if b.len() != q {
        return pre(format!("vector of length {} for modulus {q}", b.len()));
    }
    if a.is_nan() || a < 0.0 {
        return pre(format!("scale a = {a} must be non-negative"));
    }
    if p.is_nan() || p <= 1.0 {
        return pre(format!("exponent p = {p} must exceed 1"));
    }
    if let Some(j) = b.iter().position(|&x| x < -a - 1e-12) {
        return pre(format!("b[{j}] = {} < -a = {}", b[j], -a));
    }
    let resid = problem.polytope.basis().complement_residual(b);
    if resid > 1e-12 * l2(b).max(1.0) {
        return pre(format!("b is not in W_B (residual {resid:e})"));
    }
    let lhs = (b.iter().map(|&x| (a + x).abs().powf(p)).sum::<f64>() / q as f64).powf(1.0 / p);
    let rhs = a * problem.kappa(1.0 / p)?.exp();
    Ok(DefReformOutcome { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-9) + 1e-12 })
}
