//! Riesz products `μ_{a,q} = Π_{k>=0} (1 + a cos 2π q^k x)`.
//!
//! Their spectrum lies in `C_{{1, q-1}}`, so the general bound applies. This
//! module holds the closed form of that bound, the weaker explicit estimates
//! derived from it, and comparison values (Peyrière's exact formula evaluated
//! on partial products, Fan's main term, an entropy proxy).

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{Node, TanhSinh};
use crate::spectrum::SparseSpectrum;
use crate::sum::neumaier;

/// Largest number of spectrum terms `3^K` that [`riesz_spectrum`] will build.
pub const MAX_SPECTRUM_TERMS: u64 = 10_000_000;
/// Largest number of level-`n` intervals for [`entropy_dimension_estimate`].
pub const MAX_ENTROPY_INTERVALS: u64 = 1_000_000;
/// Absolute tolerance for the log-singular integral.
pub const LOG_INTEGRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszParams {
    pub a: f64,
    pub q: usize,
}

impl RieszParams {
    pub fn new(a: f64, q: usize) -> Result<Self> {
        if !(-1.0..=1.0).contains(&a) {
            return invalid(format!("amplitude must lie in [-1, 1], got {a}"));
        }
        if q < 3 {
            return invalid(format!("q must be at least 3, got {q}"));
        }
        Ok(Self { a, q })
    }
}

/// `1 + a cos θ`, written so that the value is accurate near its zero when `|a| = 1`.
fn riesz_factor(a: f64, theta: f64) -> f64 {
    if a >= 0.0 {
        let c = (0.5 * theta).cos();
        (1.0 - a) + 2.0 * a * c * c
    } else {
        let s = (0.5 * theta).sin();
        (1.0 + a) - 2.0 * a * s * s
    }
}

fn q_pow(q: usize, k: usize) -> Result<u64> {
    (q as u64)
        .checked_pow(k as u32)
        .filter(|&v| v < (1u64 << 62))
        .ok_or_else(|| Error::Resource(format!("{q}^{k} overflows the frequency range")))
}

/// Coefficients of `P_K(x) = Π_{k<K} (1 + a cos 2π q^k x)`.
///
/// Each `ε ∈ {-1, 0, 1}^K` gives the frequency `Σ ε_k q^k` with coefficient
/// `Π (a/2)^{|ε_k|}`; for `q >= 3` these frequencies are distinct.
pub fn riesz_spectrum(params: RieszParams, order: usize) -> Result<SparseSpectrum> {
    let terms = 3u64.checked_pow(order as u32).unwrap_or(u64::MAX);
    if terms > MAX_SPECTRUM_TERMS {
        return Err(Error::Resource(format!(
            "truncation order {order} needs 3^{order} terms, limit {MAX_SPECTRUM_TERMS}"
        )));
    }
    q_pow(params.q, order)?;
    let half = params.a / 2.0;
    let mut coeffs: Vec<(i64, f64)> = vec![(0, 1.0)];
    for k in 0..order {
        let step = q_pow(params.q, k)? as i64;
        let mut next = Vec::with_capacity(coeffs.len() * 3);
        for &(n, c) in &coeffs {
            next.push((n, c));
            if half != 0.0 {
                next.push((n + step, c * half));
                next.push((n - step, c * half));
            }
        }
        coeffs = next;
    }
    let map: BTreeMap<i64, Complex64> = coeffs.into_iter().map(|(n, c)| (n, Complex64::new(c, 0.0))).collect();
    Ok(SparseSpectrum::new(params.q, order, map))
}

/// `P_K(j / M)` for `j = 0..M`, by direct multiplication of the factors.
pub fn partial_product_values(params: RieszParams, order: usize, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return invalid("grid size must be positive");
    }
    let m64 = m as u64;
    let steps: Vec<u64> = (0..order)
        .map(|k| mod_pow(params.q as u64, k as u64, m64))
        .collect();
    Ok((0..m64)
        .into_par_iter()
        .map(|j| {
            steps
                .iter()
                .map(|&s| {
                    let r = ((s as u128 * j as u128) % m64 as u128) as f64;
                    riesz_factor(params.a, 2.0 * PI * r / m as f64)
                })
                .product()
        })
        .collect())
}

fn mod_pow(base: u64, exp: u64, m: u64) -> u64 {
    let mut result = 1u128 % m as u128;
    let mut b = base as u128 % m as u128;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m as u128;
        }
        b = b * b % m as u128;
        e >>= 1;
    }
    result as u64
}

/// `t_j = 1 - cos((2j+1)π/q) / cos(π/q)` for `j = 1..=q-2`.
pub fn theorem3_terms(q: usize) -> Vec<f64> {
    let c = (PI / q as f64).cos();
    (1..=q.saturating_sub(2))
        .map(|j| 1.0 - ((2 * j + 1) as f64 * PI / q as f64).cos() / c)
        .collect()
}

fn xlogx(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn check_q(q: usize) -> Result<()> {
    if q < 3 {
        return invalid(format!("q must be at least 3, got {q}"));
    }
    Ok(())
}

fn check_even_q(q: usize) -> Result<()> {
    if q < 4 || !q.is_multiple_of(2) {
        return invalid(format!("q must be even and at least 4, got {q}"));
    }
    Ok(())
}

/// Closed form of `κ'(1)` for `B = {1, q-1}`: `-(1/q) Σ_{j=1}^{q-2} t_j log t_j`.
pub fn kappa_prime_riesz(q: usize) -> Result<f64> {
    check_q(q)?;
    Ok(-neumaier(theorem3_terms(q).into_iter().map(xlogx)) / q as f64)
}

/// The certified Riesz-product bound `1 + κ'(1)/log q` with the closed form of `κ'(1)`.
pub fn bound_theorem3(q: usize) -> Result<f64> {
    Ok(1.0 + kappa_prime_riesz(q)? / (q as f64).ln())
}

/// Objective of the one-parameter maximization over `W_{1,q-1}` at phase `φ`:
/// `Σ_j (1 - cos(2πj/q + φ)/cos φ) log(...)`.
pub fn phase_objective(q: usize, phi: f64) -> f64 {
    let c = phi.cos();
    neumaier((0..q).map(|j| xlogx(1.0 - (2.0 * PI * j as f64 / q as f64 + phi).cos() / c)))
}

/// `∫_{π/2}^{qπ/4} log(cos² z) sin(2z/q) dz` for even `q`.
///
/// The range is split at the zeros `π/2 + kπ` of `cos`; on each piece the
/// logarithm is evaluated through the distance to the nearest zero.
pub fn log_integral(q: usize) -> Result<f64> {
    log_integral_with(q, &TanhSinh::with_tol(LOG_INTEGRAL_TOL * 1e-3))
}

pub fn log_integral_with(q: usize, rule: &TanhSinh) -> Result<f64> {
    check_even_q(q)?;
    let end = q as f64 * PI / 4.0;
    let p = q / 2;
    // zeros at π/2 + kπ, k = 0..; the endpoint is a zero iff p is odd
    let mut cuts: Vec<f64> = (0..).map(|k| PI / 2.0 + k as f64 * PI).take_while(|&z| z < end - 1e-12).collect();
    cuts.push(end);
    let right_singular = p % 2 == 1;
    let qf = q as f64;
    let mut total = Vec::with_capacity(cuts.len());
    for (i, w) in cuts.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        let singular_hi = i + 2 < cuts.len() || right_singular;
        let piece = rule.integrate_checked(lo, hi, |n: Node| {
            let d = if singular_hi { n.from_left.min(n.from_right) } else { n.from_left };
            // cos(π/2 + kπ ± d)² = sin(d)², valid for d <= π
            let s = if singular_hi || n.from_left <= PI / 2.0 { d.sin() } else { n.x.cos() };
            (s * s).ln() * (2.0 * n.x / qf).sin()
        })?;
        total.push(piece.value);
    }
    Ok(neumaier(total))
}

/// Residuals of the even-`q` identity expressing `Σ t_j log t_j` through
/// [`log_integral`], and of the Chebyshev factorization behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevIdentity {
    pub q: usize,
    /// `Σ_{j=1}^{q-2} t_j log t_j`
    pub lhs: f64,
    /// `(1 - log 2) q + 2 log 2 + 2/(q cos(π/q)) I - q log cos(π/q)`
    pub rhs: f64,
    pub residual: f64,
    /// Largest relative gap between `2^{2-q} T_{q/2}(a)²` and `Π_j |a - cos((2j+1)π/q)|`.
    pub product_max_rel_err: f64,
    pub product_samples: usize,
}

pub const CHEBYSHEV_SAMPLES: usize = 100;
const CHEBYSHEV_SEED: u64 = 0x5eed_c4eb;

pub fn chebyshev_identity_residual(q: usize) -> Result<ChebyshevIdentity> {
    chebyshev_identity_residual_seeded(q, CHEBYSHEV_SEED)
}

pub fn chebyshev_identity_residual_seeded(q: usize, seed: u64) -> Result<ChebyshevIdentity> {
    check_even_q(q)?;
    if q > 64 {
        return invalid(format!("identity check supports q <= 64, got {q}"));
    }
    let qf = q as f64;
    let c = (PI / qf).cos();
    let lhs = neumaier(theorem3_terms(q).into_iter().map(xlogx));
    let integral = log_integral(q)?;
    let rhs = (1.0 - LN_2) * qf + 2.0 * LN_2 + 2.0 / (qf * c) * integral - qf * c.ln();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ q as u64);
    let mut worst = 0.0f64;
    for _ in 0..CHEBYSHEV_SAMPLES {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let rel = chebyshev_product_gap(q, a);
        worst = worst.max(rel);
    }
    Ok(ChebyshevIdentity {
        q,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        product_max_rel_err: worst,
        product_samples: CHEBYSHEV_SAMPLES,
    })
}

/// Relative gap `|A - B| / max(A, B)` between `A = 2^{2-q} T_p(a)²` (with
/// `T_p(a) = cos(p arccos a)`, `p = q/2`) and `B = Π_j |a - cos((2j+1)π/q)|`.
pub fn chebyshev_product_gap(q: usize, a: f64) -> f64 {
    let p = (q / 2) as f64;
    let t = (p * a.acos()).cos();
    let lhs = 2f64.powi(2 - q as i32) * t * t;
    let rhs: f64 = (0..q)
        .map(|j| (a - ((2 * j + 1) as f64 * PI / q as f64).cos()).abs())
        .product();
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// The even-`q` estimate exactly as displayed in its published form:
/// `1 - (1-log2)/log q - (2 log 2 - 2 I/(q cos(π/q)))/(q log q) - log cos(π/q)/log q`.
pub fn bound_prop4(q: usize) -> Result<f64> {
    check_even_q(q)?;
    let (qf, lq) = (q as f64, (q as f64).ln());
    let c = (PI / qf).cos();
    let i = log_integral(q)?;
    Ok(1.0 - (1.0 - LN_2) / lq - (2.0 * LN_2 - 2.0 / (qf * c) * i) / (qf * lq) - c.ln() / lq)
}

/// The same estimate obtained by substituting the integral identity into
/// `1 + κ'(1)/log q`; agrees with [`bound_theorem3`] up to quadrature error.
pub fn bound_prop4_substituted(q: usize) -> Result<f64> {
    check_even_q(q)?;
    let (qf, lq) = (q as f64, (q as f64).ln());
    let c = (PI / qf).cos();
    let i = log_integral(q)?;
    Ok(1.0 - (1.0 - LN_2) / lq - (2.0 * LN_2 + 2.0 / (qf * c) * i) / (qf * lq) + c.ln() / lq)
}

/// `1 - (1-log2)/log q - 4π/(q log q) - (1/cos(π/q) - 1)/log q`.
pub fn bound_prop5(q: usize) -> Result<f64> {
    check_q(q)?;
    let (qf, lq) = (q as f64, (q as f64).ln());
    Ok(1.0 - (1.0 - LN_2) / lq - 4.0 * PI / (qf * lq) - (1.0 / (PI / qf).cos() - 1.0) / lq)
}

/// `h(a) = ∫_0^1 (1 + a cos 2πx) log(1 + a cos 2πx) dx`.
pub fn fan_entropy(a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    // symmetric about x = 1/2; with θ = 2πx the half-angle forms put the zero
    // of 1 + a cos θ at x = 1/2 (a > 0) or x = 0 (a < 0)
    let r = TanhSinh::with_tol(1e-14).integrate(0.0, 0.5, |n: Node| {
        let u = if a >= 0.0 {
            let s = (PI * n.from_right).sin();
            (1.0 - a) + 2.0 * a * s * s
        } else {
            let s = (PI * n.from_left).sin();
            (1.0 + a) - 2.0 * a * s * s
        };
        xlogx(u)
    });
    2.0 * r.value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzCheck {
    pub pairs: usize,
    /// Largest `|h(a) - h(b)| / |a - b|` observed.
    pub max_ratio: f64,
    pub worst_pair: (f64, f64),
    pub pass: bool,
}

/// Samples `pairs` uniform pairs in `[-1, 1]²` and checks `|h(a) - h(b)| <= |a - b|`.
pub fn fan_entropy_lipschitz_check(pairs: usize, seed: u64) -> LipschitzCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<(f64, f64)> = (0..pairs)
        .map(|_| (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
        .collect();
    let (max_ratio, worst_pair) = samples
        .par_iter()
        .map(|&(a, b)| {
            let gap = (a - b).abs();
            let ratio = if gap > 0.0 { (fan_entropy(a) - fan_entropy(b)).abs() / gap } else { 0.0 };
            (ratio, (a, b))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, (0.0, 0.0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    LipschitzCheck { pairs, max_ratio, worst_pair, pass: max_ratio <= 1.0 + 1e-9 }
}

/// Fan's main term `1 - h(a)/log q`; the `O(a/(q² log q))` remainder is not modelled.
pub fn fan_main_term(params: RieszParams) -> f64 {
    1.0 - fan_entropy(params.a) / (params.q as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeyriereEstimate {
    pub estimate: f64,
    /// Runs at `(K+1, M)` and `(K, 2M)` agree with `estimate` within 0.01.
    pub converged: bool,
    pub refined_order: f64,
    pub refined_grid: f64,
}

const PEYRIERE_AGREEMENT: f64 = 0.01;

/// `1 - (1/log q) ∫ log(1 + a cos 2πx) P_K(x) dx` on the midpoint grid `(j + 1/2)/M`.
pub fn peyriere_integral(params: RieszParams, order: usize, m: usize) -> Result<f64> {
    if m == 0 {
        return invalid("grid size must be positive");
    }
    let denom = 2 * m as u64;
    let steps: Vec<u64> = (0..order.max(1))
        .map(|k| mod_pow(params.q as u64, k as u64, denom))
        .collect();
    let a = params.a;
    let value = |j: u64| -> f64 {
        let odd = 2 * j + 1;
        let mut prod = 1.0;
        let mut first = 0.0;
        for (k, &s) in steps.iter().enumerate() {
            let r = ((s as u128 * odd as u128) % denom as u128) as f64;
            let f = riesz_factor(a, 2.0 * PI * r / denom as f64);
            if k == 0 {
                first = f;
            }
            if k < order {
                prod *= f;
            }
        }
        if first <= 0.0 {
            0.0
        } else {
            first.ln() * prod
        }
    };
    const CHUNK: u64 = 1 << 14;
    let chunks = (m as u64).div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| neumaier((c * CHUNK..((c + 1) * CHUNK).min(m as u64)).map(value)))
        .collect();
    let mean = neumaier(partial) / m as f64;
    Ok(1.0 - mean / (params.q as f64).ln())
}

/// Peyrière's formula on partial products, with a refinement-based
/// convergence flag. The value is a comparison figure, not a certificate.
pub fn peyriere_dimension(params: RieszParams, order: usize, m: usize) -> Result<PeyriereEstimate> {
    let qk = q_pow(params.q, order)?;
    if !(m as u64).is_multiple_of(qk) {
        return invalid(format!("grid size {m} is not a multiple of q^K = {qk}"));
    }
    let estimate = peyriere_integral(params, order, m)?;
    let refined_order = peyriere_integral(params, order + 1, m)?;
    let refined_grid = peyriere_integral(params, order, 2 * m)?;
    let converged = (estimate - refined_order).abs() < PEYRIERE_AGREEMENT
        && (estimate - refined_grid).abs() < PEYRIERE_AGREEMENT;
    Ok(PeyriereEstimate { estimate, converged, refined_order, refined_grid })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GDerivativeCheck {
    /// Grid maximum of `|g'(x)|` over all sampled `a`.
    pub sup_g_prime: f64,
    /// Grid maximum of `sin x (1 + log(1 + cos x))` on `[0, π/2]`.
    pub l_constant: f64,
    pub pass: bool,
}

/// `|g'(x)| = |a sin x (1 + log(1 + a cos x))|` for `g = (1 + a cos x) log(1 + a cos x)`.
pub fn g_prime_abs(a: f64, x: f64) -> f64 {
    let u = riesz_factor(a, x);
    if u <= 0.0 {
        // sin x log u → 0 at the zero of u
        return 0.0;
    }
    (a * x.sin() * (1.0 + u.ln())).abs()
}

pub const G_GRID: usize = 100_000;

pub fn g_derivative_bound_check() -> GDerivativeCheck {
    let amps: Vec<f64> = (0..=20).map(|i| -1.0 + 0.1 * i as f64).collect();
    let sup_g_prime = amps
        .par_iter()
        .map(|&a| {
            (0..G_GRID)
                .map(|i| g_prime_abs(a, 2.0 * PI * i as f64 / G_GRID as f64))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let l_constant = (0..=G_GRID)
        .map(|i| {
            let x = 0.5 * PI * i as f64 / G_GRID as f64;
            x.sin() * (1.0 + (1.0 + x.cos()).ln())
        })
        .fold(f64::NEG_INFINITY, f64::max);
    GDerivativeCheck {
        sup_g_prime,
        l_constant,
        pass: sup_g_prime <= 2.0 && (1.2..=1.25).contains(&l_constant),
    }
}

/// Masses of the `q^n` intervals `[i/q^n, (i+1)/q^n]` of a density given by
/// its spectrum. Frequencies are grouped by residue mod `q^n` and the
/// antiderivative is evaluated on the grid by one FFT.
pub fn level_masses(spec: &SparseSpectrum, q: usize, level: usize) -> Result<Vec<f64>> {
    let count = (q as u64).checked_pow(level as u32).unwrap_or(u64::MAX);
    if count > MAX_ENTROPY_INTERVALS {
        return Err(Error::Resource(format!(
            "{q}^{level} intervals exceeds limit {MAX_ENTROPY_INTERVALS}"
        )));
    }
    let n = count as usize;
    let mut g = vec![Complex64::new(0.0, 0.0); n];
    for (&f, &c) in spec.coeffs() {
        if f != 0 {
            g[f.rem_euclid(n as i64) as usize] += c / Complex64::new(0.0, 2.0 * PI * f as f64);
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut g);
    let width = spec.mass() / n as f64;
    Ok((0..n).map(|i| width + g[(i + 1) % n].re - g[i].re).collect())
}

/// `H_n / (n log q)` with `H_n` the entropy of the level-`n` masses of `P_K`.
pub fn entropy_dimension_estimate(params: RieszParams, order: usize, level: usize) -> Result<f64> {
    if level == 0 {
        return invalid("level must be positive");
    }
    if order < level {
        return invalid(format!("truncation order {order} below level {level}"));
    }
    let spec = riesz_spectrum(params, order)?;
    let masses = level_masses(&spec, params.q, level)?;
    if let Some((i, m)) = masses.iter().enumerate().find(|(_, &m)| m < -1e-10) {
        return Err(Error::Numeric(format!("negative mass {m:e} on interval {i}")));
    }
    let h = -neumaier(masses.iter().map(|&m| xlogx(m.max(0.0))));
    Ok(h / (level as f64 * (params.q as f64).ln()))
}
