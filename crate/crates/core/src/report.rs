//! Report assembly for the command-line tool: run configuration, the JSON
//! envelope, bound tables and the verification suites.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kappa::{dimension_bound, DimensionBound, KappaProblem};
use crate::martingale::{
    direct_average, dft_lemma_vector, growth_check, martingale_levels, phi_kernel_mass_sandwich,
    projected_difference, random_subsets, sample_on_grid, set_average_check, sibling_difference_vector,
    spectral_projection_check, wb_membership_check, QadicGrid, TreeAddress, INEQUALITY_SLACK, STRUCTURAL_TOL,
};
use crate::riesz::{
    bound_prop4, bound_prop4_substituted, bound_prop5, bound_theorem3, chebyshev_identity_residual_seeded,
    entropy_dimension_estimate, fan_entropy_lipschitz_check, fan_main_term, g_derivative_bound_check,
    kappa_prime_riesz, partial_product_values, peyriere_dimension, phase_objective, riesz_spectrum, RieszParams,
};
use crate::zq::{counterexample_measure, in_cb, ResidueSet};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default directory for output files.
pub const OUT_DIR_ENV: &str = "HAUSDIM_OUT_DIR";

/// CSV header of [`BoundRow`], in order.
pub const CSV_COLUMNS: [&str; 14] = [
    "q",
    "B",
    "kappa_prime_1",
    "bound",
    "subgroup_bound",
    "delta",
    "theorem3",
    "prop4",
    "prop5",
    "fan_main",
    "peyriere",
    "peyriere_converged",
    "entropy_est",
    "fan_consistency",
];

pub const FAN_CONSISTENCY_BUDGET: f64 = 10.0;
pub const PEYRIERE_DOMINANCE_MARGIN: f64 = 0.02;
const SET_AVERAGE_BETA: f64 = 0.5;
const SUBSET_COUNT: usize = 100;
const LIPSCHITZ_PAIRS: usize = 10_000;
const DIRECT_AVERAGE_POINTS: u64 = 64;
/// Roundoff allowance for `κ(1-h)/h` at `h = 1e-4`.
const FD_ROUNDOFF: f64 = 1e-9;

/// Process exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Resource(_) => 3,
        Error::InvalidInput(_) | Error::Precondition(_) => 2,
        Error::Numeric(_) => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// Echo of everything that determines a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub q: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Truncation order of the Riesz product used by Peyrière's formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Grid depth.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub p: Vec<f64>,
    /// Midpoint grid size for Peyrière's formula.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    /// Level of the entropy estimate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q_max: Option<usize>,
    pub seed: u64,
    pub format: Option<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// The checked quantity (a residual, slack or value, see `detail`).
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

impl CheckResult {
    /// Passes when `residual <= tolerance`.
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: residual <= tolerance, residual, tolerance, detail: String::new() }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            pass: value >= threshold,
            residual: value,
            tolerance: threshold,
            detail: "lower threshold".into(),
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            residual: if pass { 0.0 } else { 1.0 },
            tolerance: 0.0,
            detail: detail.into(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub version: String,
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<u64>,
}

impl ReportEnvelope {
    pub fn new(config: RunConfig, results: Value, checks: Vec<CheckResult>) -> Self {
        Self { version: TOOL_VERSION.into(), config, results, checks, wall_time_ms: None }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }

    /// The envelope without the timing field, for reproducibility comparisons.
    pub fn payload_json(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_ms = None;
        copy.to_json()
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "hausdim {} {}", self.version, self.config.command)?;
        write_value(&mut w, "", &self.results)?;
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            write!(w, "{mark} {} value={:e} tol={:e}", c.name, c.residual, c.tolerance)?;
            if !c.detail.is_empty() {
                write!(w, " ({})", c.detail)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn write_value<W: Write>(w: &mut W, prefix: &str, v: &Value) -> std::io::Result<()> {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                write_value(w, &key, x)?;
            }
            Ok(())
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            for (i, x) in items.iter().enumerate() {
                write_value(w, &format!("{prefix}[{i}]"), x)?;
            }
            Ok(())
        }
        _ => writeln!(w, "{prefix}: {v}"),
    }
}

/// One row of the Riesz comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub q: usize,
    #[serde(rename = "B")]
    pub b: String,
    pub kappa_prime_1: f64,
    pub bound: f64,
    pub subgroup_bound: f64,
    pub delta: f64,
    pub theorem3: f64,
    /// Published form, even `q` only.
    pub prop4: Option<f64>,
    pub prop5: f64,
    pub fan_main: f64,
    pub peyriere: Option<f64>,
    pub peyriere_converged: Option<bool>,
    pub entropy_est: Option<f64>,
    /// `|theorem3 - fan_main| q log q`
    pub fan_consistency: f64,
}

pub fn write_csv<W: Write>(rows: &[BoundRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Resource(format!("csv output: {e}")))?;
    }
    out.flush().map_err(|e| Error::Resource(format!("csv output: {e}")))
}

/// Comparison-value settings for a Riesz row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszOptions {
    pub a: f64,
    pub order: Option<usize>,
    pub grid: Option<usize>,
    pub level: Option<usize>,
    pub peyriere: bool,
    pub entropy: bool,
}

impl Default for RieszOptions {
    fn default() -> Self {
        Self { a: 1.0, order: None, grid: None, level: None, peyriere: true, entropy: true }
    }
}

fn largest_power_at_most(q: usize, cap: u64, max_exp: usize) -> usize {
    let mut k = 1;
    while k < max_exp && (q as u64).saturating_pow(k as u32 + 1) <= cap {
        k += 1;
    }
    k
}

/// Default truncation order for Peyrière's formula: `q^K <= 2^16`, at most 8.
pub fn default_peyriere_order(q: usize) -> usize {
    largest_power_at_most(q, 1 << 16, 8)
}

/// Smallest multiple of `q^K` that is at least `2^20`.
pub fn default_peyriere_grid(q: usize, order: usize) -> Result<usize> {
    let qk = (q as u64)
        .checked_pow(order as u32)
        .filter(|&x| x <= 1 << 26)
        .ok_or_else(|| Error::Resource(format!("{q}^{order} grid points")))?;
    Ok((qk * (1u64 << 20).div_ceil(qk)) as usize)
}

/// Default entropy level: `q^n <= 10^6`, at most 5.
pub fn default_entropy_level(q: usize) -> usize {
    largest_power_at_most(q, 1_000_000, 5)
}

pub fn riesz_row(q: usize, opts: &RieszOptions) -> Result<BoundRow> {
    let params = RieszParams::new(opts.a, q)?;
    let b = ResidueSet::new(q, [1, q - 1])?;
    let db = dimension_bound(&b)?;
    let theorem3 = bound_theorem3(q)?;
    let fan_main = fan_main_term(params);
    let (peyriere, peyriere_converged) = if opts.peyriere {
        let order = opts.order.unwrap_or_else(|| default_peyriere_order(q));
        let grid = match opts.grid {
            Some(m) => m,
            None => default_peyriere_grid(q, order)?,
        };
        let est = peyriere_dimension(params, order, grid)?;
        (Some(est.estimate), Some(est.converged))
    } else {
        (None, None)
    };
    let entropy_est = if opts.entropy {
        let level = opts.level.unwrap_or_else(|| default_entropy_level(q));
        Some(entropy_dimension_estimate(params, 2 * level, level)?)
    } else {
        None
    };
    Ok(BoundRow {
        q,
        b: b.label(),
        kappa_prime_1: db.kappa_prime_1,
        bound: db.bound,
        subgroup_bound: db.subgroup_bound,
        delta: db.delta,
        theorem3,
        prop4: if q.is_multiple_of(2) { Some(bound_prop4(q)?) } else { None },
        prop5: bound_prop5(q)?,
        fan_main,
        peyriere,
        peyriere_converged,
        entropy_est,
        fan_consistency: (theorem3 - fan_main).abs() * q as f64 * (q as f64).ln(),
    })
}

/// Checks attached to a single Riesz row.
pub fn riesz_row_checks(row: &BoundRow) -> Vec<CheckResult> {
    let q = row.q;
    let closed = kappa_prime_riesz(q).unwrap_or(f64::NAN);
    let mut checks = vec![
        CheckResult::at_most(
            format!("q={q}: closed form matches enumeration"),
            (closed - row.kappa_prime_1).abs(),
            1e-9,
        ),
        CheckResult::at_most(format!("q={q}: prop5 <= theorem3"), row.prop5 - row.theorem3, 1e-12),
    ];
    if let (Some(p), Some(true)) = (row.peyriere, row.peyriere_converged) {
        checks.push(CheckResult::at_most(
            format!("q={q}: theorem3 <= peyriere + {PEYRIERE_DOMINANCE_MARGIN}"),
            row.theorem3 - p,
            PEYRIERE_DOMINANCE_MARGIN,
        ));
    }
    checks
}

pub fn cmd_bound(config: RunConfig, q: usize, b: &ResidueSet) -> Result<ReportEnvelope> {
    let db: DimensionBound = dimension_bound(b)?;
    let checks = vec![
        CheckResult::at_least("bound >= subgroup bound", db.bound - db.subgroup_bound, -1e-12),
        CheckResult::flag(
            "bound in [0, 1]",
            (0.0..=1.0).contains(&db.bound),
            format!("q={q}"),
        ),
    ];
    Ok(ReportEnvelope::new(config, serde_json::to_value(&db).expect("serializable"), checks))
}

pub fn cmd_riesz(config: RunConfig, qs: &[usize], opts: &RieszOptions) -> Result<(ReportEnvelope, Vec<BoundRow>)> {
    let rows = qs.iter().map(|&q| riesz_row(q, opts)).collect::<Result<Vec<_>>>()?;
    let checks = rows.iter().flat_map(riesz_row_checks).collect();
    let env = ReportEnvelope::new(config, json!({ "rows": rows }), checks);
    Ok((env, rows))
}

pub fn cmd_sweep(config: RunConfig, qs: &[usize], opts: &RieszOptions) -> Result<(ReportEnvelope, Vec<BoundRow>)> {
    if qs.is_empty() {
        return Err(Error::InvalidInput("empty q range".into()));
    }
    let rows = qs.iter().map(|&q| riesz_row(q, opts)).collect::<Result<Vec<_>>>()?;
    let mut checks: Vec<CheckResult> = rows.iter().flat_map(riesz_row_checks).collect();
    if opts.a == 1.0 {
        for r in rows.iter().filter(|r| r.q >= 8) {
            checks.push(CheckResult::at_most(
                format!("q={}: fan consistency", r.q),
                r.fan_consistency,
                FAN_CONSISTENCY_BUDGET,
            ));
        }
    }
    let env = ReportEnvelope::new(config, json!({ "rows": rows }), checks);
    Ok((env, rows))
}

/// Parses `lo..hi` (inclusive) or a single value.
pub fn parse_q_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("cannot parse q range {s:?}"));
    match s.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
        }
        None => {
            let q = s.trim().parse().map_err(|_| bad())?;
            Ok((q, q))
        }
    }
}

/// Step of a sweep: `+k` / `k` adds, `xk` multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Add(usize),
    Mul(usize),
}

pub fn parse_step(s: &str) -> Result<Step> {
    let bad = || Error::InvalidInput(format!("cannot parse step {s:?}"));
    let s = s.trim();
    let (step, n) = match s.strip_prefix(['x', '*']) {
        Some(rest) => (Step::Mul as fn(usize) -> Step, rest),
        None => (Step::Add as fn(usize) -> Step, s.strip_prefix('+').unwrap_or(s)),
    };
    let n: usize = n.parse().map_err(|_| bad())?;
    let valid = match step(n) {
        Step::Add(k) => k >= 1,
        Step::Mul(k) => k >= 2,
    };
    if valid {
        Ok(step(n))
    } else {
        Err(bad())
    }
}

pub fn sweep_values(lo: usize, hi: usize, step: Step, even_only: bool) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = lo;
    while q <= hi && q > 0 {
        if !even_only || q.is_multiple_of(2) {
            out.push(q);
        }
        q = match step {
            Step::Add(k) => q + k,
            Step::Mul(k) => q * k,
        };
    }
    out
}

/// Settings for the martingale suite.
#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleSuite {
    pub qs: Vec<usize>,
    pub a: f64,
    pub depth: usize,
    pub ps: Vec<f64>,
    pub subsets: usize,
    pub seed: u64,
}

impl Default for MartingaleSuite {
    fn default() -> Self {
        Self { qs: vec![3, 4], a: 1.0, depth: 6, ps: vec![1.25, 2.0, 4.0], subsets: SUBSET_COUNT, seed: 0 }
    }
}

pub fn verify_martingale(suite: &MartingaleSuite) -> Result<(Value, Vec<CheckResult>)> {
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for &q in &suite.qs {
        let n = suite.depth;
        let params = RieszParams::new(suite.a, q)?;
        let grid = QadicGrid::new(q, n)?;
        let spec = riesz_spectrum(params, n)?;
        let f = sample_on_grid(&spec, &grid)?;
        let seq = martingale_levels(&f, &grid)?;
        let sup = seq.sup_norm();
        let tag = format!("q={q} N={n}");

        let two_path = partial_product_values(params, n, grid.size as usize)?;
        let dev = two_path.iter().zip(&f).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        checks.push(CheckResult::at_most(format!("{tag}: sampling matches product"), dev, 1e-10 * sup.max(1.0)));

        checks.push(CheckResult::at_most(format!("{tag}: martingale property"), seq.martingale_residual(), 1e-12 * sup.max(1.0)));

        let mut worst_direct = 0.0f64;
        for k in 0..=n {
            let level = seq.level(k);
            let step = (grid.size / DIRECT_AVERAGE_POINTS).max(1);
            for j in (0..grid.size).step_by(step as usize) {
                let d = direct_average(&f, &grid, k, j);
                worst_direct = worst_direct.max((d - level[(j % level.len() as u64) as usize]).abs());
            }
        }
        checks.push(CheckResult::at_most(format!("{tag}: levels equal direct averages"), worst_direct, STRUCTURAL_TOL * sup));
        checks.push(CheckResult::at_least(format!("{tag}: non-negative levels"), seq.min_value(), -STRUCTURAL_TOL));

        let proj = (0..=n).map(|k| spectral_projection_check(&spec, &seq, k)).collect::<Result<Vec<_>>>()?;
        checks.push(CheckResult::at_most(
            format!("{tag}: spectral projection"),
            proj.iter().copied().fold(0.0, f64::max),
            STRUCTURAL_TOL * sup,
        ));

        let mut worst_diff = 0.0f64;
        for k in 1..=n {
            let df = projected_difference(&spec, &grid, k);
            let (fk, fk1) = (seq.level(k), seq.level(k - 1));
            for (j, d) in df.iter().enumerate() {
                let j = j as u64;
                let x = fk[(j % fk.len() as u64) as usize] - fk1[(j % fk1.len() as u64) as usize];
                worst_diff = worst_diff.max((x - d).abs());
            }
        }
        checks.push(CheckResult::at_most(format!("{tag}: differences match exact-division filter"), worst_diff, STRUCTURAL_TOL * sup));

        let mut worst_lemma = 0.0f64;
        let mut worst_sum = 0.0f64;
        for level in 0..n {
            for class in 0..grid.atoms(level) {
                let addr = TreeAddress { level, class };
                let d = sibling_difference_vector(&seq, addr)?;
                worst_sum = worst_sum.max(d.iter().sum::<f64>().abs());
                let lemma = dft_lemma_vector(&spec, &grid, addr)?;
                for (x, z) in d.iter().zip(&lemma) {
                    worst_lemma = worst_lemma.max((x - z.re).abs()).max(z.im.abs());
                }
            }
        }
        checks.push(CheckResult::at_most(format!("{tag}: sibling differences sum to zero"), worst_sum, 1e-12 * sup.max(1.0)));
        checks.push(CheckResult::at_most(format!("{tag}: differences follow the DFT synthesis"), worst_lemma, STRUCTURAL_TOL * sup));

        let b = ResidueSet::new(q, [1, q - 1])?;
        let wb = wb_membership_check(&spec, &seq, &b)?;
        checks.push(CheckResult::at_most(format!("{tag}: differences lie in W_B"), wb, STRUCTURAL_TOL * sup));

        let problem = KappaProblem::new(&b)?;
        let mass = spec.mass();
        let subsets = random_subsets(&grid, suite.subsets, suite.seed);
        let mut per_p = Vec::new();
        for &p in &suite.ps {
            let g = growth_check(&seq, &problem, p, mass)?;
            let detail = g.violations.first().cloned().unwrap_or_default();
            checks.push(CheckResult {
                name: format!("{tag} p={p}: growth inequalities"),
                pass: g.pass,
                residual: g.worst_slack,
                tolerance: -INEQUALITY_SLACK,
                detail: if detail.is_empty() { "worst relative slack".into() } else { detail },
            });
            let mut failed = 0;
            let mut min_slack = f64::INFINITY;
            for s in &subsets {
                let r = set_average_check(&seq, s, SET_AVERAGE_BETA, p, g.kappa, mass)?;
                if !r.pass {
                    failed += 1;
                }
                min_slack = min_slack.min((r.bound - r.average) / r.bound);
            }
            checks.push(CheckResult::flag(
                format!("{tag} p={p}: set averages on {} subsets", subsets.len()),
                failed == 0,
                format!("{failed} failures, smallest relative slack {min_slack:.6e}"),
            ));
            per_p.push(json!({
                "p": p,
                "kappa": g.kappa,
                "step_ratios": g.step_ratios,
                "worst_step_slack": g.worst_step_slack,
                "worst_atom_slack": g.worst_atom_slack,
                "global_lhs": g.global_lhs,
                "global_rhs": g.global_rhs,
                "set_average_min_slack": min_slack,
            }));
        }

        let sandwich = phi_kernel_mass_sandwich(&spec, n)?;
        checks.push(CheckResult::at_most(format!("{tag}: kernel mass sandwich"), sandwich.max_violation, STRUCTURAL_TOL));

        results.push(json!({
            "q": q,
            "depth": n,
            "a": suite.a,
            "grid_points": grid.size,
            "sup_norm": sup,
            "wb_residual": wb,
            "growth": per_p,
            "sandwich": sandwich,
        }));
    }
    Ok((json!(results), checks))
}

/// Bound structure over all symmetric sets for `3 <= q <= q_max`.
pub fn verify_kappa(q_max: usize) -> Result<(Value, Vec<CheckResult>)> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for q in 3..=q_max {
        let mut worst_dom = f64::INFINITY;
        let mut worst_strict = f64::INFINITY;
        let mut min_positive = f64::INFINITY;
        let mut fd_failures = Vec::new();
        for b in ResidueSet::all_symmetric(q)? {
            if b.is_empty() {
                continue;
            }
            let db = dimension_bound(&b)?;
            worst_dom = worst_dom.min(db.raw_bound.min(1.0) - db.subgroup_bound);
            if db.proper_inclusion {
                worst_strict = worst_strict.min(db.bound - db.subgroup_bound);
            }
            if !b.is_full() {
                min_positive = min_positive.min(db.bound);
            }
            if q <= 8 {
                let problem = KappaProblem::new(&b)?;
                let kp = problem.kappa_prime_1().value;
                let fd = [1e-2, 1e-3, 1e-4]
                    .iter()
                    .map(|&h| problem.left_derivative_fd(h))
                    .collect::<Result<Vec<_>>>()?;
                // nonincreasing in h, so increasing along the list
                let monotone = fd[0] <= fd[1] + FD_ROUNDOFF && fd[1] <= fd[2] + FD_ROUNDOFF;
                let close = (fd[2] - kp).abs() <= 1e-3;
                let below = fd.iter().all(|&x| x <= kp + FD_ROUNDOFF);
                if !(monotone && close && below) {
                    fd_failures.push(format!("{{{}}}: {fd:?} vs {kp}", b.label()));
                }
            }
            rows.push(json!({
                "q": q,
                "B": b.label(),
                "kappa_prime_1": db.kappa_prime_1,
                "bound": db.bound,
                "subgroup_bound": db.subgroup_bound,
                "delta": db.delta,
                "vertex_count": db.vertex_count,
            }));
        }
        checks.push(CheckResult::at_least(format!("q={q}: bound dominates subgroup bound"), worst_dom, -1e-12));
        if worst_strict.is_finite() {
            checks.push(CheckResult::at_least(format!("q={q}: strict for proper inclusions"), worst_strict, 1e-6));
        }
        if q <= 10 && min_positive.is_finite() {
            checks.push(CheckResult::at_least(format!("q={q}: positive bound for B != full"), min_positive, f64::MIN_POSITIVE));
        }
        if q <= 8 {
            checks.push(CheckResult::flag(
                format!("q={q}: finite-difference sandwich"),
                fd_failures.is_empty(),
                fd_failures.join("; "),
            ));
        }
        if q <= 12 {
            let b = ResidueSet::new(q, [1, q - 1])?;
            let enumerated = KappaProblem::new(&b)?.kappa_prime_1().value;
            checks.push(CheckResult::at_most(
                format!("q={q}: closed form matches enumeration"),
                (kappa_prime_riesz(q)? - enumerated).abs(),
                1e-9,
            ));
        }
    }
    let cx = counterexample_measure(4, 1)?;
    let b1 = ResidueSet::new(4, [1])?;
    let inside = cx.spectrum.find_frequency(|n| in_cb(n, &b1)).is_none();
    checks.push(CheckResult::flag(
        "counterexample spectrum in C_{1} with q atoms",
        inside && cx.atoms.len() == cx.q && cx.is_signed_or_complex(),
        "complex weights: full-dimension support is compatible with the restricted spectrum, so non-negativity cannot be dropped",
    ));
    Ok((json!({ "sets": rows, "counterexample": cx }), checks))
}

/// Closed forms, identities and auxiliary lemmas for Riesz products.
pub fn verify_riesz_identities(q_max: usize, seed: u64) -> Result<(Value, Vec<CheckResult>)> {
    let mut checks = Vec::new();
    let mut identity = Vec::new();
    for q in (4..=q_max.min(64)).step_by(2) {
        let r = chebyshev_identity_residual_seeded(q, seed)?;
        checks.push(CheckResult::at_most(format!("q={q}: log-integral identity"), r.residual, 1e-7));
        checks.push(CheckResult::at_most(format!("q={q}: Chebyshev product"), r.product_max_rel_err, 1e-9));
        identity.push(json!({
            "q": q,
            "residual": r.residual,
            "product_max_rel_err": r.product_max_rel_err,
            "prop4": bound_prop4(q)?,
            "prop4_substituted": bound_prop4_substituted(q)?,
            "theorem3": bound_theorem3(q)?,
        }));
    }
    for q in 3..=q_max.min(12) {
        let grid: Vec<f64> = (0..=1000).map(|i| -PI / q as f64 + 2.0 * PI / q as f64 * i as f64 / 1000.0).collect();
        let values: Vec<f64> = grid.iter().map(|&phi| phase_objective(q, phi)).collect();
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let endpoint = values[0].max(values[1000]);
        checks.push(CheckResult::at_most(format!("q={q}: endpoint optimality"), max - endpoint, 1e-9));
        let b = ResidueSet::new(q, [1, q - 1])?;
        let enumerated = KappaProblem::new(&b)?.kappa_prime_1().value;
        checks.push(CheckResult::at_most(
            format!("q={q}: closed form matches enumeration"),
            (kappa_prime_riesz(q)? - enumerated).abs(),
            1e-9,
        ));
        checks.push(CheckResult::at_most(format!("q={q}: prop5 <= theorem3"), bound_prop5(q)? - bound_theorem3(q)?, 1e-12));
    }
    let g = g_derivative_bound_check();
    checks.push(CheckResult::at_most("sup |g'| <= 2", g.sup_g_prime, 2.0));
    checks.push(CheckResult::flag("L in [1.2, 1.25]", (1.2..=1.25).contains(&g.l_constant), format!("L = {}", g.l_constant)));
    let lip = fan_entropy_lipschitz_check(LIPSCHITZ_PAIRS, seed);
    checks.push(CheckResult::at_most(format!("h is 1-Lipschitz on {} pairs", lip.pairs), lip.max_ratio, 1.0 + 1e-9));

    let params = RieszParams::new(1.0, 4)?;
    let pey = peyriere_dimension(params, 8, 1 << 20)?;
    let t3 = bound_theorem3(4)?;
    checks.push(CheckResult::flag("q=4: Peyriere estimate converged", pey.converged, format!("{pey:?}")));
    checks.push(CheckResult::at_most("q=4: theorem3 <= peyriere + 0.02", t3 - pey.estimate, PEYRIERE_DOMINANCE_MARGIN));
    let entropy = entropy_dimension_estimate(params, 10, 5)?;
    checks.push(CheckResult::at_least("q=4: entropy estimate", entropy, 0.45));

    Ok((
        json!({
            "identities": identity,
            "g_derivative": g,
            "lipschitz": lip,
            "peyriere_q4": pey,
            "entropy_q4": entropy,
        }),
        checks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_steps() {
        assert_eq!(parse_q_range("8..128").unwrap(), (8, 128));
        assert_eq!(parse_q_range("4..=16").unwrap(), (4, 16));
        assert_eq!(parse_q_range("5").unwrap(), (5, 5));
        assert!(parse_q_range("a..3").is_err());
        assert_eq!(parse_step("x2").unwrap(), Step::Mul(2));
        assert_eq!(parse_step("3").unwrap(), Step::Add(3));
        assert!(parse_step("x1").is_err());
        assert_eq!(sweep_values(8, 128, Step::Mul(2), false), vec![8, 16, 32, 64, 128]);
        assert_eq!(sweep_values(3, 8, Step::Add(1), true), vec![4, 6, 8]);
        assert!(sweep_values(9, 4, Step::Add(1), false).is_empty());
    }

    #[test]
    fn defaults_respect_guards() {
        assert_eq!(default_peyriere_order(4), 8);
        assert_eq!(default_peyriere_order(128), 2);
        assert_eq!(default_peyriere_grid(4, 8).unwrap(), 1 << 20);
        assert_eq!(default_peyriere_grid(3, 2).unwrap() % 9, 0);
        assert_eq!(default_entropy_level(4), 5);
        assert_eq!(default_entropy_level(128), 2);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Resource("x".into())), 3);
        assert_eq!(exit_code(&Error::InvalidInput("x".into())), 2);
        assert_eq!(exit_code(&Error::Numeric("x".into())), 1);
    }

    #[test]
    fn envelope_round_trip() {
        let cfg = RunConfig { command: "bound".into(), q: vec![4], b: Some("2".into()), seed: 3, ..Default::default() };
        let env = cmd_bound(cfg, 4, &ResidueSet::new(4, [2]).unwrap()).unwrap();
        assert!(env.all_pass());
        assert!((env.results["bound"].as_f64().unwrap() - 0.5).abs() < 1e-12);
        let back: ReportEnvelope = serde_json::from_str(&env.to_json()).unwrap();
        assert_eq!(back, env);
        let mut text = Vec::new();
        env.write_text(&mut text).unwrap();
        assert!(String::from_utf8(text).unwrap().contains("PASS bound >= subgroup bound"));
    }

    #[test]
    fn csv_header_order() {
        let opts = RieszOptions { peyriere: false, entropy: false, ..Default::default() };
        let row = riesz_row(4, &opts).unwrap();
        let mut buf = Vec::new();
        write_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn riesz_rows() {
        let row = riesz_row(4, &RieszOptions { entropy: false, ..Default::default() }).unwrap();
        assert!((row.theorem3 - 0.5).abs() < 1e-12);
        assert!(row.prop4.is_some());
        assert!(riesz_row_checks(&row).iter().all(|c| c.pass));
        let flat = riesz_row(4, &RieszOptions { a: 0.0, entropy: false, ..Default::default() }).unwrap();
        assert_eq!(flat.peyriere, Some(1.0));
        let r3 = riesz_row(3, &RieszOptions { peyriere: false, entropy: false, ..Default::default() }).unwrap();
        assert!(r3.theorem3.abs() < 1e-12 && r3.prop5 < 0.0 && r3.prop4.is_none());
    }
}
