//! Batch property checks over seeded random ensembles.
//!
//! Each check draws its own generator from `(seed, check name)`, so checks can
//! run concurrently without changing any result.

use std::fmt::Write as _;

use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ChoiChannel;
use crate::channel_opt::output_state;
use crate::divergence::{
    fidelity, log_q_log_euclidean, purified_distance, renyi_divergence, trace_distance, umegaki,
    DivergenceKind,
};
use crate::error::{Error, Result};
use crate::exponent::{
    f_flat_alpha_form, f_minimax_delta_form, first_order_rate, purified_lower_bound,
    purified_objective, sc_exponent_purified, sc_exponent_trace_pure, Dichotomy, Rate,
};
use crate::format::g12;
use crate::operator::{
    apply_pinching, pinching_map, random_density_with, random_kraus_with, random_pure_with,
    random_unitary_with, seeded_rng, CMatrix, DensityOperator, HermitianOperator, SeededRng,
    SupportProjector, DEFAULT_DEGENERACY_TOLERANCE,
};

/// Dimensions the suite accepts.
pub const DIM_RANGE: std::ops::RangeInclusive<usize> = 2..=6;
/// Exponent-level checks run only up to this dimension.
pub const EXPONENT_MAX_DIM: usize = 4;

/// Every property the suite must cover; compared against the registered
/// checks before anything runs.
pub const MANIFEST: &[&str] = &[
    "order-monotonicity/sandwiched",
    "order-monotonicity/petz",
    "order-monotonicity/log-euclidean",
    "sigma-monotonicity/sandwiched",
    "sigma-monotonicity/petz",
    "sigma-monotonicity/log-euclidean",
    "log-euclidean-variational/bound",
    "log-euclidean-variational/optimizer",
    "data-processing/sandwiched",
    "data-processing/petz",
    "data-processing/log-euclidean",
    "pinching-approximation",
    "pinching-inequality",
    "family-ordering",
    "family-ordering/commuting",
    "sandwiched-half-fidelity",
    "pure-state-identity",
    "improved-fuchs-van-de-graaf",
    "fidelity-perturbation",
    "fidelity-relative-entropy",
    "fidelity-block-pinching",
    "exponent/zero-below-rate",
    "exponent/monotone-in-rate",
    "exponent/shared-lower-bound",
    "exponent/flat-dominates",
    "exponent/commuting-collapse",
    "exponent/order-one-zero",
    "exponent/support-failure",
    "exponent/minimax-equality",
    "exponent/trace-pure-consistency",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Slack must be at least `−tolerance`.
    Inequality,
    /// Deviation must be at most `tolerance` in absolute value.
    Equality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub trials: usize,
    /// Smallest slack (inequalities) or largest absolute deviation
    /// (equalities) seen.
    pub worst_slack: f64,
    pub pass: bool,
    /// First error raised by a trial, if any; such a check fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckResult {
    /// Distance from failing; negative when failing.
    fn margin(&self, tolerance: f64) -> f64 {
        match self.kind {
            CheckKind::Inequality => self.worst_slack + tolerance,
            CheckKind::Equality => tolerance - self.worst_slack,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
    pub seed: u64,
    pub trials: usize,
    pub dims_tested: Vec<usize>,
    pub tolerance: f64,
    /// Manifest entries with no registered check.
    pub coverage_missing: Vec<String>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.coverage_missing.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "seed {}  trials {}  dims {:?}  tolerance {}",
            self.seed,
            self.trials,
            self.dims_tested,
            g12(self.tolerance)
        );
        let _ = writeln!(out, "{:<width$}  {:<10}  {:>7}  {:>20}  result", "check", "kind", "trials", "worst");
        for c in &self.checks {
            let kind = match c.kind {
                CheckKind::Inequality => "inequality",
                CheckKind::Equality => "equality",
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:<10}  {:>7}  {:>20}  {}",
                c.name,
                kind,
                c.trials,
                g12(c.worst_slack),
                if c.pass { "pass" } else { "FAIL" }
            );
            if let Some(e) = &c.error {
                let _ = writeln!(out, "    error: {e}");
            }
        }
        for m in &self.coverage_missing {
            let _ = writeln!(out, "missing check for {m}");
        }
        out
    }
}

type Trial = fn(&mut SeededRng, usize) -> Result<f64>;

struct Check {
    name: &'static str,
    kind: CheckKind,
    trial: Trial,
    max_dim: usize,
}

/// 64-bit FNV-1a over the seed and the check name.
fn check_seed(seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in seed.to_le_bytes().iter().chain(name.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn run_check(check: &Check, seed: u64, trials: usize, dims: &[usize], tolerance: f64) -> CheckResult {
    let mut rng = seeded_rng(check_seed(seed, check.name));
    let (mut worst, mut count, mut error) = match check.kind {
        CheckKind::Inequality => (f64::INFINITY, 0, None),
        CheckKind::Equality => (0.0_f64, 0, None),
    };
    'outer: for &d in dims.iter().filter(|&&d| d <= check.max_dim) {
        for _ in 0..trials {
            count += 1;
            match (check.trial)(&mut rng, d) {
                Ok(v) => {
                    worst = match check.kind {
                        CheckKind::Inequality if v.is_nan() => f64::NAN,
                        CheckKind::Inequality => worst.min(v),
                        CheckKind::Equality if v.is_nan() => f64::NAN,
                        CheckKind::Equality => worst.max(v.abs()),
                    };
                    if worst.is_nan() {
                        error = Some(format!("trial {count} in dim {d} produced NaN"));
                        break 'outer;
                    }
                }
                Err(e) => {
                    error = Some(format!("dim {d}: {e}"));
                    worst = f64::NAN;
                    break 'outer;
                }
            }
        }
    }
    let pass = error.is_none()
        && match check.kind {
            CheckKind::Inequality => worst >= -tolerance,
            CheckKind::Equality => worst <= tolerance,
        };
    CheckResult {
        name: check.name.to_string(),
        kind: check.kind,
        trials: count,
        worst_slack: worst,
        pass,
        error,
    }
}

// ---------------------------------------------------------------- sampling

fn state(rng: &mut SeededRng, d: usize) -> Result<DensityOperator> {
    let rank = rng.random_range(1..=d);
    random_density_with(d, rank, rng)
}

fn full_rank_state(rng: &mut SeededRng, d: usize) -> Result<DensityOperator> {
    random_density_with(d, d, rng)
}

/// `0.99 ω + 0.01 I/d` with `ω` random, so the result has full support.
fn sigma(rng: &mut SeededRng, d: usize) -> Result<DensityOperator> {
    let w = state(rng, d)?;
    mixed(&w, 0.01)
}

fn mixed(w: &DensityOperator, weight: f64) -> Result<DensityOperator> {
    let d = w.dim();
    DensityOperator::new(
        w.scale(1.0 - weight)
            .add(&HermitianOperator::identity(d).scale(weight / d as f64))?,
    )
}

/// Full-rank state with repeated eigenvalues.
fn degenerate_sigma(rng: &mut SeededRng, d: usize) -> Result<DensityOperator> {
    let levels = rng.random_range(1..=d.max(2) - 1);
    let values: Vec<f64> = (0..levels).map(|_| rng.random_range(0.1..1.0)).collect();
    let diag: Vec<f64> = (0..d).map(|i| values[i % levels]).collect();
    let total: f64 = diag.iter().sum();
    let diag: Vec<f64> = diag.into_iter().map(|x| x / total).collect();
    let u = random_unitary_with(d, rng);
    DensityOperator::new(HermitianOperator::diagonal(&diag).conjugate_by(&u)?)
}

fn random_probabilities(rng: &mut SeededRng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

fn channel(rng: &mut SeededRng, d: usize) -> Result<ChoiChannel> {
    let dout = rng.random_range(2..=d);
    let env = rng.random_range(1..=3).max(d.div_ceil(dout));
    ChoiChannel::from_kraus(&random_kraus_with(d, dout, env, rng)?)
}

fn value(kind: DivergenceKind, alpha: f64, rho: &DensityOperator, sigma: &HermitianOperator) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(umegaki(rho, sigma)?.value);
    }
    Ok(renyi_divergence(kind, alpha, rho, sigma)?.value)
}

/// `a − b`, with `∞ − ∞` counted as satisfied.
fn slack(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY && b == f64::INFINITY {
        f64::INFINITY
    } else {
        a - b
    }
}

fn family_orders(kind: DivergenceKind) -> &'static [f64] {
    match kind {
        DivergenceKind::Sandwiched => &[0.5, 0.7, 0.9, 1.0, 1.5, 2.0, 3.0, 5.0],
        DivergenceKind::Petz => &[0.1, 0.3, 0.6, 0.9, 1.0, 1.3, 1.7, 2.0],
        _ => &[0.1, 0.3, 0.6, 0.9, 1.0, 1.5, 2.0, 3.0],
    }
}

fn sigma_orders(kind: DivergenceKind) -> &'static [f64] {
    match kind {
        DivergenceKind::Sandwiched => &[0.5, 0.8, 2.0, 3.0],
        DivergenceKind::Petz => &[0.2, 0.6, 1.5, 2.0],
        _ => &[0.2, 0.6, 1.5, 3.0],
    }
}

fn dpi_orders(kind: DivergenceKind) -> &'static [f64] {
    match kind {
        DivergenceKind::Sandwiched => &[0.5, 0.8, 2.0, 3.0],
        DivergenceKind::Petz => &[0.2, 0.6, 1.5, 2.0],
        _ => &[0.2, 0.5, 0.9],
    }
}

// ------------------------------------------------------------- divergences

fn order_monotone(kind: DivergenceKind, rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = sigma(rng, d)?;
    let vals = family_orders(kind)
        .iter()
        .map(|&a| value(kind, a, &rho, &s))
        .collect::<Result<Vec<_>>>()?;
    Ok(vals.windows(2).map(|w| slack(w[1], w[0])).fold(f64::INFINITY, f64::min))
}

fn sigma_monotone(kind: DivergenceKind, rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = sigma(rng, d)?;
    let bump = state(rng, d)?.scale(rng.random_range(0.01..1.0));
    let larger = s.add(&bump)?;
    let mut worst = f64::INFINITY;
    for &a in sigma_orders(kind) {
        worst = worst.min(slack(value(kind, a, &rho, &s)?, value(kind, a, &rho, &larger)?));
    }
    Ok(worst)
}

fn data_processing(kind: DivergenceKind, rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = sigma(rng, d)?;
    let n = channel(rng, d)?;
    let nr = output_state(&n.apply(&rho)?)?;
    let ns = output_state(&n.apply(&s)?)?;
    let mut worst = f64::INFINITY;
    for &a in dpi_orders(kind) {
        worst = worst.min(slack(value(kind, a, &rho, &s)?, value(kind, a, &nr, &ns)?));
    }
    Ok(worst)
}

fn order_monotone_sandwiched(rng: &mut SeededRng, d: usize) -> Result<f64> {
    order_monotone(DivergenceKind::Sandwiched, rng, d)
}
fn order_monotone_petz(rng: &mut SeededRng, d: usize) -> Result<f64> {
    order_monotone(DivergenceKind::Petz, rng, d)
}
fn order_monotone_flat(rng: &mut SeededRng, d: usize) -> Result<f64> {
    order_monotone(DivergenceKind::LogEuclidean, rng, d)
}
fn sigma_monotone_sandwiched(rng: &mut SeededRng, d: usize) -> Result<f64> {
    sigma_monotone(DivergenceKind::Sandwiched, rng, d)
}
fn sigma_monotone_petz(rng: &mut SeededRng, d: usize) -> Result<f64> {
    sigma_monotone(DivergenceKind::Petz, rng, d)
}
fn sigma_monotone_flat(rng: &mut SeededRng, d: usize) -> Result<f64> {
    sigma_monotone(DivergenceKind::LogEuclidean, rng, d)
}
fn dpi_sandwiched(rng: &mut SeededRng, d: usize) -> Result<f64> {
    data_processing(DivergenceKind::Sandwiched, rng, d)
}
fn dpi_petz(rng: &mut SeededRng, d: usize) -> Result<f64> {
    data_processing(DivergenceKind::Petz, rng, d)
}
fn dpi_flat(rng: &mut SeededRng, d: usize) -> Result<f64> {
    data_processing(DivergenceKind::LogEuclidean, rng, d)
}

/// `D(τ‖σ) − α/(α−1)·D(τ‖ρ)`.
fn variational_objective(alpha: f64, tau: &DensityOperator, rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    Ok(umegaki(tau, sigma)?.value - alpha / (alpha - 1.0) * umegaki(tau, rho)?.value)
}

/// Random `τ` never beats the optimum: the objective lies above `D♭_α` for
/// `α < 1` and below it for `α > 1`.
fn flat_variational_bound(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = full_rank_state(rng, d)?;
    let s = sigma(rng, d)?;
    let tau = state(rng, d)?;
    let mut worst = f64::INFINITY;
    for alpha in [0.3, 0.7, 1.5, 3.0] {
        let flat = value(DivergenceKind::LogEuclidean, alpha, &rho, &s)?;
        let obj = variational_objective(alpha, &tau, &rho, &s)?;
        worst = worst.min(if alpha < 1.0 { slack(obj, flat) } else { slack(flat, obj) });
    }
    Ok(worst)
}

/// The optimum is attained at `τ ∝ 2^{α log ρ + (1−α) log σ}`.
fn flat_variational_optimizer(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = full_rank_state(rng, d)?;
    let s = sigma(rng, d)?;
    let mut worst = 0.0_f64;
    for alpha in [0.3, 0.7, 1.5, 3.0] {
        let exponent = HermitianOperator::new(
            rho.spectrum().recompose_with(|v| alpha * v.log2())
                + s.spectrum().recompose_with(|v| (1.0 - alpha) * v.log2()),
        )?;
        let tau = DensityOperator::normalized(&HermitianOperator::new(
            exponent.spectrum().recompose_with(|v| (v - exponent.lambda_max()).exp2()),
        )?)?;
        let flat = log_q_log_euclidean(alpha, &rho, &s) / (alpha - 1.0);
        let dev = variational_objective(alpha, &tau, &rho, &s)? - flat;
        worst = worst.max(dev.abs());
    }
    Ok(worst)
}

/// Both sides of the pinching approximation; half the trials use a
/// degenerate `σ`.
fn pinching_approximation(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = if rng.random_bool(0.5) { degenerate_sigma(rng, d)? } else { sigma(rng, d)? };
    let map = pinching_map(&s, DEFAULT_DEGENERACY_TOLERANCE);
    let pinched = output_state(&apply_pinching(&map, &rho)?)?;
    let log_v = (map.v() as f64).log2();
    let mut worst = f64::INFINITY;
    for alpha in [0.5, 0.8, 2.0] {
        let full = value(DivergenceKind::Sandwiched, alpha, &rho, &s)?;
        let pin = value(DivergenceKind::Sandwiched, alpha, &pinched, &s)?;
        worst = worst.min(slack(full, pin)).min(slack(pin + 2.0 * log_v, full));
    }
    Ok(worst)
}

/// `ρ ≤ v(σ)·E_σ(ρ)` as the smallest eigenvalue of the difference.
fn pinching_inequality(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = if rng.random_bool(0.5) { degenerate_sigma(rng, d)? } else { sigma(rng, d)? };
    let map = pinching_map(&s, DEFAULT_DEGENERACY_TOLERANCE);
    let pinched = apply_pinching(&map, &rho)?;
    Ok(pinched.scale(map.v() as f64).sub(&rho)?.lambda_min())
}

/// `D*_α ≤ D_α ≤ D♭_α` for `α ∈ (0, 1)` and `D♭_α ≤ D*_α ≤ D_α` for
/// `α ∈ (1, 2]`.
fn family_ordering(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = sigma(rng, d)?;
    let mut worst = f64::INFINITY;
    for alpha in [0.2, 0.5, 0.8, 1.5, 2.0] {
        let flat = value(DivergenceKind::LogEuclidean, alpha, &rho, &s)?;
        let sand = value(DivergenceKind::Sandwiched, alpha, &rho, &s)?;
        let petz = value(DivergenceKind::Petz, alpha, &rho, &s)?;
        worst = if alpha < 1.0 {
            worst.min(slack(petz, sand)).min(slack(flat, petz))
        } else {
            worst.min(slack(sand, flat)).min(slack(petz, sand))
        };
    }
    Ok(worst)
}

fn family_ordering_commuting(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = DensityOperator::diagonal(&random_probabilities(rng, d))?;
    let s = DensityOperator::diagonal(&random_probabilities(rng, d))?;
    let mut worst = 0.0_f64;
    for alpha in [0.2, 0.5, 0.8] {
        let flat = value(DivergenceKind::LogEuclidean, alpha, &rho, &s)?;
        let sand = value(DivergenceKind::Sandwiched, alpha, &rho, &s)?;
        let petz = value(DivergenceKind::Petz, alpha, &rho, &s)?;
        worst = worst.max((sand - flat).abs()).max((petz - sand).abs());
    }
    Ok(worst)
}

fn sandwiched_half_fidelity(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = sigma(rng, d)?;
    let f = fidelity(&rho, &s)?;
    Ok(value(DivergenceKind::Sandwiched, 0.5, &rho, &s)? + 2.0 * f.log2())
}

fn pure_state_identity(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = random_pure_with(d, rng)?;
    let s = sigma(rng, d)?;
    let mut worst = 0.0_f64;
    for alpha in [0.6, 0.75, 0.9] {
        let sand = value(DivergenceKind::Sandwiched, alpha, &rho, &s)?;
        let petz = value(DivergenceKind::Petz, 2.0 - 1.0 / alpha, &rho, &s)?;
        worst = worst.max((sand - petz).abs());
    }
    Ok(worst)
}

// ------------------------------------------------------------------ auxiliary inequalities

fn improved_fuchs_van_de_graaf(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let phi = random_pure_with(d, rng)?;
    let rho = state(rng, d)?;
    Ok(trace_distance(&rho, &phi)?.sqrt() - purified_distance(&rho, &phi)?)
}

fn fidelity_perturbation(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = state(rng, d)?;
    let s = state(rng, d)?;
    let w = state(rng, d)?;
    // τ near ρ half the time, where the bound is closest to tight
    let t: f64 = if rng.random_bool(0.5) { rng.random_range(0.0..0.05) } else { rng.random_range(0.0..1.0) };
    let tau = DensityOperator::new(rho.scale(1.0 - t).add(&w.scale(t))?)?;
    let l1 = 2.0 * trace_distance(&rho, &tau)?;
    Ok(fidelity(&tau, &s)?.powi(2) - fidelity(&rho, &s)?.powi(2) + l1.sqrt())
}

fn fidelity_relative_entropy(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho = sigma(rng, d)?;
    let s = sigma(rng, d)?;
    let tau = state(rng, d)?;
    let f2 = fidelity(&rho, &s)?.powi(2);
    Ok(slack(umegaki(&tau, &rho)?.value + umegaki(&tau, &s)?.value, -f2.log2()))
}

fn fidelity_block_pinching(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let u = random_unitary_with(d, rng);
    let blocks = rng.random_range(1..=d);
    // every block gets at least one column
    let mut sizes = vec![1usize; blocks];
    for _ in blocks..d {
        let k = rng.random_range(0..blocks);
        sizes[k] += 1;
    }
    let mut projectors = Vec::with_capacity(blocks);
    let mut start = 0;
    for &k in &sizes {
        let cols: CMatrix = u.columns(start, k).into_owned();
        projectors.push(SupportProjector::from_basis(cols));
        start += k;
    }
    let pinch = |x: &HermitianOperator| -> Result<DensityOperator> {
        let mut acc = CMatrix::zeros(d, d);
        for p in &projectors {
            let w = p.basis();
            acc += w * (w.adjoint() * x.matrix() * w) * w.adjoint();
        }
        output_state(&HermitianOperator::new((&acc + acc.adjoint()) * num_complex::Complex64::new(0.5, 0.0))?)
    };
    let s = pinch(state(rng, d)?.op())?;
    let rho = state(rng, d)?;
    let lhs = fidelity(&pinch(rho.op())?, &s)?;
    Ok((blocks as f64).sqrt() * fidelity(&rho, &s)? - lhs)
}

// --------------------------------------------------------------- exponents

fn dichotomy(rng: &mut SeededRng, d: usize) -> Result<Dichotomy> {
    Dichotomy::new(state(rng, d)?, sigma(rng, d)?)
}

fn commuting_dichotomy(rng: &mut SeededRng, d: usize) -> Result<Dichotomy> {
    Dichotomy::classical(&random_probabilities(rng, d), &random_probabilities(rng, d))
}

fn zero_below_rate(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = dichotomy(rng, d)?;
    match first_order_rate(&d1, &d2) {
        Rate::Finite(rate) if rate > 1e-9 => {
            let r = rng.random_range(0.05..1.0) * rate;
            Ok(sc_exponent_purified(&d1, &d2, r)?.value)
        }
        _ => Ok(0.0),
    }
}

fn monotone_in_rate(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = dichotomy(rng, d)?;
    let mut worst = f64::INFINITY;
    let mut last = 0.0;
    for k in 1..=6 {
        let v = sc_exponent_purified(&d1, &d2, 0.5 * k as f64)?.value;
        worst = worst.min(v - last);
        last = v;
    }
    Ok(worst)
}

fn shared_lower_bound(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = dichotomy(rng, d)?;
    let r = rng.random_range(0.5..3.0);
    let bound = purified_lower_bound(&d1, &d2, r)?;
    let formula = sc_exponent_purified(&d1, &d2, r)?;
    let step = (bound.curve.len() / 50).max(1);
    let mut worst = (bound.value - formula.value).abs();
    for (i, &(alpha, v)) in bound.curve.iter().enumerate().step_by(step) {
        worst = worst.max((v - formula.curve[i].1).abs());
        worst = worst.max((v - purified_objective(alpha, &d1, &d2, r)).abs());
    }
    Ok(worst)
}

fn flat_dominates(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = dichotomy(rng, d)?;
    let r = rng.random_range(0.3..3.0);
    Ok(f_flat_alpha_form(&d1, &d2, r)?.value - sc_exponent_purified(&d1, &d2, r)?.value)
}

fn commuting_collapse(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = commuting_dichotomy(rng, d)?;
    let d2 = commuting_dichotomy(rng, d)?;
    let r = rng.random_range(0.3..3.0);
    Ok(f_flat_alpha_form(&d1, &d2, r)?.value - sc_exponent_purified(&d1, &d2, r)?.value)
}

fn order_one_zero(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = dichotomy(rng, d)?;
    Ok(purified_objective(1.0, &d1, &d2, rng.random_range(0.1..5.0)))
}

/// `supp ρ1 ⊄ supp σ1` while `supp ρ2 ⊆ supp σ2`: the exponent is 0.
fn support_failure(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let rho1 = full_rank_state(rng, d)?;
    let sigma1 = random_density_with(d, d - 1, rng)?;
    let d1 = Dichotomy::new(rho1, sigma1)?;
    let d2 = dichotomy(rng, d)?;
    Ok(sc_exponent_purified(&d1, &d2, rng.random_range(0.3..3.0))?.value)
}

fn minimax_equality(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = dichotomy(rng, d)?;
    let r = [0.5, 1.0, 1.7, 3.0][rng.random_range(0..4)];
    let a = f_flat_alpha_form(&d1, &d2, r)?;
    let m = f_minimax_delta_form(&d1, &d2, r)?;
    Ok(a.value - m.exponent.value)
}

fn trace_pure_consistency(rng: &mut SeededRng, d: usize) -> Result<f64> {
    let d1 = dichotomy(rng, d)?;
    let d2 = Dichotomy::new(random_pure_with(d, rng)?, sigma(rng, d)?)?;
    let r = rng.random_range(0.3..3.0);
    Ok(sc_exponent_trace_pure(&d1, &d2, r)?.cross_check_gap.unwrap_or(f64::NAN))
}

fn registry() -> Vec<Check> {
    use CheckKind::{Equality as Eq, Inequality as Ineq};
    let all = *DIM_RANGE.end();
    let c = |name, kind, trial: Trial, max_dim| Check { name, kind, trial, max_dim };
    vec![
        c("order-monotonicity/sandwiched", Ineq, order_monotone_sandwiched, all),
        c("order-monotonicity/petz", Ineq, order_monotone_petz, all),
        c("order-monotonicity/log-euclidean", Ineq, order_monotone_flat, all),
        c("sigma-monotonicity/sandwiched", Ineq, sigma_monotone_sandwiched, all),
        c("sigma-monotonicity/petz", Ineq, sigma_monotone_petz, all),
        c("sigma-monotonicity/log-euclidean", Ineq, sigma_monotone_flat, all),
        c("log-euclidean-variational/bound", Ineq, flat_variational_bound, all),
        c("log-euclidean-variational/optimizer", Eq, flat_variational_optimizer, all),
        c("data-processing/sandwiched", Ineq, dpi_sandwiched, all),
        c("data-processing/petz", Ineq, dpi_petz, all),
        c("data-processing/log-euclidean", Ineq, dpi_flat, all),
        c("pinching-approximation", Ineq, pinching_approximation, all),
        c("pinching-inequality", Ineq, pinching_inequality, all),
        c("family-ordering", Ineq, family_ordering, all),
        c("family-ordering/commuting", Eq, family_ordering_commuting, all),
        c("sandwiched-half-fidelity", Eq, sandwiched_half_fidelity, all),
        c("pure-state-identity", Eq, pure_state_identity, all),
        c("improved-fuchs-van-de-graaf", Ineq, improved_fuchs_van_de_graaf, all),
        c("fidelity-perturbation", Ineq, fidelity_perturbation, all),
        c("fidelity-relative-entropy", Ineq, fidelity_relative_entropy, all),
        c("fidelity-block-pinching", Ineq, fidelity_block_pinching, all),
        c("exponent/zero-below-rate", Eq, zero_below_rate, EXPONENT_MAX_DIM),
        c("exponent/monotone-in-rate", Ineq, monotone_in_rate, EXPONENT_MAX_DIM),
        c("exponent/shared-lower-bound", Eq, shared_lower_bound, EXPONENT_MAX_DIM),
        c("exponent/flat-dominates", Ineq, flat_dominates, EXPONENT_MAX_DIM),
        c("exponent/commuting-collapse", Eq, commuting_collapse, EXPONENT_MAX_DIM),
        c("exponent/order-one-zero", Eq, order_one_zero, EXPONENT_MAX_DIM),
        c("exponent/support-failure", Eq, support_failure, EXPONENT_MAX_DIM),
        c("exponent/minimax-equality", Eq, minimax_equality, EXPONENT_MAX_DIM),
        c("exponent/trace-pure-consistency", Eq, trace_pure_consistency, EXPONENT_MAX_DIM),
    ]
}

/// Names of every registered check.
pub fn check_names() -> Vec<&'static str> {
    registry().iter().map(|c| c.name).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub tolerance: f64,
    /// Run only checks whose names start with one of these prefixes.
    pub only: Option<Vec<String>>,
}

impl SuiteConfig {
    pub fn new(seed: u64, trials: usize, dims: &[usize], tolerance: f64) -> Self {
        Self { seed, trials, dims: dims.to_vec(), tolerance, only: None }
    }

    pub fn only(mut self, prefixes: &[&str]) -> Self {
        self.only = Some(prefixes.iter().map(|s| s.to_string()).collect());
        self
    }
}

fn validate(cfg: &SuiteConfig) -> Result<()> {
    if cfg.trials == 0 {
        return Err(Error::RejectedInput("trials must be at least 1".into()));
    }
    if cfg.dims.is_empty() || cfg.dims.iter().any(|d| !DIM_RANGE.contains(d)) {
        return Err(Error::RejectedInput(format!(
            "dims must be a nonempty subset of {}..={}, got {:?}",
            DIM_RANGE.start(),
            DIM_RANGE.end(),
            cfg.dims
        )));
    }
    if !(cfg.tolerance >= 0.0) {
        return Err(Error::RejectedInput(format!("tolerance must be nonnegative, got {}", cfg.tolerance)));
    }
    Ok(())
}

pub fn run_suite(seed: u64, trials: usize, dims: &[usize], tolerance: f64) -> Result<SuiteReport> {
    run(&SuiteConfig::new(seed, trials, dims, tolerance))
}

pub fn run(cfg: &SuiteConfig) -> Result<SuiteReport> {
    validate(cfg)?;
    let registry = registry();
    let coverage_missing = MANIFEST
        .iter()
        .filter(|m| !registry.iter().any(|c| c.name == **m))
        .map(|m| m.to_string())
        .collect();
    let mut dims = cfg.dims.clone();
    dims.sort_unstable();
    dims.dedup();
    let selected: Vec<&Check> = registry
        .iter()
        .filter(|c| match &cfg.only {
            None => true,
            Some(prefixes) => prefixes.iter().any(|p| c.name.starts_with(p.as_str())),
        })
        .collect();
    let go = |c: &&Check| run_check(c, cfg.seed, cfg.trials, &dims, cfg.tolerance);
    #[cfg(feature = "parallel")]
    let mut checks: Vec<CheckResult> = selected.par_iter().map(go).collect();
    #[cfg(not(feature = "parallel"))]
    let mut checks: Vec<CheckResult> = selected.iter().map(go).collect();
    checks.sort_by(|a, b| {
        let (ma, mb) = (a.margin(cfg.tolerance), b.margin(cfg.tolerance));
        // NaN margins (errored checks) first
        match (ma.is_nan(), mb.is_nan()) {
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            _ => ma.total_cmp(&mb).then_with(|| a.name.cmp(&b.name)),
        }
    });
    Ok(SuiteReport {
        checks,
        seed: cfg.seed,
        trials: cfg.trials,
        dims_tested: dims,
        tolerance: cfg.tolerance,
        coverage_missing,
    })
}

/// Harness self-test: data processing with the channel applied to `ρ` only.
/// Must fail; a pass means the harness cannot see violations.
pub fn mutation_control(seed: u64, trials: usize, dims: &[usize], tolerance: f64) -> CheckResult {
    fn corrupted(rng: &mut SeededRng, d: usize) -> Result<f64> {
        let rho = state(rng, d)?;
        let s = sigma(rng, d)?;
        let kraus = random_kraus_with(d, d, 2, rng)?;
        let n = ChoiChannel::from_kraus(&kraus)?;
        let nr = output_state(&n.apply(&rho)?)?;
        let before = value(DivergenceKind::Sandwiched, 2.0, &rho, &s)?;
        let after = value(DivergenceKind::Sandwiched, 2.0, &nr, &s)?;
        Ok(slack(before, after))
    }
    let check = Check {
        name: "mutation-control/one-sided-data-processing",
        kind: CheckKind::Inequality,
        trial: corrupted,
        max_dim: *DIM_RANGE.end(),
    };
    run_check(&check, seed, trials, dims, tolerance)
}
