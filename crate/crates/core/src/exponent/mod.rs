//! Strong converse exponents of dichotomy transformations and the
//! log-Euclidean upper bound `F`, the latter in two forms: a sup over the
//! order α and a sup-inf over `δ ∈ [0, 1]` with Gibbs-state optimizers.
//!
//! All objectives are written through `log₂ Q` so that the prefactor
//! `(1−α)/α` never multiplies an `α → 1` quotient.

pub mod optimize;

use serde::Serialize;

use crate::divergence::{
    compressed_log, d_max, log2_sum_exp2, log_euclidean_max, log_q_log_euclidean, log_q_petz,
    log_q_sandwiched, renyi_divergence, support_intersection, umegaki, DivergenceKind,
};
use crate::error::{check_dim, Error, Result};
use crate::format::g12;
use crate::operator::{c, CMatrix, DensityOperator, HermitianOperator, SupportProjector};
use optimize::{grid_golden_max, Maximum, GRID_POINTS, REFINEMENT_TOLERANCE};

/// Relative entropies below this are treated as zero when forming rates.
pub const RATE_ZERO_TOLERANCE: f64 = 1e-12;
/// Past this `β = α/(2α−1)` the β-term is replaced by its `β → ∞` limit.
pub const BETA_CUTOFF: f64 = 1e6;

/// Ordered pair `(ρ, σ)` on a common space.
#[derive(Clone, Debug)]
pub struct Dichotomy {
    rho: DensityOperator,
    sigma: DensityOperator,
    contained: bool,
}

impl Dichotomy {
    pub fn new(rho: DensityOperator, sigma: DensityOperator) -> Result<Self> {
        check_dim(rho.dim(), sigma.dim())?;
        let contained = sigma.support().contains(&rho.support());
        Ok(Self {
            rho,
            sigma,
            contained,
        })
    }

    /// Commuting pair from two probability vectors.
    pub fn classical(p: &[f64], q: &[f64]) -> Result<Self> {
        Self::new(DensityOperator::diagonal(p)?, DensityOperator::diagonal(q)?)
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn sigma(&self) -> &DensityOperator {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `supp ρ ⊆ supp σ`.
    pub fn support_contained(&self) -> bool {
        self.contained
    }

    pub fn relative_entropy(&self) -> f64 {
        umegaki(&self.rho, &self.sigma)
            .expect("dimensions checked at construction")
            .value
    }
}

/// First-order rate `D(ρ₁‖σ₁)/D(ρ₂‖σ₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rate {
    Finite(f64),
    Infinite,
    /// `0/0` or `∞/∞`.
    Indeterminate,
}

impl Rate {
    /// Numeric view: `+∞` for `Infinite`, NaN for `Indeterminate`.
    pub fn as_f64(&self) -> f64 {
        match *self {
            Rate::Finite(v) => v,
            Rate::Infinite => f64::INFINITY,
            Rate::Indeterminate => f64::NAN,
        }
    }
}

pub fn first_order_rate(d1: &Dichotomy, d2: &Dichotomy) -> Rate {
    let num = d1.relative_entropy();
    let den = d2.relative_entropy();
    let num_zero = num.abs() < RATE_ZERO_TOLERANCE;
    let den_zero = den.abs() < RATE_ZERO_TOLERANCE;
    match (num.is_infinite(), den.is_infinite()) {
        (true, true) => Rate::Indeterminate,
        (true, false) => Rate::Infinite,
        (false, true) => Rate::Finite(0.0),
        (false, false) if num_zero && den_zero => Rate::Indeterminate,
        (false, false) if den_zero => Rate::Infinite,
        (false, false) if num_zero => Rate::Finite(0.0),
        _ => Rate::Finite(num / den),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderParameter {
    /// `α ∈ [1/2, 1]`.
    Alpha,
    /// `δ = (1−α)/α ∈ [0, 1]`.
    Delta,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentResult {
    pub value: f64,
    pub argmax_order: f64,
    pub order_parameter: OrderParameter,
    pub curve: Vec<(f64, f64)>,
    pub rate_threshold: Rate,
    /// Gap to an independently evaluated formula, when one was computed.
    pub cross_check_gap: Option<f64>,
}

impl ExponentResult {
    fn from_maximum(m: Maximum, order_parameter: OrderParameter, rate: Rate) -> Self {
        Self {
            value: snap_zero(m.value),
            argmax_order: m.argmax,
            order_parameter,
            curve: m.curve,
            rate_threshold: rate,
            cross_check_gap: None,
        }
    }
}

/// Optimized values below this magnitude are round-off and reported as 0.
pub const ZERO_SNAP: f64 = 1e-14;

fn snap_zero(v: f64) -> f64 {
    if v.abs() < ZERO_SNAP {
        0.0
    } else {
        v
    }
}

fn check_rate(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::RejectedInput(format!("rate must be positive and finite, got {r}")));
    }
    Ok(())
}

fn require_either_contained(d1: &Dichotomy, d2: &Dichotomy) -> Result<()> {
    if d1.support_contained() || d2.support_contained() {
        Ok(())
    } else {
        Err(Error::HypothesisViolation(
            "need supp(rho1) within supp(sigma1) or supp(rho2) within supp(sigma2)".into(),
        ))
    }
}

fn require_first_contained(d1: &Dichotomy) -> Result<()> {
    if d1.support_contained() {
        Ok(())
    } else {
        Err(Error::HypothesisViolation("need supp(rho1) within supp(sigma1)".into()))
    }
}

/// `β = α/(2α−1)`; infinite at `α = 1/2`.
pub fn conjugate_order(alpha: f64) -> f64 {
    let den = 2.0 * alpha - 1.0;
    if den <= 0.0 {
        f64::INFINITY
    } else {
        alpha / den
    }
}

/// `(1−α)/α · D*_β(ρ₁‖σ₁)` with `β = α/(2α−1)`, written as
/// `(2α−1)/α · log₂ Q*_β`.
fn converse_penalty(alpha: f64, d1: &Dichotomy) -> f64 {
    let beta = conjugate_order(alpha);
    if beta > BETA_CUTOFF {
        let dm = d_max(d1.rho(), d1.sigma()).expect("dimensions checked").value;
        return (1.0 - alpha) / alpha * dm;
    }
    let lq = log_q_sandwiched(beta, d1.rho(), d1.sigma());
    if lq == f64::INFINITY {
        return f64::INFINITY;
    }
    (2.0 * alpha - 1.0) / alpha * lq
}

/// `(1−α)/α · (r·D*_α(ρ₂‖σ₂) − D*_{α/(2α−1)}(ρ₁‖σ₁))`, exactly 0 at `α = 1`.
///
/// This single function backs both the exponent and the lower bound it is
/// known to meet.
pub fn purified_objective(alpha: f64, d1: &Dichotomy, d2: &Dichotomy, r: f64) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    let gain = -(r / alpha) * log_q_sandwiched(alpha, d2.rho(), d2.sigma());
    gain - converse_penalty(alpha, d1)
}

/// Same objective with `D*_α(ρ₂‖σ₂)` replaced by Petz `D_{2−1/α}(ρ₂‖σ₂)`,
/// which coincides with it for pure ρ₂.
pub fn trace_pure_objective(alpha: f64, d1: &Dichotomy, d2: &Dichotomy, r: f64) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    let order = (2.0 - 1.0 / alpha).max(0.0);
    let gain = -r * log_q_petz(order, d2.rho(), d2.sigma());
    gain - converse_penalty(alpha, d1)
}

/// `(β−1)/β · (r·D_{1/β}(ρ₂‖σ₂) − D*_β(ρ₁‖σ₁))` for `β ∈ [1, ∞]`, evaluated
/// through divergence values rather than `log Q`.
pub fn trace_pure_beta_objective(beta: f64, d1: &Dichotomy, d2: &Dichotomy, r: f64) -> Result<f64> {
    if beta < 1.0 || beta.is_nan() {
        return Err(Error::InvalidOrder(beta));
    }
    if beta == 1.0 {
        return Ok(0.0);
    }
    let (gain, penalty) = if beta == f64::INFINITY {
        // D_0(ρ‖σ) = −log₂ Tr Π_ρ σ
        let d0 = -log_q_petz(0.0, d2.rho(), d2.sigma());
        (r * d0, d_max(d1.rho(), d1.sigma())?.value)
    } else {
        (
            r * renyi_divergence(DivergenceKind::Petz, 1.0 / beta, d2.rho(), d2.sigma())?.value,
            renyi_divergence(DivergenceKind::Sandwiched, beta, d1.rho(), d1.sigma())?.value,
        )
    };
    let weight = if beta == f64::INFINITY {
        1.0
    } else {
        (beta - 1.0) / beta
    };
    Ok(weight * (gain - penalty))
}

fn maximize_alpha<F>(f: F) -> Maximum
where
    F: Fn(f64) -> f64 + Sync,
{
    grid_golden_max(&f, 0.5, 1.0, GRID_POINTS, REFINEMENT_TOLERANCE)
}

/// Purified-distance strong converse exponent
/// `sup_{α∈[1/2,1]} (1−α)/α·(r·D*_α(ρ₂‖σ₂) − D*_{α/(2α−1)}(ρ₁‖σ₁))`.
pub fn sc_exponent_purified(d1: &Dichotomy, d2: &Dichotomy, r: f64) -> Result<ExponentResult> {
    check_rate(r)?;
    require_either_contained(d1, d2)?;
    let m = maximize_alpha(|a| purified_objective(a, d1, d2, r));
    Ok(ExponentResult::from_maximum(
        m,
        OrderParameter::Alpha,
        first_order_rate(d1, d2),
    ))
}

/// The lower bound `sup_α` of [`purified_objective`]; by construction it is
/// the same computation as [`sc_exponent_purified`], without the support
/// hypothesis.
pub fn purified_lower_bound(d1: &Dichotomy, d2: &Dichotomy, r: f64) -> Result<ExponentResult> {
    check_rate(r)?;
    let m = maximize_alpha(|a| purified_objective(a, d1, d2, r));
    Ok(ExponentResult::from_maximum(
        m,
        OrderParameter::Alpha,
        first_order_rate(d1, d2),
    ))
}

/// Trace-distance strong converse exponent for pure ρ₂, evaluated with the
/// Petz form of the ρ₂ term and cross-checked against
/// [`sc_exponent_purified`]; the gap is stored in `cross_check_gap`.
pub fn sc_exponent_trace_pure(d1: &Dichotomy, d2: &Dichotomy, r: f64) -> Result<ExponentResult> {
    check_rate(r)?;
    if !d2.rho().is_pure() {
        return Err(Error::RejectedInput(format!(
            "rho2 must be pure, has rank {}",
            d2.rho().rank()
        )));
    }
    require_either_contained(d1, d2)?;
    let m = maximize_alpha(|a| trace_pure_objective(a, d1, d2, r));
    let purified = sc_exponent_purified(d1, d2, r)?;
    let gap = if m.value == purified.value {
        0.0
    } else {
        (m.value - purified.value).abs()
    };
    let mut out = ExponentResult::from_maximum(m, OrderParameter::Alpha, purified.rate_threshold);
    out.cross_check_gap = Some(gap);
    Ok(out)
}

/// `(1−α)/α · (r·D♭_α(ρ₂‖σ₂) − D♭_β(ρ₁‖σ₁))`, `1/α + 1/β = 2`, continuously
/// extended to both endpoints.
pub fn flat_objective(alpha: f64, d1: &Dichotomy, d2: &Dichotomy, r: f64) -> f64 {
    let gain = -(r / alpha) * log_q_log_euclidean(alpha, d2.rho(), d2.sigma());
    let beta = conjugate_order(alpha);
    let penalty = if beta > BETA_CUTOFF {
        (1.0 - alpha) / alpha * log_euclidean_max(d1.rho(), d1.sigma())
    } else {
        (2.0 * alpha - 1.0) / alpha * log_q_log_euclidean(beta, d1.rho(), d1.sigma())
    };
    gain - penalty
}

/// `F` as a sup over `α ∈ (1/2, 1)`; the endpoints are included through the
/// continuous extension of [`flat_objective`].
pub fn f_flat_alpha_form(d1: &Dichotomy, d2: &Dichotomy, r: f64) -> Result<ExponentResult> {
    check_rate(r)?;
    require_first_contained(d1)?;
    let m = maximize_alpha(|a| flat_objective(a, d1, d2, r));
    Ok(ExponentResult::from_maximum(
        m,
        OrderParameter::Alpha,
        first_order_rate(d1, d2),
    ))
}

/// Logarithms compressed to the subspaces on which the Gibbs optimizers live.
struct GibbsData {
    /// Isometry onto `supp ρ₁`.
    w1: CMatrix,
    log_rho1: CMatrix,
    log_sigma1: CMatrix,
    /// Isometry onto `supp ρ₂ ∩ supp σ₂`.
    w2: CMatrix,
    log_rho2: CMatrix,
    log_sigma2: CMatrix,
}

impl GibbsData {
    fn new(d1: &Dichotomy, d2: &Dichotomy) -> Self {
        let s1: SupportProjector = d1.rho().support();
        let s2 = support_intersection(d2.rho(), d2.sigma());
        let w1 = s1.basis().clone();
        let w2 = s2.basis().clone();
        Self {
            log_rho1: compressed_log(d1.rho(), &w1),
            log_sigma1: compressed_log(d1.sigma(), &w1),
            log_rho2: compressed_log(d2.rho(), &w2),
            log_sigma2: compressed_log(d2.sigma(), &w2),
            w1,
            w2,
        }
    }

    fn k1(&self, delta: f64) -> HermitianOperator {
        HermitianOperator::symmetrized(&self.log_rho1 - &self.log_sigma1 * c(delta))
    }

    fn k2(&self, delta: f64) -> HermitianOperator {
        HermitianOperator::symmetrized(&self.log_rho2 + &self.log_sigma2 * c(delta))
    }

    /// `−(1−δ)·log₂ Tr 2^{K₁/(1−δ)}`, tending to `−λ_max(K₁)` at `δ = 1`.
    fn first_term(&self, delta: f64) -> f64 {
        let k = self.k1(delta);
        let t = 1.0 - delta;
        if t <= 0.0 {
            return -k.lambda_max();
        }
        -t * log2_sum_exp2(k.eigenvalues().iter().map(|v| v / t))
    }

    /// `−r(1+δ)·log₂ Tr 2^{K₂/(1+δ)}`; `+∞` when the intersection is trivial.
    fn second_term(&self, delta: f64, r: f64) -> f64 {
        if self.w2.ncols() == 0 {
            return f64::INFINITY;
        }
        let k = self.k2(delta);
        let t = 1.0 + delta;
        -r * t * log2_sum_exp2(k.eigenvalues().iter().map(|v| v / t))
    }

    fn g(&self, delta: f64, r: f64) -> f64 {
        self.second_term(delta, r) + self.first_term(delta)
    }
}

/// `W 2^{K/t} W† / Tr`, or at `t = 0` the normalized projector onto the top
/// eigenspace of `K`.
fn gibbs_state(w: &CMatrix, k: &HermitianOperator, t: f64) -> Result<DensityOperator> {
    let spec = k.spectrum();
    let top = spec.values[0];
    let tol = 1e-12 * spec.max_abs().max(1.0);
    let weight = |v: f64| {
        if t <= 0.0 {
            if top - v <= tol {
                1.0
            } else {
                0.0
            }
        } else {
            ((v - top) / t).exp2()
        }
    };
    let z: f64 = spec.values.iter().map(|&v| weight(v)).sum();
    let inner = spec.recompose_with(|v| weight(v) / z);
    let full = HermitianOperator::new(w * inner * w.adjoint())
        .unwrap_or_else(|_| unreachable!("conjugation preserves hermiticity"));
    DensityOperator::normalized(&full)
}

/// `r·D(τ₂‖ρ₂) + D(τ₁‖ρ₁) + δ·(r·D(τ₂‖σ₂) − D(τ₁‖σ₁))`.
pub fn minimax_objective(
    d1: &Dichotomy,
    d2: &Dichotomy,
    r: f64,
    delta: f64,
    tau1: &DensityOperator,
    tau2: &DensityOperator,
) -> Result<f64> {
    let a = umegaki(tau2, d2.rho())?.value;
    let b = umegaki(tau1, d1.rho())?.value;
    let c2 = umegaki(tau2, d2.sigma())?.value;
    let c1 = umegaki(tau1, d1.sigma())?.value;
    let mut v = r * a + b;
    if delta != 0.0 {
        v += delta * (r * c2 - c1);
    }
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimaxResult {
    /// `argmax_order` holds δ*.
    pub exponent: ExponentResult,
    #[serde(skip)]
    pub tau1: DensityOperator,
    #[serde(skip)]
    pub tau2: Option<DensityOperator>,
    /// Explicit objective at `(δ*, τ₁*, τ₂*)`.
    pub objective_at_optimizers: f64,
}

/// `F` as `sup_{δ∈[0,1]} inf_{τ₁,τ₂}` of [`minimax_objective`], the inner
/// infimum in closed form.
pub fn f_minimax_delta_form(d1: &Dichotomy, d2: &Dichotomy, r: f64) -> Result<MinimaxResult> {
    check_rate(r)?;
    require_first_contained(d1)?;
    let data = GibbsData::new(d1, d2);
    let g = |delta: f64| data.g(delta, r);
    let m = grid_golden_max(&g, 0.0, 1.0, GRID_POINTS, REFINEMENT_TOLERANCE);
    let delta = m.argmax;
    let tau1 = gibbs_state(&data.w1, &data.k1(delta), 1.0 - delta)?;
    let (tau2, objective) = if data.w2.ncols() == 0 {
        (None, f64::INFINITY)
    } else {
        let tau2 = gibbs_state(&data.w2, &data.k2(delta), 1.0 + delta)?;
        let obj = minimax_objective(d1, d2, r, delta, &tau1, &tau2)?;
        (Some(tau2), obj)
    };
    Ok(MinimaxResult {
        exponent: ExponentResult::from_maximum(m, OrderParameter::Delta, first_order_rate(d1, d2)),
        tau1,
        tau2,
        objective_at_optimizers: objective,
    })
}

/// `g(δ)` alone.
pub fn minimax_inner_value(d1: &Dichotomy, d2: &Dichotomy, r: f64, delta: f64) -> Result<f64> {
    check_rate(r)?;
    require_first_contained(d1)?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::RejectedInput(format!("delta must lie in [0, 1], got {delta}")));
    }
    Ok(GibbsData::new(d1, d2).g(delta, r))
}

/// One row of an exponent sweep over the rate.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub exponent: f64,
    pub argmax_order: f64,
    pub rate_threshold: f64,
}

pub const SWEEP_CSV_HEADER: &str = "r,exponent,argmax_order,rate_threshold";

/// `count` evenly spaced rates from `start` to `stop` inclusive.
pub fn rate_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::RejectedInput("grid count must be at least 1".into()));
    }
    if !(start > 0.0) || !stop.is_finite() || stop < start {
        return Err(Error::RejectedInput(format!(
            "need 0 < start <= stop, got start {start}, stop {stop}"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
        .collect())
}

/// `sc_exponent_purified` at each rate; rows are sorted by `r` with
/// duplicates removed.
pub fn sweep(d1: &Dichotomy, d2: &Dichotomy, rates: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rs = rates.to_vec();
    if rs.iter().any(|r| r.is_nan()) {
        return Err(Error::RejectedInput("rate must be positive and finite, got NaN".into()));
    }
    rs.sort_by(f64::total_cmp);
    rs.dedup();
    let row = |&r: &f64| -> Result<SweepRow> {
        let e = sc_exponent_purified(d1, d2, r)?;
        Ok(SweepRow {
            r,
            exponent: e.value,
            argmax_order: e.argmax_order,
            rate_threshold: e.rate_threshold.as_f64(),
        })
    };
    #[cfg(feature = "parallel")]
    let rows = {
        use rayon::prelude::*;
        rs.par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows = rs.iter().map(row).collect();
    rows
}

pub fn write_sweep_csv<W: std::io::Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            g12(row.r),
            g12(row.exponent),
            g12(row.argmax_order),
            g12(row.rate_threshold)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_density, random_pure_with, seeded_rng};

    fn classical(p: &[f64], q: &[f64]) -> Dichotomy {
        Dichotomy::classical(p, q).unwrap()
    }

    #[test]
    fn rate_conventions() {
        let d = classical(&[0.9, 0.1], &[0.5, 0.5]);
        let same = classical(&[0.5, 0.5], &[0.5, 0.5]);
        assert_eq!(first_order_rate(&d, &d), Rate::Finite(1.0));
        assert_eq!(first_order_rate(&d, &same), Rate::Infinite);
        assert_eq!(first_order_rate(&same, &same), Rate::Indeterminate);
        assert_eq!(first_order_rate(&same, &d), Rate::Finite(0.0));
        let disjoint = classical(&[1.0, 0.0], &[0.0, 1.0]);
        assert_eq!(first_order_rate(&disjoint, &d), Rate::Infinite);
        assert!((d.relative_entropy() - 0.531004406410719).abs() < 1e-12);
    }

    #[test]
    fn trivial_exponents_vanish() {
        let d = classical(&[0.9, 0.1], &[0.5, 0.5]);
        let e = sc_exponent_purified(&d, &d, 1.0).unwrap();
        assert!(e.value.abs() < 1e-12, "{}", e.value);
        let same = classical(&[0.3, 0.7], &[0.3, 0.7]);
        for r in [0.1, 1.0, 5.0] {
            assert!(sc_exponent_purified(&d, &same, r).unwrap().value.abs() < 1e-12);
        }
        assert!(f_flat_alpha_form(&d, &d, 1.0).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn hypothesis_violation_is_refused() {
        let bad = classical(&[0.5, 0.5], &[1.0, 0.0]);
        assert!(matches!(
            sc_exponent_purified(&bad, &bad, 1.0),
            Err(Error::HypothesisViolation(_))
        ));
        let good = classical(&[0.9, 0.1], &[0.5, 0.5]);
        assert!(matches!(
            f_flat_alpha_form(&bad, &good, 1.0),
            Err(Error::HypothesisViolation(_))
        ));
        assert!(sc_exponent_purified(&good, &good, 0.0).is_err());
    }

    #[test]
    fn support_failure_on_first_pair_gives_zero() {
        let bad = classical(&[0.5, 0.5], &[1.0, 0.0]);
        let good = classical(&[0.9, 0.1], &[0.5, 0.5]);
        let e = sc_exponent_purified(&bad, &good, 3.0).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn objective_is_zero_at_one() {
        let d1 = Dichotomy::new(random_density(3, 3, 1).unwrap(), random_density(3, 3, 2).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_density(2, 2, 3).unwrap(), random_density(2, 2, 4).unwrap()).unwrap();
        assert_eq!(purified_objective(1.0, &d1, &d2, 2.0), 0.0);
        assert_eq!(trace_pure_objective(1.0, &d1, &d2, 2.0), 0.0);
    }

    #[test]
    fn lower_bound_shares_the_objective() {
        let d1 = Dichotomy::new(random_density(3, 3, 5).unwrap(), random_density(3, 2, 6).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_density(2, 2, 7).unwrap(), random_density(2, 2, 8).unwrap()).unwrap();
        let a = sc_exponent_purified(&d1, &d2, 1.5).unwrap();
        let b = purified_lower_bound(&d1, &d2, 1.5).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.curve, b.curve);
    }

    #[test]
    fn beta_form_matches_alpha_form_pointwise() {
        let mut rng = seeded_rng(11);
        let d1 = Dichotomy::new(random_density(3, 3, 21).unwrap(), random_density(3, 3, 22).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_pure_with(3, &mut rng).unwrap(), random_density(3, 3, 23).unwrap()).unwrap();
        for i in 0..50 {
            let alpha = 0.5 + 0.49 * i as f64 / 49.0;
            let a = trace_pure_objective(alpha, &d1, &d2, 2.0);
            let b = trace_pure_beta_objective(conjugate_order(alpha), &d1, &d2, 2.0).unwrap();
            assert!((a - b).abs() < 1e-9, "alpha {alpha}: {a} vs {b}");
        }
    }

    #[test]
    fn trace_pure_rejects_mixed_rho2() {
        let d = classical(&[0.9, 0.1], &[0.5, 0.5]);
        assert!(matches!(
            sc_exponent_trace_pure(&d, &d, 1.0),
            Err(Error::RejectedInput(_))
        ));
    }

    #[test]
    fn trace_pure_matches_purified_on_basis_state() {
        let d1 = classical(&[1.0, 0.0], &[0.5, 0.5]);
        let d2 = classical(&[1.0, 0.0], &[0.5, 0.5]);
        let t = sc_exponent_trace_pure(&d1, &d2, 2.0).unwrap();
        let p = sc_exponent_purified(&d1, &d2, 2.0).unwrap();
        assert!((t.value - p.value).abs() < 1e-8);
        assert!(t.cross_check_gap.unwrap() < 1e-8);
        // ρ₂ = σ₂ pure
        let d3 = classical(&[1.0, 0.0], &[1.0, 0.0]);
        assert!(sc_exponent_trace_pure(&d1, &d3, 2.0).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn delta_zero_recovers_states() {
        let d1 = Dichotomy::new(random_density(3, 3, 31).unwrap(), random_density(3, 3, 32).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_density(3, 3, 33).unwrap(), random_density(3, 3, 34).unwrap()).unwrap();
        assert!(minimax_inner_value(&d1, &d2, 1.0, 0.0).unwrap().abs() < 1e-12);
        // below rate the sup sits at δ = 0
        let rate = first_order_rate(&d1, &d2).as_f64();
        let m = f_minimax_delta_form(&d1, &d2, 0.5 * rate).unwrap();
        assert_eq!(m.exponent.argmax_order, 0.0);
        assert!(m.tau1.approx_eq(d1.rho(), 1e-10));
        assert!(m.tau2.as_ref().unwrap().approx_eq(d2.rho(), 1e-10));
    }

    #[test]
    fn minimax_matches_alpha_form_and_optimizers() {
        let d1 = Dichotomy::new(random_density(3, 3, 41).unwrap(), random_density(3, 3, 42).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_density(3, 3, 43).unwrap(), random_density(3, 3, 44).unwrap()).unwrap();
        let a = f_flat_alpha_form(&d1, &d2, 1.7).unwrap();
        let m = f_minimax_delta_form(&d1, &d2, 1.7).unwrap();
        assert!((a.value - m.exponent.value).abs() < 1e-6, "{} vs {}", a.value, m.exponent.value);
        assert!((m.objective_at_optimizers - m.exponent.value).abs() < 1e-8);
    }
}
