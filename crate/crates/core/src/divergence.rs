//! Distances and Rényi-type divergences between quantum states.
//!
//! All logarithms are base 2, so divergences are in bits. Support conditions
//! follow the usual convention: when the divergence is undefined the value is
//! `+∞`, carried as `f64::INFINITY`.
//!
//! Every Rényi family is computed from its trace functional `Q_α`; the
//! `log_q_*` functions expose `log₂ Q_α` directly because exponent formulas
//! multiply the divergence by `(1 − α)` and are better conditioned in that form.

use std::fmt;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::operator::{
    c, spectral_transform, CMatrix, DensityOperator, HermitianOperator, ScalarMap, SupportProjector,
    RANK_TOLERANCE,
};

/// Orders with `|α − 1|` below this are evaluated as the relative entropy.
pub const NEAR_ONE_WINDOW: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceKind {
    Sandwiched,
    Petz,
    LogEuclidean,
    Umegaki,
    Max,
}

impl DivergenceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sandwiched => "sandwiched",
            Self::Petz => "petz",
            Self::LogEuclidean => "log-euclidean",
            Self::Umegaki => "umegaki",
            Self::Max => "max",
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sandwiched" => Ok(Self::Sandwiched),
            "petz" => Ok(Self::Petz),
            "log-euclidean" | "log_euclidean" | "flat" => Ok(Self::LogEuclidean),
            "umegaki" | "relative-entropy" => Ok(Self::Umegaki),
            "max" | "dmax" => Ok(Self::Max),
            other => Err(Error::RejectedInput(format!("unknown divergence kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    Alpha(f64),
    LimitOne,
    LimitInfinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub kind: DivergenceKind,
    pub order: Order,
    /// Set when an order within `NEAR_ONE_WINDOW` of 1 was replaced by the
    /// relative entropy.
    pub near_one: bool,
}

impl DivergenceValue {
    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// Eigenvalues and eigenvectors restricted to the support.
struct SupportSpectrum {
    values: Vec<f64>,
    basis: CMatrix,
}

fn support_spectrum(op: &HermitianOperator) -> SupportSpectrum {
    let spec = op.spectrum();
    let threshold = RANK_TOLERANCE * spec.max_abs();
    let cols: Vec<usize> = (0..op.dim()).filter(|&j| spec.values[j] > threshold).collect();
    SupportSpectrum {
        values: cols.iter().map(|&j| spec.values[j]).collect(),
        basis: spec.vectors.select_columns(cols.iter()),
    }
}

/// `|⟨u_i|v_j⟩|²` between two eigenbases.
fn overlaps(a: &SupportSpectrum, b: &SupportSpectrum) -> Vec<Vec<f64>> {
    let o = a.basis.adjoint() * &b.basis;
    (0..o.nrows())
        .map(|i| (0..o.ncols()).map(|j| o[(i, j)].norm_sqr()).collect())
        .collect()
}

/// `log₂ Σ 2^{xᵢ}` without overflow; `−∞` for an empty sum.
pub(crate) fn log2_sum_exp2(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp2()).sum::<f64>().log2()
}

fn ensure_psd(sigma: &HermitianOperator) -> Result<()> {
    if !sigma.is_psd(RANK_TOLERANCE) {
        return Err(Error::RejectedInput(format!(
            "second argument must be positive semidefinite (λ_min = {:.3e})",
            sigma.lambda_min()
        )));
    }
    Ok(())
}

/// `F(ρ, σ) = ‖√ρ √σ‖₁`, the sum of singular values.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    let sr = spectral_transform(rho, ScalarMap::Power(0.5), true)?;
    let ss = spectral_transform(sigma, ScalarMap::Power(0.5), true)?;
    let prod = sr.matrix() * ss.matrix();
    let f: f64 = prod.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    check_dim(rho.dim(), sigma.dim())?;
    Ok((0.5 * rho.sub(sigma)?.trace_norm()).min(1.0))
}

/// `√(1 − F²)`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}

/// `−Tr ρ log₂ ρ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    let s = support_spectrum(rho);
    -s.values.iter().map(|&p| p * p.log2()).sum::<f64>()
}

fn contained(rho: &DensityOperator, sigma: &HermitianOperator) -> bool {
    sigma.support_projector().contains(&rho.support())
}

/// `D(ρ‖σ) = Tr ρ (log ρ − log σ)`, evaluated in the two eigenbases.
pub fn umegaki(rho: &DensityOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    ensure_psd(sigma)?;
    let value = if contained(rho, sigma) {
        let r = support_spectrum(rho);
        let s = support_spectrum(sigma);
        let ov = overlaps(&r, &s);
        let mut v = 0.0;
        for (i, &ri) in r.values.iter().enumerate() {
            let cross: f64 = s.values.iter().zip(&ov[i]).map(|(&sj, &w)| w * sj.log2()).sum();
            v += ri * (ri.log2() - cross);
        }
        v
    } else {
        f64::INFINITY
    };
    Ok(DivergenceValue {
        value,
        kind: DivergenceKind::Umegaki,
        order: Order::LimitOne,
        near_one: false,
    })
}

/// `log₂ λ_max(σ^{-1/2} ρ σ^{-1/2})` on the support of σ.
pub fn d_max(rho: &DensityOperator, sigma: &HermitianOperator) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    ensure_psd(sigma)?;
    let value = if contained(rho, sigma) {
        let s = support_spectrum(sigma);
        let scale = DVector::from_iterator(s.values.len(), s.values.iter().map(|v| v.powf(-0.5)));
        let m = scaled_compression(rho, &s.basis, &scale);
        m.lambda_max().log2()
    } else {
        f64::INFINITY
    };
    Ok(DivergenceValue {
        value,
        kind: DivergenceKind::Max,
        order: Order::LimitInfinity,
        near_one: false,
    })
}

/// `D diag(w) W† ρ W diag(w)`.
fn scaled_compression(rho: &HermitianOperator, basis: &CMatrix, w: &DVector<f64>) -> HermitianOperator {
    let mut m = basis.adjoint() * rho.matrix() * basis;
    let k = w.len();
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] *= w[i] * w[j];
        }
    }
    HermitianOperator::symmetrized(m)
}

/// `log₂ Q*_α(ρ‖σ) = log₂ Tr (σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α`.
///
/// Returns `−∞` when ρ ⟂ σ (for α < 1) and `+∞` when α > 1 and
/// `supp ρ ⊄ supp σ`.
pub fn log_q_sandwiched(alpha: f64, rho: &DensityOperator, sigma: &HermitianOperator) -> f64 {
    if alpha > 1.0 && !contained(rho, sigma) {
        return f64::INFINITY;
    }
    let s = support_spectrum(sigma);
    let p = (1.0 - alpha) / (2.0 * alpha);
    let scale = DVector::from_iterator(s.values.len(), s.values.iter().map(|v| v.powf(p)));
    let m = scaled_compression(rho, &s.basis, &scale);
    let lmax = m.lambda_max().max(0.0);
    if lmax == 0.0 {
        return f64::NEG_INFINITY;
    }
    let threshold = RANK_TOLERANCE * lmax;
    log2_sum_exp2(
        m.eigenvalues()
            .iter()
            .filter(|&&v| v > threshold)
            .map(|&v| alpha * v.log2()),
    )
}

/// `log₂ Q_α(ρ‖σ) = log₂ Tr ρ^α σ^{1−α}`, with matrix powers taken on the
/// supports. At `α = 0` this is `log₂ Tr(Π_ρ σ)`.
pub fn log_q_petz(alpha: f64, rho: &DensityOperator, sigma: &HermitianOperator) -> f64 {
    if alpha > 1.0 && !contained(rho, sigma) {
        return f64::INFINITY;
    }
    let r = support_spectrum(rho);
    let s = support_spectrum(sigma);
    let ov = overlaps(&r, &s);
    let mut terms = Vec::with_capacity(r.values.len() * s.values.len());
    for (i, &ri) in r.values.iter().enumerate() {
        for (j, &sj) in s.values.iter().enumerate() {
            let w = ov[i][j];
            if w > 0.0 {
                terms.push(alpha * ri.log2() + (1.0 - alpha) * sj.log2() + w.log2());
            }
        }
    }
    log2_sum_exp2(terms)
}

/// `W† log₂(A) W` with the logarithm taken on the support of `A`.
pub(crate) fn compressed_log(a: &HermitianOperator, basis: &CMatrix) -> CMatrix {
    let s = support_spectrum(a);
    let mut scaled = s.basis.clone();
    for (j, v) in s.values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v.log2());
    }
    let log_a = &scaled * s.basis.adjoint();
    basis.adjoint() * log_a * basis
}

/// Orthonormal basis of `supp ρ ∩ supp σ`.
pub fn support_intersection(rho: &HermitianOperator, sigma: &HermitianOperator) -> SupportProjector {
    rho.support_projector().intersection(&sigma.support_projector())
}

/// `log₂ Q♭_α(ρ‖σ) = log₂ Tr 2^{α log ρ + (1−α) log σ}` with the exponent
/// formed on `supp ρ ∩ supp σ`. Defined for every `α ≥ 0`, including `α = 1`
/// where it is the continuous extension.
pub fn log_q_log_euclidean(alpha: f64, rho: &DensityOperator, sigma: &HermitianOperator) -> f64 {
    if alpha > 1.0 && !contained(rho, sigma) {
        return f64::INFINITY;
    }
    let inter = support_intersection(rho, sigma);
    if inter.rank() == 0 {
        return f64::NEG_INFINITY;
    }
    let w = inter.basis();
    let exponent = HermitianOperator::symmetrized(
        compressed_log(rho, w) * c(alpha) + compressed_log(sigma, w) * c(1.0 - alpha),
    );
    log2_sum_exp2(exponent.eigenvalues().iter().cloned())
}

/// `lim_{β→∞} D♭_β(ρ‖σ) = λ_max(log ρ − log σ)` on `supp ρ`.
pub fn log_euclidean_max(rho: &DensityOperator, sigma: &HermitianOperator) -> f64 {
    if !contained(rho, sigma) {
        return f64::INFINITY;
    }
    let w = rho.support();
    HermitianOperator::symmetrized(compressed_log(rho, w.basis()) - compressed_log(sigma, w.basis()))
        .lambda_max()
}

/// Rényi divergence of order `α ∈ (0, ∞) \ {1}` for the sandwiched, Petz and
/// log-Euclidean families.
pub fn renyi_divergence(
    kind: DivergenceKind,
    alpha: f64,
    rho: &DensityOperator,
    sigma: &HermitianOperator,
) -> Result<DivergenceValue> {
    check_dim(rho.dim(), sigma.dim())?;
    ensure_psd(sigma)?;
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidOrder(alpha));
    }
    let log_q: fn(f64, &DensityOperator, &HermitianOperator) -> f64 = match kind {
        DivergenceKind::Sandwiched => log_q_sandwiched,
        DivergenceKind::Petz => log_q_petz,
        DivergenceKind::LogEuclidean => log_q_log_euclidean,
        other => {
            return Err(Error::RejectedInput(format!(
                "{other} is not an order-parametrized family"
            )))
        }
    };
    if (alpha - 1.0).abs() < NEAR_ONE_WINDOW {
        let d = umegaki(rho, sigma)?;
        return Ok(DivergenceValue {
            value: d.value,
            kind,
            order: Order::Alpha(alpha),
            near_one: true,
        });
    }
    let undefined = if alpha > 1.0 {
        !contained(rho, sigma)
    } else {
        match kind {
            DivergenceKind::LogEuclidean => support_intersection(rho, sigma).rank() == 0,
            _ => sigma.support_projector().is_orthogonal_to(&rho.support()),
        }
    };
    let value = if undefined {
        f64::INFINITY
    } else {
        log_q(alpha, rho, sigma) / (alpha - 1.0)
    };
    Ok(DivergenceValue {
        value,
        kind,
        order: Order::Alpha(alpha),
        near_one: false,
    })
}

/// Sandwiched divergence value for `α ∈ (0, ∞]` with `α = ∞` routed to
/// [`d_max`] and `α = 1` to [`umegaki`].
pub fn sandwiched(alpha: f64, rho: &DensityOperator, sigma: &HermitianOperator) -> Result<f64> {
    if alpha == f64::INFINITY {
        return Ok(d_max(rho, sigma)?.value);
    }
    if alpha == 1.0 {
        return Ok(umegaki(rho, sigma)?.value);
    }
    Ok(renyi_divergence(DivergenceKind::Sandwiched, alpha, rho, sigma)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{random_density_with, seeded_rng};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn diag(p: &[f64]) -> DensityOperator {
        DensityOperator::diagonal(p).unwrap()
    }

    fn ket0() -> DensityOperator {
        DensityOperator::basis_state(2, 0).unwrap()
    }

    fn ket1() -> DensityOperator {
        DensityOperator::basis_state(2, 1).unwrap()
    }

    fn plus() -> DensityOperator {
        DensityOperator::from_matrix(DMatrix::from_element(2, 2, crate::operator::c(0.5))).unwrap()
    }

    const KINDS: [DivergenceKind; 3] = [
        DivergenceKind::Sandwiched,
        DivergenceKind::Petz,
        DivergenceKind::LogEuclidean,
    ];

    #[test]
    fn fidelity_examples() {
        let mut rng = seeded_rng(1);
        let rho = random_density_with(3, 3, &mut rng).unwrap();
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fidelity(&ket0(), &ket1()).unwrap(), 0.0, epsilon = 1e-12);
        let f = fidelity(&diag(&[0.5, 0.5]), &diag(&[0.9, 0.1])).unwrap();
        assert_abs_diff_eq!(f, 0.45f64.sqrt() + 0.05f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(f, 0.894427190999916, epsilon = 1e-12);
    }

    #[test]
    fn fidelity_symmetric() {
        let mut rng = seeded_rng(2);
        for d in 2..6 {
            let a = random_density_with(d, 1 + d / 2, &mut rng).unwrap();
            let b = random_density_with(d, d, &mut rng).unwrap();
            assert_abs_diff_eq!(
                fidelity(&a, &b).unwrap(),
                fidelity(&b, &a).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn distance_examples() {
        let rho = diag(&[0.9, 0.1]);
        let sigma = diag(&[0.5, 0.5]);
        assert_abs_diff_eq!(trace_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(purified_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(trace_distance(&ket0(), &ket1()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(purified_distance(&ket0(), &ket1()).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&rho, &sigma).unwrap(), 0.4, epsilon = 1e-14);
        let f = 0.45f64.sqrt() + 0.05f64.sqrt();
        assert_abs_diff_eq!(
            purified_distance(&rho, &sigma).unwrap(),
            (1.0 - f * f).sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(purified_distance(&rho, &sigma).unwrap(), 0.447213595499958, epsilon = 1e-9);
    }

    #[test]
    fn fuchs_van_de_graaf_sandwich() {
        let mut rng = seeded_rng(3);
        for t in 0..50 {
            let d = 2 + t % 4;
            let a = random_density_with(d, 1 + t % d, &mut rng).unwrap();
            let b = random_density_with(d, d, &mut rng).unwrap();
            assert!(trace_distance(&a, &b).unwrap() <= purified_distance(&a, &b).unwrap() + 1e-10);
        }
    }

    #[test]
    fn self_divergence_is_zero() {
        let mut rng = seeded_rng(4);
        let rho = random_density_with(4, 4, &mut rng).unwrap();
        for kind in KINDS {
            for alpha in [0.3, 0.5, 0.9, 1.5, 3.0] {
                let v = renyi_divergence(kind, alpha, &rho, &rho).unwrap();
                assert_abs_diff_eq!(v.value, 0.0, epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(umegaki(&rho, &rho).unwrap().value, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(d_max(&rho, &rho).unwrap().value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn pure_state_against_maximally_mixed_is_one_bit() {
        let half = DensityOperator::maximally_mixed(2);
        for alpha in [0.6, 0.75, 2.0, 3.0] {
            let v = renyi_divergence(DivergenceKind::Sandwiched, alpha, &plus(), &half).unwrap();
            assert_abs_diff_eq!(v.value, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(d_max(&plus(), &half).unwrap().value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn commuting_families_agree_with_classical() {
        let rho = diag(&[0.9, 0.1]);
        let sigma = diag(&[0.5, 0.5]);
        let expect = (2.0f64 * (0.81 + 0.01)).log2();
        assert_abs_diff_eq!(expect, 0.713695814843359, epsilon = 1e-12);
        for kind in KINDS {
            let v = renyi_divergence(kind, 2.0, &rho, &sigma).unwrap();
            assert_abs_diff_eq!(v.value, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn umegaki_examples() {
        let v = umegaki(&diag(&[0.9, 0.1]), &diag(&[0.5, 0.5])).unwrap();
        let expect = 0.9 * 1.8f64.log2() + 0.1 * 0.2f64.log2();
        assert_abs_diff_eq!(v.value, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(v.value, 0.531004406410719, epsilon = 1e-12);
        assert!(umegaki(&ket0(), &ket1()).unwrap().is_infinite());
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(von_neumann_entropy(&plus()), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            von_neumann_entropy(&DensityOperator::maximally_mixed(4)),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(von_neumann_entropy(&diag(&[0.9, 0.1])), 0.468995593589281, epsilon = 1e-12);
    }

    #[test]
    fn support_conditions_give_infinity() {
        // α > 1 needs containment; α < 1 needs non-orthogonality
        let sigma = diag(&[1.0, 0.0]);
        let rho = plus();
        for kind in KINDS {
            assert!(renyi_divergence(kind, 2.0, &rho, &sigma).unwrap().is_infinite());
            let overlapping = renyi_divergence(kind, 0.5, &rho, &sigma).unwrap();
            assert_eq!(overlapping.is_infinite(), kind == DivergenceKind::LogEuclidean);
            assert!(renyi_divergence(kind, 0.5, &ket1(), &sigma).unwrap().is_infinite());
        }
        assert!(d_max(&rho, &sigma).unwrap().is_infinite());
    }

    #[test]
    fn log_euclidean_needs_intersection_not_overlap() {
        // non-orthogonal but trivially intersecting supports
        let v = renyi_divergence(DivergenceKind::LogEuclidean, 0.5, &plus(), &ket0()).unwrap();
        assert!(v.is_infinite());
        let w = renyi_divergence(DivergenceKind::Sandwiched, 0.5, &plus(), &ket0()).unwrap();
        assert_abs_diff_eq!(w.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_orders() {
        let rho = diag(&[0.5, 0.5]);
        for a in [0.0, -1.0, 1.0, f64::NAN] {
            assert!(matches!(
                renyi_divergence(DivergenceKind::Petz, a, &rho, &rho),
                Err(Error::InvalidOrder(_))
            ));
        }
        let not_psd = HermitianOperator::diagonal(&[1.0, -0.5]);
        assert!(renyi_divergence(DivergenceKind::Petz, 0.5, &rho, &not_psd).is_err());
        assert!(renyi_divergence(DivergenceKind::Petz, 0.5, &rho, &HermitianOperator::identity(3)).is_err());
    }

    #[test]
    fn near_one_uses_relative_entropy() {
        let rho = diag(&[0.9, 0.1]);
        let sigma = diag(&[0.5, 0.5]);
        let v = renyi_divergence(DivergenceKind::Sandwiched, 1.0 + 5e-5, &rho, &sigma).unwrap();
        assert!(v.near_one);
        assert_abs_diff_eq!(v.value, umegaki(&rho, &sigma).unwrap().value, epsilon = 0.0);
    }

    #[test]
    fn d_max_dominates_sandwiched() {
        let mut rng = seeded_rng(5);
        for t in 0..30 {
            let d = 2 + t % 4;
            let rho = random_density_with(d, 1 + t % d, &mut rng).unwrap();
            let sigma = random_density_with(d, d, &mut rng).unwrap();
            let dm = d_max(&rho, &sigma).unwrap().value;
            for beta in [2.0, 10.0, 100.0] {
                let v = sandwiched(beta, &rho, &sigma).unwrap();
                assert!(v <= dm + 1e-9, "β={beta}: {v} > {dm}");
            }
        }
    }

    #[test]
    fn sandwiched_half_is_log_fidelity() {
        let mut rng = seeded_rng(6);
        for d in 2..=6 {
            let rho = random_density_with(d, d, &mut rng).unwrap();
            let sigma = random_density_with(d, 1 + d / 2, &mut rng).unwrap();
            let v = sandwiched(0.5, &rho, &sigma).unwrap();
            let f = fidelity(&rho, &sigma).unwrap();
            assert_abs_diff_eq!(v, -2.0 * f.log2(), epsilon = 1e-9);
        }
    }

    #[test]
    fn petz_zero_order_is_support_overlap() {
        let rho = plus();
        let sigma = diag(&[0.8, 0.2]);
        // Tr(Π_ρ σ) = ⟨+|σ|+⟩ = 0.5
        assert_abs_diff_eq!(log_q_petz(0.0, &rho, &sigma), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn log_euclidean_limits() {
        let mut rng = seeded_rng(8);
        let rho = random_density_with(3, 3, &mut rng).unwrap();
        let sigma = random_density_with(3, 3, &mut rng).unwrap();
        assert_abs_diff_eq!(log_q_log_euclidean(1.0, &rho, &sigma), 0.0, epsilon = 1e-12);
        let big = 1e5;
        let approx = log_q_log_euclidean(big, &rho, &sigma) / (big - 1.0);
        assert_abs_diff_eq!(approx, log_euclidean_max(&rho, &sigma), epsilon = 1e-4);
    }
}
