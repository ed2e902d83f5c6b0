//! Dense Hermitian linear algebra on finite-dimensional Hilbert spaces.
//!
//! Everything here works on `nalgebra` dense complex matrices. Operators are
//! immutable once built; the spectral decomposition is computed on first use
//! and cached for the lifetime of the value.

mod io;
mod pinching;
mod random;
mod tensor;

use std::ops::Deref;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

pub use io::{read_state_file, write_state_file, StateFile};
pub use pinching::{apply_pinching, pinching_map, PinchingMap, DEFAULT_DEGENERACY_TOLERANCE};
pub use random::{
    random_channel, random_density, random_density_with, random_hermitian_with,
    random_kraus_with, random_pure_with, random_unitary_with, seeded_rng, SeededRng,
};
pub use tensor::{partial_trace, tensor, tensor_power};

pub type CMatrix = DMatrix<Complex64>;

/// Support membership threshold, relative to the largest eigenvalue magnitude.
pub const RANK_TOLERANCE: f64 = 1e-12;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const SUPPORT_CONTAINMENT_TOLERANCE: f64 = 1e-8;
const INTERSECTION_TOLERANCE: f64 = 1e-10;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Eigenvalues (descending) and a unitary whose columns are the matching eigenvectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Reassemble `V f(λ) V†`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..d {
            let w = f(self.values[j]);
            scaled.column_mut(j).scale_mut(w);
        }
        &scaled * self.vectors.adjoint()
    }
}

/// A complex Hermitian matrix with a lazily cached eigendecomposition.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    entries: CMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl HermitianOperator {
    /// Validates Hermiticity to a relative Frobenius tolerance of 1e-12 and
    /// stores the exactly symmetrized matrix.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::RejectedInput(format!(
                "operator must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::RejectedInput("operator must have positive dimension".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::RejectedInput("operator has non-finite entries".into()));
        }
        let asym = (&entries - entries.adjoint()).norm();
        let scale = entries.norm().max(f64::MIN_POSITIVE);
        if asym > HERMITIAN_TOLERANCE * scale && asym > f64::MIN_POSITIVE {
            return Err(Error::RejectedInput(format!(
                "operator is not Hermitian (relative asymmetry {:.3e})",
                asym / scale
            )));
        }
        Ok(Self::symmetrized(entries))
    }

    /// Builds from a matrix known to be Hermitian up to rounding, symmetrizing it.
    pub(crate) fn symmetrized(entries: CMatrix) -> Self {
        let sym = (&entries + entries.adjoint()) * c(0.5);
        Self {
            entries: sym,
            spectrum: OnceLock::new(),
        }
    }

    pub(crate) fn from_spectrum(spectrum: Spectrum) -> Self {
        let entries = spectrum.recompose_with(|x| x);
        let op = Self::symmetrized(entries);
        let _ = op.spectrum.set(spectrum);
        op
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(c))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let entries = CMatrix::from_fn(d, d, |i, j| if i == j { c(values[i]) } else { c(0.0) });
        Self::symmetrized(entries)
    }

    pub fn identity(dim: usize) -> Self {
        Self::symmetrized(CMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::symmetrized(CMatrix::zeros(dim, dim))
    }

    /// `|ψ⟩⟨ψ|` for an arbitrary (not necessarily normalized) vector.
    pub fn outer(psi: &DVector<Complex64>) -> Self {
        Self::symmetrized(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| decompose(&self.entries))
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.spectrum().values
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn lambda_min(&self) -> f64 {
        let v = self.eigenvalues();
        v[v.len() - 1]
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Schatten-1 norm, from the eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::symmetrized(&self.entries + &other.entries))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::symmetrized(&self.entries - &other.entries))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::symmetrized(&self.entries * c(s))
    }

    /// `B · self · B†` for any (possibly rectangular) `B`.
    pub fn conjugate_by(&self, b: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), b.ncols())?;
        Ok(Self::symmetrized(b * &self.entries * b.adjoint()))
    }

    /// Entrywise transpose, which for a Hermitian matrix is the complex conjugate.
    pub fn transpose(&self) -> Self {
        Self::symmetrized(self.entries.transpose())
    }

    /// `Re Tr(self · other)`; exact for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum())
    }

    /// Projector onto the span of eigenvectors with `|λ| > tol · max|λ|`.
    pub fn support(&self, tol: f64) -> SupportProjector {
        let spec = self.spectrum();
        let threshold = tol * spec.max_abs();
        let cols: Vec<usize> = (0..self.dim())
            .filter(|&j| spec.values[j].abs() > threshold)
            .collect();
        SupportProjector::from_basis(spec.vectors.select_columns(cols.iter()))
    }

    pub fn support_projector(&self) -> SupportProjector {
        self.support(RANK_TOLERANCE)
    }

    /// Smallest eigenvalue is nonnegative up to `tol · λ_max`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.lambda_min() >= -tol * self.spectrum().max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.entries - &other.entries).norm() <= tol
    }
}

fn decompose(m: &CMatrix) -> Spectrum {
    let eig = m.clone().symmetric_eigen();
    let d = m.nrows();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(d, order.iter().map(|&j| eig.eigenvalues[j]));
    let vectors = eig.eigenvectors.select_columns(order.iter());
    Spectrum { values, vectors }
}

/// Eigenvalues sorted descending and the unitary of eigenvectors, `H = V diag(λ) V†`.
pub fn eig_hermitian(h: &HermitianOperator) -> (DVector<f64>, CMatrix) {
    let s = h.spectrum();
    (s.values.clone(), s.vectors.clone())
}

/// Scalar functions that can be lifted to Hermitian operators. Logarithms and
/// exponentials are base 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarMap {
    Power(f64),
    Log2,
    Exp2,
}

/// Applies `f` through the spectral decomposition of `a`.
///
/// Eigenvalues at or below `RANK_TOLERANCE · λ_max` are outside the support and
/// map to zero (`0^p = 0`, including `p = 0`, so `A^0` is the support
/// projector). Negative powers and the logarithm need `on_support` when the
/// operator is singular. Powers and logarithms reject operators with
/// eigenvalues below `-RANK_TOLERANCE · λ_max`.
pub fn spectral_transform(
    a: &HermitianOperator,
    f: ScalarMap,
    on_support: bool,
) -> Result<HermitianOperator> {
    let spec = a.spectrum();
    let threshold = RANK_TOLERANCE * spec.max_abs();
    let needs_psd = !matches!(f, ScalarMap::Exp2);
    if needs_psd && spec.values.iter().any(|&v| v < -threshold) {
        return Err(Error::RejectedInput(format!(
            "{f:?} requires a positive semidefinite operator (λ_min = {:.3e})",
            a.lambda_min()
        )));
    }
    let singular = spec.values.iter().any(|&v| v <= threshold);
    let needs_support = matches!(f, ScalarMap::Log2) || matches!(f, ScalarMap::Power(p) if p < 0.0);
    if singular && needs_support && !on_support {
        return Err(Error::SingularOperator(format!(
            "{f:?} of a singular operator needs on_support"
        )));
    }
    let mapped = |v: f64| -> f64 {
        match f {
            ScalarMap::Exp2 => v.exp2(),
            _ if v <= threshold => 0.0,
            ScalarMap::Power(p) => v.powf(p),
            ScalarMap::Log2 => v.log2(),
        }
    };
    Ok(HermitianOperator::symmetrized(spec.recompose_with(mapped)))
}

/// Orthogonal projector together with an orthonormal basis of its range.
#[derive(Clone, Debug)]
pub struct SupportProjector {
    projector: HermitianOperator,
    basis: CMatrix,
    rank: usize,
}

impl SupportProjector {
    /// `basis` must have orthonormal columns.
    pub(crate) fn from_basis(basis: CMatrix) -> Self {
        let rank = basis.ncols();
        let projector = HermitianOperator::symmetrized(&basis * basis.adjoint());
        Self {
            projector,
            basis,
            rank,
        }
    }

    pub fn projector(&self) -> &HermitianOperator {
        &self.projector
    }

    /// `d × rank` isometry spanning the range.
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    /// `range(other) ⊆ range(self)`.
    pub fn contains(&self, other: &SupportProjector) -> bool {
        if other.rank == 0 {
            return true;
        }
        let outside = &other.basis - self.projector.matrix() * &other.basis;
        outside.norm() <= SUPPORT_CONTAINMENT_TOLERANCE * (other.rank as f64).sqrt()
    }

    pub fn is_orthogonal_to(&self, other: &SupportProjector) -> bool {
        (self.basis.adjoint() * &other.basis).norm() <= SUPPORT_CONTAINMENT_TOLERANCE
    }

    /// Projector onto `range(self) ∩ range(other)`, read off as the eigenvalue-1
    /// eigenspace of `P Q P` restricted to `range(P)`.
    pub fn intersection(&self, other: &SupportProjector) -> SupportProjector {
        if self.rank == 0 || other.rank == 0 {
            return SupportProjector::from_basis(CMatrix::zeros(self.dim(), 0));
        }
        // W† Q W on range(P); eigenvalues are cos² of principal angles.
        let compressed = HermitianOperator::symmetrized(
            self.basis.adjoint() * other.projector.matrix() * &self.basis,
        );
        let spec = compressed.spectrum();
        let cols: Vec<usize> = (0..self.rank)
            .filter(|&j| spec.values[j] >= 1.0 - INTERSECTION_TOLERANCE)
            .collect();
        let inner = spec.vectors.select_columns(cols.iter());
        SupportProjector::from_basis(&self.basis * inner)
    }

    pub fn compress(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        check_dim(self.dim(), a.dim())?;
        Ok(HermitianOperator::symmetrized(
            self.basis.adjoint() * a.matrix() * &self.basis,
        ))
    }

    pub fn expand(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        check_dim(self.rank, a.dim())?;
        Ok(HermitianOperator::symmetrized(
            &self.basis * a.matrix() * self.basis.adjoint(),
        ))
    }
}

/// Positive semidefinite, unit-trace operator.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    op: HermitianOperator,
    rank_tolerance: f64,
}

impl DensityOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, RANK_TOLERANCE)
    }

    /// Eigenvalues in `[-tol·λ_max, 0)` are clamped to zero; larger negative
    /// eigenvalues or a trace off by more than 1e-10 are rejected.
    pub fn with_tolerance(op: HermitianOperator, rank_tolerance: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::RejectedInput(format!("state has trace {tr}, expected 1")));
        }
        let lmax = op.lambda_max();
        let lmin = op.lambda_min();
        if lmin < -rank_tolerance * lmax {
            return Err(Error::RejectedInput(format!(
                "state has negative eigenvalue {lmin:.3e}"
            )));
        }
        let op = if lmin < 0.0 {
            let spec = op.spectrum();
            HermitianOperator::from_spectrum(Spectrum {
                values: spec.values.map(|v| v.max(0.0)),
                vectors: spec.vectors.clone(),
            })
        } else {
            op
        };
        Ok(Self { op, rank_tolerance })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(m)?)
    }

    /// Normalizes a PSD operator by its trace.
    pub fn normalized(op: &HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if tr <= 0.0 {
            return Err(Error::RejectedInput("cannot normalize an operator with trace <= 0".into()));
        }
        Self::new(op.scale(1.0 / tr))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diagonal(probs))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            op: HermitianOperator::identity(dim).scale(1.0 / dim as f64),
            rank_tolerance: RANK_TOLERANCE,
        }
    }

    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::RejectedInput("zero vector is not a state".into()));
        }
        Self::new(HermitianOperator::outer(&(psi / c(n))))
    }

    /// Computational basis state `|k⟩⟨k|`.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::RejectedInput(format!("basis index {k} out of range {dim}")));
        }
        let mut p = vec![0.0; dim];
        p[k] = 1.0;
        Self::diagonal(&p)
    }

    pub fn op(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    pub fn support(&self) -> SupportProjector {
        self.op.support(self.rank_tolerance)
    }

    pub fn rank(&self) -> usize {
        let lmax = self.op.lambda_max();
        self.op
            .eigenvalues()
            .iter()
            .filter(|&&v| v > self.rank_tolerance * lmax)
            .count()
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }
}

impl Deref for DensityOperator {
    type Target = HermitianOperator;

    fn deref(&self) -> &HermitianOperator {
        &self.op
    }
}

impl AsRef<HermitianOperator> for DensityOperator {
    fn as_ref(&self) -> &HermitianOperator {
        &self.op
    }
}

impl AsRef<HermitianOperator> for HermitianOperator {
    fn as_ref(&self) -> &HermitianOperator {
        self
    }
}

/// `max_{i,j} ‖[A_i, A_j]‖_F`, zero when all operators commute.
pub fn max_commutator(ops: &[&HermitianOperator]) -> f64 {
    let mut worst = 0.0_f64;
    for (i, a) in ops.iter().enumerate() {
        for b in &ops[i + 1..] {
            if a.dim() != b.dim() {
                continue;
            }
            let comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
            worst = worst.max(comm.norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pauli_x() -> HermitianOperator {
        HermitianOperator::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap()
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let h = HermitianOperator::diagonal(&[3.0, 1.0, 2.0]);
        let (vals, vecs) = eig_hermitian(&h);
        assert_eq!(vals.as_slice(), &[3.0, 2.0, 1.0]);
        // permutation matrix up to phases
        for j in 0..3 {
            let col = vecs.column(j);
            let big = col.iter().filter(|z| z.norm() > 1.0 - 1e-12).count();
            assert_eq!(big, 1);
        }
    }

    #[test]
    fn pauli_x_spectrum() {
        let (vals, _) = eig_hermitian(&pauli_x());
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn random_recomposition() {
        let mut rng = seeded_rng(7);
        for d in [2, 5, 9] {
            let h = random_hermitian_with(d, &mut rng);
            let (vals, vecs) = eig_hermitian(&h);
            let back = &vecs * CMatrix::from_diagonal(&vals.map(c)) * vecs.adjoint();
            let rel = (back - h.matrix()).norm() / h.frobenius_norm();
            assert!(rel < 1e-10, "residual {rel}");
            let unit = vecs.adjoint() * &vecs - CMatrix::identity(d, d);
            assert!(unit.norm() < 1e-10);
            assert!(vals.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]).map(c);
        assert!(matches!(HermitianOperator::new(m), Err(Error::RejectedInput(_))));
    }

    #[test]
    fn power_uses_zero_convention() {
        let a = HermitianOperator::diagonal(&[4.0, 0.0]);
        let r = spectral_transform(&a, ScalarMap::Power(0.5), true).unwrap();
        assert!(r.approx_eq(&HermitianOperator::diagonal(&[2.0, 0.0]), 1e-14));
        let p0 = spectral_transform(&a, ScalarMap::Power(0.0), true).unwrap();
        assert!(p0.approx_eq(&HermitianOperator::diagonal(&[1.0, 0.0]), 1e-14));
    }

    #[test]
    fn log_of_identity_is_zero() {
        let r = spectral_transform(&HermitianOperator::identity(3), ScalarMap::Log2, false).unwrap();
        assert!(r.frobenius_norm() < 1e-15);
    }

    #[test]
    fn log_needs_support_flag_on_singular() {
        let a = HermitianOperator::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            spectral_transform(&a, ScalarMap::Log2, false),
            Err(Error::SingularOperator(_))
        ));
        assert!(matches!(
            spectral_transform(&a, ScalarMap::Power(-0.5), false),
            Err(Error::SingularOperator(_))
        ));
        let l = spectral_transform(&a, ScalarMap::Log2, true).unwrap();
        assert!(l.frobenius_norm() < 1e-15);
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = seeded_rng(11);
        for d in [2, 4, 6] {
            let a = random_density_with(d, d, &mut rng).unwrap();
            let l = spectral_transform(&a, ScalarMap::Log2, false).unwrap();
            let back = spectral_transform(&l, ScalarMap::Exp2, false).unwrap();
            assert!(back.approx_eq(&a, 1e-9));
        }
    }

    #[test]
    fn density_clamps_small_negative() {
        let op = HermitianOperator::diagonal(&[1.0 + 1e-14, -1e-14]);
        let rho = DensityOperator::new(op).unwrap();
        assert!(rho.lambda_min() >= 0.0);
        assert_eq!(rho.rank(), 1);
        assert!(DensityOperator::diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityOperator::diagonal(&[0.5, 0.4]).is_err());
    }

    #[test]
    fn support_projector_properties() {
        let mut rng = seeded_rng(3);
        let rho = random_density_with(5, 2, &mut rng).unwrap();
        let p = rho.support();
        assert_eq!(p.rank(), 2);
        let pm = p.projector().matrix();
        assert!((pm * pm - pm).norm() < 1e-10);
        assert_abs_diff_eq!(p.projector().trace().round(), 2.0);
        let pap = pm * rho.matrix() * pm;
        assert!((pap - rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn support_intersection() {
        let a = HermitianOperator::diagonal(&[1.0, 1.0, 0.0]).support_projector();
        let b = HermitianOperator::diagonal(&[0.0, 1.0, 1.0]).support_projector();
        let i = a.intersection(&b);
        assert_eq!(i.rank(), 1);
        assert!(i
            .projector()
            .approx_eq(&HermitianOperator::diagonal(&[0.0, 1.0, 0.0]), 1e-12));
        assert!(a.contains(&i));
        assert!(!a.contains(&b));
        let c0 = HermitianOperator::diagonal(&[0.0, 0.0, 1.0]).support_projector();
        assert!(a.is_orthogonal_to(&c0));
        assert_eq!(a.intersection(&c0).rank(), 0);
    }

    #[test]
    fn commutator_detects_noncommuting() {
        let d = HermitianOperator::diagonal(&[0.7, 0.3]);
        let e = HermitianOperator::diagonal(&[0.1, 0.9]);
        assert_eq!(max_commutator(&[&d, &e]), 0.0);
        assert!(max_commutator(&[&d, &pauli_x()]) > 0.1);
    }
}
