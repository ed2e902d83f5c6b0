use super::{CMatrix, HermitianOperator, SupportProjector};
use crate::error::{check_dim, Result};

/// Relative gap below which neighbouring eigenvalues count as the same eigenvalue.
pub const DEFAULT_DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Spectral projectors of a Hermitian operator, one per distinct eigenvalue.
#[derive(Clone, Debug)]
pub struct PinchingMap {
    projectors: Vec<SupportProjector>,
}

impl PinchingMap {
    pub fn projectors(&self) -> &[SupportProjector] {
        &self.projectors
    }

    /// Number of distinct eigenvalues of the generating operator.
    pub fn v(&self) -> usize {
        self.projectors.len()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }
}

/// Groups the eigenvalues of `a` into clusters whose consecutive gaps are at
/// most `degeneracy_tolerance` times the spectral range.
pub fn pinching_map(a: &HermitianOperator, degeneracy_tolerance: f64) -> PinchingMap {
    let spec = a.spectrum();
    let d = a.dim();
    let range = spec.values[0] - spec.values[d - 1];
    let cut = degeneracy_tolerance * range;
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..d {
        if spec.values[j - 1] - spec.values[j] > cut {
            groups.push(Vec::new());
        }
        groups.last_mut().expect("nonempty").push(j);
    }
    let projectors = groups
        .into_iter()
        .map(|g| SupportProjector::from_basis(spec.vectors.select_columns(g.iter())))
        .collect();
    PinchingMap { projectors }
}

/// `X ↦ Σᵢ Pᵢ X Pᵢ`.
pub fn apply_pinching(map: &PinchingMap, x: &HermitianOperator) -> Result<HermitianOperator> {
    check_dim(map.dim(), x.dim())?;
    let mut acc = CMatrix::zeros(x.dim(), x.dim());
    for p in &map.projectors {
        // P X P = W (W† X W) W†
        let w = p.basis();
        acc += w * (w.adjoint() * x.matrix() * w) * w.adjoint();
    }
    Ok(HermitianOperator::symmetrized(acc))
}
