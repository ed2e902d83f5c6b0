//! Seeded random instances: states, unitaries, Hermitian matrices, channels.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, DensityOperator, HermitianOperator};
use crate::channel::ChoiChannel;
use crate::error::{Error, Result};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// Haar-distributed `rows × cols` isometry (`rows ≥ cols`), from the QR
/// decomposition of a complex Gaussian matrix with the phase of `R` removed.
fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(rows, cols, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..cols {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

pub fn random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    random_isometry(dim, dim, rng)
}

/// GUE-like random Hermitian matrix.
pub fn random_hermitian_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = gaussian_matrix(dim, dim, rng);
    HermitianOperator::symmetrized(&g + g.adjoint())
}

/// `G G† / Tr(G G†)` with `G` a `dim × rank` complex Gaussian matrix.
pub fn random_density_with<R: Rng + ?Sized>(
    dim: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::RejectedInput(format!(
            "random state needs 1 <= rank <= dim, got rank {rank}, dim {dim}"
        )));
    }
    let g = gaussian_matrix(dim, rank, rng);
    let m = &g * g.adjoint();
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    DensityOperator::new(HermitianOperator::symmetrized(m / Complex64::new(tr, 0.0)))
}

pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density_with(dim, rank, &mut seeded_rng(seed))
}

pub fn random_pure_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DensityOperator> {
    let g = gaussian_matrix(dim, 1, rng);
    DensityOperator::pure(&DVector::from_column_slice(g.as_slice()))
}

/// Kraus operators `K_e = (I ⊗ ⟨e|) V` of a Haar-random isometry
/// `V : C^dim_in → C^dim_out ⊗ C^env_dim`.
pub fn random_kraus_with<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
    rng: &mut R,
) -> Result<Vec<CMatrix>> {
    if dim_in == 0 || dim_out == 0 || env_dim == 0 {
        return Err(Error::RejectedInput("channel dimensions must be positive".into()));
    }
    if dim_out * env_dim < dim_in {
        return Err(Error::RejectedInput(format!(
            "no isometry from dimension {dim_in} into {dim_out}x{env_dim}"
        )));
    }
    let v = random_isometry(dim_out * env_dim, dim_in, rng);
    Ok((0..env_dim)
        .map(|e| CMatrix::from_fn(dim_out, dim_in, |o, i| v[(o * env_dim + e, i)]))
        .collect())
}

/// Random channel obtained from a seeded isometry followed by tracing out the
/// environment.
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    env_dim: usize,
    seed: u64,
) -> Result<ChoiChannel> {
    let kraus = random_kraus_with(dim_in, dim_out, env_dim, &mut seeded_rng(seed))?;
    ChoiChannel::from_kraus(&kraus)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_rank_and_trace() {
        let rho = random_density(4, 2, 1).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert_eq!(rho.rank(), 2);
        assert!(rho.lambda_min() >= 0.0);
    }

    #[test]
    fn same_seed_bit_identical() {
        let a = random_density(5, 3, 99).unwrap();
        let b = random_density(5, 3, 99).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c1 = random_channel(2, 3, 2, 5).unwrap();
        let c2 = random_channel(2, 3, 2, 5).unwrap();
        assert_eq!(c1.choi().matrix(), c2.choi().matrix());
    }

    #[test]
    fn invalid_rank_rejected() {
        assert!(random_density(3, 0, 1).is_err());
        assert!(random_density(3, 4, 1).is_err());
        assert!(random_channel(4, 1, 2, 1).is_err());
    }

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded_rng(17);
        let u = random_unitary_with(6, &mut rng);
        assert!((u.adjoint() * &u - CMatrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn channel_preserves_trace() {
        let ch = random_channel(3, 2, 3, 4).unwrap();
        let mixed = DensityOperator::maximally_mixed(3);
        let out = ch.apply(&mixed).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-10);
        assert!(ch.tp_residual() < 1e-10);
    }
}
