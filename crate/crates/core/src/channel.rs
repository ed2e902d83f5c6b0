//! Quantum channels in Choi representation.
//!
//! The Choi matrix of `N : L(C^din) → L(C^dout)` is
//! `J = Σ_{ij} |i⟩⟨j| ⊗ N(|i⟩⟨j|)` on `in ⊗ out`, so complete positivity is
//! `J ⪰ 0` and trace preservation is `Tr_out J = I_in`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::operator::{partial_trace, CMatrix, HermitianOperator, StateFile};

#[derive(Clone, Debug)]
pub struct ChoiChannel {
    dim_in: usize,
    dim_out: usize,
    choi: HermitianOperator,
}

impl ChoiChannel {
    pub fn new(dim_in: usize, dim_out: usize, choi: HermitianOperator) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::RejectedInput("channel dimensions must be positive".into()));
        }
        check_dim(dim_in * dim_out, choi.dim())?;
        Ok(Self {
            dim_in,
            dim_out,
            choi,
        })
    }

    pub fn from_kraus(kraus: &[CMatrix]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::RejectedInput("empty Kraus list".into()))?;
        let (dout, din) = first.shape();
        let mut j = CMatrix::zeros(din * dout, din * dout);
        for k in kraus {
            if k.shape() != (dout, din) {
                return Err(Error::RejectedInput("Kraus operators differ in shape".into()));
            }
            // vec(K) with input index most significant: v[(i, o)] = K[o, i]
            let v = CMatrix::from_fn(din * dout, 1, |row, _| k[(row % dout, row / dout)]);
            j += &v * v.adjoint();
        }
        Self::new(din, dout, HermitianOperator::symmetrized(j))
    }

    pub fn identity(dim: usize) -> Self {
        let v = CMatrix::from_fn(dim * dim, 1, |row, _| {
            if row / dim == row % dim {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let j = HermitianOperator::symmetrized(&v * v.adjoint());
        Self {
            dim_in: dim,
            dim_out: dim,
            choi: j,
        }
    }

    /// `X ↦ Tr(X) · state`, with Choi matrix `I ⊗ state`.
    pub fn replacement(dim_in: usize, state: &HermitianOperator) -> Self {
        let j = HermitianOperator::identity(dim_in).matrix().kronecker(state.matrix());
        Self {
            dim_in,
            dim_out: state.dim(),
            choi: HermitianOperator::symmetrized(j),
        }
    }

    /// `X ↦ Tr(X)` onto a one-dimensional output.
    pub fn trace_out(dim_in: usize) -> Self {
        Self::replacement(dim_in, &HermitianOperator::identity(1))
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    /// `N(A) = Tr_in[(Aᵀ ⊗ I) J]`, i.e. `N(A)_{o o'} = Σ_{ij} A_{ij} J_{(i,o),(j,o')}`.
    pub fn apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        check_dim(self.dim_in, a.dim())?;
        let (din, dout) = (self.dim_in, self.dim_out);
        let j = self.choi.matrix();
        let am = a.matrix();
        let mut out = CMatrix::zeros(dout, dout);
        for i in 0..din {
            for k in 0..din {
                let aik = am[(i, k)];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let block = j.view((i * dout, k * dout), (dout, dout));
                out += block * aik;
            }
        }
        Ok(HermitianOperator::symmetrized(out))
    }

    /// `‖Tr_out J − I_in‖_F`.
    pub fn tp_residual(&self) -> f64 {
        let marginal = partial_trace(&self.choi, &[self.dim_in, self.dim_out], &[0])
            .expect("choi dimensions validated at construction");
        (marginal.matrix() - CMatrix::identity(self.dim_in, self.dim_in)).norm()
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        self.choi.lambda_min()
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            state: StateFile::from_operator(&self.choi),
        }
    }

    pub fn from_file(file: &ChannelFile) -> Result<Self> {
        Self::new(file.dim_in, file.dim_out, file.state.to_operator()?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }
}

/// Channel export: the Choi matrix in state-file layout plus the two dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    #[serde(flatten)]
    pub state: StateFile,
}

/// Same as [`ChoiChannel::apply`], free-function form.
pub fn apply_choi(ch: &ChoiChannel, a: &HermitianOperator) -> Result<HermitianOperator> {
    ch.apply(a)
}
