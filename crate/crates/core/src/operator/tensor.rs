use num_complex::Complex64;

use super::{CMatrix, HermitianOperator};
use crate::error::{Error, Result};

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrized(a.matrix().kronecker(b.matrix()))
}

/// `A^{⊗n}`; the zero-th power is the 1×1 identity.
pub fn tensor_power(a: &HermitianOperator, n: usize) -> HermitianOperator {
    let mut acc = CMatrix::identity(1, 1);
    for _ in 0..n {
        acc = acc.kronecker(a.matrix());
    }
    HermitianOperator::symmetrized(acc)
}

/// Flat offsets of every multi-index over the chosen factors, first factor most
/// significant, as in the Kronecker ordering.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(out.len() * dims[f]);
        for &base in &out {
            for digit in 0..dims[f] {
                next.push(base + digit * strides[f]);
            }
        }
        out = next;
    }
    out
}

/// Traces out every factor not listed in `keep`. Kept factors stay in their
/// original order.
pub fn partial_trace(
    x: &HermitianOperator,
    dims: &[usize],
    keep: &[usize],
) -> Result<HermitianOperator> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || total != x.dim() {
        return Err(Error::RejectedInput(format!(
            "factor dimensions {dims:?} do not multiply to {}",
            x.dim()
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(Error::RejectedInput(format!(
            "keep set {keep:?} references a factor beyond {}",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !kept.contains(i)).collect();

    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let kept_off = offsets(dims, &strides, &kept);
    let traced_off = offsets(dims, &strides, &traced);

    let m = x.matrix();
    let dk = kept_off.len();
    let out = CMatrix::from_fn(dk, dk, |a, b| {
        traced_off
            .iter()
            .map(|&t| m[(kept_off[a] + t, kept_off[b] + t)])
            .fold(Complex64::new(0.0, 0.0), |s, z| s + z)
    });
    Ok(HermitianOperator::symmetrized(out))
}
