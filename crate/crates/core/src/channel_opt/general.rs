//! Exact optimal transformation error as a semidefinite program over Choi
//! matrices.

use num_complex::Complex64;

use super::{
    check_cap, output_state, DistanceKind, FiniteBlockResult, SolverPath,
};
use crate::channel::ChoiChannel;
use crate::divergence::{fidelity, trace_distance};
use crate::error::{check_dim, Error, Result};
use crate::operator::{CMatrix, DensityOperator, HermitianOperator};
use crate::sdp::model::{Expr, Model, VarId, VarKind};
use crate::sdp::SdpOptions;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `N(A)_{o o'} = Σ_{ij} A_{ij} J[(i,o),(j,o')]` as an expression in `J`.
fn channel_output_entry(
    j: VarId,
    a: &CMatrix,
    dim_out: usize,
    o: usize,
    o2: usize,
) -> Expr {
    let din = a.nrows();
    let mut e = Expr::new();
    for i in 0..din {
        for k in 0..din {
            e.add(j, i * dim_out + o, k * dim_out + o2, a[(i, k)]);
        }
    }
    e
}

/// Variables and constraints shared by both distances: `J ⪰ 0`,
/// `Tr_out J = I`, `N(σ_in) = σ_t`.
fn channel_model(
    model: &mut Model,
    dim_in: usize,
    dim_out: usize,
    sigma_in: &HermitianOperator,
    sigma_t: &HermitianOperator,
) -> VarId {
    let j = model.var(VarKind::Hermitian(dim_in * dim_out));
    model.constrain_hermitian(
        dim_in,
        |a, b| {
            let mut e = Expr::new();
            for o in 0..dim_out {
                e.add(j, a * dim_out + o, b * dim_out + o, one());
            }
            e
        },
        &CMatrix::identity(dim_in, dim_in),
    );
    let s = sigma_in.matrix().clone();
    model.constrain_hermitian(
        dim_out,
        |o, o2| channel_output_entry(j, &s, dim_out, o, o2),
        sigma_t.matrix(),
    );
    j
}

fn check_inputs(
    rho_in: &DensityOperator,
    sigma_in: &DensityOperator,
    rho_t: &DensityOperator,
    sigma_t: &DensityOperator,
    tol: f64,
) -> Result<(usize, usize)> {
    check_dim(rho_in.dim(), sigma_in.dim())?;
    check_dim(rho_t.dim(), sigma_t.dim())?;
    if !(tol > 0.0) {
        return Err(Error::RejectedInput(format!("tolerance must be positive, got {tol}")));
    }
    let (din, dout) = (rho_in.dim(), rho_t.dim());
    check_cap(din, dout)?;
    Ok((din, dout))
}

fn options(tol: f64) -> SdpOptions {
    SdpOptions {
        gap_tolerance: tol,
        ..SdpOptions::default()
    }
}

fn finish(
    kind: DistanceKind,
    channel: ChoiChannel,
    sigma_in: &DensityOperator,
    sigma_t: &DensityOperator,
    optimal_error: f64,
    optimal_fidelity_sq: f64,
    solver_gap: f64,
    iterations: usize,
) -> Result<FiniteBlockResult> {
    let sigma_out = channel.apply(sigma_in)?;
    let sigma_residual = (sigma_out.matrix() - sigma_t.matrix()).norm();
    Ok(FiniteBlockResult {
        n: 1,
        m: 1,
        kind,
        optimal_error,
        optimal_fidelity_sq,
        tp_residual: channel.tp_residual(),
        sigma_residual,
        channel: Some(channel),
        classical: None,
        solver_gap,
        iterations,
        path: SolverPath::General,
    })
}

/// `max F(N(ρ_in), ρ_t)` over channels with `N(σ_in) = σ_t`, via
/// `max Re Tr X` subject to `[[W† N(ρ_in) W, X], [X†, W† ρ_t W]] ⪰ 0`, where
/// `W` spans the support of `ρ_t`.
pub fn solve_optimal_fidelity(
    rho_in: &DensityOperator,
    sigma_in: &DensityOperator,
    rho_t: &DensityOperator,
    sigma_t: &DensityOperator,
    tol: f64,
) -> Result<FiniteBlockResult> {
    let (din, dout) = check_inputs(rho_in, sigma_in, rho_t, sigma_t, tol)?;
    let mut model = Model::new();
    let j = channel_model(&mut model, din, dout, sigma_in, sigma_t);

    let support = rho_t.support();
    let k = support.rank();
    let full_rank = k == dout;
    let w = if full_rank {
        CMatrix::identity(dout, dout)
    } else {
        support.basis().clone()
    };
    let rho_small = w.adjoint() * rho_t.matrix() * &w;
    let block = model.var(VarKind::Hermitian(2 * k));
    let r = rho_in.matrix().clone();
    model.constrain_hermitian(
        k,
        |a, b| {
            let mut e = Expr::new().term(block, a, b, one());
            if full_rank {
                e.extend(&channel_output_entry(j, &r, dout, a, b).scaled(-one()));
            } else {
                for o in 0..dout {
                    for o2 in 0..dout {
                        let c = w[(o, a)].conj() * w[(o2, b)];
                        if c.norm() > 0.0 {
                            e.extend(&channel_output_entry(j, &r, dout, o, o2).scaled(-c));
                        }
                    }
                }
            }
            e
        },
        &CMatrix::zeros(k, k),
    );
    model.constrain_hermitian(
        k,
        |a, b| Expr::new().term(block, k + a, k + b, one()),
        &rho_small,
    );
    let mut objective = Expr::new();
    for a in 0..k {
        objective.add(block, a, k + a, one());
    }
    model.maximize_re(objective);

    let sol = model.solve(&options(tol))?;
    let choi = sol.value(j).hermitian().expect("hermitian variable").clone();
    let channel = ChoiChannel::new(din, dout, choi)?;
    let f = sol.objective.clamp(0.0, 1.0);
    let fsq = f * f;
    finish(
        DistanceKind::Purified,
        channel,
        sigma_in,
        sigma_t,
        (1.0 - fsq).max(0.0).sqrt(),
        fsq,
        sol.gap(),
        sol.iterations,
    )
}

/// `min ½‖N(ρ_in) − ρ_t‖₁` over channels with `N(σ_in) = σ_t`, via
/// `min ½(Tr A + Tr B)` with `A − B = N(ρ_in) − ρ_t`, `A, B ⪰ 0`.
pub fn solve_optimal_trace(
    rho_in: &DensityOperator,
    sigma_in: &DensityOperator,
    rho_t: &DensityOperator,
    sigma_t: &DensityOperator,
    tol: f64,
) -> Result<FiniteBlockResult> {
    let (din, dout) = check_inputs(rho_in, sigma_in, rho_t, sigma_t, tol)?;
    let mut model = Model::new();
    let j = channel_model(&mut model, din, dout, sigma_in, sigma_t);
    let a = model.var(VarKind::Hermitian(dout));
    let b = model.var(VarKind::Hermitian(dout));
    let r = rho_in.matrix().clone();
    let target = -rho_t.matrix();
    model.constrain_hermitian(
        dout,
        |o, o2| {
            let mut e = Expr::new()
                .term(a, o, o2, one())
                .term(b, o, o2, -one());
            e.extend(&channel_output_entry(j, &r, dout, o, o2).scaled(-one()));
            e
        },
        &target,
    );
    let mut objective = Expr::new();
    for o in 0..dout {
        objective.add(a, o, o, Complex64::new(0.5, 0.0));
        objective.add(b, o, o, Complex64::new(0.5, 0.0));
    }
    model.minimize_re(objective);

    let sol = model.solve(&options(tol))?;
    let choi = sol.value(j).hermitian().expect("hermitian variable").clone();
    let channel = ChoiChannel::new(din, dout, choi)?;
    let d = (-sol.objective).clamp(0.0, 1.0);
    let out = output_state(&channel.apply(rho_in)?)?;
    let f = fidelity(&out, rho_t)?;
    finish(
        DistanceKind::Trace,
        channel,
        sigma_in,
        sigma_t,
        d,
        f * f,
        sol.gap(),
        sol.iterations,
    )
}

/// The optimal error of `kind` for the given states.
pub fn solve_optimal(
    kind: DistanceKind,
    rho_in: &DensityOperator,
    sigma_in: &DensityOperator,
    rho_t: &DensityOperator,
    sigma_t: &DensityOperator,
    tol: f64,
) -> Result<FiniteBlockResult> {
    match kind {
        DistanceKind::Purified => solve_optimal_fidelity(rho_in, sigma_in, rho_t, sigma_t, tol),
        DistanceKind::Trace => solve_optimal_trace(rho_in, sigma_in, rho_t, sigma_t, tol),
    }
}

/// Trace distance between the channel output on `rho_in` and `rho_t`.
pub fn achieved_trace_distance(
    channel: &ChoiChannel,
    rho_in: &DensityOperator,
    rho_t: &DensityOperator,
) -> Result<f64> {
    trace_distance(&output_state(&channel.apply(rho_in)?)?, rho_t)
}

/// Fidelity between the channel output on `rho_in` and `rho_t`.
pub fn achieved_fidelity(
    channel: &ChoiChannel,
    rho_in: &DensityOperator,
    rho_t: &DensityOperator,
) -> Result<f64> {
    fidelity(&output_state(&channel.apply(rho_in)?)?, rho_t)
}
