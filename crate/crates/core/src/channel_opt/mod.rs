//! Exact finite-blocklength transformation error: the best fidelity or trace
//! distance reachable by channels mapping `σ1^{⊗n}` exactly onto `σ2^{⊗m}`.

pub mod classical;
pub mod general;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub use classical::{
    classical_optimal_fidelity, classical_optimal_trace, classical_reduce, merge_by_ratio,
    BlockAlphabet, ClassicalInstance, ClassicalReduction, ClassicalSolution, RatioClasses,
};
pub use general::{solve_optimal, solve_optimal_fidelity, solve_optimal_trace};

use crate::channel::ChoiChannel;
use crate::error::{Error, Result};
use crate::exponent::Dichotomy;
use crate::format::g12;
use crate::operator::tensor_power;
use crate::operator::{CMatrix, DensityOperator, HermitianOperator, Spectrum};

/// Largest `dim_in · dim_out` accepted by the general solver.
pub const DIMENSION_CAP: usize = 4096;
/// Largest target count considered on the classical path.
pub const CLASSICAL_M_CEILING: usize = 512;
/// Work budget, in complex multiply-adds, for rebuilding a Choi matrix from a
/// classical solution in a non-trivial eigenbasis.
const RECONSTRUCTION_BUDGET: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    Purified,
    Trace,
}

impl DistanceKind {
    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Purified => "purified",
            DistanceKind::Trace => "trace",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "purified" | "P" => Ok(DistanceKind::Purified),
            "trace" | "d" => Ok(DistanceKind::Trace),
            _ => Err(Error::RejectedInput(format!("unknown distance kind {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverPath {
    /// Semidefinite program over the full Choi matrix.
    General,
    /// Program over transition matrices between likelihood-ratio classes.
    Classical,
    /// Nothing to optimize (`m = 0`).
    Trivial,
}

/// Which solver `eps_for_counts` may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PathChoice {
    /// The classical path whenever the instance commutes.
    #[default]
    Auto,
    General,
}

/// Optimal transition between the likelihood-ratio classes of the input and
/// output blocks.
#[derive(Clone, Debug)]
pub struct ClassChannel {
    /// Column-stochastic, output classes × input classes.
    pub transition: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct FiniteBlockResult {
    pub n: usize,
    pub m: usize,
    pub kind: DistanceKind,
    pub optimal_error: f64,
    pub optimal_fidelity_sq: f64,
    /// The optimizing channel; absent when the classical path solved an
    /// instance too large to write out.
    pub channel: Option<ChoiChannel>,
    pub classical: Option<ClassChannel>,
    pub solver_gap: f64,
    /// Frobenius norm of `Tr_out J − I`.
    pub tp_residual: f64,
    /// Frobenius norm of `N(σ_in) − σ_t`.
    pub sigma_residual: f64,
    pub iterations: usize,
    pub path: SolverPath,
}

impl FiniteBlockResult {
    /// `−(1/n) log₂ F²`.
    pub fn neg_log_fid_rate(&self) -> f64 {
        -self.optimal_fidelity_sq.log2() / self.n as f64
    }
}

pub(crate) fn check_cap(dim_in: usize, dim_out: usize) -> Result<()> {
    match dim_in.checked_mul(dim_out) {
        Some(p) if p <= DIMENSION_CAP => Ok(()),
        _ => Err(Error::CapExceeded(format!(
            "Choi space {dim_in} x {dim_out} exceeds {DIMENSION_CAP}"
        ))),
    }
}

/// A channel output as a state: negative eigenvalues from solver round-off are
/// clamped and the trace renormalized.
pub(crate) fn output_state(h: &HermitianOperator) -> Result<DensityOperator> {
    let spec = h.spectrum();
    let clamped = HermitianOperator::from_spectrum(Spectrum {
        values: spec.values.map(|v| v.max(0.0)),
        vectors: spec.vectors.clone(),
    });
    DensityOperator::normalized(&clamped)
}

/// `m = ⌊n·r⌋`, with a small allowance so that `r = m/n` recovers `m`.
pub fn copies_for_rate(n: usize, r: f64) -> usize {
    (n as f64 * r + 1e-9).floor().max(0.0) as usize
}

fn power_dim(d: usize, n: usize) -> Option<usize> {
    d.checked_pow(u32::try_from(n).ok()?)
}

/// Optimal error for `n` input copies at rate `r`, producing `⌊n r⌋` targets.
pub fn eps_at_rate(
    d1: &Dichotomy,
    d2: &Dichotomy,
    r: f64,
    n: usize,
    kind: DistanceKind,
    tol: f64,
) -> Result<FiniteBlockResult> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::RejectedInput(format!("rate must be positive, got {r}")));
    }
    eps_for_counts(d1, d2, n, copies_for_rate(n, r), kind, tol, PathChoice::Auto)
}

/// Optimal error for `n` input copies and `m` target copies.
pub fn eps_for_counts(
    d1: &Dichotomy,
    d2: &Dichotomy,
    n: usize,
    m: usize,
    kind: DistanceKind,
    tol: f64,
    path: PathChoice,
) -> Result<FiniteBlockResult> {
    if n == 0 {
        return Err(Error::RejectedInput("need at least one input copy".into()));
    }
    if m == 0 {
        let channel = power_dim(d1.dim(), n)
            .filter(|&d| d <= DIMENSION_CAP)
            .map(ChoiChannel::trace_out);
        return Ok(FiniteBlockResult {
            n,
            m,
            kind,
            optimal_error: 0.0,
            optimal_fidelity_sq: 1.0,
            channel,
            classical: None,
            solver_gap: 0.0,
            tp_residual: 0.0,
            sigma_residual: 0.0,
            iterations: 0,
            path: SolverPath::Trivial,
        });
    }
    if path == PathChoice::Auto {
        if let Some(red) = classical_reduce(d1, d2) {
            return classical_block(&red, n, m, kind, tol);
        }
    }
    let cap_error = || {
        Error::CapExceeded(format!(
            "{}^{n} x {}^{m} exceeds the Choi cap {DIMENSION_CAP}",
            d1.dim(),
            d2.dim()
        ))
    };
    let din = power_dim(d1.dim(), n).ok_or_else(cap_error)?;
    let dout = power_dim(d2.dim(), m).ok_or_else(cap_error)?;
    check_cap(din, dout).map_err(|_| cap_error())?;
    let rho_in = DensityOperator::new(tensor_power(d1.rho(), n))?;
    let sigma_in = DensityOperator::new(tensor_power(d1.sigma(), n))?;
    let rho_t = DensityOperator::new(tensor_power(d2.rho(), m))?;
    let sigma_t = DensityOperator::new(tensor_power(d2.sigma(), m))?;
    let mut res = solve_optimal(kind, &rho_in, &sigma_in, &rho_t, &sigma_t, tol)?;
    res.n = n;
    res.m = m;
    Ok(res)
}

fn digits(mut x: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = x % base;
        x /= base;
    }
    out
}

fn kron_power(m: &CMatrix, n: usize) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for _ in 0..n {
        acc = acc.kronecker(m);
    }
    acc
}

/// Position of the single nonzero entry of every column, if the matrix is a
/// permutation up to phases.
fn monomial_positions(m: &CMatrix) -> Option<Vec<usize>> {
    (0..m.ncols())
        .map(|c| {
            let col = m.column(c);
            let big: Vec<usize> = (0..col.len()).filter(|&r| col[r].norm() > 1e-12).collect();
            (big.len() == 1).then(|| big[0])
        })
        .collect()
}

/// Output distribution, over output sequences, of the block channel on an
/// input sequence in class `cin`.
fn output_weights(
    red: &ClassicalReduction,
    a_out: &BlockAlphabet,
    t: &DMatrix<f64>,
    cin: Option<usize>,
    m: usize,
    d2: usize,
) -> Vec<f64> {
    let dout = d2.pow(m as u32);
    let inst = &red.instance;
    (0..dout)
        .map(|y| {
            let seq = digits(y, d2, m);
            let q: f64 = seq.iter().map(|&k| inst.q2[k]).product();
            let Some(cout) = a_out.class_of_sequence(&seq) else {
                return 0.0;
            };
            let share = if a_out.q[cout] > 0.0 {
                q / a_out.q[cout]
            } else {
                let p: f64 = seq.iter().map(|&k| inst.p2[k]).product();
                p / a_out.p[cout]
            };
            match cin {
                Some(c) => t[(cout, c)] * share,
                // unreachable inputs are sent to the target σ
                None => q,
            }
        })
        .collect()
}

/// Choi matrix of `X ↦ Σ_x ⟨a_x|X|a_x⟩ B_x` for the block channel, when small
/// enough to write out.
fn reconstruct_channel(
    red: &ClassicalReduction,
    a_in: &BlockAlphabet,
    a_out: &BlockAlphabet,
    t: &DMatrix<f64>,
    n: usize,
    m: usize,
) -> Option<ChoiChannel> {
    let (d1, d2) = (red.basis1.nrows(), red.basis2.nrows());
    let din = power_dim(d1, n)?;
    let dout = power_dim(d2, m)?;
    check_cap(din, dout).ok()?;
    let size = din * dout;
    let vin = kron_power(&red.basis1, n);
    let vout = kron_power(&red.basis2, m);
    let mut j = CMatrix::zeros(size, size);
    match (monomial_positions(&vin), monomial_positions(&vout)) {
        (Some(pin), Some(pout)) => {
            for x in 0..din {
                let w = output_weights(red, a_out, t, a_in.class_of_sequence(&digits(x, d1, n)), m, d2);
                for (y, wy) in w.iter().enumerate() {
                    let k = pin[x] * dout + pout[y];
                    j[(k, k)] = Complex64::new(*wy, 0.0);
                }
            }
        }
        _ => {
            if din.saturating_mul(size).saturating_mul(size) > RECONSTRUCTION_BUDGET {
                return None;
            }
            for x in 0..din {
                let w = output_weights(red, a_out, t, a_in.class_of_sequence(&digits(x, d1, n)), m, d2);
                let scaled = CMatrix::from_fn(dout, dout, |r, c| vout[(r, c)] * w[c]);
                let b = scaled * vout.adjoint();
                let a = vin.column(x).map(|z| z.conj());
                let p = &a * a.adjoint();
                j += p.kronecker(&b);
            }
        }
    }
    ChoiChannel::new(din, dout, HermitianOperator::symmetrized(j)).ok()
}

fn classical_block(
    red: &ClassicalReduction,
    n: usize,
    m: usize,
    kind: DistanceKind,
    tol: f64,
) -> Result<FiniteBlockResult> {
    let base = &red.instance;
    let a_in = BlockAlphabet::new(&base.p1, &base.q1, n)?;
    let a_out = BlockAlphabet::new(&base.p2, &base.q2, m)?;
    let inst = ClassicalInstance {
        p1: a_in.p.clone(),
        q1: a_in.q.clone(),
        p2: a_out.p.clone(),
        q2: a_out.q.clone(),
    };
    let (sol, error, fsq) = match kind {
        DistanceKind::Purified => {
            let sol = classical_optimal_fidelity(&inst, tol)?;
            let f = sol.value;
            (sol, (1.0 - f * f).max(0.0).sqrt(), f * f)
        }
        DistanceKind::Trace => {
            let sol = classical_optimal_trace(&inst, tol)?;
            let f = sol.achieved_fidelity(&inst).clamp(0.0, 1.0);
            (sol.clone(), sol.value, f * f)
        }
    };
    let tp_residual = (0..sol.transition.ncols())
        .map(|i| (sol.transition.column(i).sum() - 1.0).powi(2))
        .sum::<f64>()
        .sqrt();
    let sigma_out: Vec<f64> = (0..sol.transition.nrows())
        .map(|j| (0..inst.q1.len()).map(|i| sol.transition[(j, i)] * inst.q1[i]).sum())
        .collect();
    let sigma_residual = sigma_out
        .iter()
        .zip(&inst.q2)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let channel = reconstruct_channel(red, &a_in, &a_out, &sol.transition, n, m);
    Ok(FiniteBlockResult {
        n,
        m,
        kind,
        optimal_error: error,
        optimal_fidelity_sq: fsq,
        channel,
        classical: Some(ClassChannel { transition: sol.transition }),
        solver_gap: sol.solver_gap,
        tp_residual,
        sigma_residual,
        iterations: sol.iterations,
        path: SolverPath::Classical,
    })
}

/// Outcome of the search for the largest `m` reachable within error `ε`.
#[derive(Clone, Debug)]
pub struct MaxCount {
    pub m: usize,
    /// Every `(m, optimal_fidelity_sq, optimal_error)` solved, sorted by `m`.
    pub visited: Vec<(usize, f64, f64)>,
    /// Pairs `m < m'` of visited points where the fidelity went up.
    pub monotonicity_violations: Vec<(usize, usize)>,
    /// Largest `m` the search could consider.
    pub limit: usize,
}

/// Largest `m` the solvers accept for `n` input copies.
pub fn transform_count_limit(d1: &Dichotomy, d2: &Dichotomy, n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::RejectedInput("need at least one input copy".into()));
    }
    if classical_reduce(d1, d2).is_some() {
        let base = classical_reduce(d1, d2).expect("checked").instance;
        BlockAlphabet::new(&base.p1, &base.q1, n)?;
        let mut m = 0;
        while m < CLASSICAL_M_CEILING && BlockAlphabet::new(&base.p2, &base.q2, m + 1).is_ok() {
            m += 1;
        }
        return Ok(m);
    }
    let din = power_dim(d1.dim(), n)
        .filter(|&d| d <= DIMENSION_CAP)
        .ok_or_else(|| {
            Error::CapExceeded(format!("{}^{n} input dimension exceeds {DIMENSION_CAP}", d1.dim()))
        })?;
    let mut m = 0;
    while power_dim(d2.dim(), m + 1).is_some_and(|d| d.saturating_mul(din) <= DIMENSION_CAP) {
        m += 1;
        if d2.dim() == 1 {
            return Ok(CLASSICAL_M_CEILING);
        }
    }
    Ok(m)
}

/// Whether a solved block meets the error target. Fidelity errors are compared
/// in `F²`, where the solver tolerance applies directly.
fn meets(res: &FiniteBlockResult, eps: f64, tol: f64) -> bool {
    let slack = 10.0 * tol;
    match res.kind {
        DistanceKind::Purified => res.optimal_fidelity_sq >= 1.0 - eps * eps - slack,
        DistanceKind::Trace => res.optimal_error <= eps + slack,
    }
}

/// `M^ε(n)`: the largest `m` whose optimal error is at most `ε`, by doubling
/// then bisection. Monotonicity in `m` is checked on every visited point.
pub fn max_transform_count(
    d1: &Dichotomy,
    d2: &Dichotomy,
    n: usize,
    eps: f64,
    kind: DistanceKind,
    tol: f64,
) -> Result<MaxCount> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::RejectedInput(format!("error target must lie in [0, 1], got {eps}")));
    }
    let limit = transform_count_limit(d1, d2, n)?;
    let mut visited: Vec<(usize, f64, f64)> = Vec::new();
    let ok = |m: usize, visited: &mut Vec<(usize, f64, f64)>| -> Result<bool> {
        let res = eps_for_counts(d1, d2, n, m, kind, tol, PathChoice::Auto)?;
        visited.push((m, res.optimal_fidelity_sq, res.optimal_error));
        Ok(meets(&res, eps, tol))
    };
    let m = if eps >= 1.0 {
        limit
    } else {
        let (mut lo, mut hi) = (0usize, None);
        let mut probe = 1usize;
        while probe <= limit {
            if ok(probe, &mut visited)? {
                lo = probe;
                probe *= 2;
            } else {
                hi = Some(probe);
                break;
            }
        }
        let hi = match hi {
            Some(h) => Some(h),
            None if lo < limit => {
                if ok(limit, &mut visited)? {
                    lo = limit;
                    None
                } else {
                    Some(limit)
                }
            }
            None => None,
        };
        if let Some(mut hi) = hi {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if ok(mid, &mut visited)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        lo
    };
    visited.sort_by_key(|v| v.0);
    let mut violations = Vec::new();
    for (i, a) in visited.iter().enumerate() {
        for b in &visited[i + 1..] {
            if b.0 > a.0 && b.1 > a.1 + 10.0 * tol {
                violations.push((a.0, b.0));
            }
        }
    }
    Ok(MaxCount { m, visited, monotonicity_violations: violations, limit })
}

/// Solves every `(n, kind)` pair at rate `r`; independent instances run in
/// parallel and come back in input order.
pub fn finite_n_table(
    d1: &Dichotomy,
    d2: &Dichotomy,
    r: f64,
    ns: &[usize],
    kinds: &[DistanceKind],
    tol: f64,
) -> Result<Vec<FiniteBlockResult>> {
    let jobs: Vec<(usize, DistanceKind)> =
        ns.iter().flat_map(|&n| kinds.iter().map(move |&k| (n, k))).collect();
    let run = |&(n, k): &(usize, DistanceKind)| eps_at_rate(d1, d2, r, n, k, tol);
    #[cfg(feature = "parallel")]
    let out: Vec<Result<FiniteBlockResult>> = jobs.par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let out: Vec<Result<FiniteBlockResult>> = jobs.iter().map(run).collect();
    out.into_iter().collect()
}

pub const FINITE_CSV_HEADER: &str = "n,m,kind,error,fidelity_sq,neg_log_fid_rate,solver_gap";

pub fn write_finite_csv<W: Write>(mut w: W, rows: &[FiniteBlockResult]) -> Result<()> {
    writeln!(w, "{FINITE_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.m,
            r.kind,
            g12(r.optimal_error),
            g12(r.optimal_fidelity_sq),
            g12(r.neg_log_fid_rate()),
            g12(r.solver_gap)
        )?;
    }
    Ok(())
}
