//! Dense primal-dual interior-point solver for block semidefinite programs
//!
//! ```text
//! minimize ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X = diag(X_1, …, X_k) ⪰ 0
//! maximize bᵀy     s.t.  Σ y_i A_i + Z = C,  Z ⪰ 0
//! ```
//!
//! Blocks are real symmetric (dense) or nonnegative vectors (diagonal). The
//! search direction is HKM with Mehrotra predictor-corrector steps from an
//! infeasible start. Linearly dependent equality constraints are removed by a
//! pivoted Cholesky factorization of their Gram matrix before the solve.

pub mod model;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Dense(usize),
    Diagonal(usize),
}

impl BlockKind {
    pub fn size(&self) -> usize {
        match *self {
            BlockKind::Dense(n) | BlockKind::Diagonal(n) => n,
        }
    }
}

/// Entry `(block, p, q, v)` with `p ≤ q` of a symmetric coefficient matrix;
/// off-diagonal entries stand for both `(p, q)` and `(q, p)`.
pub type Entry = (usize, usize, usize, f64);

#[derive(Clone, Debug, Default)]
pub struct SparseSym {
    entries: Vec<Entry>,
}

impl SparseSym {
    /// Merges duplicates and drops zeros; entries are kept sorted.
    pub fn from_entries(raw: impl IntoIterator<Item = Entry>) -> Self {
        let mut map: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for (b, p, q, v) in raw {
            let key = if p <= q { (b, p, q) } else { (b, q, p) };
            *map.entry(key).or_insert(0.0) += v;
        }
        Self {
            entries: map
                .into_iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|((b, p, q), v)| (b, p, q, v))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    fn inner(&self, x: &[BlockMat]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, p, q, v)| match &x[b] {
                BlockMat::Dense(m) if p == q => v * m[(p, p)],
                BlockMat::Dense(m) => v * (m[(p, q)] + m[(q, p)]),
                BlockMat::Diag(d) => v * d[p],
            })
            .sum()
    }

    fn add_to(&self, out: &mut [BlockMat], scale: f64) {
        for &(b, p, q, v) in &self.entries {
            match &mut out[b] {
                BlockMat::Dense(m) => {
                    m[(p, q)] += scale * v;
                    if p != q {
                        m[(q, p)] += scale * v;
                    }
                }
                BlockMat::Diag(d) => d[p] += scale * v,
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RealSdp {
    pub blocks: Vec<BlockKind>,
    /// Minimized.
    pub objective: SparseSym,
    pub constraints: Vec<(SparseSym, f64)>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpOptions {
    /// Relative duality gap target.
    pub gap_tolerance: f64,
    /// Relative primal/dual infeasibility target.
    pub feasibility_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-7,
            feasibility_tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

#[derive(Clone, Debug)]
pub enum BlockMat {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl BlockMat {
    fn zeros(kind: BlockKind) -> Self {
        match kind {
            BlockKind::Dense(n) => BlockMat::Dense(DMatrix::zeros(n, n)),
            BlockKind::Diagonal(n) => BlockMat::Diag(DVector::zeros(n)),
        }
    }

    fn scaled_identity(kind: BlockKind, s: f64) -> Self {
        match kind {
            BlockKind::Dense(n) => BlockMat::Dense(DMatrix::identity(n, n) * s),
            BlockKind::Diagonal(n) => BlockMat::Diag(DVector::from_element(n, s)),
        }
    }

    fn inner(&self, other: &BlockMat) -> f64 {
        match (self, other) {
            (BlockMat::Dense(a), BlockMat::Dense(b)) => a.dot(b),
            (BlockMat::Diag(a), BlockMat::Diag(b)) => a.dot(b),
            _ => unreachable!("block kinds agree"),
        }
    }

    fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    fn axpy(&mut self, a: f64, other: &BlockMat) {
        match (self, other) {
            (BlockMat::Dense(x), BlockMat::Dense(y)) => *x += y * a,
            (BlockMat::Diag(x), BlockMat::Diag(y)) => *x += y * a,
            _ => unreachable!("block kinds agree"),
        }
    }

    pub fn as_dense(&self) -> Option<&DMatrix<f64>> {
        match self {
            BlockMat::Dense(m) => Some(m),
            BlockMat::Diag(_) => None,
        }
    }

    pub fn as_diag(&self) -> Option<&DVector<f64>> {
        match self {
            BlockMat::Diag(d) => Some(d),
            BlockMat::Dense(_) => None,
        }
    }
}

fn blocks_inner(a: &[BlockMat], b: &[BlockMat]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.inner(y)).sum()
}

fn blocks_norm(a: &[BlockMat]) -> f64 {
    a.iter().map(BlockMat::norm_sq).sum::<f64>().sqrt()
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: Vec<BlockMat>,
    pub y: DVector<f64>,
    pub z: Vec<BlockMat>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    /// `‖b − A(X)‖₂` over all constraints, including any removed in presolve.
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SdpSolution {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }
}

/// Indices of a maximal linearly independent subset of the constraints, in
/// increasing order.
fn independent_constraints(p: &RealSdp) -> Vec<usize> {
    let m = p.constraints.len();
    let mut by_coord: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (i, (a, _)) in p.constraints.iter().enumerate() {
        for &(b, r, s, v) in a.entries() {
            by_coord.entry((b, r, s)).or_default().push((i, v));
        }
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for ((_, r, s), list) in &by_coord {
        let w = if r == s { 1.0 } else { 2.0 };
        for &(i, vi) in list {
            for &(j, vj) in list {
                gram[(i, j)] += w * vi * vj;
            }
        }
    }
    // Pivoted Cholesky on relative residuals; ties go to the lower index.
    let diag: Vec<f64> = (0..m).map(|i| gram[(i, i)].max(f64::MIN_POSITIVE)).collect();
    let tol = 1e-9;
    let mut residual: Vec<f64> = (0..m).map(|i| gram[(i, i)]).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut l: Vec<DVector<f64>> = Vec::new();
    let mut used = vec![false; m];
    loop {
        let mut best = None;
        for i in 0..m {
            if !used[i] && best.is_none_or(|b: usize| residual[i] / diag[i] > residual[b] / diag[b]) {
                best = Some(i);
            }
        }
        let Some(k) = best else { break };
        if residual[k] <= tol * diag[k] {
            break;
        }
        used[k] = true;
        let pivot = residual[k].sqrt();
        let mut col = DVector::zeros(m);
        for i in 0..m {
            if used[i] && i != k {
                continue;
            }
            let mut v = gram[(i, k)];
            for prev in &l {
                v -= prev[i] * prev[k];
            }
            col[i] = v / pivot;
        }
        for i in 0..m {
            if !used[i] {
                residual[i] -= col[i] * col[i];
            }
        }
        l.push(col);
        chosen.push(k);
    }
    chosen.sort_unstable();
    chosen
}

/// `max α` with `X + α ΔX ⪰ 0`, `+∞` when unbounded.
fn max_step(x: &BlockMat, dx: &BlockMat) -> Result<f64> {
    match (x, dx) {
        (BlockMat::Diag(x), BlockMat::Diag(d)) => Ok(x
            .iter()
            .zip(d.iter())
            .filter(|(_, &di)| di < 0.0)
            .map(|(&xi, &di)| -xi / di)
            .fold(f64::INFINITY, f64::min)),
        (BlockMat::Dense(x), BlockMat::Dense(d)) => {
            let chol = x
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Infeasible("iterate left the PSD cone".into()))?;
            let l = chol.l();
            let half = l
                .solve_lower_triangular(d)
                .expect("Cholesky factor is nonsingular");
            let s = l
                .solve_lower_triangular(&half.transpose())
                .expect("Cholesky factor is nonsingular");
            let s = (&s + s.transpose()) * 0.5;
            let lmin = s.symmetric_eigenvalues().min();
            Ok(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
        }
        _ => unreachable!("block kinds agree"),
    }
}

fn inverse(z: &BlockMat) -> Result<BlockMat> {
    match z {
        BlockMat::Diag(d) => Ok(BlockMat::Diag(d.map(|v| 1.0 / v))),
        BlockMat::Dense(m) => {
            let inv = m
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Infeasible("dual iterate left the PSD cone".into()))?
                .inverse();
            Ok(BlockMat::Dense((&inv + inv.transpose()) * 0.5))
        }
    }
}

/// Per-block views of the constraints: `(constraint index, entries)`.
type BlockRows = Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>;

struct Workspace<'a> {
    p: &'a RealSdp,
    rows: Vec<usize>,
    b: DVector<f64>,
    by_block: BlockRows,
}

impl<'a> Workspace<'a> {
    fn new(p: &'a RealSdp, rows: Vec<usize>) -> Self {
        let b = DVector::from_iterator(rows.len(), rows.iter().map(|&i| p.constraints[i].1));
        let mut by_block: BlockRows = vec![Vec::new(); p.blocks.len()];
        for (k, &i) in rows.iter().enumerate() {
            let mut per: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
            for &(bl, r, s, v) in p.constraints[i].0.entries() {
                per.entry(bl).or_default().push((r, s, v));
            }
            for (bl, e) in per {
                by_block[bl].push((k, e));
            }
        }
        Self {
            p,
            rows,
            b,
            by_block,
        }
    }

    fn m(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[BlockMat]) -> DVector<f64> {
        DVector::from_iterator(
            self.m(),
            self.rows.iter().map(|&i| self.p.constraints[i].0.inner(x)),
        )
    }

    /// `⟨A_i, G⟩` for non-symmetric dense `G` (only the symmetric part counts).
    fn apply_general(&self, g: &[BlockMat]) -> DVector<f64> {
        self.apply(g)
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<BlockMat> {
        let mut out: Vec<BlockMat> = self.p.blocks.iter().map(|&k| BlockMat::zeros(k)).collect();
        for (k, &i) in self.rows.iter().enumerate() {
            if y[k] != 0.0 {
                self.p.constraints[i].0.add_to(&mut out, y[k]);
            }
        }
        out
    }

    /// `M_ij = Σ_blocks Tr(A_i X A_j Z⁻¹)`.
    fn schur(&self, x: &[BlockMat], zinv: &[BlockMat]) -> DMatrix<f64> {
        let m = self.m();
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for (bl, list) in self.by_block.iter().enumerate() {
            match (&x[bl], &zinv[bl]) {
                (BlockMat::Diag(xd), BlockMat::Diag(zd)) => {
                    let w = xd.component_mul(zd);
                    let mut dense: Vec<BTreeMap<usize, f64>> = Vec::with_capacity(list.len());
                    for (_, e) in list {
                        let mut row = BTreeMap::new();
                        for &(r, _, v) in e {
                            *row.entry(r).or_insert(0.0) += v;
                        }
                        dense.push(row);
                    }
                    for (a, (i, _)) in list.iter().enumerate() {
                        for (bb, (j, _)) in list.iter().enumerate().skip(a) {
                            let (small, large) = if dense[a].len() <= dense[bb].len() {
                                (&dense[a], &dense[bb])
                            } else {
                                (&dense[bb], &dense[a])
                            };
                            let mut s = 0.0;
                            for (k, va) in small {
                                if let Some(vb) = large.get(k) {
                                    s += va * vb * w[*k];
                                }
                            }
                            mat[(*i, *j)] += s;
                            if i != j {
                                mat[(*j, *i)] += s;
                            }
                        }
                    }
                }
                (BlockMat::Dense(xm), BlockMat::Dense(zm)) => {
                    let n = xm.nrows();
                    for (a, (i, e)) in list.iter().enumerate() {
                        // T = A_i Z⁻¹ on the row support of A_i, then G = X T.
                        let mut support: Vec<usize> = e.iter().flat_map(|&(r, s, _)| [r, s]).collect();
                        support.sort_unstable();
                        support.dedup();
                        let pos = |r: usize| support.binary_search(&r).expect("row in support");
                        let mut t = DMatrix::<f64>::zeros(support.len(), n);
                        for &(r, s, v) in e {
                            let pr = pos(r);
                            for col in 0..n {
                                t[(pr, col)] += v * zm[(s, col)];
                            }
                            if r != s {
                                let ps = pos(s);
                                for col in 0..n {
                                    t[(ps, col)] += v * zm[(r, col)];
                                }
                            }
                        }
                        let g = xm.select_columns(support.iter()) * t;
                        for (j, f) in list.iter().skip(a) {
                            let mut s = 0.0;
                            for &(r, q, v) in f {
                                s += if r == q {
                                    v * g[(r, r)]
                                } else {
                                    v * (g[(r, q)] + g[(q, r)])
                                };
                            }
                            mat[(*i, *j)] += s;
                            if i != j {
                                mat[(*j, *i)] += s;
                            }
                        }
                    }
                }
                _ => unreachable!("block kinds agree"),
            }
        }
        mat
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

struct Direction {
    dx: Vec<BlockMat>,
    dy: DVector<f64>,
    dz: Vec<BlockMat>,
}

struct Iterate<'a> {
    ws: &'a Workspace<'a>,
    x: &'a [BlockMat],
    zinv: Vec<BlockMat>,
    rp: DVector<f64>,
    rd: Vec<BlockMat>,
}

impl Iterate<'_> {
    /// Solves the Newton system for the complementarity right-hand side
    /// `rc` (so that `ΔX Z + X ΔZ = rc`).
    /// `dz = Rd − Aᵀ dy` and `dx = sym((Rc − X dz) Z⁻¹)`.
    fn recover(&self, rc: &[BlockMat], dy: &DVector<f64>) -> (Vec<BlockMat>, Vec<BlockMat>) {
        let aty = self.ws.adjoint(dy);
        let mut dz = self.rd.clone();
        for (d, a) in dz.iter_mut().zip(&aty) {
            d.axpy(-1.0, a);
        }
        let mut dx = Vec::with_capacity(rc.len());
        for k in 0..rc.len() {
            match (&rc[k], &self.x[k], &dz[k], &self.zinv[k]) {
                (BlockMat::Dense(r), BlockMat::Dense(x), BlockMat::Dense(d), BlockMat::Dense(zi)) => {
                    dx.push(BlockMat::Dense(sym((r - x * d) * zi)));
                }
                (BlockMat::Diag(r), BlockMat::Diag(x), BlockMat::Diag(d), BlockMat::Diag(zi)) => {
                    dx.push(BlockMat::Diag((r - x.component_mul(d)).component_mul(zi)));
                }
                _ => unreachable!("block kinds agree"),
            }
        }
        (dx, dz)
    }

    fn direction(&self, schur: &SchurFactor, rc: &[BlockMat]) -> Direction {
        // rc Z⁻¹ and X Rd Z⁻¹, both non-symmetric in general
        let mut rcz = Vec::with_capacity(rc.len());
        let mut xrz = Vec::with_capacity(rc.len());
        for k in 0..rc.len() {
            match (&rc[k], &self.x[k], &self.rd[k], &self.zinv[k]) {
                (BlockMat::Dense(r), BlockMat::Dense(x), BlockMat::Dense(d), BlockMat::Dense(zi)) => {
                    rcz.push(BlockMat::Dense(r * zi));
                    xrz.push(BlockMat::Dense(x * d * zi));
                }
                (BlockMat::Diag(r), BlockMat::Diag(x), BlockMat::Diag(d), BlockMat::Diag(zi)) => {
                    rcz.push(BlockMat::Diag(r.component_mul(zi)));
                    xrz.push(BlockMat::Diag(x.component_mul(d).component_mul(zi)));
                }
                _ => unreachable!("block kinds agree"),
            }
        }
        let rhs = &self.rp - self.ws.apply_general(&rcz) + self.ws.apply_general(&xrz);
        let dy = schur.solve(&rhs);
        let (dx, dz) = self.recover(rc, &dy);
        Direction { dx, dy, dz }
    }
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Result<Self> {
        if let Some(c) = m.clone().cholesky() {
            return Ok(SchurFactor::Cholesky(c));
        }
        let n = m.nrows();
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let regularized = &m + DMatrix::identity(n, n) * (1e-13 * scale);
        if let Some(c) = regularized.cholesky() {
            return Ok(SchurFactor::Cholesky(c));
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Infeasible("singular Schur complement".into()));
        }
        Ok(SchurFactor::Lu(lu))
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurFactor::Cholesky(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs).expect("invertible"),
        }
    }
}

fn complementarity_rhs(
    x: &[BlockMat],
    z: &[BlockMat],
    sigma_mu: f64,
    correction: Option<&Direction>,
) -> Vec<BlockMat> {
    let mut out = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        match (&x[k], &z[k]) {
            (BlockMat::Dense(xm), BlockMat::Dense(zm)) => {
                let n = xm.nrows();
                let mut r = DMatrix::identity(n, n) * sigma_mu - xm * zm;
                if let Some(d) = correction {
                    if let (BlockMat::Dense(a), BlockMat::Dense(b)) = (&d.dx[k], &d.dz[k]) {
                        r -= a * b;
                    }
                }
                out.push(BlockMat::Dense(r));
            }
            (BlockMat::Diag(xd), BlockMat::Diag(zd)) => {
                let mut r = DVector::from_element(xd.len(), sigma_mu) - xd.component_mul(zd);
                if let Some(d) = correction {
                    if let (BlockMat::Diag(a), BlockMat::Diag(b)) = (&d.dx[k], &d.dz[k]) {
                        r -= a.component_mul(b);
                    }
                }
                out.push(BlockMat::Diag(r));
            }
            _ => unreachable!("block kinds agree"),
        }
    }
    out
}

fn step_lengths(x: &[BlockMat], z: &[BlockMat], d: &Direction) -> Result<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for k in 0..x.len() {
        ap = ap.min(max_step(&x[k], &d.dx[k])?);
        ad = ad.min(max_step(&z[k], &d.dz[k])?);
    }
    Ok((ap, ad))
}

/// Solves the block SDP to the requested tolerances.
pub fn solve(p: &RealSdp, opts: &SdpOptions) -> Result<SdpSolution> {
    for (a, _) in p.constraints.iter().chain(std::iter::once(&(p.objective.clone(), 0.0))) {
        for &(b, r, s, _) in a.entries() {
            let ok = match p.blocks.get(b) {
                Some(BlockKind::Dense(n)) => r < *n && s < *n,
                Some(BlockKind::Diagonal(n)) => r == s && r < *n,
                None => false,
            };
            if !ok {
                return Err(Error::RejectedInput(format!(
                    "coefficient ({b}, {r}, {s}) outside the block structure"
                )));
            }
        }
    }
    let rows = independent_constraints(p);
    let ws = Workspace::new(p, rows);
    let m = ws.m();
    let nn: f64 = p.blocks.iter().map(|k| k.size() as f64).sum();

    let mut c_blocks: Vec<BlockMat> = p.blocks.iter().map(|&k| BlockMat::zeros(k)).collect();
    p.objective.add_to(&mut c_blocks, 1.0);
    let c_norm = blocks_norm(&c_blocks);
    let b_norm = ws.b.norm();

    // starting point
    let mut x = Vec::with_capacity(p.blocks.len());
    let mut z = Vec::with_capacity(p.blocks.len());
    for (bl, &kind) in p.blocks.iter().enumerate() {
        let n = kind.size() as f64;
        let mut xi: f64 = 10f64.max(n.sqrt());
        let mut eta: f64 = 10f64.max(n.sqrt());
        for (k, e) in &ws.by_block[bl] {
            let a_norm = e
                .iter()
                .map(|&(r, s, v)| if r == s { v * v } else { 2.0 * v * v })
                .sum::<f64>()
                .sqrt();
            xi = xi.max(n * (1.0 + ws.b[*k].abs()) / (1.0 + a_norm));
            eta = eta.max(a_norm);
        }
        eta = eta.max(c_blocks[bl].norm_sq().sqrt());
        x.push(BlockMat::scaled_identity(kind, xi));
        z.push(BlockMat::scaled_identity(kind, eta));
    }
    let mut y = DVector::<f64>::zeros(m);

    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for iter in 0..=opts.max_iterations {
        let rp = &ws.b - ws.apply(&x);
        let aty = ws.adjoint(&y);
        let mut rd = c_blocks.clone();
        for k in 0..rd.len() {
            rd[k].axpy(-1.0, &z[k]);
            rd[k].axpy(-1.0, &aty[k]);
        }
        let pobj = blocks_inner(&c_blocks, &x);
        let dobj = ws.b.dot(&y);
        let xz = blocks_inner(&x, &z);
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let rel_gap = (pobj - dobj).abs().max(xz) / denom;
        let pinf = rp.norm() / (1.0 + b_norm);
        let dinf = blocks_norm(&rd) / (1.0 + c_norm);
        if pinf <= opts.feasibility_tolerance && dinf <= opts.feasibility_tolerance {
            best = (pobj, dobj, (pobj - dobj).abs());
        }
        if rel_gap <= opts.gap_tolerance
            && pinf <= opts.feasibility_tolerance
            && dinf <= opts.feasibility_tolerance
        {
            let full: Vec<f64> = p.constraints.iter().map(|(a, bi)| bi - a.inner(&x)).collect();
            let primal_residual = full.iter().map(|v| v * v).sum::<f64>().sqrt();
            if primal_residual > opts.feasibility_tolerance.max(1e-9) * (1.0 + b_norm) * 10.0 {
                return Err(Error::Infeasible(format!(
                    "equality constraints are inconsistent (residual {primal_residual:.3e})"
                )));
            }
            let mut y_full = DVector::zeros(p.constraints.len());
            for (k, &i) in ws.rows.iter().enumerate() {
                y_full[i] = y[k];
            }
            return Ok(SdpSolution {
                x,
                y: y_full,
                z,
                primal_objective: pobj,
                dual_objective: dobj,
                iterations: iter,
                primal_residual,
                dual_residual: blocks_norm(&rd),
            });
        }
        if iter == opts.max_iterations {
            break;
        }
        let mu = xz / nn;
        if step(&ws, &mut x, &mut y, &mut z, rp, rd, mu, nn).is_err() {
            break;
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        primal_objective: best.0,
        dual_objective: best.1,
        gap: best.2,
    })
}

/// One predictor-corrector step; fails when an iterate cannot be factored.
#[allow(clippy::too_many_arguments)]
fn step(
    ws: &Workspace<'_>,
    x: &mut [BlockMat],
    y: &mut DVector<f64>,
    z: &mut [BlockMat],
    rp: DVector<f64>,
    rd: Vec<BlockMat>,
    mu: f64,
    nn: f64,
) -> Result<()> {
    let zinv: Vec<BlockMat> = z.iter().map(inverse).collect::<Result<_>>()?;
    let schur = SchurFactor::new(ws.schur(x, &zinv))?;
    let it = Iterate {
        ws,
        x,
        zinv,
        rp,
        rd,
    };

    let predictor = it.direction(&schur, &complementarity_rhs(x, z, 0.0, None));
    let (ap, ad) = step_lengths(x, z, &predictor)?;
    let (ap, ad) = (ap.min(1.0), ad.min(1.0));
    let mut xa = x.to_vec();
    let mut za = z.to_vec();
    for k in 0..x.len() {
        xa[k].axpy(ap, &predictor.dx[k]);
        za[k].axpy(ad, &predictor.dz[k]);
    }
    let mu_aff = blocks_inner(&xa, &za) / nn;
    let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

    let corrector = it.direction(
        &schur,
        &complementarity_rhs(x, z, sigma * mu, Some(&predictor)),
    );
    let (ap, ad) = step_lengths(x, z, &corrector)?;
    let tau = 0.98;
    let ap = (tau * ap).min(1.0);
    let ad = (tau * ad).min(1.0);
    for k in 0..x.len() {
        x[k].axpy(ap, &corrector.dx[k]);
        z[k].axpy(ad, &corrector.dz[k]);
    }
    y.axpy(ad, &corrector.dy, 1.0);
    Ok(())
}
