//! Complex Hermitian modeling on top of the real block solver.
//!
//! A Hermitian `d × d` variable `H = A + iB` is stored as the real symmetric
//! `2d × 2d` block `[[A, −B], [B, A]]`, which is PSD exactly when `H` is. A
//! real linear functional `Tr(F H)` with Hermitian `F` becomes
//! `⟨F_emb / 2, X⟩`. Solutions are read back from the structured part of the
//! block, which is itself feasible and has the same objective.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{solve, BlockKind, BlockMat, Entry, RealSdp, SdpOptions, SdpSolution, SparseSym};
use crate::error::{Error, Result};
use crate::operator::{CMatrix, HermitianOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct VarId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Complex Hermitian PSD matrix of the given size.
    Hermitian(usize),
    /// Real symmetric PSD matrix.
    Symmetric(usize),
    /// Vector of nonnegative reals.
    Nonnegative(usize),
}

impl VarKind {
    fn block(&self) -> BlockKind {
        match *self {
            VarKind::Hermitian(d) => BlockKind::Dense(2 * d),
            VarKind::Symmetric(d) => BlockKind::Dense(d),
            VarKind::Nonnegative(n) => BlockKind::Diagonal(n),
        }
    }
}

/// Complex scalar `Σ c · V[p, q]`.
#[derive(Clone, Debug, Default)]
pub struct Expr {
    terms: Vec<(VarId, usize, usize, Complex64)>,
}

impl Expr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, v: VarId, p: usize, q: usize, c: Complex64) -> Self {
        self.terms.push((v, p, q, c));
        self
    }

    pub fn add(&mut self, v: VarId, p: usize, q: usize, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.terms.push((v, p, q, c));
        }
    }

    pub fn extend(&mut self, other: &Expr) {
        self.terms.extend_from_slice(&other.terms);
    }

    pub fn scaled(&self, s: Complex64) -> Expr {
        Expr {
            terms: self.terms.iter().map(|&(v, p, q, c)| (v, p, q, c * s)).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Part {
    Re,
    Im,
}

#[derive(Clone, Debug, Default)]
pub struct Model {
    vars: Vec<VarKind>,
    constraints: Vec<(Expr, Part, f64)>,
    /// Maximized real part.
    objective: Expr,
}

#[derive(Clone, Debug)]
pub enum VarValue {
    Hermitian(HermitianOperator),
    Symmetric(DMatrix<f64>),
    Nonnegative(DVector<f64>),
}

impl VarValue {
    pub fn hermitian(&self) -> Option<&HermitianOperator> {
        match self {
            VarValue::Hermitian(h) => Some(h),
            _ => None,
        }
    }

    pub fn symmetric(&self) -> Option<&DMatrix<f64>> {
        match self {
            VarValue::Symmetric(m) => Some(m),
            _ => None,
        }
    }

    pub fn nonnegative(&self) -> Option<&DVector<f64>> {
        match self {
            VarValue::Nonnegative(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelSolution {
    pub values: Vec<VarValue>,
    /// Objective at the returned primal point.
    pub objective: f64,
    /// Dual bound on the maximum.
    pub bound: f64,
    pub iterations: usize,
    pub raw: SdpSolution,
}

impl ModelSolution {
    pub fn value(&self, v: VarId) -> &VarValue {
        &self.values[v.0]
    }

    pub fn gap(&self) -> f64 {
        (self.objective - self.bound).abs()
    }
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, kind: VarKind) -> VarId {
        self.vars.push(kind);
        VarId(self.vars.len() - 1)
    }

    pub fn constrain_re(&mut self, e: Expr, value: f64) {
        self.constraints.push((e, Part::Re, value));
    }

    pub fn constrain_im(&mut self, e: Expr, value: f64) {
        self.constraints.push((e, Part::Im, value));
    }

    /// `Y = target` for a Hermitian-valued expression given entrywise by
    /// `entry(a, b)` (only `a ≤ b` is queried).
    pub fn constrain_hermitian(
        &mut self,
        dim: usize,
        entry: impl Fn(usize, usize) -> Expr,
        target: &CMatrix,
    ) {
        for a in 0..dim {
            for b in a..dim {
                let e = entry(a, b);
                let t = target[(a, b)];
                if a == b {
                    self.constrain_re(e, t.re);
                } else {
                    self.constrain_re(e.clone(), t.re);
                    self.constrain_im(e, t.im);
                }
            }
        }
    }

    pub fn maximize_re(&mut self, e: Expr) {
        self.objective = e;
    }

    pub fn minimize_re(&mut self, e: Expr) {
        self.objective = e.scaled(Complex64::new(-1.0, 0.0));
    }

    /// Real symmetric coefficient of `Re` or `Im` of `e`, in solver entries.
    fn lower(&self, e: &Expr, part: Part) -> Result<Vec<Entry>> {
        // Hermitian functional F with Tr(F V) = part(e), per variable
        let mut per_var: BTreeMap<VarId, BTreeMap<(usize, usize), Complex64>> = BTreeMap::new();
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        for &(v, p, q, c) in &e.terms {
            let kind = *self
                .vars
                .get(v.0)
                .ok_or_else(|| Error::RejectedInput("unknown variable".into()))?;
            let size = match kind {
                VarKind::Hermitian(d) | VarKind::Symmetric(d) | VarKind::Nonnegative(d) => d,
            };
            if p >= size || q >= size {
                return Err(Error::RejectedInput(format!("index ({p}, {q}) outside variable")));
            }
            if matches!(kind, VarKind::Nonnegative(_)) && p != q {
                return Err(Error::RejectedInput("off-diagonal term on a vector variable".into()));
            }
            let (fqp, fpq) = match part {
                Part::Re => (c * half, c.conj() * half),
                Part::Im => (c * minus_half_i, -(c.conj() * minus_half_i)),
            };
            let f = per_var.entry(v).or_default();
            *f.entry((q, p)).or_default() += fqp;
            *f.entry((p, q)).or_default() += fpq;
        }
        let mut out = Vec::new();
        for (v, f) in per_var {
            match self.vars[v.0] {
                VarKind::Hermitian(d) => {
                    for (&(a, b), &val) in &f {
                        // upper-triangle entries of F_emb / 2
                        if a <= b {
                            out.push((v.0, a, b, 0.5 * val.re));
                            out.push((v.0, a + d, b + d, 0.5 * val.re));
                        }
                        out.push((v.0, a, b + d, -0.5 * val.im));
                    }
                }
                VarKind::Symmetric(_) => {
                    for (&(a, b), &val) in &f {
                        if a <= b {
                            out.push((v.0, a, b, val.re));
                        }
                    }
                }
                VarKind::Nonnegative(_) => {
                    for (&(a, _), &val) in &f {
                        out.push((v.0, a, a, val.re));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_real(&self) -> Result<RealSdp> {
        let blocks = self.vars.iter().map(VarKind::block).collect();
        let objective = self
            .lower(&self.objective, Part::Re)?
            .into_iter()
            .map(|(b, p, q, v)| (b, p, q, -v));
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for (e, part, value) in &self.constraints {
            let s = SparseSym::from_entries(self.lower(e, *part)?);
            if s.entries().is_empty() {
                if value.abs() > 1e-12 {
                    return Err(Error::Infeasible(format!(
                        "constraint 0 = {value} cannot hold"
                    )));
                }
                continue;
            }
            constraints.push((s, *value));
        }
        Ok(RealSdp {
            blocks,
            objective: SparseSym::from_entries(objective),
            constraints,
        })
    }

    pub fn solve(&self, opts: &SdpOptions) -> Result<ModelSolution> {
        let real = self.to_real()?;
        let raw = solve(&real, opts)?;
        let values = self
            .vars
            .iter()
            .zip(&raw.x)
            .map(|(kind, x)| match (kind, x) {
                (VarKind::Hermitian(d), BlockMat::Dense(m)) => {
                    let d = *d;
                    let h = CMatrix::from_fn(d, d, |i, j| {
                        Complex64::new(
                            0.5 * (m[(i, j)] + m[(i + d, j + d)]),
                            0.5 * (m[(i + d, j)] - m[(i, j + d)]),
                        )
                    });
                    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
                    VarValue::Hermitian(
                        HermitianOperator::new(h).unwrap_or_else(|_| unreachable!("symmetrized")),
                    )
                }
                (VarKind::Symmetric(_), BlockMat::Dense(m)) => VarValue::Symmetric(m.clone()),
                (VarKind::Nonnegative(_), BlockMat::Diag(v)) => VarValue::Nonnegative(v.clone()),
                _ => unreachable!("blocks follow variable kinds"),
            })
            .collect();
        Ok(ModelSolution {
            values,
            objective: -raw.primal_objective,
            bound: -raw.dual_objective,
            iterations: raw.iterations,
            raw,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::fidelity;
    use crate::operator::{random_density, random_hermitian_with, seeded_rng, DensityOperator};

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hermitian_min_eigenvalue() {
        let mut rng = seeded_rng(5);
        let c = random_hermitian_with(3, &mut rng);
        let mut m = Model::new();
        let h = m.var(VarKind::Hermitian(3));
        let mut tr = Expr::new();
        for i in 0..3 {
            tr.add(h, i, i, cx(1.0, 0.0));
        }
        m.constrain_re(tr, 1.0);
        // Tr(C H) = Σ C_ji H_ij
        let mut obj = Expr::new();
        for i in 0..3 {
            for j in 0..3 {
                obj.add(h, i, j, c.matrix()[(j, i)]);
            }
        }
        m.minimize_re(obj);
        let s = m.solve(&SdpOptions::default()).unwrap();
        assert!((-s.objective - c.lambda_min()).abs() < 1e-7);
        let hv = s.value(h).hermitian().unwrap();
        assert!((hv.trace() - 1.0).abs() < 1e-9);
        assert!((hv.inner(&c).unwrap() - c.lambda_min()).abs() < 1e-6);
    }

    #[test]
    fn imaginary_part_constraint() {
        // H ⪰ 0, H_00 = H_11 = 1/2, Im H_01 = 0.3; maximize Re H_01 → 0.4
        let mut m = Model::new();
        let h = m.var(VarKind::Hermitian(2));
        m.constrain_re(Expr::new().term(h, 0, 0, cx(1.0, 0.0)), 0.5);
        m.constrain_re(Expr::new().term(h, 1, 1, cx(1.0, 0.0)), 0.5);
        m.constrain_im(Expr::new().term(h, 0, 1, cx(1.0, 0.0)), 0.3);
        m.maximize_re(Expr::new().term(h, 0, 1, cx(1.0, 0.0)));
        let s = m.solve(&SdpOptions::default()).unwrap();
        assert!((s.objective - 0.4).abs() < 1e-7, "{}", s.objective);
        let v = s.value(h).hermitian().unwrap().matrix()[(0, 1)];
        assert!((v.im - 0.3).abs() < 1e-8);
    }

    #[test]
    fn fidelity_block_characterization() {
        // max Re Tr X s.t. [[ρ, X], [X†, σ]] ⪰ 0 equals ‖√ρ√σ‖₁
        for seed in 0..4 {
            let rho = random_density(3, 3, 100 + seed).unwrap();
            let sigma = random_density(3, 3, 200 + seed).unwrap();
            let mut m = Model::new();
            let b = m.var(VarKind::Hermitian(6));
            m.constrain_hermitian(3, |i, j| Expr::new().term(b, i, j, cx(1.0, 0.0)), rho.matrix());
            m.constrain_hermitian(
                3,
                |i, j| Expr::new().term(b, i + 3, j + 3, cx(1.0, 0.0)),
                sigma.matrix(),
            );
            let mut obj = Expr::new();
            for i in 0..3 {
                obj.add(b, i, i + 3, cx(1.0, 0.0));
            }
            m.maximize_re(obj);
            let s = m.solve(&SdpOptions::default()).unwrap();
            let f = fidelity(&rho, &sigma).unwrap();
            assert!((s.objective - f).abs() < 1e-7, "{} vs {}", s.objective, f);
        }
        let _ = DensityOperator::maximally_mixed(2);
    }
}
