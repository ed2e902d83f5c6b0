//! Commuting instances: reduction to probability vectors, likelihood-ratio
//! merging of tensor-power alphabets, and the small programs over transition
//! matrices.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponent::Dichotomy;
use crate::operator::{eig_hermitian, max_commutator, CMatrix, HermitianOperator};
use crate::sdp::model::{Expr, Model, VarKind};
use crate::sdp::SdpOptions;

/// Pairwise commutators at or below this Frobenius norm count as zero.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-10;
/// Largest number of tensor-power types enumerated on one side.
pub const TYPE_CAP: usize = 200_000;
const RATIO_TOLERANCE: f64 = 1e-9;
const EIGEN_CLUSTER_TOLERANCE: f64 = 1e-9;

/// Four probability vectors: `(p1, q1)` on the input alphabet and `(p2, q2)`
/// on the output alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalInstance {
    pub p1: Vec<f64>,
    pub q1: Vec<f64>,
    pub p2: Vec<f64>,
    pub q2: Vec<f64>,
}

/// A classical instance together with the common eigenbases it was read in.
#[derive(Clone, Debug)]
pub struct ClassicalReduction {
    pub instance: ClassicalInstance,
    /// Columns are the common eigenvectors of `ρ1, σ1`.
    pub basis1: CMatrix,
    /// Columns are the common eigenvectors of `ρ2, σ2`.
    pub basis2: CMatrix,
}

/// Joint eigenbasis of two commuting Hermitian operators: eigenspaces of `b`
/// refined by diagonalizing `a` inside each.
fn common_eigenbasis(a: &HermitianOperator, b: &HermitianOperator) -> CMatrix {
    let d = b.dim();
    let spec = b.spectrum();
    let scale = spec.max_abs().max(1.0);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| spec.values[j].total_cmp(&spec.values[i]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(c) if spec.values[c[c.len() - 1]] - spec.values[i] <= EIGEN_CLUSTER_TOLERANCE * scale => {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    let mut basis = CMatrix::zeros(d, d);
    let mut col = 0;
    for cluster in clusters {
        let v = CMatrix::from_fn(d, cluster.len(), |r, c| spec.vectors[(r, cluster[c])]);
        let small = v.adjoint() * a.matrix() * &v;
        let small = HermitianOperator::new((&small + small.adjoint()) * Complex64::new(0.5, 0.0))
            .unwrap_or_else(|_| unreachable!("symmetrized"));
        let (_, u) = eig_hermitian(&small);
        let rotated = v * u;
        for c in 0..rotated.ncols() {
            basis.set_column(col, &rotated.column(c));
            col += 1;
        }
    }
    basis
}

fn diagonal_in(basis: &CMatrix, op: &HermitianOperator) -> Vec<f64> {
    let raw: Vec<f64> = (0..basis.ncols())
        .map(|k| {
            let v = basis.column(k);
            (v.adjoint() * op.matrix() * v)[(0, 0)].re
        })
        .collect();
    let top = raw.iter().cloned().fold(0.0, f64::max);
    let clean: Vec<f64> = raw
        .into_iter()
        .map(|x| if x <= 1e-13 * top { 0.0 } else { x })
        .collect();
    let s: f64 = clean.iter().sum();
    clean.into_iter().map(|x| x / s).collect()
}

/// The classical instance, when both dichotomies are pairwise commuting.
pub fn classical_reduce(d1: &Dichotomy, d2: &Dichotomy) -> Option<ClassicalReduction> {
    for d in [d1, d2] {
        if max_commutator(&[d.rho(), d.sigma()]) > COMMUTATOR_TOLERANCE {
            return None;
        }
    }
    let basis1 = common_eigenbasis(d1.rho(), d1.sigma());
    let basis2 = common_eigenbasis(d2.rho(), d2.sigma());
    let instance = ClassicalInstance {
        p1: diagonal_in(&basis1, d1.rho()),
        q1: diagonal_in(&basis1, d1.sigma()),
        p2: diagonal_in(&basis2, d2.rho()),
        q2: diagonal_in(&basis2, d2.sigma()),
    };
    Some(ClassicalReduction { instance, basis1, basis2 })
}

fn ratio_key(p: f64, q: f64) -> Option<f64> {
    match (p > 0.0, q > 0.0) {
        (false, false) => None,
        (true, false) => Some(f64::INFINITY),
        (false, true) => Some(f64::NEG_INFINITY),
        (true, true) => Some((p / q).log2()),
    }
}

/// Groups indices by equal log-likelihood ratio. Returns the class of each
/// index (`None` for keys that are absent) and the number of classes, in
/// ascending key order.
fn group_by_key(keys: &[Option<f64>]) -> (Vec<Option<usize>>, usize) {
    let mut order: Vec<usize> = (0..keys.len()).filter(|&i| keys[i].is_some()).collect();
    order.sort_by(|&a, &b| keys[a].unwrap().total_cmp(&keys[b].unwrap()));
    let mut class_of = vec![None; keys.len()];
    let mut count = 0;
    let mut anchor = f64::NAN;
    for i in order {
        let k = keys[i].unwrap();
        let same = if k.is_infinite() || anchor.is_infinite() {
            k == anchor
        } else {
            (k - anchor).abs() <= RATIO_TOLERANCE * (1.0 + anchor.abs())
        };
        if !same {
            count += 1;
            anchor = k;
        }
        class_of[i] = Some(count - 1);
    }
    (class_of, count)
}

/// The pair `(p, q)` coarse-grained to its likelihood-ratio classes. Merging
/// outcomes of equal ratio is reversible on both distributions at once, so it
/// changes neither the optimal error nor the feasible set.
#[derive(Clone, Debug)]
pub struct RatioClasses {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Class of each outcome; outcomes with `p = q = 0` have none.
    pub class_of: Vec<Option<usize>>,
}

pub fn merge_by_ratio(p: &[f64], q: &[f64]) -> RatioClasses {
    let keys: Vec<Option<f64>> = p.iter().zip(q).map(|(&a, &b)| ratio_key(a, b)).collect();
    let (class_of, count) = group_by_key(&keys);
    let (mut cp, mut cq) = (vec![0.0; count], vec![0.0; count]);
    for (i, c) in class_of.iter().enumerate() {
        if let Some(c) = *c {
            cp[c] += p[i];
            cq[c] += q[i];
        }
    }
    RatioClasses { p: cp, q: cq, class_of }
}

fn binomial_bound(n: usize, k: usize) -> f64 {
    // C(n + k − 1, k − 1) in floating point, enough for a cap check
    let mut c = 1.0;
    for i in 0..k.saturating_sub(1) {
        c *= (n + i + 1) as f64 / (i + 1) as f64;
    }
    c
}

fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slot: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(cur.clone());
            return;
        }
        for c in (0..=left).rev() {
            cur[slot] = c;
            rec(left - c, slot + 1, cur, out);
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    rec(n, 0, &mut vec![0; parts], &mut out);
    out
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Likelihood-ratio classes of `(p^{⊗n}, q^{⊗n})`, built from types over the
/// single-copy ratio classes.
#[derive(Clone, Debug)]
pub struct BlockAlphabet {
    pub n: usize,
    letters: RatioClasses,
    type_index: HashMap<Vec<usize>, usize>,
    type_class: Vec<Option<usize>>,
    /// Class probabilities.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl BlockAlphabet {
    pub fn new(p: &[f64], q: &[f64], n: usize) -> Result<Self> {
        let letters = merge_by_ratio(p, q);
        let k = letters.p.len();
        if binomial_bound(n, k) > TYPE_CAP as f64 {
            return Err(Error::CapExceeded(format!(
                "{n} copies over {k} likelihood-ratio classes exceed {TYPE_CAP} types"
            )));
        }
        let types = if n == 0 { vec![vec![0; k]] } else { compositions(n, k) };
        let lp: Vec<f64> = letters.p.iter().map(|x| x.log2()).collect();
        let lq: Vec<f64> = letters.q.iter().map(|x| x.log2()).collect();
        let ln_n = ln_factorial(n);
        let mut tp = Vec::with_capacity(types.len());
        let mut tq = Vec::with_capacity(types.len());
        let mut keys = Vec::with_capacity(types.len());
        for t in &types {
            let log_mult = (ln_n - t.iter().map(|&c| ln_factorial(c)).sum::<f64>()) / std::f64::consts::LN_2;
            let (mut a, mut b) = (log_mult, log_mult);
            for (l, &c) in t.iter().enumerate() {
                if c > 0 {
                    a += c as f64 * lp[l];
                    b += c as f64 * lq[l];
                }
            }
            let (pa, pb) = (a.exp2(), b.exp2());
            tp.push(pa);
            tq.push(pb);
            keys.push(match (a > f64::NEG_INFINITY, b > f64::NEG_INFINITY) {
                (false, false) => None,
                (true, false) => Some(f64::INFINITY),
                (false, true) => Some(f64::NEG_INFINITY),
                (true, true) => Some(a - b),
            });
        }
        let (type_class, count) = group_by_key(&keys);
        let (mut cp, mut cq) = (vec![0.0; count], vec![0.0; count]);
        for (i, c) in type_class.iter().enumerate() {
            if let Some(c) = *c {
                cp[c] += tp[i];
                cq[c] += tq[i];
            }
        }
        let type_index = types.into_iter().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(Self { n, letters, type_index, type_class, p: cp, q: cq })
    }

    pub fn classes(&self) -> usize {
        self.p.len()
    }

    /// Class of a sequence of single-copy outcomes.
    pub fn class_of_sequence(&self, outcomes: &[usize]) -> Option<usize> {
        let mut t = vec![0; self.letters.p.len()];
        for &x in outcomes {
            t[self.letters.class_of[x]?] += 1;
        }
        self.type_class[*self.type_index.get(&t)?]
    }
}

/// Optimum of a classical program with the transition matrix attaining it.
#[derive(Clone, Debug)]
pub struct ClassicalSolution {
    /// Optimal fidelity or trace distance, depending on the program.
    pub value: f64,
    /// Column-stochastic, `k2 × k1`.
    pub transition: DMatrix<f64>,
    pub solver_gap: f64,
    pub iterations: usize,
}

impl ClassicalSolution {
    /// `Σ_j √((T p1)_j · p2_j)` at the returned matrix.
    pub fn achieved_fidelity(&self, inst: &ClassicalInstance) -> f64 {
        let out = output(&self.transition, &inst.p1);
        out.iter().zip(&inst.p2).map(|(a, b)| (a.max(0.0) * b).sqrt()).sum()
    }

    /// `½ Σ_j |(T p1)_j − p2_j|` at the returned matrix.
    pub fn achieved_trace_distance(&self, inst: &ClassicalInstance) -> f64 {
        let out = output(&self.transition, &inst.p1);
        0.5 * out.iter().zip(&inst.p2).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `‖T q1 − q2‖₁`.
    pub fn sigma_residual(&self, inst: &ClassicalInstance) -> f64 {
        let out = output(&self.transition, &inst.q1);
        out.iter().zip(&inst.q2).map(|(a, b)| (a - b).abs()).sum()
    }
}

fn output(t: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
    (0..t.nrows())
        .map(|j| (0..t.ncols()).map(|i| t[(j, i)] * p[i]).sum())
        .collect()
}

fn validate(inst: &ClassicalInstance) -> Result<()> {
    if inst.p1.len() != inst.q1.len() || inst.p2.len() != inst.q2.len() {
        return Err(Error::RejectedInput("probability vectors of unequal length".into()));
    }
    if inst.p1.is_empty() || inst.p2.is_empty() {
        return Err(Error::RejectedInput("empty alphabet".into()));
    }
    for v in [&inst.p1, &inst.q1, &inst.p2, &inst.q2] {
        if v.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::RejectedInput("not a probability vector".into()));
        }
    }
    Ok(())
}

/// Transition entries `(j, i)` allowed by `T q1 = q2`: mass from an input with
/// `q1_i > 0` may only reach outputs with `q2_j > 0`.
fn allowed_pairs(inst: &ClassicalInstance) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..inst.p1.len() {
        for j in 0..inst.p2.len() {
            if !(inst.q1[i] > 0.0 && inst.q2[j] == 0.0) {
                pairs.push((j, i));
            }
        }
    }
    pairs
}

fn stochastic_model(inst: &ClassicalInstance, model: &mut Model) -> (crate::sdp::model::VarId, Vec<(usize, usize)>) {
    let one = Complex64::new(1.0, 0.0);
    let pairs = allowed_pairs(inst);
    let t = model.var(VarKind::Nonnegative(pairs.len()));
    for i in 0..inst.p1.len() {
        let mut e = Expr::new();
        for (k, &(_, pi)) in pairs.iter().enumerate() {
            if pi == i {
                e.add(t, k, k, one);
            }
        }
        model.constrain_re(e, 1.0);
    }
    for j in 0..inst.p2.len() {
        if inst.q2[j] == 0.0 {
            continue;
        }
        let mut e = Expr::new();
        for (k, &(pj, pi)) in pairs.iter().enumerate() {
            if pj == j {
                e.add(t, k, k, Complex64::new(inst.q1[pi], 0.0));
            }
        }
        model.constrain_re(e, inst.q2[j]);
    }
    (t, pairs)
}

fn transition_from(values: &nalgebra::DVector<f64>, pairs: &[(usize, usize)], k2: usize, k1: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(k2, k1);
    for (k, &(j, i)) in pairs.iter().enumerate() {
        t[(j, i)] = values[k].max(0.0);
    }
    for i in 0..k1 {
        let s: f64 = t.column(i).sum();
        if s > 0.0 {
            t.column_mut(i).scale_mut(1.0 / s);
        }
    }
    t
}

/// `max Σ_j √((T p1)_j p2_j)` over column-stochastic `T` with `T q1 = q2`,
/// each term written as a 2×2 PSD block `[[(T p1)_j, x_j], [x_j, p2_j]]`.
pub fn classical_optimal_fidelity(inst: &ClassicalInstance, tol: f64) -> Result<ClassicalSolution> {
    validate(inst)?;
    let one = Complex64::new(1.0, 0.0);
    let mut model = Model::new();
    let (t, pairs) = stochastic_model(inst, &mut model);
    let mut objective = Expr::new();
    for j in 0..inst.p2.len() {
        let feeds: Vec<usize> = (0..pairs.len())
            .filter(|&k| pairs[k].0 == j && inst.p1[pairs[k].1] > 0.0)
            .collect();
        if inst.p2[j] == 0.0 || feeds.is_empty() {
            continue;
        }
        let m = model.var(VarKind::Symmetric(2));
        let mut link = Expr::new().term(m, 0, 0, one);
        for &k in &feeds {
            link.add(t, k, k, Complex64::new(-inst.p1[pairs[k].1], 0.0));
        }
        model.constrain_re(link, 0.0);
        model.constrain_re(Expr::new().term(m, 1, 1, one), inst.p2[j]);
        objective.add(m, 0, 1, one);
    }
    model.maximize_re(objective);
    let sol = model.solve(&SdpOptions { gap_tolerance: tol, ..SdpOptions::default() })?;
    let values = sol.value(t).nonnegative().expect("vector variable");
    Ok(ClassicalSolution {
        value: sol.objective.clamp(0.0, 1.0),
        transition: transition_from(values, &pairs, inst.p2.len(), inst.p1.len()),
        solver_gap: sol.gap(),
        iterations: sol.iterations,
    })
}

/// `min ½ Σ_j |(T p1)_j − p2_j|` over the same feasible set, as a linear
/// program with `a − b = T p1 − p2`, `a, b ≥ 0`.
pub fn classical_optimal_trace(inst: &ClassicalInstance, tol: f64) -> Result<ClassicalSolution> {
    validate(inst)?;
    let one = Complex64::new(1.0, 0.0);
    let k2 = inst.p2.len();
    let mut model = Model::new();
    let (t, pairs) = stochastic_model(inst, &mut model);
    let a = model.var(VarKind::Nonnegative(k2));
    let b = model.var(VarKind::Nonnegative(k2));
    let mut objective = Expr::new();
    for j in 0..k2 {
        let mut e = Expr::new().term(a, j, j, one).term(b, j, j, -one);
        for (k, &(pj, pi)) in pairs.iter().enumerate() {
            if pj == j {
                e.add(t, k, k, Complex64::new(-inst.p1[pi], 0.0));
            }
        }
        model.constrain_re(e, -inst.p2[j]);
        objective.add(a, j, j, Complex64::new(0.5, 0.0));
        objective.add(b, j, j, Complex64::new(0.5, 0.0));
    }
    model.minimize_re(objective);
    let sol = model.solve(&SdpOptions { gap_tolerance: tol, ..SdpOptions::default() })?;
    let values = sol.value(t).nonnegative().expect("vector variable");
    Ok(ClassicalSolution {
        value: (-sol.objective).clamp(0.0, 1.0),
        transition: transition_from(values, &pairs, k2, inst.p1.len()),
        solver_gap: sol.gap(),
        iterations: sol.iterations,
    })
}
