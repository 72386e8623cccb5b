//! Operator spaces as exact nullspaces, and the checks that certify them.
//!
//! Constraints are imposed once per refinement `κ` and fine slot `i`:
//! `P_κ(..xy..) − f(x)P_κ(..y..) − P_κ(..x..)f(y)` equals the sum over all
//! positive two-part splits of slot `i` of `m_B^{(i)}` applied to the finer
//! component. Slots of size one have no splits and so become plain
//! derivation conditions.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::{fiber_sizes, DiffOperator};
use crate::algebra::{ad_m, leibniz_terms, multiply_slots, AlgebraMorphism, MultiLinearMap};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec, Q};
use crate::partition::{enumerate, refinements_of, zero_preserving_refinements, OrderedPartition};
use crate::tensor::{add_into, index_word, word_len, Tensor, Word};

/// Largest total output grade any solver call will build.
pub const MAX_GRADE: usize = 6;

/// Inclusive range of total output grades.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GradeWindow {
    pub lo: usize,
    pub hi: usize,
}

impl GradeWindow {
    pub fn exact(g: usize) -> Self {
        GradeWindow { lo: g, hi: g }
    }

    pub fn up_to(g: usize) -> Self {
        GradeWindow { lo: 0, hi: g }
    }

    fn check(&self) -> Result<()> {
        if self.hi > MAX_GRADE {
            return Err(Error::Truncation { requested: self.hi, max: MAX_GRADE });
        }
        if self.lo > self.hi {
            return Err(Error::Operator(format!("empty grade window {}..={}", self.lo, self.hi)));
        }
        Ok(())
    }
}

/// Basis of `D_{λ,π}(f)` over a window of total grades.
#[derive(Clone, Debug)]
pub struct MultiDiffSpace {
    pub shape: OrderedPartition,
    pub out_type: OrderedPartition,
    pub window: GradeWindow,
    /// Basis elements, each homogeneous in its coarse grade distribution.
    pub basis: Vec<DiffOperator>,
}

impl MultiDiffSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Dimension per total grade.
    pub fn dims_by_grade(&self) -> BTreeMap<usize, usize> {
        let mut out: BTreeMap<usize, usize> = (self.window.lo..=self.window.hi).map(|g| (g, 0)).collect();
        for op in &self.basis {
            for g in op.total_grades() {
                *out.entry(g).or_default() += 1;
            }
        }
        out
    }

    /// Bigrade `(p, q)` and genus of the total grade `g` summand.
    pub fn bigrade(&self, g: usize) -> (usize, usize, i64) {
        let p = self.out_type.d() + g;
        let q = self.shape.d();
        (p, q, self.shape.n() as i64 - p as i64 + 1)
    }

    pub fn at_grade(&self, g: usize) -> Vec<DiffOperator> {
        self.basis.iter().filter(|op| op.total_grades() == [g]).cloned().collect()
    }
}

/// `D_n(f)` with output type `(1)`.
pub fn solve_dn(f: &AlgebraMorphism, n: usize, window: GradeWindow) -> Result<MultiDiffSpace> {
    solve_shape(f, &OrderedPartition::trivial(n), &OrderedPartition::trivial(1), window)
}

/// `D_{λ,π}(f)` summed over the total grades of `window`.
pub fn solve_shape(
    f: &AlgebraMorphism,
    shape: &OrderedPartition,
    out_type: &OrderedPartition,
    window: GradeWindow,
) -> Result<MultiDiffSpace> {
    window.check()?;
    let positive: Vec<usize> = (0..shape.d()).filter(|&k| shape.parts()[k] > 0).collect();
    let mut basis = Vec::new();
    for g in window.lo..=window.hi {
        let dists: Vec<Vec<usize>> = if positive.is_empty() {
            if g == 0 {
                vec![Vec::new()]
            } else {
                Vec::new()
            }
        } else {
            enumerate(g, positive.len(), false).into_iter().map(|p| p.parts().to_vec()).collect()
        };
        for d in dists {
            let mut mu = vec![0; shape.d()];
            for (k, &x) in positive.iter().zip(&d) {
                mu[*k] = x;
            }
            basis.extend(solve_shape_grades(f, shape, out_type, &mu)?);
        }
    }
    Ok(MultiDiffSpace { shape: shape.clone(), out_type: out_type.clone(), window, basis })
}

/// Basis of `D_λ^μ(f)` for one coarse grade distribution `μ`.
pub fn solve_shape_grades(
    f: &AlgebraMorphism,
    shape: &OrderedPartition,
    out_type: &OrderedPartition,
    mu: &[usize],
) -> Result<Vec<DiffOperator>> {
    if mu.len() != shape.d() {
        return Err(Error::Operator(format!("grade vector {mu:?} does not match {shape:?}")));
    }
    if mu.iter().sum::<usize>() > MAX_GRADE {
        return Err(Error::Truncation { requested: mu.iter().sum(), max: MAX_GRADE });
    }
    if out_type.n() != shape.d() || out_type.is_degenerate() {
        return Err(Error::Operator(format!("type {out_type:?} does not fit {shape:?}")));
    }
    if shape.parts().iter().zip(mu).any(|(l, g)| *l == 0 && *g > 0) {
        return Ok(Vec::new());
    }
    let core = shape.core();
    let core_mu: Vec<usize> = shape.parts().iter().zip(mu).filter(|(l, _)| **l > 0).map(|(_, g)| *g).collect();
    let solutions = solve_core(f, &core, &core_mu)?;
    let mut out = Vec::with_capacity(solutions.len());
    for sol in solutions {
        let mut components = BTreeMap::new();
        for (key, m) in sol {
            let sizes = fiber_sizes(&core, &key)?;
            let (full_key, full) = insert_zero_slots(shape, &key, &sizes, m, f);
            components.insert(full_key, full);
        }
        out.push(DiffOperator::new(shape.clone(), out_type.clone(), components)?);
    }
    Ok(out)
}

/// Re-inserts the zero slots of `shape` into a core component.
fn insert_zero_slots(
    shape: &OrderedPartition,
    core_key: &OrderedPartition,
    core_sizes: &[usize],
    mut m: MultiLinearMap,
    f: &AlgebraMorphism,
) -> (OrderedPartition, MultiLinearMap) {
    let mut key = Vec::new();
    let mut next_core = 0;
    let mut t = 0;
    for &p in shape.parts() {
        if p == 0 {
            m = m.insert_morphism(key.len(), key.len(), f);
            key.push(0);
        } else {
            let s = core_sizes[next_core];
            key.extend_from_slice(&core_key.parts()[t..t + s]);
            t += s;
            next_core += 1;
        }
    }
    (OrderedPartition::new(key), m)
}

struct Block {
    key: usize,
    grades: Vec<usize>,
    offset: usize,
    out_size: usize,
    out_len: usize,
}

/// Grade vectors on the fine slots that push forward to `mu`.
fn fine_grades(mu: &[usize], sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut acc = vec![Vec::new()];
    for (&g, &s) in mu.iter().zip(sizes) {
        let opts = enumerate(g, s, false);
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for prefix in &acc {
            for o in &opts {
                let mut v: Vec<usize> = prefix.clone();
                v.extend_from_slice(o.parts());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

type EqKey = (usize, usize, Word, Word);

fn add_coeff(rows: &mut HashMap<EqKey, SparseVec>, key: EqKey, var: usize, c: Q) {
    if c.is_zero() {
        return;
    }
    let row = rows.entry(key).or_default();
    let e = row.entry(var).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        row.remove(&var);
    }
}

/// Nullspace of the constraint system on a shape with positive parts.
fn solve_core(
    f: &AlgebraMorphism,
    core: &OrderedPartition,
    mu: &[usize],
) -> Result<Vec<BTreeMap<OrderedPartition, MultiLinearMap>>> {
    if core.d() == 0 {
        return Ok(vec![BTreeMap::from([(OrderedPartition::empty(), MultiLinearMap::scalar(Q::one()))])]);
    }
    let a_alg = f.source();
    let c_alg = f.target();
    let (a, c) = (a_alg.dim(), c_alg.dim());
    let refs = refinements_of(core)?;
    let keys: Vec<(OrderedPartition, Vec<usize>)> =
        refs.iter().map(|r| (r.fine.clone(), r.rho.fiber_sizes())).collect();
    let key_index: HashMap<Vec<usize>, usize> =
        keys.iter().enumerate().map(|(i, (k, _))| (k.parts().to_vec(), i)).collect();
    let mut blocks = Vec::new();
    let mut block_index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    let mut offset = 0;
    for (ki, (key, sizes)) in keys.iter().enumerate() {
        let in_size = a.pow(key.d() as u32);
        for g in fine_grades(mu, sizes) {
            let out_len = word_len(&g);
            let out_size = c.pow(out_len as u32);
            block_index.insert((ki, g.clone()), blocks.len());
            blocks.push(Block { key: ki, grades: g, offset, out_size, out_len });
            offset += in_size * out_size;
        }
    }
    let nvars = offset;
    let mut rows: HashMap<EqKey, SparseVec> = HashMap::new();
    for (bi, b) in blocks.iter().enumerate() {
        let (key, sizes) = &keys[b.key];
        let d = key.d();
        let ranges = crate::tensor::slot_ranges(&b.grades);
        // slot i and i + 1 lie in one coarse fiber
        let mut same_fiber = vec![false; d.saturating_sub(1)];
        let mut t = 0;
        for &s in sizes {
            for j in t..t + s - 1 {
                same_fiber[j] = true;
            }
            t += s;
        }
        let merged: Vec<Option<usize>> = (0..d.saturating_sub(1))
            .map(|i| {
                if !same_fiber[i] {
                    return None;
                }
                let mut parts = key.parts().to_vec();
                let r = parts.remove(i + 1);
                parts[i] += r;
                let mut g = b.grades.clone();
                let h = g.remove(i + 1);
                g[i] += h;
                let mk = key_index[&parts];
                Some(block_index[&(mk, g)])
            })
            .collect();
        for in_idx in 0..a.pow(d as u32) {
            let u = index_word(in_idx, d, a);
            for out_idx in 0..b.out_size {
                let w = index_word(out_idx, b.out_len, c);
                let var = b.offset + in_idx * b.out_size + out_idx;
                for i in 0..d {
                    let z = u[i];
                    for (x, y, coef) in a_alg.preimages(z) {
                        let mut u2 = u.clone();
                        u2[i] = *x;
                        u2.insert(i + 1, *y);
                        add_coeff(&mut rows, (bi, i, u2, w.clone()), var, coef.clone());
                    }
                    for other in 0..a {
                        let mut ul = u.clone();
                        ul.insert(i, other);
                        let mut ur = u.clone();
                        ur.insert(i + 1, other);
                        for (l, fl) in f.image(other) {
                            for (w2, dd) in c_alg.act_left(*l, &w, ranges[i].start) {
                                add_coeff(&mut rows, (bi, i, ul.clone(), w2), var, -(fl * dd));
                            }
                            for (w2, dd) in c_alg.act_right(&w, ranges[i].end - 1, *l) {
                                add_coeff(&mut rows, (bi, i, ur.clone(), w2), var, -(fl * dd));
                            }
                        }
                    }
                }
                for (i, m) in merged.iter().enumerate() {
                    if let Some(mb) = m {
                        for (w2, dd) in c_alg.merge_at(&w, ranges[i].end - 1) {
                            add_coeff(&mut rows, (*mb, i, u.clone(), w2), var, -dd);
                        }
                    }
                }
            }
        }
    }
    let mut ordered: Vec<(EqKey, SparseVec)> = rows.into_iter().filter(|(_, r)| !r.is_empty()).collect();
    ordered.sort_by(|x, y| x.0.cmp(&y.0));
    let mut ech = Echelon::new();
    for (_, row) in ordered {
        ech.add_row(row);
    }
    let null = ech.nullspace(nvars);
    let mut out = Vec::with_capacity(null.len());
    for v in null {
        let mut comps: BTreeMap<OrderedPartition, MultiLinearMap> = BTreeMap::new();
        let mut bi = 0;
        for (idx, val) in v.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            while bi + 1 < blocks.len() && blocks[bi + 1].offset <= idx {
                bi += 1;
            }
            let b = &blocks[bi];
            let key = &keys[b.key].0;
            let local = idx - b.offset;
            let u = index_word(local / b.out_size, key.d(), a);
            let w = index_word(local % b.out_size, b.out_len, c);
            comps
                .entry(key.clone())
                .or_insert_with(|| MultiLinearMap::zero(key.d(), key.d()))
                .add_entry(&b.grades, u, w, val.clone());
        }
        out.push(comps);
    }
    Ok(out)
}

/// Verifies the defining constraints of `D_λ(f)` by direct evaluation.
pub fn check_operator(p: &DiffOperator, f: &AlgebraMorphism) -> Result<()> {
    let shape = p.shape();
    for r in zero_preserving_refinements(shape) {
        let key = &r.fine;
        let zero = MultiLinearMap::zero(key.d(), key.d());
        let comp = p.component(key).unwrap_or(&zero);
        for (i, &ki) in key.parts().iter().enumerate() {
            if ki == 0 {
                let [prod, left, right] = leibniz_terms(comp, i, f)?;
                if !prod.sub(&left).is_zero() || !prod.sub(&right).is_zero() {
                    return Err(Error::Operator(format!(
                        "component {key:?} is not f-multiplicative in zero slot {}",
                        i + 1
                    )));
                }
                continue;
            }
            let mut residual = ad_m(comp, i, f)?;
            for j in 1..ki {
                let mut parts = key.parts().to_vec();
                parts[i] = j;
                parts.insert(i + 1, ki - j);
                let split = OrderedPartition::new(parts);
                if let Some(finer) = p.component(&split) {
                    residual = residual.sub(&finer.merge_slots(i, f.target()));
                }
            }
            if !residual.is_zero() {
                return Err(Error::Operator(format!(
                    "Leibniz constraint fails for component {key:?} in slot {}",
                    i + 1
                )));
            }
        }
    }
    for m in p.components().values() {
        for g in m.grade_vectors() {
            if g.iter().sum::<usize>() > MAX_GRADE {
                return Err(Error::Truncation { requested: g.iter().sum(), max: MAX_GRADE });
            }
        }
    }
    Ok(())
}

fn eval_single(m: &MultiLinearMap, u: &[usize], alg: &crate::algebra::FinAlgebra) -> Tensor {
    let mut out = Tensor::new();
    for (g, t) in m.eval_word(u) {
        add_into(&mut out, &multiply_slots(alg, &t, &g));
    }
    out
}

/// `P_{(n)}(a_1 ⋯ a_d) = Σ_{λ ∈ Λ_d(n)} m_B ∘ P_λ(a_1, …, a_d)` on all basis
/// tuples, for an operator of single-slot shape.
pub fn check_m_p(p: &DiffOperator, d: usize, f: &AlgebraMorphism) -> Result<bool> {
    if p.shape().d() != 1 || d == 0 {
        return Err(Error::Operator("the [m, P] check needs a single-slot shape and d ≥ 1".into()));
    }
    let n = p.order();
    let a_alg = f.source();
    let c_alg = f.target();
    let a = a_alg.dim();
    let top = p.full_component(&[n], &[1], f)?;
    let parts: Vec<(MultiLinearMap, OrderedPartition)> = enumerate(n, d, false)
        .into_iter()
        .map(|lam| Ok((p.full_component(lam.parts(), &[d], f)?, lam)))
        .collect::<Result<_>>()?;
    for idx in 0..a.pow(d as u32) {
        let u = index_word(idx, d, a);
        let mut prod: Vec<(usize, Q)> = vec![(u[0], Q::one())];
        for &x in &u[1..] {
            let mut next: BTreeMap<usize, Q> = BTreeMap::new();
            for (k, c) in &prod {
                for (r, e) in a_alg.mul_basis(*k, x) {
                    *next.entry(*r).or_insert_with(Q::zero) += c * e;
                }
            }
            prod = next.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        }
        let mut lhs = Tensor::new();
        for (k, c) in &prod {
            crate::tensor::add_scaled(&mut lhs, &eval_single(&top, &[*k], c_alg), c);
        }
        let mut rhs = Tensor::new();
        for (m, _) in &parts {
            add_into(&mut rhs, &eval_single(m, &u, c_alg));
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Collection `Q_μ` of Prop. 6 shape: the slot `slot` of `λ` left free and
/// the other inputs fixed to basis vectors, split along a basis of the
/// remaining output factors.
#[derive(Clone, Debug)]
pub struct SubOperator {
    pub slot: usize,
    /// Keyed by the grades and output word of the fixed slots.
    pub parts: BTreeMap<(Vec<usize>, Word), DiffOperator>,
}

impl SubOperator {
    /// Every coefficient lies in `D_{λ_i}(f)`.
    pub fn check(&self, f: &AlgebraMorphism) -> Result<()> {
        for op in self.parts.values() {
            check_operator(op, f)?;
        }
        Ok(())
    }
}

/// Sub-operator of `P ∈ D_n(f)` along `λ ∈ Λ_d(n)` in slot `slot` (0-based).
pub fn sub_operator(
    p: &DiffOperator,
    lambda: &OrderedPartition,
    slot: usize,
    fixed: &[usize],
    f: &AlgebraMorphism,
) -> Result<SubOperator> {
    if p.shape().d() != 1 || lambda.n() != p.order() || slot >= lambda.d() || fixed.len() + 1 != lambda.d() {
        return Err(Error::Operator("sub-operator arguments do not fit the operator".into()));
    }
    let li = lambda.parts()[slot];
    let sub_shape = OrderedPartition::trivial(li);
    let mut parts: BTreeMap<(Vec<usize>, Word), BTreeMap<OrderedPartition, MultiLinearMap>> = BTreeMap::new();
    let a = f.source().dim();
    for r in zero_preserving_refinements(&sub_shape) {
        let mu = &r.fine;
        let k = mu.d();
        let mut fine = lambda.parts()[..slot].to_vec();
        fine.extend_from_slice(mu.parts());
        fine.extend_from_slice(&lambda.parts()[slot + 1..]);
        let comp = p.full_component(&fine, &[fine.len()], f)?;
        for idx in 0..a.pow(k as u32) {
            let b = index_word(idx, k, a);
            let mut u = fixed[..slot].to_vec();
            u.extend_from_slice(&b);
            u.extend_from_slice(&fixed[slot..]);
            for (g, t) in comp.eval_word(&u) {
                let ranges = crate::tensor::slot_ranges(&g);
                let (lo, hi) = (ranges[slot].start, ranges[slot + k - 1].end);
                let mut other_g = g[..slot].to_vec();
                other_g.extend_from_slice(&g[slot + k..]);
                let inner_g = g[slot..slot + k].to_vec();
                for (w, c) in t {
                    let mut other_w = w[..lo].to_vec();
                    other_w.extend_from_slice(&w[hi..]);
                    parts
                        .entry((other_g.clone(), other_w))
                        .or_default()
                        .entry(mu.clone())
                        .or_insert_with(|| MultiLinearMap::zero(k, k))
                        .add_entry(&inner_g, b.clone(), w[lo..hi].to_vec(), c.clone());
                }
            }
        }
    }
    let parts = parts
        .into_iter()
        .map(|(k, comps)| Ok((k, DiffOperator::new(sub_shape.clone(), OrderedPartition::trivial(1), comps)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(SubOperator { slot, parts })
}
