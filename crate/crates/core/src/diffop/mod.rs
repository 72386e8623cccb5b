//! Multi-differential operators.
//!
//! A [`DiffOperator`] has an input shape `λ` (zeros allowed), an output type
//! `π` given by part sizes over the slots of `λ`, and one multilinear
//! component per zero-preserving refinement of `λ`. Zero slots of the shape
//! always carry `f` in grade zero. Components on other refinements, such as
//! ones with extra zeros, are produced on demand by
//! [`DiffOperator::full_component`].

mod compose;
mod degeneracy;
mod system;

pub use compose::{bullet_h, bullet_v, compose_d, h_compose, v_compose};
pub use degeneracy::{
    degeneracy, epi_simplicial_holds, filtration_membership, symbol, symbol_exactness, Coordinates,
    ExactnessReport,
};
pub use system::{
    check_m_p, check_operator, solve_dn, solve_shape, solve_shape_grades, sub_operator,
    GradeWindow, MultiDiffSpace, MAX_GRADE,
};

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraMorphism, MultiLinearMap};
use crate::error::{Error, Result};
use crate::linalg::{format_rational, parse_rational, Q};
use crate::partition::OrderedPartition;
use crate::tensor::word_len;

/// Element of `D_{λ,π}(f)`, possibly spread over several output grades.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffOperator {
    shape: OrderedPartition,
    out_type: OrderedPartition,
    components: BTreeMap<OrderedPartition, MultiLinearMap>,
}

impl fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOperator{{shape {:?}, type {:?}, components", self.shape, self.out_type)?;
        for (k, m) in &self.components {
            write!(f, " {:?}:{:?}", k, m.blocks.keys().collect::<Vec<_>>())?;
        }
        write!(f, "}}")
    }
}

/// Sizes of the fibers of a zero-preserving refinement `fine → shape`.
pub fn fiber_sizes(shape: &OrderedPartition, fine: &OrderedPartition) -> Result<Vec<usize>> {
    let mut sizes = Vec::with_capacity(shape.d());
    let mut t = 0;
    let parts = fine.parts();
    for &p in shape.parts() {
        if p == 0 {
            if parts.get(t) != Some(&0) {
                return Err(Error::NotRefinement(format!("{fine:?} does not refine {shape:?}")));
            }
            sizes.push(1);
            t += 1;
            continue;
        }
        let (mut sum, start) = (0, t);
        while sum < p {
            match parts.get(t) {
                Some(&x) if x > 0 => {
                    sum += x;
                    t += 1;
                }
                _ => return Err(Error::NotRefinement(format!("{fine:?} does not refine {shape:?}"))),
            }
        }
        if sum != p {
            return Err(Error::NotRefinement(format!("{fine:?} does not refine {shape:?}")));
        }
        sizes.push(t - start);
    }
    if t != parts.len() {
        return Err(Error::NotRefinement(format!("{fine:?} does not refine {shape:?}")));
    }
    Ok(sizes)
}

/// Pushes fine grades forward along fibers of the given sizes.
pub fn push_grades(grades: &[usize], sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut t = 0;
    for &s in sizes {
        out.push(grades[t..t + s].iter().sum());
        t += s;
    }
    out
}

impl DiffOperator {
    pub fn new(
        shape: OrderedPartition,
        out_type: OrderedPartition,
        components: BTreeMap<OrderedPartition, MultiLinearMap>,
    ) -> Result<Self> {
        if out_type.n() != shape.d() || out_type.is_degenerate() {
            return Err(Error::Operator(format!(
                "type {out_type:?} is not an epi partition of the {} slots",
                shape.d()
            )));
        }
        for (key, m) in &components {
            fiber_sizes(&shape, key)?;
            if m.in_arity != key.d() || m.out_slots != key.d() {
                return Err(Error::Operator(format!("component {key:?} has the wrong arity")));
            }
            for (g, block) in &m.blocks {
                if g.iter().zip(key.parts()).any(|(g, k)| *k == 0 && *g != 0) {
                    return Err(Error::Operator(format!("zero slot of {key:?} carries a positive grade")));
                }
                let len = word_len(g);
                if block.values().flat_map(|t| t.keys()).any(|w| w.len() != len) {
                    return Err(Error::Operator(format!("component {key:?} is not grade homogeneous")));
                }
            }
        }
        let mut op = DiffOperator { shape, out_type, components };
        op.prune();
        Ok(op)
    }

    pub fn zero(shape: OrderedPartition, out_type: OrderedPartition) -> Self {
        DiffOperator { shape, out_type, components: BTreeMap::new() }
    }

    /// `u^k`: the identity on `k` slots of order zero.
    pub fn units(f: &AlgebraMorphism, k: usize) -> Self {
        let mut m = MultiLinearMap::scalar(Q::one());
        for i in 0..k {
            m = m.insert_morphism(i, i, f);
        }
        let shape = OrderedPartition::new(vec![0; k]);
        DiffOperator {
            out_type: OrderedPartition::finest(k),
            components: BTreeMap::from([(shape.clone(), m)]),
            shape,
        }
    }

    pub fn unit(f: &AlgebraMorphism) -> Self {
        DiffOperator::units(f, 1)
    }

    /// `c · 1` in the empty shape.
    pub fn scalar(c: Q) -> Self {
        let mut components = BTreeMap::new();
        if !c.is_zero() {
            components.insert(OrderedPartition::empty(), MultiLinearMap::scalar(c));
        }
        DiffOperator { shape: OrderedPartition::empty(), out_type: OrderedPartition::empty(), components }
    }

    /// `m_A = (u ∘_h u)[(2)]`.
    pub fn multiplication(f: &AlgebraMorphism) -> Self {
        let mut m = DiffOperator::units(f, 2);
        m.out_type = OrderedPartition::new(vec![2]);
        m
    }

    pub fn shape(&self) -> &OrderedPartition {
        &self.shape
    }

    pub fn out_type(&self) -> &OrderedPartition {
        &self.out_type
    }

    pub fn with_type(mut self, out_type: OrderedPartition) -> Result<Self> {
        if out_type.n() != self.shape.d() || out_type.is_degenerate() {
            return Err(Error::Operator(format!("type {out_type:?} does not fit {} slots", self.shape.d())));
        }
        self.out_type = out_type;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.shape.n()
    }

    /// Number of input slots `q`.
    pub fn slots(&self) -> usize {
        self.shape.d()
    }

    pub fn components(&self) -> &BTreeMap<OrderedPartition, MultiLinearMap> {
        &self.components
    }

    pub fn component(&self, key: &OrderedPartition) -> Option<&MultiLinearMap> {
        self.components.get(key)
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    fn prune(&mut self) {
        self.components.retain(|_, m| !m.is_zero());
    }

    /// Coarse grade distributions `μ` of the non-zero blocks.
    pub fn coarse_grades(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (key, m) in &self.components {
            let sizes = fiber_sizes(&self.shape, key).expect("stored keys refine the shape");
            for g in m.grade_vectors() {
                out.push(push_grades(g, &sizes));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn total_grades(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.coarse_grades().iter().map(|g| g.iter().sum()).collect();
        v.dedup();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Output count `p = |π| + G` when the total grade is homogeneous.
    pub fn outputs(&self) -> Option<usize> {
        match self.total_grades().as_slice() {
            [] => None,
            [g] => Some(self.out_type.d() + g),
            _ => None,
        }
    }

    /// `g(P) = n − p + 1`.
    pub fn genus(&self) -> Option<i64> {
        self.outputs().map(|p| self.order() as i64 - p as i64 + 1)
    }

    /// Every non-zero coarse component has `λ ≥ μ` termwise.
    pub fn is_totally_positive(&self) -> bool {
        self.coarse_grades().iter().all(|mu| self.shape.parts().iter().zip(mu).all(|(l, m)| l >= m))
    }

    /// Part with coarse grade distribution `μ`.
    pub fn restrict_grades(&self, mu: &[usize]) -> DiffOperator {
        let mut out = DiffOperator::zero(self.shape.clone(), self.out_type.clone());
        for (key, m) in &self.components {
            let sizes = fiber_sizes(&self.shape, key).expect("stored keys refine the shape");
            let mut r = MultiLinearMap::zero(m.in_arity, m.out_slots);
            for (g, b) in &m.blocks {
                if push_grades(g, &sizes) == mu {
                    r.blocks.insert(g.clone(), b.clone());
                }
            }
            if !r.is_zero() {
                out.components.insert(key.clone(), r);
            }
        }
        out
    }

    fn check_same_space(&self, other: &DiffOperator) -> Result<()> {
        if self.shape != other.shape || self.out_type != other.out_type {
            return Err(Error::Operator(format!(
                "cannot add operators of shapes {:?}/{:?} and {:?}/{:?}",
                self.shape, self.out_type, other.shape, other.out_type
            )));
        }
        Ok(())
    }

    pub fn add_scaled(&mut self, other: &DiffOperator, c: &Q) -> Result<()> {
        self.check_same_space(other)?;
        for (k, m) in &other.components {
            self.components
                .entry(k.clone())
                .or_insert_with(|| MultiLinearMap::zero(m.in_arity, m.out_slots))
                .add_scaled(m, c);
        }
        self.prune();
        Ok(())
    }

    pub fn scaled(&self, c: &Q) -> DiffOperator {
        let mut out = DiffOperator::zero(self.shape.clone(), self.out_type.clone());
        out.add_scaled(self, c).expect("same space");
        out
    }

    pub fn sum(&self, other: &DiffOperator) -> Result<DiffOperator> {
        let mut out = self.clone();
        out.add_scaled(other, &Q::one())?;
        Ok(out)
    }

    /// Inserts or replaces a component; used by constructions and tests.
    pub fn set_component(&mut self, key: OrderedPartition, m: MultiLinearMap) -> Result<()> {
        fiber_sizes(&self.shape, &key)?;
        if m.is_zero() {
            self.components.remove(&key);
        } else {
            self.components.insert(key, m);
        }
        Ok(())
    }

    /// `P_{λ′}` for any refinement `λ′` of the shape given by its fiber
    /// sizes, zeros allowed: the stored component with `f` inserted at
    /// every extra zero.
    pub fn full_component(
        &self,
        fine: &[usize],
        sizes: &[usize],
        f: &AlgebraMorphism,
    ) -> Result<MultiLinearMap> {
        if sizes.len() != self.shape.d() || sizes.iter().sum::<usize>() != fine.len() {
            return Err(Error::NotRefinement(format!(
                "{fine:?} with fibers {sizes:?} does not refine {:?}",
                self.shape
            )));
        }
        let mut key = Vec::new();
        let mut extra = Vec::new();
        let mut t = 0;
        for (k, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return Err(Error::NotEpi(format!("empty fiber over slot {}", k + 1)));
            }
            let fiber = &fine[t..t + s];
            let target = self.shape.parts()[k];
            if fiber.iter().sum::<usize>() != target {
                return Err(Error::NotRefinement(format!(
                    "{fine:?} does not refine {:?} at slot {}",
                    self.shape,
                    k + 1
                )));
            }
            if target == 0 {
                key.push(0);
                extra.extend(t + 1..t + s);
            } else {
                for (j, &x) in fiber.iter().enumerate() {
                    if x == 0 {
                        extra.push(t + j);
                    } else {
                        key.push(x);
                    }
                }
            }
            t += s;
        }
        let key = OrderedPartition::new(key);
        let mut m = match self.components.get(&key) {
            Some(m) => m.clone(),
            None => MultiLinearMap::zero(key.d(), key.d()),
        };
        for pos in extra {
            m = m.insert_morphism(pos, pos, f);
        }
        Ok(m)
    }

    /// Serializable form with sparse rational entries.
    pub fn to_data(&self) -> OperatorData {
        OperatorData {
            shape: self.shape.parts().to_vec(),
            out_type: self.out_type.parts().to_vec(),
            components: self
                .components
                .iter()
                .map(|(k, m)| ComponentData {
                    refinement: k.parts().to_vec(),
                    blocks: m
                        .blocks
                        .iter()
                        .map(|(g, b)| BlockData {
                            grades: g.clone(),
                            entries: b
                                .iter()
                                .flat_map(|(u, t)| {
                                    t.iter().map(move |(w, c)| EntryData {
                                        input: u.clone(),
                                        output: w.clone(),
                                        value: format_rational(c),
                                    })
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_data(data: &OperatorData) -> Result<Self> {
        let mut components = BTreeMap::new();
        for c in &data.components {
            let key = OrderedPartition::new(c.refinement.clone());
            let mut m = MultiLinearMap::zero(key.d(), key.d());
            for b in &c.blocks {
                if b.grades.len() != key.d() {
                    return Err(Error::Operator(format!("grade vector {:?} does not match {key:?}", b.grades)));
                }
                for e in &b.entries {
                    if e.input.len() != key.d() || e.output.len() != word_len(&b.grades) {
                        return Err(Error::Operator(format!("entry shape mismatch in {key:?}")));
                    }
                    m.add_entry(&b.grades, e.input.clone(), e.output.clone(), parse_rational(&e.value)?);
                }
            }
            components.insert(key, m);
        }
        DiffOperator::new(
            OrderedPartition::new(data.shape.clone()),
            OrderedPartition::new(data.out_type.clone()),
            components,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryData {
    pub input: Vec<usize>,
    pub output: Vec<usize>,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockData {
    pub grades: Vec<usize>,
    pub entries: Vec<EntryData>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentData {
    pub refinement: Vec<usize>,
    pub blocks: Vec<BlockData>,
}

/// JSON form of an operator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorData {
    pub shape: Vec<usize>,
    #[serde(rename = "type")]
    pub out_type: Vec<usize>,
    pub components: Vec<ComponentData>,
}

/// Finite sum of operators of different shapes and types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiDiff {
    terms: BTreeMap<(OrderedPartition, OrderedPartition), DiffOperator>,
}

impl MultiDiff {
    pub fn new() -> Self {
        MultiDiff::default()
    }

    pub fn from_op(op: DiffOperator) -> Self {
        let mut m = MultiDiff::new();
        m.add(&op);
        m
    }

    pub fn add(&mut self, op: &DiffOperator) {
        self.add_scaled(op, &Q::one());
    }

    pub fn add_scaled(&mut self, op: &DiffOperator, c: &Q) {
        let key = (op.shape.clone(), op.out_type.clone());
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(|| DiffOperator::zero(op.shape.clone(), op.out_type.clone()));
        entry.add_scaled(op, c).expect("keyed by space");
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add_all(&mut self, other: &MultiDiff) {
        for op in other.terms.values() {
            self.add(op);
        }
    }

    pub fn sub(&self, other: &MultiDiff) -> MultiDiff {
        let mut out = self.clone();
        for op in other.terms.values() {
            out.add_scaled(op, &-Q::one());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &DiffOperator> {
        self.terms.values()
    }

    pub fn get(&self, shape: &OrderedPartition, out_type: &OrderedPartition) -> Option<&DiffOperator> {
        self.terms.get(&(shape.clone(), out_type.clone()))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single term, if there is exactly one.
    pub fn single(&self) -> Option<&DiffOperator> {
        if self.terms.len() == 1 {
            self.terms.values().next()
        } else {
            None
        }
    }

    /// Re-tags every term with the given type.
    pub fn retyped(&self, out_type: &OrderedPartition) -> Result<MultiDiff> {
        let mut out = MultiDiff::new();
        for op in self.terms.values() {
            out.add(&op.clone().with_type(out_type.clone())?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{dual_numbers, AlgebraMorphism};

    #[test]
    fn fibers_of_refinements() {
        let shape = OrderedPartition::new(vec![2, 0, 1]);
        let fine = OrderedPartition::new(vec![1, 1, 0, 1]);
        assert_eq!(fiber_sizes(&shape, &fine).unwrap(), vec![2, 1, 1]);
        assert!(fiber_sizes(&shape, &OrderedPartition::new(vec![2, 1])).is_err());
        assert_eq!(push_grades(&[1, 0, 0, 2], &[2, 1, 1]), vec![1, 0, 2]);
    }

    #[test]
    fn unit_extends_by_f() {
        let f = AlgebraMorphism::identity(&dual_numbers());
        let u = DiffOperator::unit(&f);
        let ext = u.full_component(&[0, 0], &[2], &f).unwrap();
        assert_eq!(ext, DiffOperator::units(&f, 2).components()[&OrderedPartition::new(vec![0, 0])]);
        assert_eq!(u.genus(), Some(0));
        assert!(u.is_totally_positive());
    }

    #[test]
    fn json_round_trip() {
        let f = AlgebraMorphism::identity(&dual_numbers());
        let m = DiffOperator::multiplication(&f);
        let text = serde_json::to_string(&m.to_data()).unwrap();
        let back: OperatorData = serde_json::from_str(&text).unwrap();
        assert_eq!(DiffOperator::from_data(&back).unwrap(), m);
    }
}
