//! Ordered partitions `Λ_d(n)`, refinements and output-type lifting.
//!
//! A partition `(λ_1, …, λ_d)` of `n` is the monotone map `[n] → [d]` whose
//! fiber over `t` has `λ_t` points; it is non-degenerate when every part is
//! positive, i.e. when the map is epi.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::{self, MonotoneMap};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrderedPartition {
    parts: Vec<usize>,
}

impl fmt::Debug for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl From<Vec<usize>> for OrderedPartition {
    fn from(parts: Vec<usize>) -> Self {
        OrderedPartition { parts }
    }
}

impl OrderedPartition {
    pub fn new(parts: Vec<usize>) -> Self {
        OrderedPartition { parts }
    }

    /// The empty partition of 0, unit for concatenation.
    pub fn empty() -> Self {
        OrderedPartition { parts: Vec::new() }
    }

    /// The one-part partition `(n)`.
    pub fn trivial(n: usize) -> Self {
        OrderedPartition { parts: vec![n] }
    }

    /// The finest partition `1^n`.
    pub fn finest(n: usize) -> Self {
        OrderedPartition { parts: vec![1; n] }
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn d(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, i: usize) -> usize {
        self.parts[i - 1]
    }

    pub fn is_degenerate(&self) -> bool {
        self.parts.contains(&0)
    }

    /// The partition with its zero parts removed.
    pub fn core(&self) -> OrderedPartition {
        OrderedPartition::new(self.parts.iter().copied().filter(|&p| p > 0).collect())
    }

    /// The monotone map `[n] → [d]`.
    pub fn to_map(&self) -> MonotoneMap {
        let values = self
            .parts
            .iter()
            .enumerate()
            .flat_map(|(t, &p)| std::iter::repeat(t + 1).take(p))
            .collect();
        MonotoneMap::new(self.d(), values).expect("fibers are listed in order")
    }

    pub fn from_map(f: &MonotoneMap) -> Self {
        OrderedPartition::new(f.fiber_sizes())
    }

    /// Termwise `self ≥ other`.
    pub fn dominates(&self, other: &OrderedPartition) -> bool {
        self.d() == other.d() && self.parts.iter().zip(&other.parts).all(|(a, b)| a >= b)
    }

    /// Termwise sum.
    pub fn add(&self, other: &OrderedPartition) -> Option<OrderedPartition> {
        (self.d() == other.d())
            .then(|| OrderedPartition::new(self.parts.iter().zip(&other.parts).map(|(a, b)| a + b).collect()))
    }

    /// Pushforward along `ρ: [d] → [e]`: part `t` is the sum of the parts in
    /// `ρ⁻¹(t)`.
    pub fn push(&self, rho: &MonotoneMap) -> Result<OrderedPartition> {
        if rho.dom() != self.d() {
            return Err(Error::Composition {
                left: self.d(),
                right: rho.dom(),
            });
        }
        let mut parts = vec![0; rho.cod()];
        for (i, &p) in self.parts.iter().enumerate() {
            parts[rho.values()[i] - 1] += p;
        }
        Ok(OrderedPartition::new(parts))
    }
}

/// A refinement `fine → coarse` witnessed by the epi `ρ: [d′] ↠ [d]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Refinement {
    pub fine: OrderedPartition,
    pub coarse: OrderedPartition,
    pub rho: MonotoneMap,
}

impl fmt::Debug for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}→{:?} via {:?}", self.fine, self.coarse, self.rho.values())
    }
}

impl Refinement {
    pub fn new(fine: OrderedPartition, rho: MonotoneMap) -> Result<Self> {
        if !rho.is_epi() {
            return Err(Error::NotEpi(format!("{rho:?}")));
        }
        let coarse = fine.push(&rho)?;
        Ok(Refinement { fine, coarse, rho })
    }

    pub fn identity(lambda: &OrderedPartition) -> Self {
        Refinement {
            fine: lambda.clone(),
            coarse: lambda.clone(),
            rho: MonotoneMap::identity(lambda.d()),
        }
    }
}

/// All of `Λ_d(n)`, or only the non-degenerate part, in ascending
/// lexicographic order.
pub fn enumerate(n: usize, d: usize, nondegenerate_only: bool) -> Vec<OrderedPartition> {
    let mut out = Vec::new();
    if d == 0 {
        if n == 0 {
            out.push(OrderedPartition::empty());
        }
        return out;
    }
    let min = usize::from(nondegenerate_only);
    let mut cur = Vec::with_capacity(d);
    fn rec(left: usize, slots: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<OrderedPartition>) {
        if slots == 1 {
            if left >= min {
                cur.push(left);
                out.push(OrderedPartition::new(cur.clone()));
                cur.pop();
            }
            return;
        }
        let reserve = min * (slots - 1);
        if left < reserve {
            return;
        }
        for p in min..=left - reserve {
            cur.push(p);
            rec(left - p, slots - 1, min, cur, out);
            cur.pop();
        }
    }
    rec(n, d, min, &mut cur, &mut out);
    out
}

/// `μ ∘_i λ`: replace the `i`-th part of `λ` by the parts of `μ`.
pub fn compose_at(mu: &OrderedPartition, i: usize, lambda: &OrderedPartition) -> Result<OrderedPartition> {
    if i == 0 || i > lambda.d() {
        return Err(Error::Arity(format!("slot {i} of a {}-part partition", lambda.d())));
    }
    if mu.n() != lambda.part(i) {
        return Err(Error::SumMismatch {
            expected: lambda.part(i),
            found: mu.n(),
        });
    }
    let mut parts = lambda.parts[..i - 1].to_vec();
    parts.extend_from_slice(&mu.parts);
    parts.extend_from_slice(&lambda.parts[i..]);
    Ok(OrderedPartition::new(parts))
}

/// Concatenation `(λ, μ)`.
pub fn concatenate(lambda: &OrderedPartition, mu: &OrderedPartition) -> OrderedPartition {
    let mut parts = lambda.parts.clone();
    parts.extend_from_slice(&mu.parts);
    OrderedPartition::new(parts)
}

/// Concatenation of refinements, side by side.
pub fn concatenate_refinements(a: &Refinement, b: &Refinement) -> Refinement {
    let mut values = a.rho.values().to_vec();
    values.extend(b.rho.values().iter().map(|v| v + a.coarse.d()));
    Refinement {
        fine: concatenate(&a.fine, &b.fine),
        coarse: concatenate(&a.coarse, &b.coarse),
        rho: MonotoneMap::new(a.coarse.d() + b.coarse.d(), values).expect("shifted epi"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Restriction of a refinement of a concatenation to the first `split`
/// coarse parts (`Side::Left`) or the remaining ones.
pub fn restrict(nu: &Refinement, split: usize, side: Side) -> Result<Refinement> {
    if split > nu.coarse.d() {
        return Err(Error::NotRefinement(format!("split {split} beyond {:?}", nu.coarse)));
    }
    let values = nu.rho.values();
    let boundary = values.partition_point(|&v| v <= split);
    let (fine, rho_values, coarse) = match side {
        Side::Left => (
            nu.fine.parts[..boundary].to_vec(),
            values[..boundary].to_vec(),
            nu.coarse.parts[..split].to_vec(),
        ),
        Side::Right => (
            nu.fine.parts[boundary..].to_vec(),
            values[boundary..].iter().map(|v| v - split).collect(),
            nu.coarse.parts[split..].to_vec(),
        ),
    };
    let cod = coarse.len();
    Ok(Refinement {
        fine: OrderedPartition::new(fine),
        coarse: OrderedPartition::new(coarse),
        rho: MonotoneMap::new(cod, rho_values)?,
    })
}

/// Non-degenerate refinements of a non-degenerate `λ`, ordered by the fine
/// partition.
pub fn refinements_of(lambda: &OrderedPartition) -> Result<Vec<Refinement>> {
    if lambda.is_degenerate() {
        return Err(Error::Degenerate(lambda.parts.clone()));
    }
    Ok(zero_preserving_refinements(lambda))
}

/// Refinements of an arbitrary `λ` in which every zero part stays a single
/// zero part and every positive part splits into positive parts.
pub fn zero_preserving_refinements(lambda: &OrderedPartition) -> Vec<Refinement> {
    let per_part: Vec<Vec<OrderedPartition>> = lambda
        .parts
        .iter()
        .map(|&p| {
            if p == 0 {
                vec![OrderedPartition::new(vec![0])]
            } else {
                (1..=p).flat_map(|k| enumerate(p, k, true)).collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut fine = Vec::new();
    let mut rho = Vec::new();
    fn rec(
        t: usize,
        per_part: &[Vec<OrderedPartition>],
        lambda: &OrderedPartition,
        fine: &mut Vec<usize>,
        rho: &mut Vec<usize>,
        out: &mut Vec<Refinement>,
    ) {
        if t == per_part.len() {
            out.push(Refinement {
                fine: OrderedPartition::new(fine.clone()),
                coarse: lambda.clone(),
                rho: MonotoneMap::new(lambda.d(), rho.clone()).expect("fiberwise build"),
            });
            return;
        }
        for split in &per_part[t] {
            let mark = fine.len();
            fine.extend_from_slice(split.parts());
            rho.extend(std::iter::repeat(t + 1).take(split.d()));
            rec(t + 1, per_part, lambda, fine, rho, out);
            fine.truncate(mark);
            rho.truncate(mark);
        }
    }
    rec(0, &per_part, lambda, &mut fine, &mut rho, &mut out);
    out.sort_by(|a, b| a.fine.cmp(&b.fine));
    out
}

/// The output type `π′(ρ)` of `q′` slots: two points in the same fiber of `ρ`
/// lie in different parts, and merging along `ρ` recovers `π`. Its cuts are
/// the non-cuts of `ρ` together with the cuts of `ρ` lying over cuts of `π`.
pub fn lift_output_type(pi: &MonotoneMap, rho: &MonotoneMap) -> Result<MonotoneMap> {
    if !pi.is_epi() {
        return Err(Error::NotEpi(format!("{pi:?}")));
    }
    if !rho.is_epi() {
        return Err(Error::NotEpi(format!("{rho:?}")));
    }
    if rho.cod() != pi.dom() {
        return Err(Error::Composition {
            left: rho.cod(),
            right: pi.dom(),
        });
    }
    let q_prime = rho.dom();
    let rho_cuts = rho.cuts();
    let pi_cuts = pi.cuts();
    let mut cuts: BTreeSet<usize> = (1..q_prime).filter(|c| !rho_cuts.contains(c)).collect();
    for &c in &rho_cuts {
        // `c` separates the fibers over ρ(c) and ρ(c) + 1.
        if pi_cuts.contains(&rho.at(c)) {
            cuts.insert(c);
        }
    }
    MonotoneMap::epi_from_cuts(q_prime, &cuts)
}

/// [`lift_output_type`] on part-size lists.
pub fn lift_output_type_parts(pi: &OrderedPartition, rho_parts: &OrderedPartition) -> Result<OrderedPartition> {
    let pi_map = pi.to_map();
    let rho = rho_parts.to_map();
    Ok(OrderedPartition::from_map(&lift_output_type(&pi_map, &rho)?))
}

/// `|Λ_d(n)|`.
pub fn count(n: usize, d: usize, nondegenerate_only: bool) -> u128 {
    match (n, d, nondegenerate_only) {
        (0, 0, _) => 1,
        (_, 0, _) => 0,
        (_, _, false) => ordinal::binomial(n + d - 1, d - 1),
        (0, _, true) => 0,
        (_, _, true) => ordinal::binomial(n - 1, d - 1),
    }
}
