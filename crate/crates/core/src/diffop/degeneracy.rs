//! Degeneracies, the order filtration and the symbol map.

use std::collections::{BTreeMap, HashMap};

use super::{check_operator, solve_dn, solve_shape, DiffOperator, GradeWindow};
use crate::algebra::AlgebraMorphism;
use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseVec};
use crate::ordinal::{all_epis, compose, MonotoneMap};
use crate::partition::{lift_output_type_parts, OrderedPartition};
use crate::tensor::Word;

/// Assigns coordinates to operator entries so spans can be compared.
#[derive(Default)]
pub struct Coordinates {
    index: HashMap<(OrderedPartition, Vec<usize>, Word, Word), usize>,
}

impl Coordinates {
    pub fn new() -> Self {
        Coordinates::default()
    }

    pub fn vector(&mut self, op: &DiffOperator) -> SparseVec {
        let mut v = SparseVec::new();
        for (key, m) in op.components() {
            for (g, block) in &m.blocks {
                for (u, t) in block {
                    for (w, c) in t {
                        let next = self.index.len();
                        let i = *self
                            .index
                            .entry((key.clone(), g.clone(), u.clone(), w.clone()))
                            .or_insert(next);
                        v.insert(i, c.clone());
                    }
                }
            }
        }
        v
    }
}

/// `s(σ)(P)_{λσ} = P_λ`, zero on refinements not of that form.
pub fn degeneracy(sigma: &MonotoneMap, p: &DiffOperator) -> Result<DiffOperator> {
    if !sigma.is_epi() {
        return Err(Error::NotEpi(format!("{sigma:?}")));
    }
    if p.shape().d() != 1 || sigma.cod() != p.order() {
        return Err(Error::Operator(format!(
            "degeneracy [{}]↠[{}] does not apply to an operator of shape {:?}",
            sigma.dom(),
            sigma.cod(),
            p.shape()
        )));
    }
    let mut out = DiffOperator::zero(OrderedPartition::trivial(sigma.dom()), p.out_type().clone());
    for (lam, m) in p.components() {
        if p.order() == 0 {
            // only σ = id on [0]
            out.set_component(lam.clone(), m.clone())?;
            continue;
        }
        let lam_sigma = OrderedPartition::from_map(&compose(&lam.to_map(), sigma)?);
        out.set_component(lam_sigma, m.clone())?;
    }
    Ok(out)
}

/// Projection to the finest refinement.
pub fn symbol(p: &DiffOperator) -> Result<DiffOperator> {
    let mut fine = Vec::new();
    let mut rho = Vec::new();
    for &x in p.shape().parts() {
        if x == 0 {
            fine.push(0);
            rho.push(1);
        } else {
            fine.extend(std::iter::repeat(1).take(x));
            rho.push(x);
        }
    }
    let fine = OrderedPartition::new(fine);
    let out_type = lift_output_type_parts(p.out_type(), &OrderedPartition::new(rho))?;
    let mut out = DiffOperator::zero(fine.clone(), out_type);
    if let Some(m) = p.component(&fine) {
        out.set_component(fine, m.clone())?;
    }
    Ok(out)
}

/// Whether `P ∈ D_m(f)` lies in `F_n`, the span of all degeneracy images
/// of `D_n(f)`, for the total grades `P` occupies.
pub fn filtration_membership(p: &DiffOperator, n: usize, f: &AlgebraMorphism) -> Result<bool> {
    let m = p.order();
    if p.is_zero() || n >= m {
        return Ok(true);
    }
    let grades = p.total_grades();
    let window = GradeWindow { lo: grades[0], hi: *grades.last().expect("non-empty") };
    let dn = solve_dn(f, n, window)?;
    let mut coords = Coordinates::new();
    let mut ech = Echelon::new();
    for sigma in all_epis(m, n) {
        for q in &dn.basis {
            ech.add_row(coords.vector(&degeneracy(&sigma, q)?));
        }
    }
    Ok(ech.contains(&coords.vector(p)))
}

/// Outcome of the symbol exactness check at one order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub n: usize,
    pub window: (usize, usize),
    pub dim_dn: usize,
    pub dim_symbol_space: usize,
    pub symbol_rank: usize,
    /// Basis vectors of `D_{(1^n)}(f)` outside the image of `Σ`.
    pub failed_lifts: Vec<usize>,
    pub dim_kernel: usize,
    pub dim_degenerate: usize,
    pub degenerate_in_kernel: bool,
    pub degenerate_valid: bool,
}

impl ExactnessReport {
    pub fn surjective(&self) -> bool {
        self.failed_lifts.is_empty()
    }

    pub fn kernel_matches(&self) -> bool {
        self.degenerate_in_kernel && self.degenerate_valid && self.dim_degenerate == self.dim_kernel
    }

    pub fn exact(&self) -> bool {
        self.surjective() && self.kernel_matches()
    }
}

/// `0 → F_{n−1} → D_n(f) → D_{(1^n)}(f) → 0`, checked by ranks and
/// membership.
pub fn symbol_exactness(f: &AlgebraMorphism, n: usize, window: GradeWindow) -> Result<ExactnessReport> {
    if n == 0 {
        return Err(Error::Operator("the symbol sequence starts at order 1".into()));
    }
    let dn = solve_dn(f, n, window)?;
    let ones = OrderedPartition::finest(n);
    let sym_space = solve_shape(f, &ones, &OrderedPartition::finest(n), window)?;
    let mut coords = Coordinates::new();
    let mut image = Echelon::new();
    for p in &dn.basis {
        let s = symbol(p)?;
        image.add_row(coords.vector(&s));
    }
    let failed_lifts = sym_space
        .basis
        .iter()
        .enumerate()
        .filter(|(_, b)| !image.contains(&coords.vector(b)))
        .map(|(i, _)| i)
        .collect();
    let symbol_rank = image.rank();
    let dim_kernel = dn.dim() - symbol_rank;

    let prev = solve_dn(f, n - 1, window)?;
    let mut degenerate = Echelon::new();
    let mut dn_span = Echelon::new();
    let mut op_coords = Coordinates::new();
    for p in &dn.basis {
        dn_span.add_row(op_coords.vector(p));
    }
    let (mut in_kernel, mut valid) = (true, true);
    for sigma in all_epis(n, n - 1) {
        for q in &prev.basis {
            let s = degeneracy(&sigma, q)?;
            in_kernel &= symbol(&s)?.is_zero();
            let v = op_coords.vector(&s);
            valid &= check_operator(&s, f).is_ok() && dn_span.contains(&v);
            degenerate.add_row(v);
        }
    }
    Ok(ExactnessReport {
        n,
        window: (window.lo, window.hi),
        dim_dn: dn.dim(),
        dim_symbol_space: sym_space.dim(),
        symbol_rank,
        failed_lifts,
        dim_kernel,
        dim_degenerate: degenerate.rank(),
        degenerate_in_kernel: in_kernel,
        degenerate_valid: valid,
    })
}

/// Exhaustive check of `s(σ∘σ′) = s(σ′)∘s(σ)` on given operators.
pub fn epi_simplicial_holds(ops_by_order: &BTreeMap<usize, Vec<DiffOperator>>, max_m: usize) -> Result<bool> {
    for (&n, ops) in ops_by_order {
        for m in n..=max_m {
            for l in m..=max_m {
                for sigma in all_epis(m, n) {
                    for sigma2 in all_epis(l, m) {
                        let comp = compose(&sigma, &sigma2)?;
                        for p in ops {
                            let lhs = degeneracy(&comp, p)?;
                            let rhs = degeneracy(&sigma2, &degeneracy(&sigma, p)?)?;
                            if lhs != rhs {
                                return Ok(false);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}
