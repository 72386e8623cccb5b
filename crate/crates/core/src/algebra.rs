//! Finite dimensional associative algebras and the maps built on them.
//!
//! [`FinAlgebra`] stores structure constants `e_i e_j = Σ_k c[i][j][k] e_k`.
//! The graded target `B = T_A(A^e)` never gets its own storage: a grade `g`
//! element is a [`Tensor`] whose words have length `g + 1`, and the
//! product glues two words by multiplying the adjacent factors.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{format_rational, parse_rational, q, solve_sparse, Echelon, Matrix, SparseVec, Q};
use crate::tensor::{add_term, all_words, slot_ranges, word_index, word_len, Tensor, Word};

type Sparse = Vec<(usize, Q)>;

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AlgebraSpec {
    dim: usize,
    basis: Vec<String>,
    unit: Vec<String>,
    mult: Vec<Vec<Vec<String>>>,
}

/// Associative unital algebra with a chosen basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FinAlgebra {
    basis: Vec<String>,
    unit: Vec<Q>,
    mult: Vec<Vec<Vec<Q>>>,
    table: Vec<Vec<Sparse>>,
    preimages: Vec<Vec<(usize, usize, Q)>>,
}

impl Serialize for FinAlgebra {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.spec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FinAlgebra {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = AlgebraSpec::deserialize(d)?;
        FinAlgebra::from_spec(spec).map_err(serde::de::Error::custom)
    }
}

impl FinAlgebra {
    /// Builds an algebra without checking the axioms; see [`check_algebra`].
    pub fn new(basis: Vec<String>, unit: Vec<Q>, mult: Vec<Vec<Vec<Q>>>) -> Result<Self> {
        let a = basis.len();
        let shape_ok = unit.len() == a
            && mult.len() == a
            && mult.iter().all(|r| r.len() == a && r.iter().all(|c| c.len() == a));
        if !shape_ok {
            return Err(Error::Algebra(format!(
                "structure constants must be {a}×{a}×{a} and the unit must have {a} entries"
            )));
        }
        let table: Vec<Vec<Sparse>> = mult
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| {
                        c.iter()
                            .enumerate()
                            .filter(|(_, v)| !v.is_zero())
                            .map(|(k, v)| (k, v.clone()))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut preimages = vec![Vec::new(); a];
        for (i, row) in table.iter().enumerate() {
            for (j, prod) in row.iter().enumerate() {
                for (k, c) in prod {
                    preimages[*k].push((i, j, c.clone()));
                }
            }
        }
        Ok(FinAlgebra { basis, unit, mult, table, preimages })
    }

    fn from_spec(spec: AlgebraSpec) -> Result<Self> {
        if spec.basis.len() != spec.dim {
            return Err(Error::Algebra(format!(
                "dim is {} but {} basis names were given",
                spec.dim,
                spec.basis.len()
            )));
        }
        let unit = spec.unit.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        let mult = spec
            .mult
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| c.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FinAlgebra::new(spec.basis, unit, mult)
    }

    fn spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            dim: self.dim(),
            basis: self.basis.clone(),
            unit: self.unit.iter().map(format_rational).collect(),
            mult: self
                .mult
                .iter()
                .map(|r| r.iter().map(|c| c.iter().map(format_rational).collect()).collect())
                .collect(),
        }
    }

    /// Canonical JSON text, stable across round trips.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec()).expect("algebra spec serializes")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[String] {
        &self.basis
    }

    pub fn unit(&self) -> &[Q] {
        &self.unit
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<Q>>] {
        &self.mult
    }

    /// `e_i e_j` as a sparse vector.
    pub fn mul_basis(&self, i: usize, j: usize) -> &[(usize, Q)] {
        &self.table[i][j]
    }

    /// Pairs `(i, j, c)` with `c` the coefficient of `e_k` in `e_i e_j`.
    pub fn preimages(&self, k: usize) -> &[(usize, usize, Q)] {
        &self.preimages[k]
    }

    pub fn mul(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim()];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                for (k, c) in &self.table[i][j] {
                    out[*k] += xi * yj * c;
                }
            }
        }
        out
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    /// Replaces factor `pos` of `w` by `x · w[pos]`.
    pub fn act_left(&self, x: usize, w: &[usize], pos: usize) -> Vec<(Word, Q)> {
        self.table[x][w[pos]]
            .iter()
            .map(|(k, c)| {
                let mut v = w.to_vec();
                v[pos] = *k;
                (v, c.clone())
            })
            .collect()
    }

    /// Replaces factor `pos` of `w` by `w[pos] · y`.
    pub fn act_right(&self, w: &[usize], pos: usize, y: usize) -> Vec<(Word, Q)> {
        self.table[w[pos]][y]
            .iter()
            .map(|(k, c)| {
                let mut v = w.to_vec();
                v[pos] = *k;
                (v, c.clone())
            })
            .collect()
    }

    /// Multiplies factors `pos` and `pos + 1` of `w` into one.
    pub fn merge_at(&self, w: &[usize], pos: usize) -> Vec<(Word, Q)> {
        self.table[w[pos]][w[pos + 1]]
            .iter()
            .map(|(k, c)| {
                let mut v = Vec::with_capacity(w.len() - 1);
                v.extend_from_slice(&w[..pos]);
                v.push(*k);
                v.extend_from_slice(&w[pos + 2..]);
                (v, c.clone())
            })
            .collect()
    }

    /// Junction product of two non-empty words.
    pub fn junction(&self, u: &[usize], v: &[usize]) -> Vec<(Word, Q)> {
        let mut w = u.to_vec();
        w.extend_from_slice(v);
        self.merge_at(&w, u.len() - 1)
    }

    /// Junction product extended bilinearly; no truncation.
    pub fn junction_tensor(&self, x: &Tensor, y: &Tensor) -> Tensor {
        let mut out = Tensor::new();
        for (u, a) in x {
            for (v, b) in y {
                for (w, c) in self.junction(u, v) {
                    add_term(&mut out, w, a * b * c);
                }
            }
        }
        out
    }

    /// The unit as a grade zero tensor.
    pub fn unit_tensor(&self) -> Tensor {
        let mut t = Tensor::new();
        for (i, c) in self.unit.iter().enumerate() {
            add_term(&mut t, vec![i], c.clone());
        }
        t
    }
}

/// Verifies associativity and the two unit laws exactly.
pub fn check_algebra(alg: &FinAlgebra) -> Result<()> {
    let a = alg.dim();
    let name = |i: usize| alg.basis[i].clone();
    for i in 0..a {
        for j in 0..a {
            let ij = alg.mul_basis(i, j);
            for k in 0..a {
                let mut left = vec![Q::zero(); a];
                for (r, c) in ij {
                    for (s, d) in alg.mul_basis(*r, k) {
                        left[*s] += c * d;
                    }
                }
                let mut right = vec![Q::zero(); a];
                for (r, c) in alg.mul_basis(j, k) {
                    for (s, d) in alg.mul_basis(i, *r) {
                        right[*s] += c * d;
                    }
                }
                if left != right {
                    return Err(Error::Algebra(format!(
                        "associativity fails on the triple ({}, {}, {})",
                        name(i),
                        name(j),
                        name(k)
                    )));
                }
            }
        }
    }
    for i in 0..a {
        let e = alg.basis_vec(i);
        if alg.mul(&alg.unit, &e) != e || alg.mul(&e, &alg.unit) != e {
            return Err(Error::Algebra(format!("unit is not two-sided on {}", name(i))));
        }
    }
    Ok(())
}

/// Parses and checks an algebra spec.
pub fn load_algebra(json: &str) -> Result<FinAlgebra> {
    let alg: FinAlgebra = serde_json::from_str(json)?;
    check_algebra(&alg)?;
    Ok(alg)
}

fn zero_cube(a: usize) -> Vec<Vec<Vec<Q>>> {
    vec![vec![vec![Q::zero(); a]; a]; a]
}

fn unit_at(a: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); a];
    v[i] = Q::one();
    v
}

/// `Q[x]/(x^n)` with basis `1, x, …, x^{n-1}`.
pub fn truncated_polynomials(n: usize) -> FinAlgebra {
    let mut mult = zero_cube(n);
    for i in 0..n {
        for j in 0..n - i {
            mult[i][j][i + j] = Q::one();
        }
    }
    let basis = (0..n)
        .map(|i| match i {
            0 => "1".to_string(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        })
        .collect();
    FinAlgebra::new(basis, unit_at(n, 0), mult).expect("well-formed")
}

/// Dual numbers `Q[x]/(x²)`.
pub fn dual_numbers() -> FinAlgebra {
    truncated_polynomials(2)
}

/// `Q^n` with the componentwise product.
pub fn diagonal(n: usize) -> FinAlgebra {
    let mut mult = zero_cube(n);
    for (i, plane) in mult.iter_mut().enumerate() {
        plane[i][i] = Q::one();
    }
    let basis = (1..=n).map(|i| format!("p{i}")).collect();
    FinAlgebra::new(basis, vec![Q::one(); n], mult).expect("well-formed")
}

/// `M_n(Q)` on matrix units `E_{ij}`, row-major.
pub fn matrix_algebra(n: usize) -> FinAlgebra {
    let a = n * n;
    let mut mult = zero_cube(a);
    let mut unit = vec![Q::zero(); a];
    for i in 0..n {
        unit[i * n + i] = Q::one();
        for j in 0..n {
            for l in 0..n {
                mult[i * n + j][j * n + l][i * n + l] = Q::one();
            }
        }
    }
    let basis = (0..a).map(|k| format!("E{}{}", k / n + 1, k % n + 1)).collect();
    FinAlgebra::new(basis, unit, mult).expect("well-formed")
}

/// Upper triangular `n × n` matrices on the units `E_{ij}`, `i ≤ j`.
pub fn upper_triangular(n: usize) -> FinAlgebra {
    let units: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let index = |p: (usize, usize)| units.iter().position(|&u| u == p);
    let a = units.len();
    let mut mult = zero_cube(a);
    let mut unit = vec![Q::zero(); a];
    for (x, &(i, j)) in units.iter().enumerate() {
        if i == j {
            unit[x] = Q::one();
        }
        for (y, &(k, l)) in units.iter().enumerate() {
            if j == k {
                mult[x][y][index((i, l)).expect("upper")] = Q::one();
            }
        }
    }
    let basis = units.iter().map(|(i, j)| format!("E{}{}", i + 1, j + 1)).collect();
    FinAlgebra::new(basis, unit, mult).expect("well-formed")
}

/// Unital algebra map `f: source → target`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraMorphism {
    source: FinAlgebra,
    target: FinAlgebra,
    matrix: Matrix,
    images: Vec<Sparse>,
}

impl AlgebraMorphism {
    /// `matrix` has one column per source basis vector.
    pub fn new(source: FinAlgebra, target: FinAlgebra, matrix: Matrix) -> Result<Self> {
        if matrix.rows != target.dim() || matrix.cols != source.dim() {
            return Err(Error::Algebra(format!(
                "morphism matrix is {}×{}, expected {}×{}",
                matrix.rows,
                matrix.cols,
                target.dim(),
                source.dim()
            )));
        }
        let images = (0..matrix.cols)
            .map(|j| {
                (0..matrix.rows)
                    .filter(|&i| !matrix.get(i, j).is_zero())
                    .map(|i| (i, matrix.get(i, j).clone()))
                    .collect()
            })
            .collect();
        Ok(AlgebraMorphism { source, target, matrix, images })
    }

    pub fn identity(alg: &FinAlgebra) -> Self {
        AlgebraMorphism::new(alg.clone(), alg.clone(), Matrix::identity(alg.dim())).expect("square")
    }

    pub fn source(&self) -> &FinAlgebra {
        &self.source
    }

    pub fn target(&self) -> &FinAlgebra {
        &self.target
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `f(e_j)` as a sparse vector.
    pub fn image(&self, j: usize) -> &[(usize, Q)] {
        &self.images[j]
    }

    pub fn apply(&self, x: &[Q]) -> Vec<Q> {
        self.matrix.mul_vec(x)
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.matrix == Matrix::identity(self.source.dim())
    }

    /// Multiplicativity on basis pairs and `f(1) = 1`.
    pub fn check(&self) -> Result<()> {
        let a = self.source.dim();
        for i in 0..a {
            for j in 0..a {
                let lhs = self.apply(&self.source.mul(&self.source.basis_vec(i), &self.source.basis_vec(j)));
                let rhs = self
                    .target
                    .mul(&self.apply(&self.source.basis_vec(i)), &self.apply(&self.source.basis_vec(j)));
                if lhs != rhs {
                    return Err(Error::Algebra(format!(
                        "f is not multiplicative on ({}, {})",
                        self.source.basis[i], self.source.basis[j]
                    )));
                }
            }
        }
        if self.apply(self.source.unit()) != self.target.unit() {
            return Err(Error::Algebra("f does not preserve the unit".into()));
        }
        Ok(())
    }
}

/// `B = T_A(A^e)` cut off above `max_grade`.
#[derive(Clone, Debug)]
pub struct GradedTarget {
    pub base: FinAlgebra,
    pub max_grade: usize,
}

impl GradedTarget {
    pub fn new(base: FinAlgebra, max_grade: usize) -> Self {
        GradedTarget { base, max_grade }
    }

    fn check_grades(&self, x: &Tensor) -> Result<()> {
        for w in x.keys() {
            if w.is_empty() {
                return Err(Error::Algebra("empty word in a graded tensor".into()));
            }
            if w.len() - 1 > self.max_grade {
                return Err(Error::Truncation { requested: w.len() - 1, max: self.max_grade });
            }
            if w.iter().any(|&i| i >= self.base.dim()) {
                return Err(Error::Algebra(format!("basis index out of range in {w:?}")));
            }
        }
        Ok(())
    }

    /// `m_B(x, y)`: concatenate and multiply the adjacent factors.
    pub fn mb_apply(&self, x: &Tensor, y: &Tensor) -> Result<Tensor> {
        self.check_grades(x)?;
        self.check_grades(y)?;
        let max = |t: &Tensor| t.keys().map(|w| w.len() - 1).max().unwrap_or(0);
        if !x.is_empty() && !y.is_empty() && max(x) + max(y) > self.max_grade {
            return Err(Error::Truncation { requested: max(x) + max(y), max: self.max_grade });
        }
        Ok(self.base.junction_tensor(x, y))
    }

    pub fn unit(&self) -> Tensor {
        self.base.unit_tensor()
    }

    /// `f` followed by the grade zero inclusion.
    pub fn embed(&self, x: &[Q]) -> Tensor {
        let mut t = Tensor::new();
        for (i, c) in x.iter().enumerate() {
            add_term(&mut t, vec![i], c.clone());
        }
        t
    }
}

/// Linear map `A^{⊗d} → B^{⊗s}` stored block by block.
///
/// A block is keyed by the grade vector `(g_1, …, g_s)` of its output and
/// sends an input word to a tensor whose words have length `Σ (g_j + 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiLinearMap {
    pub in_arity: usize,
    pub out_slots: usize,
    pub blocks: BTreeMap<Vec<usize>, BTreeMap<Word, Tensor>>,
}

impl MultiLinearMap {
    pub fn zero(in_arity: usize, out_slots: usize) -> Self {
        MultiLinearMap { in_arity, out_slots, blocks: BTreeMap::new() }
    }

    /// `f: A → C` as a one slot map of grade zero.
    pub fn from_morphism(f: &AlgebraMorphism) -> Self {
        let mut m = MultiLinearMap::zero(1, 1);
        for j in 0..f.source().dim() {
            for (i, c) in f.image(j) {
                m.add_entry(&[0], vec![j], vec![*i], c.clone());
            }
        }
        m
    }

    /// The unit scalar map `k → k` with no slots.
    pub fn scalar(c: Q) -> Self {
        let mut m = MultiLinearMap::zero(0, 0);
        m.add_entry(&[], vec![], vec![], c);
        m
    }

    pub fn add_entry(&mut self, grades: &[usize], input: Word, output: Word, c: Q) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(grades.len(), self.out_slots);
        debug_assert_eq!(input.len(), self.in_arity);
        debug_assert_eq!(output.len(), word_len(grades));
        let block = self.blocks.entry(grades.to_vec()).or_default();
        let t = block.entry(input.clone()).or_default();
        add_term(t, output, c);
        if t.is_empty() {
            block.remove(&input);
            if block.is_empty() {
                self.blocks.remove(grades);
            }
        }
    }

    pub fn add_tensor(&mut self, grades: &[usize], input: &[usize], t: &Tensor, c: &Q) {
        for (w, v) in t {
            self.add_entry(grades, input.to_vec(), w.clone(), v * c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn grade_vectors(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks.keys()
    }

    pub fn block(&self, grades: &[usize]) -> Option<&BTreeMap<Word, Tensor>> {
        self.blocks.get(grades)
    }

    /// Restriction to one grade vector.
    pub fn restrict(&self, grades: &[usize]) -> MultiLinearMap {
        let mut m = MultiLinearMap::zero(self.in_arity, self.out_slots);
        if let Some(b) = self.blocks.get(grades) {
            m.blocks.insert(grades.to_vec(), b.clone());
        }
        m
    }

    /// Total output grades that occur.
    pub fn total_grades(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.blocks.keys().map(|g| g.iter().sum()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn add_scaled(&mut self, other: &MultiLinearMap, c: &Q) {
        assert_eq!((self.in_arity, self.out_slots), (other.in_arity, other.out_slots));
        for (g, block) in &other.blocks {
            for (u, t) in block {
                self.add_tensor(g, u, t, c);
            }
        }
    }

    pub fn add(&mut self, other: &MultiLinearMap) {
        self.add_scaled(other, &Q::one());
    }

    pub fn scaled(&self, c: &Q) -> MultiLinearMap {
        let mut m = MultiLinearMap::zero(self.in_arity, self.out_slots);
        m.add_scaled(self, c);
        m
    }

    pub fn sub(&self, other: &MultiLinearMap) -> MultiLinearMap {
        let mut m = self.clone();
        m.add_scaled(other, &q(-1));
        m
    }

    /// Value on a basis word, per grade vector.
    pub fn eval_word(&self, input: &[usize]) -> BTreeMap<Vec<usize>, Tensor> {
        self.blocks
            .iter()
            .filter_map(|(g, b)| b.get(input).map(|t| (g.clone(), t.clone())))
            .collect()
    }

    /// `self ⊗ other`: inputs, outputs and grades concatenate.
    pub fn tensor(&self, other: &MultiLinearMap) -> MultiLinearMap {
        let mut m = MultiLinearMap::zero(self.in_arity + other.in_arity, self.out_slots + other.out_slots);
        for (g, b) in &self.blocks {
            for (h, c) in &other.blocks {
                let mut gh = g.clone();
                gh.extend_from_slice(h);
                let block = m.blocks.entry(gh).or_default();
                for (u, s) in b {
                    for (v, t) in c {
                        let mut uv = u.clone();
                        uv.extend_from_slice(v);
                        block.insert(uv, crate::tensor::concat(s, t));
                    }
                }
            }
        }
        m
    }

    /// Inserts `f` as a new input at `in_pos` feeding a new grade zero
    /// output slot at `out_pos`.
    pub fn insert_morphism(&self, in_pos: usize, out_pos: usize, f: &AlgebraMorphism) -> MultiLinearMap {
        let mut m = MultiLinearMap::zero(self.in_arity + 1, self.out_slots + 1);
        for (g, block) in &self.blocks {
            let mut g2 = g.clone();
            g2.insert(out_pos, 0);
            let at = slot_ranges(g).get(out_pos).map(|r| r.start).unwrap_or_else(|| word_len(g));
            for (u, t) in block {
                for x in 0..f.source().dim() {
                    let mut u2 = u.clone();
                    u2.insert(in_pos, x);
                    for (w, c) in t {
                        for (y, d) in f.image(x) {
                            let mut w2 = w.clone();
                            w2.insert(at, *y);
                            m.add_entry(&g2, u2.clone(), w2, c * d);
                        }
                    }
                }
            }
        }
        m
    }

    /// `m_B` applied to output slots `i` and `i + 1` (0-based).
    pub fn merge_slots(&self, i: usize, alg: &FinAlgebra) -> MultiLinearMap {
        let mut m = MultiLinearMap::zero(self.in_arity, self.out_slots - 1);
        for (g, block) in &self.blocks {
            let pos = slot_ranges(g)[i].end - 1;
            let mut g2 = g.clone();
            let right = g2.remove(i + 1);
            g2[i] += right;
            for (u, t) in block {
                for (w, c) in t {
                    for (w2, d) in alg.merge_at(w, pos) {
                        m.add_entry(&g2, u.clone(), w2, c * d);
                    }
                }
            }
        }
        m
    }

    /// Applies `h` to every input word and re-expands linearly, i.e. the
    /// composite `self ∘ h` where `h` has exactly `in_arity` output factors
    /// in total (grades are forgotten on the `h` side).
    pub fn precompose_words(&self, h: &BTreeMap<Word, Tensor>, h_in: usize) -> MultiLinearMap {
        let mut m = MultiLinearMap::zero(h_in, self.out_slots);
        for (g, block) in &self.blocks {
            for (u, t) in h {
                for (mid, c) in t {
                    if let Some(s) = block.get(mid) {
                        m.add_tensor(g, u, s, c);
                    }
                }
            }
        }
        m
    }
}

/// The three terms of the slot `i` Leibniz expression, as maps with one
/// extra input: `g(..xy..)`, `f(x)·g(..y..)` and `g(..x..)·f(y)`.
///
/// Input slot `i` of `g` is viewed as feeding output slot `i`; `f(x)`
/// multiplies the first factor of that slot and `f(y)` the last.
pub fn leibniz_terms(g: &MultiLinearMap, i: usize, f: &AlgebraMorphism) -> Result<[MultiLinearMap; 3]> {
    if i >= g.in_arity || i >= g.out_slots {
        return Err(Error::Operator(format!(
            "slot {i} is out of range for a map with {} inputs and {} output slots",
            g.in_arity, g.out_slots
        )));
    }
    let a = f.source();
    let c = f.target();
    let mut prod = MultiLinearMap::zero(g.in_arity + 1, g.out_slots);
    let mut left = prod.clone();
    let mut right = prod.clone();
    for (grades, block) in &g.blocks {
        let r = slot_ranges(grades)[i].clone();
        for (u, t) in block {
            let z = u[i];
            for (x, y, coef) in a.preimages(z) {
                let mut u2 = u.clone();
                u2[i] = *x;
                u2.insert(i + 1, *y);
                prod.add_tensor(grades, &u2, t, coef);
            }
            for other in 0..a.dim() {
                let mut u2 = u.clone();
                u2.insert(i, other);
                let mut u3 = u.clone();
                u3.insert(i + 1, other);
                for (l, fl) in f.image(other) {
                    for (w, v) in t {
                        for (w2, d) in c.act_left(*l, w, r.start) {
                            left.add_entry(grades, u2.clone(), w2, fl * v * d);
                        }
                        for (w2, d) in c.act_right(w, r.end - 1, *l) {
                            right.add_entry(grades, u3.clone(), w2, fl * v * d);
                        }
                    }
                }
            }
        }
    }
    Ok([prod, left, right])
}

/// `ad_m(g)` in slot `i`: `g(..xy..) − f(x)·g(..y..) − g(..x..)·f(y)`.
pub fn ad_m(g: &MultiLinearMap, i: usize, f: &AlgebraMorphism) -> Result<MultiLinearMap> {
    let [prod, left, right] = leibniz_terms(g, i, f)?;
    Ok(prod.sub(&left).sub(&right))
}

/// Multiplies all output slots of a block together with `m_B`.
pub fn multiply_slots(alg: &FinAlgebra, t: &Tensor, grades: &[usize]) -> Tensor {
    let ranges = slot_ranges(grades);
    let mut cur = t.clone();
    for r in ranges.iter().rev().skip(1) {
        let pos = r.end - 1;
        let mut next = Tensor::new();
        for (w, c) in &cur {
            for (w2, d) in alg.merge_at(w, pos) {
                add_term(&mut next, w2, c * d);
            }
        }
        cur = next;
    }
    cur
}

/// Hochschild coboundary of a one slot cochain `A^{⊗p} → B`, with the
/// bimodule structure on `B` pulled back along `f`:
/// `dc(a_1..a_{p+1}) = f(a_1)c(a_2..) + Σ (−1)^i c(..a_i a_{i+1}..) + (−1)^{p+1} c(a_1..a_p)f(a_{p+1})`.
pub fn hochschild_d(c: &MultiLinearMap, f: &AlgebraMorphism) -> Result<MultiLinearMap> {
    if c.out_slots != 1 {
        return Err(Error::Operator("Hochschild cochains take values in a single copy of B".into()));
    }
    let a = f.source();
    let tgt = f.target();
    let p = c.in_arity;
    let mut out = MultiLinearMap::zero(p + 1, 1);
    for (grades, block) in &c.blocks {
        for (u, t) in block {
            for x in 0..a.dim() {
                let mut u2 = vec![x];
                u2.extend_from_slice(u);
                for (l, fl) in f.image(x) {
                    for (w, v) in t {
                        for (w2, d) in tgt.act_left(*l, w, 0) {
                            out.add_entry(grades, u2.clone(), w2, fl * v * d);
                        }
                    }
                }
                let mut u3 = u.clone();
                u3.push(x);
                let sign = if (p + 1) % 2 == 0 { q(1) } else { q(-1) };
                for (l, fl) in f.image(x) {
                    for (w, v) in t {
                        let last = w.len() - 1;
                        for (w2, d) in tgt.act_right(w, last, *l) {
                            out.add_entry(grades, u3.clone(), w2, &sign * fl * v * d);
                        }
                    }
                }
            }
            for i in 0..p {
                let sign = if (i + 1) % 2 == 0 { q(1) } else { q(-1) };
                for (x, y, coef) in a.preimages(u[i]) {
                    let mut u2 = u.clone();
                    u2[i] = *x;
                    u2.insert(i + 1, *y);
                    out.add_tensor(grades, &u2, t, &(&sign * coef));
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of the formal smoothness witness search.
#[derive(Clone, Debug, PartialEq)]
pub enum SmoothnessWitness {
    /// `e ∈ A ⊗ A` with `(a ⊗ 1)e = e(1 ⊗ a)` and `m(e) = 1`.
    Separable { idempotent: Vec<Q> },
    /// Bimodule splitting of `A ⊗ A ⊗ A → Ω¹`, as a matrix on `A ⊗ A`.
    Splitting { section: Matrix },
    NoWitness,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessReport {
    pub omega1_dim: usize,
    pub witness: SmoothnessWitness,
}

impl SmoothnessReport {
    pub fn is_projective(&self) -> bool {
        !matches!(self.witness, SmoothnessWitness::NoWitness)
    }

    pub fn describe(&self) -> &'static str {
        match self.witness {
            SmoothnessWitness::Separable { .. } => "projective (separability idempotent)",
            SmoothnessWitness::Splitting { .. } => "projective (bimodule splitting)",
            SmoothnessWitness::NoWitness => "no witness found",
        }
    }
}

/// Basis of `Ω¹ = ker(m: A ⊗ A → A)`, coordinates on `e_i ⊗ e_j` at `i·a + j`.
pub fn omega1_basis(alg: &FinAlgebra) -> Vec<Vec<Q>> {
    let a = alg.dim();
    let mut m = Matrix::zeros(a, a * a);
    for i in 0..a {
        for j in 0..a {
            for (k, c) in alg.mul_basis(i, j) {
                m.set(*k, i * a + j, c.clone());
            }
        }
    }
    crate::linalg::nullspace(&m)
}

fn separability_idempotent(alg: &FinAlgebra) -> Option<Vec<Q>> {
    let a = alg.dim();
    let n = a * a;
    let mut rows: BTreeMap<(usize, usize, usize), SparseVec> = BTreeMap::new();
    for i in 0..a {
        for j in 0..a {
            let var = i * a + j;
            for k in 0..a {
                for (r, c) in alg.mul_basis(k, i) {
                    *rows.entry((k, *r, j)).or_default().entry(var).or_insert_with(Q::zero) += c;
                }
                for (r, c) in alg.mul_basis(j, k) {
                    *rows.entry((k, i, *r)).or_default().entry(var).or_insert_with(Q::zero) -= c;
                }
            }
        }
    }
    let mut all: Vec<SparseVec> = rows.into_values().collect();
    for k in 0..a {
        let mut row = SparseVec::new();
        for i in 0..a {
            for j in 0..a {
                for (r, c) in alg.mul_basis(i, j) {
                    if *r == k {
                        *row.entry(i * a + j).or_insert_with(Q::zero) += c;
                    }
                }
            }
        }
        if !alg.unit()[k].is_zero() {
            row.insert(n, alg.unit()[k].clone());
        }
        all.push(row);
    }
    for r in all.iter_mut() {
        r.retain(|_, v| !v.is_zero());
    }
    solve_sparse(all, n)
}

/// Searches for an `A^e`-linear section `s: Ω¹ → A ⊗ A ⊗ A` of
/// `x ⊗ e_i ⊗ y ↦ x·d(e_i)·y`, where `d(a) = a ⊗ 1 − 1 ⊗ a`.
fn bimodule_splitting(alg: &FinAlgebra, omega: &[Vec<Q>]) -> Option<Matrix> {
    let a = alg.dim();
    let (n2, n3) = (a * a, a * a * a);
    // S is an n3 × n2 matrix; variable (r, c) sits at r * n2 + c.
    let var = |r: usize, c: usize| r * n2 + c;
    let nvars = n3 * n2;
    let left2 = |k: usize, w: &[Q]| -> Vec<Q> {
        let mut out = vec![Q::zero(); n2];
        for (idx, v) in w.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (r, c) in alg.mul_basis(k, idx / a) {
                out[r * a + idx % a] += v * c;
            }
        }
        out
    };
    let right2 = |w: &[Q], k: usize| -> Vec<Q> {
        let mut out = vec![Q::zero(); n2];
        for (idx, v) in w.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (r, c) in alg.mul_basis(idx % a, k) {
                out[(idx / a) * a + r] += v * c;
            }
        }
        out
    };
    let mut rows: Vec<SparseVec> = Vec::new();
    for w in omega {
        for k in 0..a {
            // S(e_k w) − e_k S(w) = 0 and S(w e_k) − S(w) e_k = 0, per output coordinate.
            let kw = left2(k, w);
            let wk = right2(w, k);
            let mut lrows: BTreeMap<usize, SparseVec> = BTreeMap::new();
            let mut rrows: BTreeMap<usize, SparseVec> = BTreeMap::new();
            for r in 0..n3 {
                for (cidx, v) in kw.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                    *lrows.entry(r).or_default().entry(var(r, cidx)).or_insert_with(Q::zero) += v;
                }
                for (cidx, v) in wk.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                    *rrows.entry(r).or_default().entry(var(r, cidx)).or_insert_with(Q::zero) += v;
                }
                let (x, mid, y) = (r / n2, (r / a) % a, r % a);
                for (cidx, v) in w.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                    for (x2, c) in alg.mul_basis(k, x) {
                        let target = x2 * n2 + mid * a + y;
                        *lrows.entry(target).or_default().entry(var(r, cidx)).or_insert_with(Q::zero) -= v * c;
                    }
                    for (y2, c) in alg.mul_basis(y, k) {
                        let target = x * n2 + mid * a + y2;
                        *rrows.entry(target).or_default().entry(var(r, cidx)).or_insert_with(Q::zero) -= v * c;
                    }
                }
            }
            rows.extend(lrows.into_values());
            rows.extend(rrows.into_values());
        }
        // π(S(w)) = w
        let mut prow: BTreeMap<usize, SparseVec> = BTreeMap::new();
        for r in 0..n3 {
            let (x, mid, y) = (r / n2, (r / a) % a, r % a);
            for (cidx, v) in w.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                // x·(e_mid ⊗ 1 − 1 ⊗ e_mid)·y = x e_mid ⊗ y − x ⊗ e_mid y
                for (p, c) in alg.mul_basis(x, mid) {
                    *prow.entry(p * a + y).or_default().entry(var(r, cidx)).or_insert_with(Q::zero) += v * c;
                }
                for (p, c) in alg.mul_basis(mid, y) {
                    *prow.entry(x * a + p).or_default().entry(var(r, cidx)).or_insert_with(Q::zero) -= v * c;
                }
            }
        }
        for (t, wt) in w.iter().enumerate() {
            let mut row = prow.remove(&t).unwrap_or_default();
            if !wt.is_zero() {
                row.insert(nvars, wt.clone());
            }
            rows.push(row);
        }
        rows.extend(prow.into_values());
    }
    for r in rows.iter_mut() {
        r.retain(|_, v| !v.is_zero());
    }
    let sol = solve_sparse(rows, nvars)?;
    let mut s = Matrix::zeros(n3, n2);
    for r in 0..n3 {
        for c in 0..n2 {
            s.set(r, c, sol[var(r, c)].clone());
        }
    }
    Some(s)
}

/// Tries a separability idempotent first, then a bimodule splitting.
pub fn is_formally_smooth_witness(alg: &FinAlgebra) -> SmoothnessReport {
    let omega = omega1_basis(alg);
    let omega1_dim = omega.len();
    let witness = if let Some(e) = separability_idempotent(alg) {
        SmoothnessWitness::Separable { idempotent: e }
    } else if let Some(s) = bimodule_splitting(alg, &omega) {
        SmoothnessWitness::Splitting { section: s }
    } else {
        SmoothnessWitness::NoWitness
    };
    SmoothnessReport { omega1_dim, witness }
}

/// Basis of `f`-relative derivations `A → C^{⊗(g+1)}` for the outer
/// bimodule structure, each as a one slot map of grade `g`.
pub fn derivations(f: &AlgebraMorphism, g: usize) -> Vec<MultiLinearMap> {
    let a = f.source().dim();
    let c = f.target().dim();
    let len = g + 1;
    let out_size = c.pow(len as u32);
    let nvars = a * out_size;
    let mut ech_rows: BTreeMap<(usize, usize, usize), SparseVec> = BTreeMap::new();
    // Variable (z, w) is the coefficient of word w in D(e_z).
    for z in 0..a {
        for w in all_words(len, c) {
            let v = z * out_size + word_index(&w, c);
            let single = MultiLinearMap {
                in_arity: 1,
                out_slots: 1,
                blocks: BTreeMap::from([(
                    vec![g],
                    BTreeMap::from([(vec![z], crate::tensor::basis_tensor(w.clone()))]),
                )]),
            };
            let res = ad_m(&single, 0, f).expect("slot 0");
            for block in res.blocks.values() {
                for (u, t) in block {
                    for (w2, coef) in t {
                        let key = (u[0], u[1], word_index(w2, c));
                        *ech_rows.entry(key).or_default().entry(v).or_insert_with(Q::zero) += coef;
                    }
                }
            }
        }
    }
    let mut ech = Echelon::new();
    for mut row in ech_rows.into_values() {
        row.retain(|_, v| !v.is_zero());
        ech.add_row(row);
    }
    ech.nullspace(nvars)
        .into_iter()
        .map(|vec| {
            let mut m = MultiLinearMap::zero(1, 1);
            for (idx, coef) in vec.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                let z = idx / out_size;
                let w = crate::tensor::index_word(idx % out_size, len, c);
                m.add_entry(&[g], vec![z], w, coef.clone());
            }
            m
        })
        .collect()
}
