//! Truncated automorphism families `φ = {φ_w}` and the comparison map `r`.
//!
//! A family over an ordered alphabet `H` assigns to each word `w` with
//! `|w| ≤ N` a linear map `φ_w: A → A^{⊗(|w|+1)}`; `φ_ε` is the identity
//! and absent words are zero.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{ad_m, derivations, AlgebraMorphism, FinAlgebra, MultiLinearMap};
use crate::diffop::{
    bullet_v, check_operator, degeneracy, h_compose, solve_shape_grades, symbol, Coordinates, DiffOperator,
    MultiDiff,
};
use crate::error::{Error, Result};
use crate::linalg::{format_rational, parse_rational, q, solve_sparse, Echelon, SparseVec, Q};
use crate::ordinal::MonotoneMap;
use crate::partition::{refinements_of, OrderedPartition};
use crate::tensor::{add_term, all_words, basis_tensor, index_word, word_index, Tensor, Word};

/// Default truncation length.
pub const DEFAULT_N: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutFamily {
    alphabet: Vec<String>,
    n_max: usize,
    maps: BTreeMap<Word, MultiLinearMap>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct WordMap {
    word: Vec<String>,
    matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AutSpec {
    alphabet: Vec<String>,
    #[serde(rename = "N")]
    n: usize,
    dim: usize,
    maps: Vec<WordMap>,
}

impl AutFamily {
    /// The identity family.
    pub fn identity(alphabet: Vec<String>, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::AutFamily("truncation length must be at least 1".into()));
        }
        Ok(AutFamily { alphabet, n_max, maps: BTreeMap::new() })
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn truncation(&self) -> usize {
        self.n_max
    }

    /// Sets `φ_w`; `map` must be one slot of grade at most `|w|`. Families
    /// built letter by letter use grade `|w|`; pullbacks keep the grade of
    /// the source word.
    pub fn set(&mut self, word: Word, map: MultiLinearMap) -> Result<()> {
        if word.is_empty() || word.len() > self.n_max || word.iter().any(|&h| h >= self.alphabet.len()) {
            return Err(Error::AutFamily(format!("word {word:?} is outside the truncated alphabet")));
        }
        if map.in_arity != 1 || map.out_slots != 1 || map.grade_vectors().any(|g| g[0] > word.len()) {
            return Err(Error::AutFamily(format!("φ_{word:?} must map A into A^⊗k with k ≤ {}", word.len() + 1)));
        }
        if map.is_zero() {
            self.maps.remove(&word);
        } else {
            self.maps.insert(word, map);
        }
        Ok(())
    }

    pub fn get(&self, word: &[usize]) -> Option<&MultiLinearMap> {
        self.maps.get(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.maps.keys()
    }

    /// `φ_w(e_i)`; `φ_ε` is the identity.
    fn value(&self, w: &[usize], i: usize) -> Tensor {
        if w.is_empty() {
            return basis_tensor(vec![i]);
        }
        self.maps.get(w).map(|m| m.eval_word(&[i]).into_values().fold(Tensor::new(), |mut acc, t| {
            crate::tensor::add_into(&mut acc, &t);
            acc
        })).unwrap_or_default()
    }

    fn grade(&self, w: &[usize]) -> usize {
        self.maps.get(w).and_then(|m| m.grade_vectors().next()).map_or(w.len(), |g| g[0])
    }

    pub fn word_name(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return "ε".into();
        }
        w.iter().map(|&h| self.alphabet[h].as_str()).collect::<Vec<_>>().join("")
    }

    pub fn to_json(&self, dim: usize) -> String {
        let maps = self
            .maps
            .iter()
            .map(|(w, m)| {
                let g = self.grade(w);
                let rows = dim.pow(g as u32 + 1);
                let mut matrix = vec![vec!["0".to_string(); dim]; rows];
                if let Some(b) = m.block(&[g]) {
                    for (u, t) in b {
                        for (out, c) in t {
                            matrix[word_index(out, dim)][u[0]] = format_rational(c);
                        }
                    }
                }
                WordMap { word: w.iter().map(|&h| self.alphabet[h].clone()).collect(), matrix }
            })
            .collect();
        let spec = AutSpec { alphabet: self.alphabet.clone(), n: self.n_max, dim, maps };
        serde_json::to_string_pretty(&spec).expect("family serializes")
    }

    pub fn from_json(text: &str) -> Result<(Self, usize)> {
        let spec: AutSpec = serde_json::from_str(text)?;
        let mut fam = AutFamily::identity(spec.alphabet.clone(), spec.n)?;
        for wm in &spec.maps {
            let word: Word = wm
                .word
                .iter()
                .map(|l| {
                    spec.alphabet
                        .iter()
                        .position(|a| a == l)
                        .ok_or_else(|| Error::AutFamily(format!("unknown letter {l:?}")))
                })
                .collect::<Result<_>>()?;
            let len = (1..=word.len() + 1).find(|&l| spec.dim.pow(l as u32) == wm.matrix.len());
            let len = match len {
                Some(l) if spec.dim > 1 && wm.matrix.iter().all(|r| r.len() == spec.dim) => l,
                _ if spec.dim == 1 && wm.matrix.len() == 1 => word.len() + 1,
                _ => return Err(Error::AutFamily(format!("matrix for {:?} has the wrong size", wm.word))),
            };
            let mut m = MultiLinearMap::zero(1, 1);
            for (r, row) in wm.matrix.iter().enumerate() {
                for (c, s) in row.iter().enumerate() {
                    m.add_entry(&[len - 1], vec![c], index_word(r, len, spec.dim), parse_rational(s)?);
                }
            }
            fam.set(word, m)?;
        }
        Ok((fam, spec.dim))
    }
}

/// All words of length `1..=n` over `k` letters, shortest first.
fn words_up_to(k: usize, n: usize) -> Vec<Word> {
    (1..=n).flat_map(|len| all_words(len, k)).collect()
}

/// `φ_w(ab) = Σ_{w = w′w″} φ_{w′}(a) φ_{w″}(b)` for all `|w| ≤ N` and basis
/// pairs.
pub fn validate_aut(phi: &AutFamily, alg: &FinAlgebra) -> Result<()> {
    let a = alg.dim();
    for w in words_up_to(phi.alphabet.len(), phi.n_max) {
        for i in 0..a {
            for j in 0..a {
                let mut lhs = Tensor::new();
                for (k, c) in alg.mul_basis(i, j) {
                    crate::tensor::add_scaled(&mut lhs, &phi.value(&w, *k), c);
                }
                let mut rhs = Tensor::new();
                for split in 0..=w.len() {
                    let x = phi.value(&w[..split], i);
                    let y = phi.value(&w[split..], j);
                    crate::tensor::add_into(&mut rhs, &alg.junction_tensor(&x, &y));
                }
                if lhs != rhs {
                    return Err(Error::AutFamily(format!(
                        "relation fails at w = {}, ({}, {})",
                        phi.word_name(&w),
                        alg.basis()[i],
                        alg.basis()[j]
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Applies a one slot grade one map to the last factor of every word.
fn apply_rightmost(t: &Tensor, d: &MultiLinearMap) -> Tensor {
    let mut out = Tensor::new();
    let block = d.block(&[1]);
    for (w, c) in t {
        let last = *w.last().expect("non-empty word");
        if let Some(img) = block.and_then(|b| b.get(&vec![last])) {
            for (v, e) in img {
                let mut w2 = w[..w.len() - 1].to_vec();
                w2.extend_from_slice(v);
                add_term(&mut out, w2, c * e);
            }
        }
    }
    out
}

/// `φ_{h_{i_1}⋯h_{i_k}} = (1^{⊗(k−1)} ⊗ ∂_{i_k}) ∘ ⋯ ∘ ∂_{i_1}`.
pub fn from_derivations(
    alphabet: Vec<String>,
    derivs: &[MultiLinearMap],
    n_max: usize,
    alg: &FinAlgebra,
) -> Result<AutFamily> {
    if derivs.len() != alphabet.len() {
        return Err(Error::AutFamily("one double derivation per letter is required".into()));
    }
    let f = AlgebraMorphism::identity(alg);
    for (h, d) in derivs.iter().enumerate() {
        let shaped = d.in_arity == 1 && d.out_slots == 1 && d.grade_vectors().all(|g| g == &vec![1]);
        if !shaped || !ad_m(d, 0, &f)?.is_zero() {
            return Err(Error::AutFamily(format!("∂ for letter {} is not a double derivation", alphabet[h])));
        }
    }
    let mut fam = AutFamily::identity(alphabet, n_max)?;
    let a = alg.dim();
    let mut frontier: Vec<(Word, Vec<Tensor>)> = vec![(Vec::new(), (0..a).map(|i| basis_tensor(vec![i])).collect())];
    for _ in 0..n_max {
        let mut next = Vec::new();
        for (w, vals) in &frontier {
            for (h, d) in derivs.iter().enumerate() {
                let mut w2 = w.clone();
                w2.push(h);
                let vals2: Vec<Tensor> = vals.iter().map(|t| apply_rightmost(t, d)).collect();
                let mut m = MultiLinearMap::zero(1, 1);
                for (i, t) in vals2.iter().enumerate() {
                    m.add_tensor(&[w2.len()], &[i], t, &q(1));
                }
                fam.set(w2.clone(), m)?;
                if vals2.iter().any(|t| !t.is_empty()) {
                    next.push((w2, vals2));
                }
            }
        }
        frontier = next;
    }
    Ok(fam)
}

/// `σ*(h) = ∏_{g ∈ σ^{-1}(h)} g` in order, extended to words.
pub fn sigma_star(sigma: &MonotoneMap, w: &[usize]) -> Word {
    let mut out = Vec::new();
    for &h in w {
        out.extend(sigma.fiber(h + 1).map(|g| g - 1));
    }
    out
}

/// `s(φ)_{σ*(w)} = φ_w` and zero on words not of that form.
pub fn pullback(sigma: &MonotoneMap, phi: &AutFamily, g_letters: Vec<String>) -> Result<AutFamily> {
    if !sigma.is_epi() || sigma.cod() != phi.alphabet.len() || sigma.dom() != g_letters.len() {
        return Err(Error::AutFamily("pullback needs an epi from the new alphabet onto the old".into()));
    }
    let mut out = AutFamily::identity(g_letters, phi.n_max)?;
    for (w, m) in &phi.maps {
        let v = sigma_star(sigma, w);
        if v.len() > phi.n_max {
            continue;
        }
        out.set(v, m.clone())?;
    }
    Ok(out)
}

/// `r(φ_w)`: components `φ_λ = φ_{w_λ(1)} ⊗ ⋯ ⊗ φ_{w_λ(d)}`.
pub fn r_map(phi: &AutFamily, w: &[usize], f: &AlgebraMorphism) -> Result<DiffOperator> {
    if w.len() > phi.n_max {
        return Err(Error::Truncation { requested: w.len(), max: phi.n_max });
    }
    if w.is_empty() {
        return Ok(DiffOperator::unit(f));
    }
    let shape = OrderedPartition::trivial(w.len());
    let mut op = DiffOperator::zero(shape.clone(), OrderedPartition::trivial(1));
    for r in refinements_of(&shape)? {
        let mut start = 0;
        let mut acc: Option<MultiLinearMap> = Some(MultiLinearMap::scalar(q(1)));
        for &part in r.fine.parts() {
            let piece = &w[start..start + part];
            start += part;
            acc = match (acc, phi.get(piece)) {
                (Some(m), Some(p)) => Some(m.tensor(p)),
                _ => None,
            };
        }
        if let Some(m) = acc {
            op.set_component(r.fine.clone(), m)?;
        }
    }
    Ok(op)
}

/// `r(φ_w) •_v m_A` against `Σ_k (r(φ_{w[..k]}) ∘_h r(φ_{w[k..]}))[(2)]`.
pub fn m_relation_holds(phi: &AutFamily, w: &[usize], f: &AlgebraMorphism) -> Result<bool> {
    let lhs = bullet_v(&r_map(phi, w, f)?, &DiffOperator::multiplication(f), f)?;
    let mut rhs = MultiDiff::new();
    for k in 0..=w.len() {
        let term = h_compose(&r_map(phi, &w[..k], f)?, &r_map(phi, &w[k..], f)?);
        rhs.add(&term.with_type(OrderedPartition::new(vec![2]))?);
    }
    Ok(lhs == rhs)
}

/// Both paths around the square `r ∘ s(σ) = s(σ) ∘ r` for the word listing
/// the whole alphabet once.
pub fn pullback_square_commutes(sigma: &MonotoneMap, phi: &AutFamily, f: &AlgebraMorphism) -> Result<bool> {
    let g_letters = (1..=sigma.dom()).map(|i| format!("g{i}")).collect();
    let pulled = pullback(sigma, phi, g_letters)?;
    let full_g: Word = (0..sigma.dom()).collect();
    let full_h: Word = (0..sigma.cod()).collect();
    let left = r_map(&pulled, &full_g, f)?;
    let right = degeneracy(sigma, &r_map(phi, &full_h, f)?)?;
    Ok(left == right)
}

/// One line of the surjectivity probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeEntry {
    pub order: usize,
    pub grades: Vec<usize>,
    pub target_dim: usize,
    pub span_rank: usize,
    pub spanned: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub der0: usize,
    pub der1: usize,
    pub failed_lifts: Vec<usize>,
    pub entries: Vec<ProbeEntry>,
    pub operators_valid: bool,
    pub kernel_square: bool,
}

impl ProbeReport {
    pub fn all_spanned(&self) -> bool {
        self.failed_lifts.is_empty() && self.entries.iter().all(|e| e.spanned) && self.operators_valid && self.kernel_square
    }
}

/// Collapses a word of `len` factors with output type `parts`.
fn collapse(f: &AlgebraMorphism, parts: Vec<usize>) -> Result<DiffOperator> {
    let k = parts.iter().sum();
    DiffOperator::units(f, k).with_type(OrderedPartition::new(parts))
}

/// Constructive check that symbols of order `≤ max_order ≤ 2` with at most
/// two outputs per slot are hit by `r`.
pub fn surjectivity_probe(alg: &FinAlgebra, max_order: usize) -> Result<ProbeReport> {
    if max_order > 2 {
        return Err(Error::AutFamily("the probe covers orders 1 and 2".into()));
    }
    let f = AlgebraMorphism::identity(alg);
    let d0 = derivations(&f, 0);
    let d1 = derivations(&f, 1);
    // lift each derivation d to ∂ with m∘∂ = d
    let a = alg.dim();
    let m_of = |d: &MultiLinearMap| -> MultiLinearMap {
        let mut out = MultiLinearMap::zero(1, 1);
        for b in d.blocks.values() {
            for (u, t) in b {
                for (w, c) in t {
                    for (w2, e) in alg.merge_at(w, 0) {
                        out.add_entry(&[0], u.clone(), w2, c * e);
                    }
                }
            }
        }
        out
    };
    let images: Vec<MultiLinearMap> = d1.iter().map(m_of).collect();
    let coord = |m: &MultiLinearMap, i: usize, k: usize| -> Q {
        m.block(&[0])
            .and_then(|b| b.get(&vec![i]))
            .and_then(|t| t.get(&vec![k]))
            .cloned()
            .unwrap_or_else(Q::zero)
    };
    let mut lifts = Vec::new();
    let mut failed_lifts = Vec::new();
    for (idx, d) in d0.iter().enumerate() {
        let mut rows = Vec::new();
        for i in 0..a {
            for k in 0..a {
                let mut row = SparseVec::new();
                for (j, img) in images.iter().enumerate() {
                    let c = coord(img, i, k);
                    if !c.is_zero() {
                        row.insert(j, c);
                    }
                }
                let rhs = coord(d, i, k);
                if !rhs.is_zero() {
                    row.insert(images.len(), rhs);
                }
                rows.push(row);
            }
        }
        match solve_sparse(rows, images.len()) {
            Some(sol) => {
                let mut lift = MultiLinearMap::zero(1, 1);
                for (j, c) in sol.iter().enumerate() {
                    lift.add_scaled(&d1[j], c);
                }
                lifts.push(lift);
            }
            None => failed_lifts.push(idx),
        }
    }
    let pool = |g: usize| if g == 0 { &lifts } else { &d1 };
    let mut entries = Vec::new();
    let mut operators_valid = true;
    let letters = |k: usize| (1..=k).map(|i| format!("h{i}")).collect::<Vec<_>>();
    for order in 1..=max_order {
        let grade_vectors: Vec<Vec<usize>> = if order == 1 {
            vec![vec![0], vec![1]]
        } else {
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        };
        for grades in grade_vectors {
            let ones = OrderedPartition::finest(order);
            let target = solve_shape_grades(&f, &ones, &OrderedPartition::finest(order), &grades)?;
            let mut coords = Coordinates::new();
            let mut span = Echelon::new();
            // the collapse glues the two factors of every grade zero slot
            let mut parts = Vec::new();
            for &g in &grades {
                if g == 0 {
                    parts.push(2);
                } else {
                    parts.extend([1, 1]);
                }
            }
            let outer = collapse(&f, glue_junctions(&parts))?;
            let choices: Vec<Vec<&MultiLinearMap>> = cartesian(&grades.iter().map(|&g| pool(g).iter().collect()).collect::<Vec<Vec<_>>>());
            for ds in choices {
                let derivs: Vec<MultiLinearMap> = ds.into_iter().cloned().collect();
                let phi = from_derivations(letters(order), &derivs, order, alg)?;
                let word: Word = (0..order).collect();
                let inner = r_map(&phi, &word, &f)?;
                operators_valid &= check_operator(&inner, &f).is_ok() && inner.is_totally_positive();
                let comp = bullet_v(&outer, &inner, &f)?;
                for op in comp.terms() {
                    let s = symbol(op)?;
                    let s = s.clone().with_type(OrderedPartition::finest(order)).unwrap_or(s);
                    span.add_row(coords.vector(&s));
                }
            }
            let spanned = target.iter().all(|b| span.contains(&coords.vector(b)));
            entries.push(ProbeEntry {
                order,
                grades,
                target_dim: target.len(),
                span_rank: span.rank(),
                spanned: spanned && span.rank() == target.len(),
            });
        }
    }
    let mut kernel_square = true;
    if max_order >= 2 {
        let sigma = MonotoneMap::new(1, vec![1, 1])?;
        for d in &d1 {
            let phi = from_derivations(letters(1), std::slice::from_ref(d), 2, alg)?;
            kernel_square &= pullback_square_commutes(&sigma, &phi, &f)?;
        }
    }
    Ok(ProbeReport { der0: d0.len(), der1: d1.len(), failed_lifts, entries, operators_valid, kernel_square })
}

/// Output type on the factors of `r(φ_w)`: consecutive slot outputs share a
/// factor at their junction, so `parts` over slot factors become parts
/// over the `|w| + 1` factors of `φ_w`.
fn glue_junctions(parts: &[usize]) -> Vec<usize> {
    // `parts` lists, slot by slot, how that slot's two factors are grouped:
    // [2] multiplies them, [1, 1] keeps them. Adjacent slots meet in one
    // shared factor of φ_w.
    let mut groups: Vec<usize> = Vec::new();
    let mut i = 0;
    let mut first = true;
    while i < parts.len() {
        let p = parts[i];
        if p == 2 {
            if first {
                groups.push(2);
            } else {
                *groups.last_mut().expect("previous group") += 1;
            }
            i += 1;
        } else {
            if first {
                groups.push(1);
            }
            groups.push(1);
            i += 2;
        }
        first = false;
    }
    groups
}

fn cartesian<T: Clone>(lists: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut acc: Vec<Vec<T>> = vec![Vec::new()];
    for l in lists {
        let mut next = Vec::with_capacity(acc.len() * l.len());
        for prefix in &acc {
            for x in l {
                let mut v = prefix.clone();
                v.push(x.clone());
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{diagonal, dual_numbers, matrix_algebra};

    fn x_tensor_x() -> MultiLinearMap {
        // ∂(1) = 0, ∂(x) = x ⊗ x
        let mut d = MultiLinearMap::zero(1, 1);
        d.add_entry(&[1], vec![1], vec![1, 1], q(1));
        d
    }

    #[test]
    fn dual_number_family() {
        let alg = dual_numbers();
        let phi = from_derivations(vec!["h".into()], &[x_tensor_x()], 3, &alg).unwrap();
        validate_aut(&phi, &alg).unwrap();
        let hh = phi.get(&[0, 0]).unwrap();
        assert_eq!(hh.eval_word(&[1]).remove(&vec![2]).unwrap(), basis_tensor(vec![1, 1, 1]));
    }

    #[test]
    fn non_derivation_fails_at_length_one() {
        let alg = dual_numbers();
        let mut phi = AutFamily::identity(vec!["h".into()], 2).unwrap();
        let mut m = MultiLinearMap::zero(1, 1);
        m.add_entry(&[1], vec![0], vec![0, 0], q(1));
        phi.set(vec![0], m).unwrap();
        let err = validate_aut(&phi, &alg).unwrap_err().to_string();
        assert!(err.contains("w = h"), "{err}");
    }

    #[test]
    fn pullback_of_one_letter() {
        let alg = dual_numbers();
        let phi = from_derivations(vec!["h".into()], &[x_tensor_x()], 2, &alg).unwrap();
        let sigma = MonotoneMap::new(1, vec![1, 1]).unwrap();
        let s = pullback(&sigma, &phi, vec!["g1".into(), "g2".into()]).unwrap();
        assert!(s.get(&[0]).is_none() && s.get(&[1]).is_none());
        let expect = phi.get(&[0]).unwrap();
        assert_eq!(s.get(&[0, 1]).unwrap(), expect);
        validate_aut(&s, &alg).unwrap();
    }

    #[test]
    fn r_images_are_operators() {
        let alg = dual_numbers();
        let f = AlgebraMorphism::identity(&alg);
        let phi = from_derivations(vec!["h1".into(), "h2".into()], &[x_tensor_x(), x_tensor_x()], 3, &alg).unwrap();
        for w in words_up_to(2, 3) {
            let r = r_map(&phi, &w, &f).unwrap();
            check_operator(&r, &f).unwrap();
            assert!(r.is_totally_positive());
            assert!(m_relation_holds(&phi, &w, &f).unwrap());
        }
        assert_eq!(r_map(&phi, &[], &f).unwrap(), DiffOperator::unit(&f));
    }

    #[test]
    fn junction_gluing() {
        assert_eq!(glue_junctions(&[2, 2]), vec![3]);
        assert_eq!(glue_junctions(&[1, 1, 1, 1]), vec![1, 1, 1]);
        assert_eq!(glue_junctions(&[2, 1, 1]), vec![2, 1]);
        assert_eq!(glue_junctions(&[1, 1, 2]), vec![1, 2]);
    }

    #[test]
    fn probe_on_diagonal_is_trivial() {
        let r = surjectivity_probe(&diagonal(2), 2).unwrap();
        assert!(r.all_spanned(), "{r:?}");
        // only one output symbols vanish; k × k has outer double derivations
        assert!(r.entries.iter().filter(|e| e.grades.iter().all(|&g| g == 0)).all(|e| e.target_dim == 0));
        assert_eq!(r.der1, 2);
        let dims: Vec<usize> = r.entries.iter().map(|e| e.target_dim).collect();
        assert_eq!(dims, vec![0, 2, 0, 0, 0, 4]);
    }

    #[test]
    fn probe_on_matrices_order_one() {
        let r = surjectivity_probe(&matrix_algebra(2), 1).unwrap();
        assert_eq!((r.der0, r.der1), (3, 12));
        assert!(r.all_spanned(), "{r:?}");
    }

    #[test]
    fn probe_on_matrices_order_two() {
        let r = surjectivity_probe(&matrix_algebra(2), 2).unwrap();
        let dims: Vec<(Vec<usize>, usize, usize)> =
            r.entries.iter().filter(|e| e.order == 2).map(|e| (e.grades.clone(), e.target_dim, e.span_rank)).collect();
        assert_eq!(
            dims,
            vec![(vec![0, 0], 9, 9), (vec![0, 1], 36, 36), (vec![1, 0], 36, 36), (vec![1, 1], 144, 144)]
        );
        assert!(r.all_spanned(), "{r:?}");
    }

    #[test]
    fn square_commutes_for_small_epis() {
        let alg = dual_numbers();
        let f = AlgebraMorphism::identity(&alg);
        for h in 1..=3 {
            let letters = (1..=h).map(|i| format!("h{i}")).collect();
            let phi = from_derivations(letters, &vec![x_tensor_x(); h], 3, &alg).unwrap();
            for g in h..=3 {
                for sigma in crate::ordinal::all_epis(g, h) {
                    assert!(pullback_square_commutes(&sigma, &phi, &f).unwrap(), "{sigma:?}");
                }
            }
        }
    }

    #[test]
    fn identity_pullback_and_json() {
        let alg = matrix_algebra(2);
        let d1 = derivations(&AlgebraMorphism::identity(&alg), 1);
        let phi = from_derivations(vec!["a".into(), "b".into()], &d1[..2], 3, &alg).unwrap();
        let id = MonotoneMap::new(2, vec![1, 2]).unwrap();
        assert_eq!(pullback(&id, &phi, vec!["a".into(), "b".into()]).unwrap(), phi);
        let (back, dim) = AutFamily::from_json(&phi.to_json(4)).unwrap();
        assert_eq!((back, dim), (phi, 4));
    }

    #[test]
    fn symbol_of_r_is_tensor_of_derivations() {
        let alg = matrix_algebra(2);
        let f = AlgebraMorphism::identity(&alg);
        let d1 = derivations(&f, 1);
        let phi = from_derivations(vec!["a".into(), "b".into()], &[d1[3].clone(), d1[7].clone()], 2, &alg).unwrap();
        let r = r_map(&phi, &[0, 1], &f).unwrap();
        let s = symbol(&r).unwrap();
        assert_eq!(s.component(&OrderedPartition::finest(2)), Some(&d1[3].tensor(&d1[7])));
        assert_eq!(r.component(&OrderedPartition::trivial(2)), phi.get(&[0, 1]));
        assert!(matches!(r_map(&phi, &[0, 1, 0], &f), Err(Error::Truncation { .. })));
    }
}
