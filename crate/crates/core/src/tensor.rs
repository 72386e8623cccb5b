//! Sparse tensors over a fixed basis.
//!
//! A [`Word`] lists basis indices of tensor factors, first factor first. A
//! [`Tensor`] is a finite linear combination of words; words of length
//! `g + 1` are the grade `g` part of `T_A(A^e)`.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::linalg::Q;

pub type Word = Vec<usize>;
pub type Tensor = BTreeMap<Word, Q>;

/// Adds `c · w` to `t`, dropping cancelled terms.
pub fn add_term(t: &mut Tensor, w: Word, c: Q) {
    if c.is_zero() {
        return;
    }
    match t.entry(w) {
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

pub fn add_scaled(t: &mut Tensor, other: &Tensor, c: &Q) {
    for (w, v) in other {
        add_term(t, w.clone(), v * c);
    }
}

pub fn add_into(t: &mut Tensor, other: &Tensor) {
    for (w, v) in other {
        add_term(t, w.clone(), v.clone());
    }
}

pub fn scale(t: &Tensor, c: &Q) -> Tensor {
    if c.is_zero() {
        return Tensor::new();
    }
    t.iter().map(|(w, v)| (w.clone(), v * c)).collect()
}

/// `a ⊗ b` by word concatenation.
pub fn concat(a: &Tensor, b: &Tensor) -> Tensor {
    let mut out = Tensor::new();
    for (u, x) in a {
        for (v, y) in b {
            let mut w = u.clone();
            w.extend_from_slice(v);
            add_term(&mut out, w, x * y);
        }
    }
    out
}

pub fn basis_tensor(w: Word) -> Tensor {
    let mut t = Tensor::new();
    t.insert(w, Q::from_integer(1.into()));
    t
}

/// Row-major index of a word in base `base`.
pub fn word_index(w: &[usize], base: usize) -> usize {
    w.iter().fold(0, |acc, &x| acc * base + x)
}

pub fn index_word(mut idx: usize, len: usize, base: usize) -> Word {
    let mut w = vec![0; len];
    for slot in w.iter_mut().rev() {
        *slot = idx % base;
        idx /= base;
    }
    w
}

/// All words of length `len` in lexicographic order.
pub fn all_words(len: usize, base: usize) -> impl Iterator<Item = Word> {
    let total = base.pow(len as u32);
    (0..total).map(move |i| index_word(i, len, base))
}

/// Slot boundaries of an output word with the given slot grades.
pub fn slot_ranges(grades: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    grades
        .iter()
        .map(|&g| {
            let r = start..start + g + 1;
            start = r.end;
            r
        })
        .collect()
}

pub fn word_len(grades: &[usize]) -> usize {
    grades.iter().map(|g| g + 1).sum()
}
