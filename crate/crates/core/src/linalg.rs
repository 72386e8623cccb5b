//! Exact rational linear algebra.
//!
//! Everything here works over [`Q`], arbitrary precision rationals. The
//! central piece is [`Echelon`], an incremental sparse row reducer used for
//! every kernel, rank and span computation in the crate. Pivots are always
//! the leftmost surviving column, so reduced forms (and therefore nullspace
//! bases) do not depend on the order in which rows arrive.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Sparse vector: column index to non-zero value.
pub type SparseVec = BTreeMap<usize, Q>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse {
        pos: 0,
        msg: format!("not a rational: {s:?}"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise.
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serde adapter writing rationals as strings.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = xs.iter().map(format_rational).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| format_rational(self.get(r, c)))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect())
    }

    pub fn get(&self, r: usize, c: usize) -> &Q {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Q) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Q] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Q> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Arity(format!(
                "matrix product {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * out.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Q::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Kronecker product; the left factor indexes the most significant digit.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        let b = other.get(k, l);
                        if !b.is_zero() {
                            out.set(i * other.rows + k, j * other.cols + l, a * b);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    fn sparse_rows(&self) -> impl Iterator<Item = SparseVec> + '_ {
        (0..self.rows).map(move |r| {
            self.row(r)
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(c, x)| (c, x.clone()))
                .collect()
        })
    }
}

/// Incremental sparse row echelon form.
///
/// Each stored row has leading coefficient 1 at its pivot, and no stored row
/// has a non-zero entry at another row's pivot column to its left.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    rows: HashMap<usize, SparseVec>,
}

fn axpy(target: &mut SparseVec, factor: &Q, source: &SparseVec) {
    for (c, v) in source {
        let delta = factor * v;
        match target.get_mut(c) {
            Some(x) => {
                *x -= delta;
                if x.is_zero() {
                    target.remove(c);
                }
            }
            None => {
                target.insert(*c, -delta);
            }
        }
    }
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.rows.keys().copied().collect();
        p.sort_unstable();
        p
    }

    /// Reduces `row` against the stored pivots until its leading column is
    /// not a pivot; returns what is left.
    fn reduce_leading(&self, mut row: SparseVec) -> SparseVec {
        loop {
            let lead = match row.iter().find(|(c, _)| self.rows.contains_key(c)) {
                Some((c, v)) => (*c, v.clone()),
                None => return row,
            };
            // Only the leading entries need to be cleared for echelon form,
            // but any pivot entry may be cleared without harm.
            axpy(&mut row, &lead.1, &self.rows[&lead.0]);
        }
    }

    /// Adds a row; returns `true` if it increased the rank.
    pub fn add_row(&mut self, row: SparseVec) -> bool {
        let row: SparseVec = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        let mut row = self.reduce_leading(row);
        let Some((&lead, lv)) = row.iter().next() else {
            return false;
        };
        let inv = lv.recip();
        for v in row.values_mut() {
            *v *= &inv;
        }
        self.rows.insert(lead, row);
        true
    }

    /// Whether `row` lies in the span of the rows added so far.
    pub fn contains(&self, row: &SparseVec) -> bool {
        let row: SparseVec = row.iter().filter(|(_, v)| !v.is_zero()).map(|(c, v)| (*c, v.clone())).collect();
        self.reduce_leading(row).is_empty()
    }

    /// Fully reduced rows keyed by pivot column.
    pub fn reduced(&self) -> BTreeMap<usize, SparseVec> {
        let mut rows: BTreeMap<usize, SparseVec> =
            self.rows.iter().map(|(k, v)| (*k, v.clone())).collect();
        let pivots: Vec<usize> = rows.keys().rev().copied().collect();
        for &p in &pivots {
            let prow = rows[&p].clone();
            for (&other, orow) in rows.iter_mut() {
                if other == p {
                    continue;
                }
                if let Some(f) = orow.get(&p).cloned() {
                    axpy(orow, &f, &prow);
                }
            }
        }
        rows
    }

    /// Basis of the kernel of the row space on `ncols` columns: one vector per
    /// free column, in increasing column order.
    pub fn nullspace(&self, ncols: usize) -> Vec<Vec<Q>> {
        let reduced = self.reduced();
        (0..ncols)
            .filter(|c| !reduced.contains_key(c))
            .map(|free| {
                let mut v = vec![Q::zero(); ncols];
                v[free] = Q::one();
                for (&p, row) in &reduced {
                    if let Some(x) = row.get(&free) {
                        v[p] = -x.clone();
                    }
                }
                v
            })
            .collect()
    }
}

/// Kernel basis of `m` from its reduced row echelon form; free columns in
/// index order.
pub fn nullspace(m: &Matrix) -> Vec<Vec<Q>> {
    let mut e = Echelon::new();
    for row in m.sparse_rows() {
        e.add_row(row);
    }
    e.nullspace(m.cols)
}

pub fn rank(m: &Matrix) -> usize {
    let mut e = Echelon::new();
    for row in m.sparse_rows() {
        e.add_row(row);
    }
    e.rank()
}

/// Rank of a family of sparse vectors.
pub fn rank_of<'a>(vectors: impl IntoIterator<Item = &'a SparseVec>) -> usize {
    let mut e = Echelon::new();
    for v in vectors {
        e.add_row(v.clone());
    }
    e.rank()
}

/// One solution of `m x = b`, or `None` if the system is inconsistent.
pub fn solve(m: &Matrix, b: &[Q]) -> Option<Vec<Q>> {
    assert_eq!(m.rows, b.len());
    let rows = m.sparse_rows().zip(b).map(|(mut row, rhs)| {
        if !rhs.is_zero() {
            row.insert(m.cols, rhs.clone());
        }
        row
    });
    solve_sparse(rows, m.cols)
}

/// Solves a system given as sparse augmented rows, the right hand side
/// stored in column `ncols`. Free variables are set to zero.
pub fn solve_sparse(rows: impl IntoIterator<Item = SparseVec>, ncols: usize) -> Option<Vec<Q>> {
    let mut e = Echelon::new();
    for row in rows {
        e.add_row(row);
    }
    let reduced = e.reduced();
    if reduced.contains_key(&ncols) {
        return None;
    }
    let mut x = vec![Q::zero(); ncols];
    for (p, row) in reduced {
        if let Some(v) = row.get(&ncols) {
            x[p] = v.clone();
        }
    }
    Some(x)
}

pub fn to_sparse(v: &[Q]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Largest absolute numerator or denominator, handy for bounding test data.
pub fn height(x: &Q) -> BigInt {
    let n = x.numer().abs();
    let d = x.denom().abs();
    if n > d {
        n
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_has_full_kernel() {
        let m = Matrix::zeros(3, 3);
        assert_eq!(nullspace(&m).len(), 3);
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(nullspace(&Matrix::identity(4)).is_empty());
    }

    #[test]
    fn rank_one_kernel() {
        let m = Matrix::from_i64(&[&[1, 2], &[2, 4]]);
        assert_eq!(nullspace(&m), vec![vec![q(-2), q(1)]]);
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn solve_detects_inconsistency() {
        let m = Matrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert!(solve(&m, &[q(1), q(3)]).is_none());
        let x = solve(&m, &[q(1), q(2)]).unwrap();
        assert_eq!(m.mul_vec(&x), vec![q(1), q(2)]);
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["0", "-3", "7/2", "-1/3"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("4/2").unwrap(), q(2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn kron_of_identities() {
        assert_eq!(Matrix::identity(2).kron(&Matrix::identity(3)), Matrix::identity(6));
    }

    #[test]
    fn echelon_membership() {
        let mut e = Echelon::new();
        e.add_row(to_sparse(&[q(1), q(1), q(0)]));
        e.add_row(to_sparse(&[q(0), q(1), q(1)]));
        assert!(e.contains(&to_sparse(&[q(1), q(2), q(1)])));
        assert!(!e.contains(&to_sparse(&[q(0), q(0), q(1)])));
    }
}
