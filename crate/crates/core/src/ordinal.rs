//! Finite ordinals and monotone maps: the simplex category.
//!
//! Elements of `[n]` are `1..=n`. An epimorphism `[m] ↠ [d]` is determined
//! by its cut set, the positions `i` in `1..m` where `f(i) < f(i + 1)`;
//! merges and duals are computed on cut sets.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An order-preserving map `[dom] → [cod]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct MonotoneMap {
    dom: usize,
    cod: usize,
    values: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    dom: usize,
    cod: usize,
    values: Vec<usize>,
}

impl TryFrom<RawMap> for MonotoneMap {
    type Error = Error;
    fn try_from(r: RawMap) -> Result<Self> {
        if r.values.len() != r.dom {
            return Err(Error::InvalidMap(format!(
                "dom is {} but {} values were given",
                r.dom,
                r.values.len()
            )));
        }
        MonotoneMap::new(r.cod, r.values)
    }
}

impl From<MonotoneMap> for RawMap {
    fn from(m: MonotoneMap) -> Self {
        RawMap {
            dom: m.dom,
            cod: m.cod,
            values: m.values,
        }
    }
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]→[{}]{:?}", self.dom, self.cod, self.values)
    }
}

/// Result of [`MonotoneMap::classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Kind {
    pub is_epi: bool,
    pub is_mono: bool,
}

impl MonotoneMap {
    pub fn new(cod: usize, values: Vec<usize>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v == 0 || v > cod) {
            return Err(Error::InvalidMap(format!("value {v} outside [1, {cod}]")));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidMap(format!("{values:?} is not weakly increasing")));
        }
        Ok(MonotoneMap {
            dom: values.len(),
            cod,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        MonotoneMap {
            dom: n,
            cod: n,
            values: (1..=n).collect(),
        }
    }

    /// The unique map `[n] → [1]`, or `[0] → [cod]` when `n = 0`.
    pub fn constant(n: usize, cod: usize, value: usize) -> Result<Self> {
        MonotoneMap::new(cod, vec![value; n])
    }

    pub fn dom(&self) -> usize {
        self.dom
    }

    pub fn cod(&self) -> usize {
        self.cod
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Value at the 1-based point `i`.
    pub fn at(&self, i: usize) -> usize {
        self.values[i - 1]
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &MonotoneMap) -> Result<MonotoneMap> {
        compose(self, f)
    }

    pub fn classify(&self) -> Kind {
        let mut hit = vec![false; self.cod];
        for &v in &self.values {
            hit[v - 1] = true;
        }
        Kind {
            is_epi: hit.into_iter().all(|h| h),
            is_mono: self.values.windows(2).all(|w| w[0] < w[1]),
        }
    }

    pub fn is_epi(&self) -> bool {
        self.classify().is_epi
    }

    pub fn is_mono(&self) -> bool {
        self.classify().is_mono
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod && self.is_mono()
    }

    /// Sizes of the fibers over `1..=cod`.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cod];
        for &v in &self.values {
            sizes[v - 1] += 1;
        }
        sizes
    }

    /// The 1-based points mapping to `t`.
    pub fn fiber(&self, t: usize) -> std::ops::Range<usize> {
        let start = self.values.partition_point(|&v| v < t);
        let end = self.values.partition_point(|&v| v <= t);
        start + 1..end + 1
    }

    /// Positions `i ∈ [dom − 1]` with `f(i) < f(i + 1)`.
    pub fn cuts(&self) -> BTreeSet<usize> {
        (1..self.dom)
            .filter(|&i| self.values[i - 1] < self.values[i])
            .collect()
    }

    fn require_epi(&self) -> Result<()> {
        if self.is_epi() {
            Ok(())
        } else {
            Err(Error::NotEpi(format!("{self:?}")))
        }
    }

    /// The epi `[m] ↠ [|cuts| + 1]` with the given cut set (`[0] ↠ [0]` when
    /// `m = 0`).
    pub fn epi_from_cuts(m: usize, cuts: &BTreeSet<usize>) -> Result<MonotoneMap> {
        if let Some(&c) = cuts.iter().find(|&&c| c == 0 || c >= m) {
            return Err(Error::InvalidMap(format!("cut {c} outside [1, {}]", m.saturating_sub(1))));
        }
        let mut values = Vec::with_capacity(m);
        let mut part = 1;
        for i in 1..=m {
            values.push(part);
            if cuts.contains(&i) {
                part += 1;
            }
        }
        let cod = if m == 0 { 0 } else { part };
        MonotoneMap::new(cod, values)
    }
}

/// `g ∘ f`.
pub fn compose(g: &MonotoneMap, f: &MonotoneMap) -> Result<MonotoneMap> {
    if f.cod != g.dom {
        return Err(Error::Composition {
            left: f.cod,
            right: g.dom,
        });
    }
    Ok(MonotoneMap {
        dom: f.dom,
        cod: g.cod,
        values: f.values.iter().map(|&v| g.values[v - 1]).collect(),
    })
}

pub fn classify(f: &MonotoneMap) -> Kind {
    f.classify()
}

/// The unique factorization `f = m ∘ e` with `e` epi and `m` mono.
pub fn epi_mono_factor(f: &MonotoneMap) -> (MonotoneMap, MonotoneMap) {
    let mut image: Vec<usize> = f.values.clone();
    image.dedup();
    let e_values = f
        .values
        .iter()
        .map(|v| image.binary_search(v).expect("value is in the image") + 1)
        .collect();
    let e = MonotoneMap {
        dom: f.dom,
        cod: image.len(),
        values: e_values,
    };
    let m = MonotoneMap {
        dom: image.len(),
        cod: f.cod,
        values: image,
    };
    (e, m)
}

/// The ordered coproduct `[m] ⊔ [n] = [m + n]` with its two injections.
pub fn ordered_coproduct(m: usize, n: usize) -> (MonotoneMap, MonotoneMap) {
    let inj1 = MonotoneMap {
        dom: m,
        cod: m + n,
        values: (1..=m).collect(),
    };
    let inj2 = MonotoneMap {
        dom: n,
        cod: m + n,
        values: (m + 1..=m + n).collect(),
    };
    (inj1, inj2)
}

/// The relative ordered coproduct over `[q]`: each fiber of `f` followed by
/// the matching fiber of `g`. Returns `(inj1, inj2, proj)`.
pub fn relative_ordered_coproduct(
    f: &MonotoneMap,
    g: &MonotoneMap,
) -> Result<(MonotoneMap, MonotoneMap, MonotoneMap)> {
    if f.cod != g.cod {
        return Err(Error::Composition {
            left: f.cod,
            right: g.cod,
        });
    }
    let total = f.dom + g.dom;
    let mut inj1 = Vec::with_capacity(f.dom);
    let mut inj2 = Vec::with_capacity(g.dom);
    let mut proj = Vec::with_capacity(total);
    for t in 1..=f.cod {
        for _ in f.fiber(t) {
            proj.push(t);
            inj1.push(proj.len());
        }
        for _ in g.fiber(t) {
            proj.push(t);
            inj2.push(proj.len());
        }
    }
    Ok((
        MonotoneMap::new(total, inj1)?,
        MonotoneMap::new(total, inj2)?,
        MonotoneMap::new(f.cod, proj)?,
    ))
}

/// The merge of two epis out of `[m]`: the finest common coarsening, with
/// the two maps into it. Returns `(joint, push1, push2)`.
pub fn merge(
    lambda: &MonotoneMap,
    mu: &MonotoneMap,
) -> Result<(MonotoneMap, MonotoneMap, MonotoneMap)> {
    lambda.require_epi()?;
    mu.require_epi()?;
    if lambda.dom != mu.dom {
        return Err(Error::Composition {
            left: lambda.dom,
            right: mu.dom,
        });
    }
    let cuts: BTreeSet<usize> = lambda.cuts().intersection(&mu.cuts()).copied().collect();
    let joint = MonotoneMap::epi_from_cuts(lambda.dom, &cuts)?;
    Ok((
        joint.clone(),
        pushforward(lambda, &joint)?,
        pushforward(mu, &joint)?,
    ))
}

/// The map `h` with `h ∘ e = target`, for an epi `e` finer than `target`.
pub fn pushforward(e: &MonotoneMap, target: &MonotoneMap) -> Result<MonotoneMap> {
    e.require_epi()?;
    let mut values = vec![0; e.cod];
    for (i, &v) in e.values.iter().enumerate() {
        let t = target.values[i];
        if values[v - 1] != 0 && values[v - 1] != t {
            return Err(Error::NotRefinement(format!("{e:?} does not refine {target:?}")));
        }
        values[v - 1] = t;
    }
    MonotoneMap::new(target.cod, values)
}

/// The duality `Λ_q(p − 1) ≅ Λ_p(q − 1)`: for `μ: [p − 1] → [q]`,
/// `μ*(i) = j` iff `μ(j − 1) ≤ i < μ(j)` with `μ(0) = 0` and `μ(p) = q + 1`.
pub fn star_dual(mu: &MonotoneMap) -> MonotoneMap {
    let p = mu.dom + 1;
    let q = mu.cod;
    let ext = |j: usize| -> usize {
        if j == 0 {
            0
        } else if j == p {
            q + 1
        } else {
            mu.values[j - 1]
        }
    };
    let values = (1..q)
        .map(|i| {
            (1..=p)
                .find(|&j| ext(j - 1) <= i && i < ext(j))
                .expect("the extended map covers every i")
        })
        .collect();
    MonotoneMap {
        dom: q.saturating_sub(1),
        cod: p,
        values,
    }
}

/// For an epi `ρ: [m] ↠ [n]`, the mono `[n − 1] → [m − 1]` onto its cut
/// positions.
pub fn star_dual_epi(rho: &MonotoneMap) -> Result<MonotoneMap> {
    rho.require_epi()?;
    let cuts: Vec<usize> = rho.cuts().into_iter().collect();
    MonotoneMap::new(rho.dom.saturating_sub(1), cuts)
}

/// Every monotone map `[m] → [n]`, in lexicographic order of values.
pub fn all_maps(m: usize, n: usize) -> Vec<MonotoneMap> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, n: usize, lo: usize, cur: &mut Vec<usize>, out: &mut Vec<MonotoneMap>) {
        if cur.len() == m {
            out.push(MonotoneMap {
                dom: m,
                cod: n,
                values: cur.clone(),
            });
            return;
        }
        for v in lo..=n {
            cur.push(v);
            rec(m, n, v, cur, out);
            cur.pop();
        }
    }
    rec(m, n, 1, &mut cur, &mut out);
    out
}

pub fn all_epis(m: usize, n: usize) -> Vec<MonotoneMap> {
    all_maps(m, n).into_iter().filter(MonotoneMap::is_epi).collect()
}

pub fn all_monos(m: usize, n: usize) -> Vec<MonotoneMap> {
    all_maps(m, n).into_iter().filter(MonotoneMap::is_mono).collect()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(cod: usize, v: &[usize]) -> MonotoneMap {
        MonotoneMap::new(cod, v.to_vec()).unwrap()
    }

    #[test]
    fn composition_examples() {
        let f = map(3, &[1, 3]);
        assert_eq!(compose(&MonotoneMap::identity(3), &f).unwrap(), f);
        assert_eq!(compose(&map(1, &[1, 1, 1]), &f).unwrap(), map(1, &[1, 1]));
        assert_eq!(compose(&map(2, &[1, 1, 2]), &map(3, &[2, 3])).unwrap(), map(2, &[1, 2]));
        assert!(compose(&map(2, &[1, 2]), &f).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(map(2, &[1, 2, 2]).classify(), Kind { is_epi: true, is_mono: false });
        assert_eq!(map(3, &[1, 3]).classify(), Kind { is_epi: false, is_mono: true });
        assert_eq!(map(0, &[]).classify(), Kind { is_epi: true, is_mono: true });
    }

    #[test]
    fn factorization_example() {
        let (e, m) = epi_mono_factor(&map(3, &[2, 2]));
        assert_eq!(e, map(1, &[1, 1]));
        assert_eq!(m, map(3, &[2]));
    }

    #[test]
    fn coproducts() {
        let (a, b) = ordered_coproduct(2, 3);
        assert_eq!(a, map(5, &[1, 2]));
        assert_eq!(b, map(5, &[3, 4, 5]));
        let (a, b, p) = relative_ordered_coproduct(&MonotoneMap::identity(2), &MonotoneMap::identity(2)).unwrap();
        assert_eq!((a, b, p), (map(4, &[1, 3]), map(4, &[2, 4]), map(2, &[1, 1, 2, 2])));
        let (a, b, _) = relative_ordered_coproduct(&map(1, &[1, 1]), &map(1, &[1])).unwrap();
        assert_eq!((a, b), (map(3, &[1, 2]), map(3, &[3])));
    }

    #[test]
    fn merge_examples() {
        let (j, _, _) = merge(&map(2, &[1, 2, 2]), &map(2, &[1, 1, 2])).unwrap();
        assert_eq!(j, map(1, &[1, 1, 1]));
        let l = map(2, &[1, 1, 2]);
        let (j, p1, p2) = merge(&l, &l).unwrap();
        assert_eq!(j, l);
        assert!(p1.is_identity() && p2.is_identity());
        assert!(merge(&map(3, &[1, 1, 2]), &l).is_err());
    }

    #[test]
    fn star_dual_examples() {
        assert_eq!(star_dual(&map(1, &[])), map(1, &[]));
        assert_eq!(star_dual(&map(2, &[1, 2])), map(3, &[2]));
        assert_eq!(star_dual_epi(&MonotoneMap::identity(3)).unwrap(), map(2, &[1, 2]));
        assert_eq!(star_dual_epi(&map(1, &[1, 1, 1])).unwrap(), map(2, &[]));
    }

    #[test]
    fn json_round_trip() {
        let f = map(3, &[1, 3]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"dom":2,"cod":3,"values":[1,3]}"#);
        assert_eq!(serde_json::from_str::<MonotoneMap>(&s).unwrap(), f);
        assert!(serde_json::from_str::<MonotoneMap>(r#"{"dom":2,"cod":3,"values":[3,1]}"#).is_err());
    }
}
