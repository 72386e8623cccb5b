//! Compositions of operators.

use std::collections::BTreeMap;

use super::{push_grades, DiffOperator, MultiDiff};
use crate::algebra::{AlgebraMorphism, MultiLinearMap};
use crate::error::{Error, Result};
use crate::linalg::Q;
use crate::partition::{enumerate, zero_preserving_refinements, OrderedPartition};
use crate::tensor::{add_term, slot_ranges, Tensor};

/// `q ∘ p` on maps: `p`'s output words feed `q`'s inputs.
fn compose_maps(q: &MultiLinearMap, p: &MultiLinearMap) -> MultiLinearMap {
    let mut out = MultiLinearMap::zero(p.in_arity, q.out_slots);
    for block in p.blocks.values() {
        for (u, t) in block {
            for (mid, c) in t {
                for (h, qb) in &q.blocks {
                    if let Some(s) = qb.get(mid) {
                        out.add_tensor(h, u, s, c);
                    }
                }
            }
        }
    }
    out
}

/// `(Q ∘ P)_λ = Σ_{λ = λ′ + λ″} Q_{λ′} ∘ P_{λ″}` for single-slot operators
/// of grade zero with `f: A → A`.
pub fn compose_d(q: &DiffOperator, p: &DiffOperator, f: &AlgebraMorphism) -> Result<DiffOperator> {
    if q.shape().d() != 1 || p.shape().d() != 1 {
        return Err(Error::Operator("compose_d takes single-slot operators".into()));
    }
    if f.source() != f.target() {
        return Err(Error::Operator("compose_d needs an endomorphism f".into()));
    }
    for op in [q, p] {
        if op.total_grades().iter().any(|&g| g != 0) {
            return Err(Error::Operator("compose_d is defined on grade zero operators".into()));
        }
    }
    let (m, n) = (q.order(), p.order());
    let shape = OrderedPartition::trivial(m + n);
    let mut out = DiffOperator::zero(shape.clone(), OrderedPartition::trivial(1));
    for r in zero_preserving_refinements(&shape) {
        let lam = r.fine.parts().to_vec();
        let d = lam.len();
        let mut acc = MultiLinearMap::zero(d, d);
        for l1 in enumerate(m, d, false) {
            let l2: Option<Vec<usize>> =
                lam.iter().zip(l1.parts()).map(|(x, y)| x.checked_sub(*y)).collect();
            let Some(l2) = l2 else { continue };
            let qc = q.full_component(l1.parts(), &[d], f)?;
            let pc = p.full_component(&l2, &[d], f)?;
            acc.add(&compose_maps(&qc, &pc));
        }
        out.set_component(r.fine.clone(), acc)?;
    }
    Ok(out)
}

/// `(P ∘_h Q)_ν = P_{ν|λ} ⊗ Q_{ν|μ}`; types concatenate.
pub fn h_compose(p: &DiffOperator, q: &DiffOperator) -> DiffOperator {
    let shape = crate::partition::concatenate(p.shape(), q.shape());
    let out_type = crate::partition::concatenate(p.out_type(), q.out_type());
    let mut components = BTreeMap::new();
    for (k1, m1) in p.components() {
        for (k2, m2) in q.components() {
            components.insert(crate::partition::concatenate(k1, k2), m1.tensor(m2));
        }
    }
    DiffOperator::new(shape, out_type, components).expect("concatenated refinements")
}

/// `P •_h Q = (P ∘_h Q)[(π, σ)]`.
pub fn bullet_h(p: &DiffOperator, q: &DiffOperator) -> DiffOperator {
    h_compose(p, q)
}

/// Untyped vertical composition: both operators read with finest types.
pub fn v_compose(q: &DiffOperator, p: &DiffOperator, f: &AlgebraMorphism) -> Result<MultiDiff> {
    let q1 = q.clone().with_type(OrderedPartition::finest(q.slots()))?;
    let p1 = p.clone().with_type(OrderedPartition::finest(p.slots()))?;
    bullet_v(&q1, &p1, f)
}

/// Class index of each factor when the boundary between consecutive
/// factors `j, j + 1` is glued exactly when `glue(j)` holds.
fn classes(len: usize, glue: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut out = Vec::with_capacity(len);
    let mut c = 0;
    for j in 0..len {
        if j > 0 && !glue(j - 1) {
            c += 1;
        }
        out.push(c);
    }
    out
}

/// Values of a map on `[len]` in order, as fiber sizes.
fn fibers_of(map: &[usize], cod: usize) -> Vec<usize> {
    let mut sizes = vec![0; cod];
    for &x in map {
        sizes[x] += 1;
    }
    sizes
}

/// Per-fiber weak compositions: all vectors over the factors whose sums
/// over each fiber of `map` are `targets`.
fn distribute(map: &[usize], targets: &[usize]) -> Vec<Vec<usize>> {
    let sizes = fibers_of(map, targets.len());
    let mut acc = vec![Vec::new()];
    for (k, &s) in sizes.iter().enumerate() {
        let opts = enumerate(targets[k], s, false);
        let mut next = Vec::new();
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

/// Vectors on fine factors with prescribed sums per fine slot and per
/// `α`-fiber.
fn double_distribute(
    slot_of: &[usize],
    slot_targets: &[usize],
    alpha: &[usize],
    alpha_targets: &[usize],
) -> Vec<Vec<usize>> {
    let len = slot_of.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    let mut slot_left = slot_targets.to_vec();
    let mut class_left = alpha_targets.to_vec();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        j: usize,
        slot_of: &[usize],
        alpha: &[usize],
        slot_left: &mut Vec<usize>,
        class_left: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j == slot_of.len() {
            if slot_left.iter().all(|&x| x == 0) && class_left.iter().all(|&x| x == 0) {
                out.push(cur.clone());
            }
            return;
        }
        let (t, k) = (slot_of[j], alpha[j]);
        let last_in_slot = j + 1 == slot_of.len() || slot_of[j + 1] != t;
        let last_in_class = j + 1 == alpha.len() || alpha[j + 1] != k;
        let hi = slot_left[t].min(class_left[k]);
        for x in 0..=hi {
            if last_in_slot && slot_left[t] != x {
                continue;
            }
            if last_in_class && class_left[k] != x {
                continue;
            }
            slot_left[t] -= x;
            class_left[k] -= x;
            cur.push(x);
            rec(j + 1, slot_of, alpha, slot_left, class_left, cur, out);
            cur.pop();
            slot_left[t] += x;
            class_left[k] += x;
        }
    }
    rec(0, slot_of, alpha, &mut slot_left, &mut class_left, &mut cur, &mut out);
    out
}

/// `(Q •_v P) = Σ_{ν = π̃ν′} (Q_{(ν′)} ∘_v P)[μ̃_*(σ)π]`.
///
/// For each coarse grade distribution `μ` of `P` the `q + G` output factors
/// of `P` are glued by `π̃` into the `s + G` inputs of `Q`. Inside one fine
/// slot of the result, consecutive outputs of `Q` are multiplied when `σ`
/// puts them in one part and concatenated otherwise; coarse slots of the
/// result share a part of the composite type when their boundary factors
/// are multiplied.
pub fn bullet_v(q: &DiffOperator, p: &DiffOperator, f: &AlgebraMorphism) -> Result<MultiDiff> {
    let lam = p.shape().parts().to_vec();
    let nslots = lam.len();
    let pi_of_slot = classes(nslots, |i| same_part(p.out_type(), i));
    let sigma_of = classes(q.slots(), |k| same_part(q.out_type(), k));
    let nu = q.shape().parts().to_vec();
    let mut result = MultiDiff::new();
    for mu in p.coarse_grades() {
        let pmu = p.restrict_grades(&mu);
        let g_total: usize = mu.iter().sum();
        if q.slots() != p.out_type().d() + g_total {
            return Err(Error::Arity(format!(
                "Q has {} input slots but P produces {} output factors",
                q.slots(),
                p.out_type().d() + g_total
            )));
        }
        let coarse_ranges = slot_ranges(&mu);
        let ncoarse = nslots + g_total;
        let mut coarse_slot = vec![0; ncoarse];
        for (i, r) in coarse_ranges.iter().enumerate() {
            for j in r.clone() {
                coarse_slot[j] = i;
            }
        }
        // π̃ glues the junction of slots merged by π
        let pit = classes(ncoarse, |j| {
            let i = coarse_slot[j];
            coarse_ranges[i].end - 1 == j && i + 1 < nslots && pi_of_slot[i] == pi_of_slot[i + 1]
        });
        // composite type: boundary factors of consecutive coarse slots
        let glued = |i: usize| {
            let a = coarse_ranges[i].end - 1;
            let b = coarse_ranges[i + 1].start;
            sigma_of[pit[a]] == sigma_of[pit[b]]
        };
        let comp_type_classes = classes(nslots, |i| i + 1 < nslots && glued(i));
        let comp_type = OrderedPartition::new(fibers_of(&comp_type_classes, comp_type_classes.last().map_or(0, |x| x + 1)));
        for nu_prime in distribute(&pit, &nu) {
            let tau0: Vec<usize> = (0..nslots)
                .map(|i| lam[i] + coarse_ranges[i].clone().map(|k| nu_prime[k]).sum::<usize>())
                .collect();
            let tau0 = OrderedPartition::new(tau0);
            let mut op = DiffOperator::zero(tau0.clone(), comp_type.clone());
            for r in zero_preserving_refinements(&tau0) {
                let tau = r.fine.parts().to_vec();
                let sizes = r.rho.fiber_sizes();
                let acc = composite_component(q, &pmu, f, &mu, &lam, &tau, &sizes, &pit, &sigma_of, &nu_prime)?;
                if !acc.is_zero() {
                    op.set_component(r.fine.clone(), acc)?;
                }
            }
            result.add(&op);
        }
    }
    Ok(result)
}

fn same_part(ty: &OrderedPartition, i: usize) -> bool {
    // slots i and i + 1 (0-based) lie in one part of the type
    let mut end = 0;
    for &s in ty.parts() {
        end += s;
        if i + 1 == end {
            return false;
        }
        if i + 1 < end {
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn composite_component(
    q: &DiffOperator,
    p: &DiffOperator,
    f: &AlgebraMorphism,
    mu: &[usize],
    lam: &[usize],
    tau: &[usize],
    sizes: &[usize],
    pit: &[usize],
    sigma_of: &[usize],
    nu_prime: &[usize],
) -> Result<MultiLinearMap> {
    let c_alg = f.target();
    let qprime = tau.len();
    let mut acc = MultiLinearMap::zero(qprime, qprime);
    // λ′ with fiber sums λ and λ′ ≤ τ
    let mut fine_slot_coarse = Vec::with_capacity(qprime);
    for (i, &s) in sizes.iter().enumerate() {
        fine_slot_coarse.extend(std::iter::repeat(i).take(s));
    }
    for lam_prime in distribute(&fine_slot_coarse, lam) {
        if lam_prime.iter().zip(tau).any(|(a, b)| a > b) {
            continue;
        }
        let pc = p.full_component(&lam_prime, sizes, f)?;
        for (gp, block) in &pc.blocks {
            if push_grades(gp, sizes) != mu {
                continue;
            }
            let fine_ranges = slot_ranges(gp);
            let nfine = fine_ranges.last().map_or(0, |r| r.end);
            let mut slot_of = vec![0; nfine];
            for (t, r) in fine_ranges.iter().enumerate() {
                for j in r.clone() {
                    slot_of[j] = t;
                }
            }
            let alpha = classes(nfine, |j| {
                let t = slot_of[j];
                fine_ranges[t].end - 1 == j && t + 1 < qprime && fine_slot_coarse[t] == fine_slot_coarse[t + 1]
            });
            let beta: Vec<usize> = alpha.iter().map(|&k| pit[k]).collect();
            let beta_sizes = fibers_of(&beta, q.slots());
            let slot_targets: Vec<usize> = tau.iter().zip(&lam_prime).map(|(t, l)| t - l).collect();
            let pblock = MultiLinearMap {
                in_arity: qprime,
                out_slots: qprime,
                blocks: BTreeMap::from([(gp.clone(), block.clone())]),
            };
            for lam2 in double_distribute(&slot_of, &slot_targets, &alpha, nu_prime) {
                let qc = q.full_component(&lam2, &beta_sizes, f)?;
                if qc.is_zero() {
                    continue;
                }
                let composed = compose_maps(&qc, &pblock);
                // multiply or concatenate the outputs inside each fine slot
                for (h, b) in &composed.blocks {
                    let hr = slot_ranges(h);
                    let mut merges = Vec::new();
                    let mut grades = vec![0; qprime];
                    for j in 0..nfine {
                        grades[slot_of[j]] += h[j];
                        if j + 1 < nfine && slot_of[j + 1] == slot_of[j] {
                            if sigma_of[beta[j]] == sigma_of[beta[j + 1]] {
                                merges.push(hr[j].end - 1);
                            } else {
                                grades[slot_of[j]] += 1;
                            }
                        }
                    }
                    for (u, t) in b {
                        let mut cur: Tensor = t.clone();
                        for &pos in merges.iter().rev() {
                            let mut next = Tensor::new();
                            for (w, c) in &cur {
                                for (w2, d) in c_alg.merge_at(w, pos) {
                                    add_term(&mut next, w2, c * d);
                                }
                            }
                            cur = next;
                        }
                        acc.add_tensor(&grades, u, &cur, &Q::from_integer(1.into()));
                    }
                }
            }
        }
    }
    Ok(acc)
}
