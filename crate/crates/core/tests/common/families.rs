//! Criteria on the symbol sequence and automorphism families.

use std::collections::BTreeMap;

use pprop::algebra::{derivations, dual_numbers, matrix_algebra, AlgebraMorphism, FinAlgebra, MultiLinearMap};
use pprop::aut::{
    from_derivations, m_relation_holds, pullback_square_commutes, r_map, surjectivity_probe, validate_aut,
};
use pprop::diffop::{
    check_operator, degeneracy, epi_simplicial_holds, solve_dn, solve_shape, symbol, symbol_exactness, Coordinates,
    DiffOperator, GradeWindow,
};
use pprop::linalg::{q, Q, SparseVec};
use pprop::ordinal::all_epis;
use pprop::partition::OrderedPartition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dense_rank, ensure, Check};

fn densify(vs: &[SparseVec], width: usize) -> Vec<Vec<Q>> {
    vs.iter()
        .map(|v| {
            let mut row = vec![q(0); width];
            for (k, c) in v {
                row[*k] = c.clone();
            }
            row
        })
        .collect()
}

/// Ranks of several operator lists in one shared coordinate system.
fn ranks(lists: &[&[DiffOperator]]) -> Vec<usize> {
    let mut coords = Coordinates::new();
    let vecs: Vec<Vec<SparseVec>> = lists.iter().map(|l| l.iter().map(|op| coords.vector(op)).collect()).collect();
    let width = vecs.iter().flatten().flat_map(|v| v.keys().copied()).max().map_or(0, |m| m + 1);
    vecs.iter().map(|v| dense_rank(densify(v, width))).collect()
}

pub fn criterion_9() -> Check {
    for alg in [dual_numbers(), matrix_algebra(2)] {
        let f = AlgebraMorphism::identity(&alg);
        let window = if alg.dim() <= 2 { GradeWindow::up_to(1) } else { GradeWindow::exact(0) };
        let mut ops = BTreeMap::new();
        for n in 0..=2 {
            ops.insert(n, solve_dn(&f, n, window).map_err(|e| e.to_string())?.basis);
        }
        ensure!(epi_simplicial_holds(&ops, 4).map_err(|e| e.to_string())?, "epi-simplicial identity fails");
    }

    let alg = matrix_algebra(2);
    let f = AlgebraMorphism::identity(&alg);
    let w = GradeWindow::exact(0);
    let d2 = solve_dn(&f, 2, w).map_err(|e| e.to_string())?.basis;
    let d1 = solve_dn(&f, 1, w).map_err(|e| e.to_string())?.basis;
    let ones = OrderedPartition::finest(2);
    let target = solve_shape(&f, &ones, &ones, w).map_err(|e| e.to_string())?.basis;
    let symbols: Vec<DiffOperator> = d2
        .iter()
        .map(|p| symbol(p).map(|s| s.with_type(ones.clone()).expect("two slots")))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let joint: Vec<DiffOperator> = symbols.iter().chain(&target).cloned().collect();
    let [r_sym, r_target, r_joint] = ranks(&[&symbols, &target, &joint])[..] else { unreachable!() };
    ensure!(r_target == 9, "dim D_(1,1) = {r_target}, expected 9");
    ensure!(r_sym == 9 && r_joint == 9, "Σ has rank {r_sym} and joint rank {r_joint}");

    let sigma = &all_epis(2, 1)[0];
    let degen: Vec<DiffOperator> =
        d1.iter().map(|p| degeneracy(sigma, p)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for s in &degen {
        ensure!(symbol(s).map_err(|e| e.to_string())?.is_zero(), "degenerate operator has a nonzero symbol");
        check_operator(s, &f).map_err(|e| format!("degenerate operator: {e}"))?;
    }
    let both: Vec<DiffOperator> = d2.iter().chain(&degen).cloned().collect();
    let [r_d2, r_degen, r_both] = ranks(&[&d2, &degen, &both])[..] else { unreachable!() };
    let kernel = r_d2 - r_sym;
    ensure!(r_both == r_d2, "degeneracy image is not inside D_2");
    ensure!(r_degen == kernel && kernel == 3, "ker Σ has dimension {kernel}, degeneracy image {r_degen}");
    let report = symbol_exactness(&f, 2, w).map_err(|e| e.to_string())?;
    ensure!(report.exact(), "library exactness report disagrees: {report:?}");
    Ok(format!("dim D_2 = {r_d2}, rank Σ = {r_sym} of 9, ker Σ = degeneracy image of dim {kernel}"))
}

/// `∂(1) = 0`, `∂(x) = x ⊗ x` on `k[x]/(x²)`.
pub fn x_tensor_x() -> MultiLinearMap {
    let mut d = MultiLinearMap::zero(1, 1);
    d.add_entry(&[1], vec![1], vec![1, 1], q(1));
    d
}

fn seeded_derivations(rng: &mut ChaCha8Rng, alg: &FinAlgebra, k: usize) -> Vec<MultiLinearMap> {
    let basis = derivations(&AlgebraMorphism::identity(alg), 1);
    (0..k)
        .map(|_| {
            let mut d = MultiLinearMap::zero(1, 1);
            for b in &basis {
                d.add_scaled(b, &q(rng.gen_range(-2..=2)));
            }
            d
        })
        .collect()
}

fn words(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for h in 0..k {
                let mut w2: Vec<usize> = w.clone();
                w2.push(h);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn criterion_10(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = |x: pprop::Error| x.to_string();
    let letters = |k: usize| (1..=k).map(|i| format!("h{i}")).collect::<Vec<_>>();
    let mut families = Vec::new();
    let dn = dual_numbers();
    families.push((dn.clone(), from_derivations(letters(2), &[x_tensor_x(), x_tensor_x()], 3, &dn).map_err(e)?));
    let m2 = matrix_algebra(2);
    let ds = seeded_derivations(&mut rng, &m2, 2);
    families.push((m2.clone(), from_derivations(letters(2), &ds, 3, &m2).map_err(e)?));

    let mut operators = 0;
    for (alg, phi) in &families {
        let f = AlgebraMorphism::identity(alg);
        validate_aut(phi, alg).map_err(e)?;
        for w in words(2, 3) {
            let r = r_map(phi, &w, &f).map_err(e)?;
            check_operator(&r, &f).map_err(|x| format!("r(φ_{w:?}): {x}"))?;
            ensure!(r.is_totally_positive(), "r(φ_{w:?}) is not totally positive");
            if w.len() <= 2 {
                ensure!(m_relation_holds(phi, &w, &f).map_err(e)?, "multiplication relation fails at {w:?}");
            }
            operators += 1;
        }
    }

    let mut squares = 0;
    for h in 1..=3 {
        let phi = from_derivations(letters(h), &seeded_derivations(&mut rng, &dn, h), 3, &dn).map_err(e)?;
        let f = AlgebraMorphism::identity(&dn);
        for g in h..=3 {
            for sigma in all_epis(g, h) {
                ensure!(pullback_square_commutes(&sigma, &phi, &f).map_err(e)?, "square fails for {sigma:?}");
                squares += 1;
            }
        }
    }

    let probe = surjectivity_probe(&m2, 2).map_err(e)?;
    ensure!(probe.all_spanned(), "probe: {probe:?}");
    let ranks: Vec<String> =
        probe.entries.iter().map(|x| format!("{:?}:{}/{}", x.grades, x.span_rank, x.target_dim)).collect();
    Ok(format!("{operators} r-images, {squares} squares, probe {}", ranks.join(" ")))
}
