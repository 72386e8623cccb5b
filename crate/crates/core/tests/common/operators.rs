//! Criteria on operator spaces and their compositions.

use pprop::algebra::{diagonal, dual_numbers, matrix_algebra, AlgebraMorphism, FinAlgebra};
use pprop::diffop::{
    bullet_h, bullet_v, check_m_p, check_operator, compose_d, h_compose, solve_dn, v_compose, DiffOperator, GradeWindow,
    MultiDiff,
};
use pprop::linalg::{q, Q};
use pprop::partition::{enumerate, OrderedPartition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dense_rank, ensure, Check};

/// `dim Der(A)` from the Leibniz rule written directly in structure
/// constants: unknowns `D[l][i]` with `D(e_i) = Σ_l D[l][i] e_l`.
pub fn derivation_dim_oracle(alg: &FinAlgebra) -> usize {
    let a = alg.dim();
    let c = alg.structure_constants();
    let var = |l: usize, i: usize| l * a + i;
    let mut rows = Vec::new();
    for i in 0..a {
        for j in 0..a {
            for l in 0..a {
                let mut row = vec![q(0); a * a];
                for k in 0..a {
                    row[var(l, k)] += &c[i][j][k];
                    row[var(k, i)] -= &c[k][j][l];
                    row[var(k, j)] -= &c[i][k][l];
                }
                rows.push(row);
            }
        }
    }
    a * a - dense_rank(rows)
}

fn mul(alg: &FinAlgebra, x: &[Q], y: &[Q]) -> Vec<Q> {
    let c = alg.structure_constants();
    let a = alg.dim();
    let mut out = vec![q(0); a];
    for i in 0..a {
        for j in 0..a {
            let s = &x[i] * &y[j];
            if s == q(0) {
                continue;
            }
            for k in 0..a {
                out[k] += &s * &c[i][j][k];
            }
        }
    }
    out
}

fn basis_vec(a: usize, i: usize) -> Vec<Q> {
    (0..a).map(|k| q(i64::from(k == i))).collect()
}

/// Values of a grade zero component as plain vectors in `A`, with the
/// output factors of all slots multiplied together.
fn eval_grade0(alg: &FinAlgebra, op: &DiffOperator, key: &[usize], input: &[usize]) -> Vec<Q> {
    let a = alg.dim();
    let mut out = vec![q(0); a];
    let Some(m) = op.component(&OrderedPartition::new(key.to_vec())) else { return out };
    for (g, t) in m.eval_word(input) {
        if g.iter().any(|&x| x != 0) {
            continue;
        }
        for (w, c) in t {
            let mut acc = basis_vec(a, w[0]);
            for &k in &w[1..] {
                acc = mul(alg, &acc, &basis_vec(a, k));
            }
            for (o, v) in out.iter_mut().zip(acc) {
                *o += &v * &c;
            }
        }
    }
    out
}

pub fn test_algebras() -> Vec<(&'static str, FinAlgebra)> {
    vec![("k[x]/(x²)", dual_numbers()), ("k×k", diagonal(2)), ("M₂(Q)", matrix_algebra(2))]
}

pub fn criterion_5() -> Check {
    let expected = [1, 0, 3];
    let mut details = Vec::new();
    for ((name, alg), want) in test_algebras().into_iter().zip(expected) {
        let f = AlgebraMorphism::identity(&alg);
        let d1 = solve_dn(&f, 1, GradeWindow::exact(0)).map_err(|e| e.to_string())?;
        let oracle = derivation_dim_oracle(&alg);
        ensure!(d1.dim() == want, "dim D_1 for {name} is {}, expected {want}", d1.dim());
        ensure!(oracle == want, "Leibniz oracle gives {oracle} for {name}");
        let d2 = solve_dn(&f, 2, GradeWindow::exact(0)).map_err(|e| e.to_string())?;
        let a = alg.dim();
        for (k, p) in d2.basis.iter().enumerate() {
            for i in 0..a {
                for j in 0..a {
                    let mut lhs = vec![q(0); a];
                    for (x, c) in alg.mul_basis(i, j) {
                        for (l, v) in lhs.iter_mut().zip(eval_grade0(&alg, p, &[2], &[*x])) {
                            *l += &v * c;
                        }
                    }
                    let mut rhs = mul(&alg, &eval_grade0(&alg, p, &[2], &[i]), &basis_vec(a, j));
                    let left = mul(&alg, &basis_vec(a, i), &eval_grade0(&alg, p, &[2], &[j]));
                    let split = eval_grade0(&alg, p, &[1, 1], &[i, j]);
                    for ((r, x), y) in rhs.iter_mut().zip(left).zip(split) {
                        *r += x + y;
                    }
                    ensure!(lhs == rhs, "{name}: D_2 basis {k} fails the second order identity at ({i}, {j})");
                }
            }
        }
        details.push(format!("{name}: D_1 {want}, D_2 {}", d2.dim()));
    }
    Ok(details.join("; "))
}

pub fn criterion_6(seed: u64, triples: usize) -> Check {
    let mut counted = 0;
    for (name, alg) in test_algebras() {
        let f = AlgebraMorphism::identity(&alg);
        let (max_n, window) = if alg.dim() <= 2 { (3, GradeWindow::up_to(1)) } else { (2, GradeWindow::exact(0)) };
        for n in 0..=max_n {
            let space = solve_dn(&f, n, window).map_err(|e| e.to_string())?;
            for (k, p) in space.basis.iter().enumerate() {
                for d in 1..=n + 1 {
                    let ok = check_m_p(p, d, &f).map_err(|e| e.to_string())?;
                    ensure!(ok, "{name}: D_{n} basis {k} fails [m, P] at d = {d}");
                    counted += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pools = Vec::new();
    for (name, alg) in [("k[x]/(x²)", dual_numbers()), ("M₂(Q)", matrix_algebra(2))] {
        let f = AlgebraMorphism::identity(&alg);
        let mut pool = Vec::new();
        for n in 1..=2 {
            if alg.dim() > 2 && n > 1 {
                break;
            }
            pool.extend(solve_dn(&f, n, GradeWindow::exact(0)).map_err(|e| e.to_string())?.basis);
        }
        pools.push((name, f, pool));
    }
    for t in 0..triples {
        let (name, f, pool) = &pools[t % pools.len()];
        let pick = |rng: &mut ChaCha8Rng| pool[rng.gen_range(0..pool.len())].clone();
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let comp = |x: &DiffOperator, y: &DiffOperator| compose_d(x, y, f).map_err(|e| e.to_string());
        let ab = comp(&a, &b)?;
        check_operator(&ab, f).map_err(|e| format!("{name}: triple {t}: composite is not an operator: {e}"))?;
        let left = comp(&ab, &c)?;
        let right = comp(&a, &comp(&b, &c)?)?;
        ensure!(left == right, "{name}: triple {t}: compose_D is not associative");
        check_operator(&left, f).map_err(|e| format!("{name}: triple {t}: {e}"))?;
    }
    Ok(format!("{counted} [m, P] checks, {triples} seeded triples"))
}

/// Operators of `D_n` for `n ≤ 2`, grades up to one.
fn pool(alg: &FinAlgebra) -> Result<Vec<DiffOperator>, String> {
    let f = AlgebraMorphism::identity(alg);
    let mut out = Vec::new();
    for n in 0..=2 {
        out.extend(solve_dn(&f, n, GradeWindow::up_to(1)).map_err(|e| e.to_string())?.basis);
    }
    Ok(out)
}

fn outputs(p: &DiffOperator) -> Result<usize, String> {
    p.outputs().ok_or_else(|| "operator is not homogeneous".to_string())
}

/// A horizontal product of `k` seeded basis elements.
fn random_h_product(rng: &mut ChaCha8Rng, pool: &[DiffOperator], k: usize) -> DiffOperator {
    let mut acc = pool[rng.gen_range(0..pool.len())].clone();
    for _ in 1..k {
        acc = h_compose(&acc, &pool[rng.gen_range(0..pool.len())]);
    }
    acc
}

fn single(op: &DiffOperator) -> MultiDiff {
    MultiDiff::from_op(op.clone())
}

pub fn criterion_7(seed: u64, pairs: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (name, alg) in [("k[x]/(x²)", dual_numbers()), ("k×k", diagonal(2))] {
        let f = AlgebraMorphism::identity(&alg);
        let ops = pool(&alg)?;
        ensure!(!ops.is_empty(), "{name}: empty pool");
        let e = |x: pprop::Error| x.to_string();
        for t in 0..pairs.div_ceil(2) {
            let p1 = ops[rng.gen_range(0..ops.len())].clone();
            let p2 = ops[rng.gen_range(0..ops.len())].clone();
            let p = h_compose(&p1, &p2);
            let k = outputs(&p)?;
            let uk = DiffOperator::units(&f, k);
            let us = DiffOperator::units(&f, p.slots());
            ensure!(v_compose(&uk, &p, &f).map_err(e)? == single(&p), "{name}: pair {t}: u^k ∘ P ≠ P");
            ensure!(v_compose(&p, &us, &f).map_err(e)? == single(&p), "{name}: pair {t}: P ∘ u^s ≠ P");
            let u0 = DiffOperator::units(&f, 0);
            ensure!(h_compose(&u0, &p) == p && h_compose(&p, &u0) == p, "{name}: pair {t}: horizontal unit");

            let q1 = random_h_product(&mut rng, &ops, outputs(&p1)?);
            let q2 = random_h_product(&mut rng, &ops, outputs(&p2)?);
            let lhs = v_compose(&h_compose(&q1, &q2), &p, &f).map_err(e)?;
            let mut rhs = MultiDiff::new();
            for a in v_compose(&q1, &p1, &f).map_err(e)?.terms() {
                for b in v_compose(&q2, &p2, &f).map_err(e)?.terms() {
                    rhs.add(&h_compose(a, b));
                }
            }
            ensure!(lhs == rhs, "{name}: pair {t}: interchange law fails");
        }
    }
    Ok(format!("{} seeded pairs per algebra", pairs.div_ceil(2)))
}

/// A seeded coarsening of the finest type on `s` slots.
fn random_type(rng: &mut ChaCha8Rng, s: usize) -> OrderedPartition {
    let d = rng.gen_range(1..=s);
    let opts = enumerate(s, d, true);
    opts[rng.gen_range(0..opts.len())].clone()
}

pub fn criterion_8(seed: u64, pairs: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for (name, alg) in [("k[x]/(x²)", dual_numbers()), ("k×k", diagonal(2))] {
        let f = AlgebraMorphism::identity(&alg);
        let ops = pool(&alg)?;
        let e = |x: pprop::Error| x.to_string();
        for t in 0..pairs.div_ceil(2) {
            let p = ops[rng.gen_range(0..ops.len())].clone();
            let q0 = ops[rng.gen_range(0..ops.len())].clone();
            let genus = |x: &DiffOperator| x.genus().ok_or_else(|| format!("{name}: pair {t}: inhomogeneous"));
            let h = bullet_h(&p, &q0);
            ensure!(genus(&h)? == genus(&p)? + genus(&q0)? - 1, "{name}: pair {t}: horizontal genus");
            ensure!(h.is_totally_positive(), "{name}: pair {t}: horizontal composite leaves D^≥0");

            let pp = outputs(&p)? as i64;
            let q = random_h_product(&mut rng, &ops, pp as usize);
            let q = q.clone().with_type(random_type(&mut rng, q.slots())).map_err(e)?;
            for term in bullet_v(&q, &p, &f).map_err(e)?.terms() {
                ensure!(
                    genus(term)? == genus(&p)? + genus(&q)? + pp - 1,
                    "{name}: pair {t}: vertical genus {} vs {} + {} + {}",
                    genus(term)?,
                    genus(&p)?,
                    genus(&q)?,
                    pp - 1
                );
                ensure!(term.is_totally_positive(), "{name}: pair {t}: vertical composite leaves D^≥0");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} vertical terms and {} horizontal pairs", 2 * pairs.div_ceil(2)))
}
