//! The named invariant suite behind `pprop verify`.

use std::collections::BTreeMap;

use pprop::algebra::{check_algebra, is_formally_smooth_witness, AlgebraMorphism, FinAlgebra};
use pprop::diffop::{
    check_m_p, check_operator, compose_d, epi_simplicial_holds, solve_dn, symbol_exactness, GradeWindow,
};
use pprop::linalg::{q, Matrix};
use pprop::prop::{braid_check, eval_expr, normalize, random_expr, eval_normal_form, swap_matrix, EndProp};
use pprop::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    match outcome {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check { name, pass: false, detail: e.to_string() },
    }
}

/// Runs every check; the algebra axioms gate the operator checks.
pub fn run(alg: &FinAlgebra, order: usize, window: GradeWindow, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let axioms = check_algebra(alg);
    let axioms_ok = axioms.is_ok();
    out.push(check("algebra_axioms", axioms.map(|_| (true, format!("dim {}", alg.dim())))));
    if axioms_ok {
        out.extend(operator_checks(alg, order, window, seed));
        let report = is_formally_smooth_witness(alg);
        out.push(Check {
            name: "smoothness_witness",
            pass: true,
            detail: format!("dim Ω¹ = {}, {}", report.omega1_dim, report.describe()),
        });
    }
    out.push(check("normal_form_soundness", normal_form_soundness(seed)));
    out.push(check("braid_swap", braid_check(&swap_matrix(2)).map(|b| (b, "8x8 exact".into()))));
    out
}

fn operator_checks(alg: &FinAlgebra, order: usize, window: GradeWindow, seed: u64) -> Vec<Check> {
    let f = AlgebraMorphism::identity(alg);
    let mut bases = BTreeMap::new();
    let mut out = Vec::new();
    let mut solved = Ok(());
    for n in 0..=order {
        match solve_dn(&f, n, window) {
            Ok(space) => {
                bases.insert(n, space.basis);
            }
            Err(e) => {
                solved = Err(e);
                break;
            }
        }
    }
    let dims: Vec<String> = bases.iter().map(|(n, b)| format!("D_{n}: {}", b.len())).collect();
    out.push(check("operator_spaces", solved.clone().map(|_| (true, dims.join(", ")))));
    if solved.is_err() {
        return out;
    }
    out.push(check(
        "operator_invariants",
        (|| {
            for (n, basis) in &bases {
                for (i, p) in basis.iter().enumerate() {
                    if let Err(e) = check_operator(p, &f) {
                        return Ok((false, format!("D_{n} basis {i}: {e}")));
                    }
                }
            }
            Ok((true, String::new()))
        })(),
    ));
    out.push(check(
        "check_mP",
        (|| {
            for (n, basis) in &bases {
                for (i, p) in basis.iter().enumerate() {
                    for d in 1..=n + 1 {
                        if !check_m_p(p, d, &f)? {
                            return Ok((false, format!("D_{n} basis {i} fails at d = {d}")));
                        }
                    }
                }
            }
            Ok((true, String::new()))
        })(),
    ));
    out.push(check("epi_simplicial", epi_simplicial_holds(&bases, 4).map(|b| (b, "m ≤ 4".into()))));
    out.push(check(
        "symbol_exactness",
        (|| {
            let mut lines = Vec::new();
            let mut pass = true;
            for n in 1..=order {
                let r = symbol_exactness(&f, n, window)?;
                pass &= r.exact();
                lines.push(format!(
                    "n={n}: dim D_n {}, symbol space {}, rank {}, degenerate {}",
                    r.dim_dn, r.dim_symbol_space, r.symbol_rank, r.dim_degenerate
                ));
            }
            Ok((pass, lines.join("; ")))
        })(),
    ));
    out.push(check(
        "compose_closure",
        (|| {
            let grade0: Vec<_> = bases
                .values()
                .flatten()
                .filter(|p| p.order() > 0 && p.total_grades() == [0])
                .cloned()
                .collect();
            if grade0.is_empty() {
                return Ok((true, "no grade zero operators".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for trial in 0..20 {
                let a = &grade0[rng.gen_range(0..grade0.len())];
                let b = &grade0[rng.gen_range(0..grade0.len())];
                let c = compose_d(a, b, &f)?;
                if check_operator(&c, &f).is_err() {
                    return Ok((false, format!("trial {trial}: composite fails the operator checks")));
                }
            }
            Ok((true, "20 seeded pairs".into()))
        })(),
    ));
    out
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows((0..rows).map(|_| (0..cols).map(|_| q(rng.gen_range(-3..=3))).collect()).collect())
}

fn normal_form_soundness(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = EndProp::new(2);
    for trial in 0..50 {
        let e = random_expr(&mut rng, 4, 4);
        let mut values = BTreeMap::new();
        for g in e.generators() {
            let m = random_matrix(&mut rng, 1 << g.outputs, 1 << g.inputs);
            values.insert(g.name.clone(), m);
        }
        let assign = |g: &pprop::prop::Generator| Ok(values[&g.name].clone());
        let lhs = eval_expr(&p, &e, &assign)?;
        let rhs = eval_normal_form(&p, &normalize(&e)?, &assign)?;
        if lhs != rhs {
            return Ok((false, format!("trial {trial}: {e}")));
        }
    }
    Ok((true, "50 seeded expressions".into()))
}
