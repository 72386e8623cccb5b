//! `pprop`: batch driver producing deterministic JSON reports.
//!
//! Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 truncation.

mod report;
mod suite;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pprop::algebra::{derivations, is_formally_smooth_witness, load_algebra, AlgebraMorphism, FinAlgebra, MultiLinearMap};
use pprop::aut::{from_derivations, surjectivity_probe, validate_aut, DEFAULT_N};
use pprop::diffop::{bullet_h, bullet_v, compose_d, solve_shape, symbol, DiffOperator, GradeWindow, OperatorData};
use pprop::graph::PlanarGraph;
use pprop::linalg::q;
use pprop::partition::OrderedPartition;
use pprop::prop::{normalize, parse};
use pprop::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use report::{emit, render, Header};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "pprop", version, about = "Planar props and multi-differential operators")]
struct Cli {
    /// Algebra spec (JSON).
    #[arg(long, global = true)]
    algebra: Option<PathBuf>,
    /// Operator order n, or truncation length for automorphism families.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Input shape λ as comma separated parts.
    #[arg(long, global = true)]
    shape: Option<String>,
    /// Output type π as comma separated parts.
    #[arg(long = "type", global = true)]
    out_type: Option<String>,
    /// Total output grade `g` or window `lo..hi`.
    #[arg(long, global = true)]
    grade: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cross-check planarity by exhaustive search.
    #[arg(long, global = true)]
    backtrack_planarity: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Typed vertical composition, outer operator first.
    V,
    /// Horizontal composition.
    H,
    /// Single slot composition of grade zero operators.
    D,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of operator spaces per total grade.
    Dims,
    /// Basis of an operator space.
    Solve,
    /// Composes two operator files.
    Compose {
        #[arg(long, value_enum, default_value = "v")]
        mode: Mode,
        left: PathBuf,
        right: PathBuf,
    },
    /// Finest component of an operator file.
    Symbol { file: PathBuf },
    /// Runs the invariant suite.
    Verify,
    /// Normal form of an expression file.
    Normalize { file: PathBuf },
    /// Canonical level order and genus of a graph file.
    Graph { file: PathBuf },
    /// Builds an automorphism family from seeded double derivations.
    AutBuild {
        #[arg(long, default_value_t = 1)]
        letters: usize,
    },
    /// Surjectivity probe for the comparison map.
    AutProbe,
}

/// A finished command: its output text and whether every check passed.
struct Outcome {
    text: String,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(cli.out.as_deref(), &outcome.text) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Truncation { .. } => 3,
        _ => 2,
    }
}

fn read(path: &Path) -> pprop::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Json(format!("{}: {e}", path.display())))
}

fn parse_parts(s: &str) -> pprop::Result<OrderedPartition> {
    let parts = s
        .split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| Error::Parse { pos: 0, msg: format!("{x:?}: {e}") }))
        .collect::<pprop::Result<Vec<_>>>()?;
    Ok(OrderedPartition::new(parts))
}

fn parse_window(s: Option<&str>, default: GradeWindow) -> pprop::Result<GradeWindow> {
    let Some(s) = s else { return Ok(default) };
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| Error::Parse { pos: 0, msg: format!("grade {x:?}: {e}") });
    match s.split_once("..") {
        Some((lo, hi)) => Ok(GradeWindow { lo: num(lo)?, hi: num(hi)? }),
        None => Ok(GradeWindow::exact(num(s)?)),
    }
}

impl Cli {
    fn algebra(&self) -> pprop::Result<FinAlgebra> {
        let path = self.algebra.as_ref().ok_or_else(|| Error::Algebra("--algebra is required".into()))?;
        load_algebra(&read(path)?)
    }

    /// Shape and type from `--shape`/`--type`, or `(n)` typed `(1)`.
    fn shape_and_type(&self) -> pprop::Result<(OrderedPartition, OrderedPartition)> {
        let shape = match (&self.shape, self.order) {
            (Some(s), _) => parse_parts(s)?,
            (None, Some(n)) => OrderedPartition::trivial(n),
            (None, None) => return Err(Error::Operator("give --order or --shape".into())),
        };
        let out_type = match &self.out_type {
            Some(t) => parse_parts(t)?,
            None => OrderedPartition::trivial(shape.d()),
        };
        Ok((shape, out_type))
    }

    fn header(&self, command: &str, alg: Option<&FinAlgebra>) -> Header {
        Header::new(command, self.seed, alg)
    }
}

fn load_operator(path: &Path) -> pprop::Result<DiffOperator> {
    let data: OperatorData = serde_json::from_str(&read(path)?)?;
    DiffOperator::from_data(&data)
}

fn operators_json(ops: impl IntoIterator<Item = DiffOperator>) -> Value {
    Value::Array(ops.into_iter().map(|op| serde_json::to_value(op.to_data()).expect("operator serializes")).collect())
}

fn run(cli: &Cli) -> pprop::Result<Outcome> {
    let done = |text: String| Ok(Outcome { text, ok: true });
    match &cli.command {
        Command::Dims | Command::Solve => {
            let alg = cli.algebra()?;
            let f = AlgebraMorphism::identity(&alg);
            let (shape, out_type) = cli.shape_and_type()?;
            let window = parse_window(cli.grade.as_deref(), GradeWindow::exact(0))?;
            let space = solve_shape(&f, &shape, &out_type, window)?;
            let mut result = json!({
                "shape": shape.parts(),
                "type": out_type.parts(),
                "window": [window.lo, window.hi],
                "dim": space.dim(),
            });
            if matches!(cli.command, Command::Dims) {
                let by_grade: serde_json::Map<String, Value> = space
                    .dims_by_grade()
                    .into_iter()
                    .map(|(g, d)| {
                        let (p, qq, genus) = space.bigrade(g);
                        (g.to_string(), json!({ "dim": d, "outputs": p, "inputs": qq, "genus": genus }))
                    })
                    .collect();
                result["by_grade"] = Value::Object(by_grade);
                done(render(&cli.header("dims", Some(&alg)), result))
            } else {
                result["basis"] = operators_json(space.basis);
                done(render(&cli.header("solve", Some(&alg)), result))
            }
        }
        Command::Compose { mode, left, right } => {
            let alg = cli.algebra()?;
            let f = AlgebraMorphism::identity(&alg);
            let (a, b) = (load_operator(left)?, load_operator(right)?);
            let terms: Vec<DiffOperator> = match mode {
                Mode::V => bullet_v(&a, &b, &f)?.terms().cloned().collect(),
                Mode::H => vec![bullet_h(&a, &b)],
                Mode::D => vec![compose_d(&a, &b, &f)?],
            };
            done(render(&cli.header("compose", Some(&alg)), json!({ "terms": operators_json(terms) })))
        }
        Command::Symbol { file } => {
            let op = load_operator(file)?;
            let s = symbol(&op)?;
            done(render(&cli.header("symbol", None), serde_json::to_value(s.to_data())?))
        }
        Command::Verify => {
            let text = read(cli.algebra.as_ref().ok_or_else(|| Error::Algebra("--algebra is required".into()))?)?;
            // the axioms are a named check here, so parse without validating
            let alg: FinAlgebra = serde_json::from_str(&text)?;
            let order = cli.order.unwrap_or(2);
            let default = if alg.dim() <= 2 { GradeWindow::up_to(1) } else { GradeWindow::exact(0) };
            let window = parse_window(cli.grade.as_deref(), default)?;
            let checks = suite::run(&alg, order, window, cli.seed);
            let ok = checks.iter().all(|c| c.pass);
            let result = json!({ "order": order, "window": [window.lo, window.hi], "all_pass": ok, "checks": checks });
            Ok(Outcome { text: render(&cli.header("verify", Some(&alg)), result), ok })
        }
        Command::Normalize { file } => {
            let e = parse(read(file)?.trim())?;
            Ok(Outcome { text: format!("{}\n", normalize(&e)?), ok: true })
        }
        Command::Graph { file } => {
            let g: PlanarGraph = serde_json::from_str(&read(file)?)?;
            g.validate()?;
            let genus = g.genus_report();
            let mut result = json!({ "genus": genus });
            let planar = match g.level_embed() {
                Ok(emb) => {
                    result["planar"] = json!(true);
                    result["order"] = json!(emb.order());
                    result["levels"] = json!(emb.levels);
                    true
                }
                Err(Error::NotPlanar { reason, trace }) => {
                    result["planar"] = json!(false);
                    result["reason"] = json!(reason);
                    result["frontier_trace"] = json!(trace);
                    false
                }
                Err(e) => return Err(e),
            };
            let mut ok = planar;
            if cli.backtrack_planarity {
                let agrees = g.level_embed_backtrack()?.is_some() == planar;
                result["backtrack_agrees"] = json!(agrees);
                ok &= agrees;
            }
            Ok(Outcome { text: render(&cli.header("graph", None), result), ok })
        }
        Command::AutBuild { letters } => {
            let alg = cli.algebra()?;
            let f = AlgebraMorphism::identity(&alg);
            let n = cli.order.unwrap_or(DEFAULT_N);
            let basis = derivations(&f, 1);
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let derivs: Vec<MultiLinearMap> = (0..*letters)
                .map(|_| {
                    let mut d = MultiLinearMap::zero(1, 1);
                    for b in &basis {
                        d.add_scaled(b, &q(rng.gen_range(-2..=2)));
                    }
                    d
                })
                .collect();
            let names = (1..=*letters).map(|i| format!("h{i}")).collect();
            let phi = from_derivations(names, &derivs, n, &alg)?;
            validate_aut(&phi, &alg)?;
            let family: Value = serde_json::from_str(&phi.to_json(alg.dim()))?;
            let result = json!({ "double_derivations": basis.len(), "valid": true, "family": family });
            done(render(&cli.header("aut-build", Some(&alg)), result))
        }
        Command::AutProbe => {
            let alg = cli.algebra()?;
            let n = cli.order.unwrap_or(2);
            let smooth = is_formally_smooth_witness(&alg);
            let r = surjectivity_probe(&alg, n)?;
            let entries: Vec<Value> = r
                .entries
                .iter()
                .map(|e| {
                    json!({ "order": e.order, "grades": e.grades, "target_dim": e.target_dim,
                            "span_rank": e.span_rank, "spanned": e.spanned })
                })
                .collect();
            let ok = r.all_spanned();
            let result = json!({
                "smoothness": smooth.describe(),
                "derivations": r.der0,
                "double_derivations": r.der1,
                "failed_lifts": r.failed_lifts,
                "entries": entries,
                "r_images_valid": r.operators_valid,
                "degeneracy_square": r.kernel_square,
                "all_spanned": ok,
            });
            Ok(Outcome { text: render(&cli.header("aut-probe", Some(&alg)), result), ok })
        }
    }
}
