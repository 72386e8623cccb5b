//! Elementary props: expressions in `∘_h` and `∘_v`, normal forms, and
//! evaluation in any prop implementing [`ElementaryProp`].
//!
//! Arities are written `(m, n)` with `m` outputs and `n` inputs, so
//! `a ∘_v b` feeds the outputs of `b` into the inputs of `a`. In text,
//! `a#m,n` is a generator, `*` is horizontal and `.` is vertical composition
//! (lower precedence), `u`, `u0` and `u^k` are units.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::PlanarGraph;
use crate::linalg::{q, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub outputs: usize,
    pub inputs: usize,
}

impl Generator {
    pub fn new(name: impl Into<String>, outputs: usize, inputs: usize) -> Self {
        Generator {
            name: name.into(),
            outputs,
            inputs,
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{},{}", self.name, self.outputs, self.inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropExpr {
    Gen(Generator),
    /// `u^k`; `k = 0` is the horizontal unit.
    Unit(usize),
    H(Vec<PropExpr>),
    V(Vec<PropExpr>),
}

impl PropExpr {
    pub fn gen(name: &str, outputs: usize, inputs: usize) -> Self {
        PropExpr::Gen(Generator::new(name, outputs, inputs))
    }

    pub fn h(items: Vec<PropExpr>) -> Self {
        PropExpr::H(items)
    }

    pub fn v(items: Vec<PropExpr>) -> Self {
        PropExpr::V(items)
    }

    /// `(outputs, inputs)`.
    pub fn arity(&self) -> Result<(usize, usize)> {
        match self {
            PropExpr::Gen(g) => Ok((g.outputs, g.inputs)),
            PropExpr::Unit(k) => Ok((*k, *k)),
            PropExpr::H(items) => items.iter().try_fold((0, 0), |(m, n), e| {
                let (a, b) = e.arity()?;
                Ok((m + a, n + b))
            }),
            PropExpr::V(items) => {
                let mut it = items.iter();
                let Some(first) = it.next() else {
                    return Err(Error::Arity("empty vertical composition".into()));
                };
                let (m, mut n) = first.arity()?;
                for e in it {
                    let (a, b) = e.arity()?;
                    if a != n {
                        return Err(Error::Arity(format!(
                            "vertical composition feeds {a} outputs into {n} inputs"
                        )));
                    }
                    n = b;
                }
                Ok((m, n))
            }
        }
    }

    pub fn generators(&self) -> Vec<Generator> {
        let mut out = Vec::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators(&self, out: &mut Vec<Generator>) {
        match self {
            PropExpr::Gen(g) => out.push(g.clone()),
            PropExpr::Unit(_) => {}
            PropExpr::H(items) | PropExpr::V(items) => items.iter().for_each(|e| e.collect_generators(out)),
        }
    }
}

impl fmt::Display for PropExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropExpr::Gen(g) => write!(f, "{g}"),
            PropExpr::Unit(0) => write!(f, "u0"),
            PropExpr::Unit(1) => write!(f, "u"),
            PropExpr::Unit(k) => write!(f, "u^{k}"),
            PropExpr::H(items) => {
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    match e {
                        PropExpr::H(_) | PropExpr::V(_) => write!(f, "({e})")?,
                        _ => write!(f, "{e}")?,
                    }
                }
                Ok(())
            }
            PropExpr::V(items) => {
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " . ")?;
                    }
                    match e {
                        PropExpr::V(_) => write!(f, "({e})")?,
                        _ => write!(f, "{e}")?,
                    }
                }
                Ok(())
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| self.err("number out of range"))
    }

    fn vertical(&mut self) -> Result<PropExpr> {
        let mut items = vec![self.horizontal()?];
        while self.eat(b'.') {
            items.push(self.horizontal()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PropExpr::V(items) })
    }

    fn horizontal(&mut self) -> Result<PropExpr> {
        let mut items = vec![self.atom()?];
        while self.eat(b'*') {
            items.push(self.atom()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { PropExpr::H(items) })
    }

    fn atom(&mut self) -> Result<PropExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.vertical()?;
                if !self.eat(b')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii identifier");
                if self.src.get(self.pos) == Some(&b'#') {
                    self.pos += 1;
                    let m = self.number()?;
                    if !self.eat(b',') {
                        return self.err("expected ',' between arities");
                    }
                    let n = self.number()?;
                    if m == 0 || n == 0 {
                        return Err(Error::Parse {
                            pos: start,
                            msg: format!("generator {name} needs at least one input and one output"),
                        });
                    }
                    return Ok(PropExpr::gen(name, m, n));
                }
                match name {
                    "u" if self.src.get(self.pos) == Some(&b'^') => {
                        self.pos += 1;
                        Ok(PropExpr::Unit(self.number()?))
                    }
                    "u" => Ok(PropExpr::Unit(1)),
                    "u0" => Ok(PropExpr::Unit(0)),
                    _ => Err(Error::Parse {
                        pos: start,
                        msg: format!("generator {name} lacks an arity '#m,n'"),
                    }),
                }
            }
            Some(c) => self.err(format!("unexpected character {:?}", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse(text: &str) -> Result<PropExpr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let e = p.vertical()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    e.arity()?;
    Ok(e)
}

/// One layer `u^left ∘_h a ∘_h u^right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub left: usize,
    pub gen: Generator,
    pub right: usize,
}

impl Layer {
    pub fn output_width(&self) -> usize {
        self.left + self.gen.outputs + self.right
    }

    pub fn input_width(&self) -> usize {
        self.left + self.gen.inputs + self.right
    }
}

/// A vertical product of layers, listed in product order: the first layer
/// is the bottom one and produces the outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub outputs: usize,
    pub inputs: usize,
    pub layers: Vec<Layer>,
}

impl NormalForm {
    /// The normal-form predicate exactly as stated, over every window
    /// `l..k−1`.
    pub fn satisfies_condition(&self) -> bool {
        let r = self.layers.len();
        for k in 0..r {
            for l in 0..k {
                let min = self.layers[l..k].iter().map(|x| x.left).min().expect("nonempty window");
                let lk = &self.layers[k];
                if lk.left < min && lk.left + lk.gen.outputs <= min {
                    return false;
                }
            }
        }
        true
    }

    /// The expression `(u^i ∘_h a ∘_h u^j) ∘_v ⋯`.
    pub fn to_expr(&self) -> PropExpr {
        if self.layers.is_empty() {
            return PropExpr::Unit(self.outputs);
        }
        let layer = |l: &Layer| {
            let mut items = Vec::new();
            if l.left > 0 {
                items.push(PropExpr::Unit(l.left));
            }
            items.push(PropExpr::Gen(l.gen.clone()));
            if l.right > 0 {
                items.push(PropExpr::Unit(l.right));
            }
            if items.len() == 1 {
                items.pop().unwrap()
            } else {
                PropExpr::H(items)
            }
        };
        if self.layers.len() == 1 {
            layer(&self.layers[0])
        } else {
            PropExpr::V(self.layers.iter().map(layer).collect())
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

/// Flattens to single-generator layers without reordering.
pub fn flatten(e: &PropExpr) -> Result<NormalForm> {
    let (outputs, inputs) = e.arity()?;
    let layers = match e {
        PropExpr::Gen(g) => vec![Layer {
            left: 0,
            gen: g.clone(),
            right: 0,
        }],
        PropExpr::Unit(_) => Vec::new(),
        PropExpr::H(items) => {
            let mut acc = NormalForm {
                outputs: 0,
                inputs: 0,
                layers: Vec::new(),
            };
            for item in items {
                let next = flatten(item)?;
                // acc ∘_h next = (acc ∘_h u^p) ∘_v (u^n ∘_h next)
                let mut layers: Vec<Layer> = acc
                    .layers
                    .into_iter()
                    .map(|l| Layer {
                        right: l.right + next.outputs,
                        ..l
                    })
                    .collect();
                layers.extend(next.layers.into_iter().map(|l| Layer {
                    left: l.left + acc.inputs,
                    ..l
                }));
                acc = NormalForm {
                    outputs: acc.outputs + next.outputs,
                    inputs: acc.inputs + next.inputs,
                    layers,
                };
            }
            acc.layers
        }
        PropExpr::V(items) => {
            let mut layers = Vec::new();
            for item in items {
                layers.extend(flatten(item)?.layers);
            }
            layers
        }
    };
    Ok(NormalForm {
        outputs,
        inputs,
        layers,
    })
}

/// Rewrites to the normal form by repeatedly swapping the lowest adjacent
/// pair in which the upper generator lies entirely to the left of the
/// lower one.
pub fn normalize(e: &PropExpr) -> Result<NormalForm> {
    let mut nf = flatten(e)?;
    normalize_layers(&mut nf.layers);
    Ok(nf)
}

fn normalize_layers(layers: &mut [Layer]) {
    loop {
        let violation = (1..layers.len()).find(|&k| layers[k].left + layers[k].gen.outputs <= layers[k - 1].left);
        let Some(k) = violation else { return };
        let lower = layers[k - 1].clone();
        let upper = layers[k].clone();
        let width = lower.output_width();
        let (m, n) = (upper.gen.outputs, upper.gen.inputs);
        layers[k - 1] = Layer {
            left: upper.left,
            right: width - upper.left - m,
            gen: upper.gen,
        };
        layers[k] = Layer {
            left: lower.left - m + n,
            right: lower.right,
            gen: lower.gen,
        };
    }
}

/// The contract of an elementary prop.
pub trait ElementaryProp {
    type Elem: Clone;

    /// `(outputs, inputs)` of an element.
    fn arity(&self, a: &Self::Elem) -> (usize, usize);
    fn unit(&self) -> Self::Elem;
    fn unit0(&self) -> Self::Elem;
    fn h_compose(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn v_compose(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;

    fn unit_power(&self, k: usize) -> Result<Self::Elem> {
        let mut acc = self.unit0();
        for _ in 0..k {
            acc = self.h_compose(&acc, &self.unit())?;
        }
        Ok(acc)
    }
}

/// Evaluates an expression, generators looked up through `assign`.
pub fn eval_expr<P: ElementaryProp>(
    p: &P,
    e: &PropExpr,
    assign: &dyn Fn(&Generator) -> Result<P::Elem>,
) -> Result<P::Elem> {
    match e {
        PropExpr::Gen(g) => {
            let x = assign(g)?;
            if p.arity(&x) != (g.outputs, g.inputs) {
                return Err(Error::Arity(format!("value for {g} has arity {:?}", p.arity(&x))));
            }
            Ok(x)
        }
        PropExpr::Unit(k) => p.unit_power(*k),
        PropExpr::H(items) => {
            let mut acc = p.unit0();
            for item in items {
                acc = p.h_compose(&acc, &eval_expr(p, item, assign)?)?;
            }
            Ok(acc)
        }
        PropExpr::V(items) => {
            let mut it = items.iter();
            let first = it.next().ok_or_else(|| Error::Arity("empty vertical composition".into()))?;
            let mut acc = eval_expr(p, first, assign)?;
            for item in it {
                acc = p.v_compose(&acc, &eval_expr(p, item, assign)?)?;
            }
            Ok(acc)
        }
    }
}

/// Folds a layer list through the prop operations.
pub fn eval_normal_form<P: ElementaryProp>(
    p: &P,
    nf: &NormalForm,
    assign: &dyn Fn(&Generator) -> Result<P::Elem>,
) -> Result<P::Elem> {
    eval_expr(p, &nf.to_expr(), assign)
}

/// Evaluates a labeled graph through its canonical level embedding.
pub fn eval_graph<P: ElementaryProp>(p: &P, g: &PlanarGraph, labels: &[P::Elem]) -> Result<P::Elem> {
    if labels.len() != g.vertices.len() {
        return Err(Error::Arity(format!(
            "{} labels for {} vertices",
            labels.len(),
            g.vertices.len()
        )));
    }
    for (v, (c, x)) in g.vertices.iter().zip(labels).enumerate() {
        if p.arity(x) != (c.n_out, c.n_in) {
            return Err(Error::Arity(format!(
                "label of vertex {v} has arity {:?}, vertex has ({}, {})",
                p.arity(x),
                c.n_out,
                c.n_in
            )));
        }
    }
    let embedding = g.level_embed()?;
    let nf = NormalForm {
        outputs: g.outputs.len(),
        inputs: g.inputs.len(),
        layers: embedding
            .levels
            .iter()
            .map(|l| Layer {
                left: l.left,
                right: l.right,
                gen: Generator::new(
                    format!("v{}", l.vertex),
                    g.vertices[l.vertex].n_out,
                    g.vertices[l.vertex].n_in,
                ),
            })
            .collect(),
    };
    let assign = |gen: &Generator| -> Result<P::Elem> {
        let v: usize = gen.name[1..].parse().expect("vertex generator name");
        Ok(labels[v].clone())
    };
    eval_normal_form(p, &nf, &assign)
}

/// Layers read off a graph's canonical level embedding, with generator
/// names taken from `names`.
pub fn graph_normal_form(g: &PlanarGraph, names: &[String]) -> Result<NormalForm> {
    let embedding = g.level_embed()?;
    Ok(NormalForm {
        outputs: g.outputs.len(),
        inputs: g.inputs.len(),
        layers: embedding
            .levels
            .iter()
            .map(|l| Layer {
                left: l.left,
                right: l.right,
                gen: Generator::new(
                    names[l.vertex].clone(),
                    g.vertices[l.vertex].n_out,
                    g.vertices[l.vertex].n_in,
                ),
            })
            .collect(),
    })
}

/// The planar graph of an expression, vertices listed bottom-up in the
/// order of its flattened layers. Fails when some strand meets no vertex.
pub fn expr_to_graph(e: &PropExpr) -> Result<(PlanarGraph, Vec<Generator>)> {
    use crate::graph::{Corolla, Port};

    #[derive(Clone, Copy)]
    enum Target {
        GraphOutput(usize),
        Input(Port),
    }
    let nf = flatten(e)?;
    let mut frontier: Vec<Target> = (0..nf.outputs).map(Target::GraphOutput).collect();
    let mut g = PlanarGraph::empty();
    g.outputs = vec![Port::output(usize::MAX, 0); nf.outputs];
    let mut gens = Vec::new();
    for layer in &nf.layers {
        let v = g.vertices.len();
        g.vertices.push(Corolla {
            n_in: layer.gen.inputs,
            n_out: layer.gen.outputs,
            mark: 0,
        });
        gens.push(layer.gen.clone());
        for (t, target) in frontier[layer.left..layer.left + layer.gen.outputs].iter().enumerate() {
            match target {
                Target::GraphOutput(k) => g.outputs[*k] = Port::output(v, t),
                Target::Input(p) => g.edges.push((Port::output(v, t), *p)),
            }
        }
        let inputs = (0..layer.gen.inputs).map(|j| Target::Input(Port::input(v, j)));
        frontier.splice(layer.left..layer.left + layer.gen.outputs, inputs);
    }
    for target in frontier {
        match target {
            Target::Input(p) => g.inputs.push(p),
            Target::GraphOutput(k) => {
                return Err(Error::Graph(format!("output strand {k} passes through without meeting a vertex")))
            }
        }
    }
    Ok((g, gens))
}

/// The endomorphism prop of a `dim`-dimensional space: `P(m, n)` is the
/// space of `dim^m × dim^n` matrices.
#[derive(Debug, Clone, Copy)]
pub struct EndProp {
    pub dim: usize,
}

impl EndProp {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        EndProp { dim }
    }

    fn power_log(&self, size: usize) -> usize {
        if self.dim == 1 {
            // Every power is 1; arity is not recoverable from shape alone.
            return usize::from(size > 0);
        }
        let mut k = 0;
        let mut s = 1;
        while s < size {
            s *= self.dim;
            k += 1;
        }
        k
    }
}

impl ElementaryProp for EndProp {
    type Elem = Matrix;

    fn arity(&self, a: &Matrix) -> (usize, usize) {
        (self.power_log(a.rows), self.power_log(a.cols))
    }

    fn unit(&self) -> Matrix {
        Matrix::identity(self.dim)
    }

    fn unit0(&self) -> Matrix {
        Matrix::from_rows(vec![vec![q(1)]])
    }

    fn h_compose(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        Ok(a.kron(b))
    }

    fn v_compose(&self, a: &Matrix, b: &Matrix) -> Result<Matrix> {
        a.mul(b)
    }
}

/// The two sides of the braid relation for `r ∈ End(V^{⊗2})`, evaluated
/// through the graphs of the two three-layer expressions.
pub fn braid_sides(r: &Matrix) -> Result<(Matrix, Matrix)> {
    let dim = (1..=r.rows).find(|d| d * d == r.rows).filter(|d| d * d == r.cols);
    let Some(dim) = dim else {
        return Err(Error::Arity(format!("{}x{} is not an endomorphism of V⊗V", r.rows, r.cols)));
    };
    let p = EndProp::new(dim);
    let lhs = parse("(s#2,2 * u) . (u * s#2,2) . (s#2,2 * u)")?;
    let rhs = parse("(u * s#2,2) . (s#2,2 * u) . (u * s#2,2)")?;
    let side = |e: &PropExpr| -> Result<Matrix> {
        let (g, gens) = expr_to_graph(e)?;
        eval_graph(&p, &g, &vec![r.clone(); gens.len()])
    };
    Ok((side(&lhs)?, side(&rhs)?))
}

pub fn braid_check(r: &Matrix) -> Result<bool> {
    let (a, b) = braid_sides(r)?;
    Ok(a == b)
}

/// The flip `x ⊗ y ↦ y ⊗ x` on `V ⊗ V`.
pub fn swap_matrix(dim: usize) -> Matrix {
    let mut m = Matrix::zeros(dim * dim, dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(j * dim + i, i * dim + j, q(1));
        }
    }
    m
}

/// Random expressions for property tests: `n_gens` generators with
/// arities in `1..=2`, composed arbitrarily, with widths at most
/// `max_width`.
pub fn random_expr(rng: &mut impl rand::Rng, n_gens: usize, max_width: usize) -> PropExpr {
    let mut counter;
    loop {
        counter = 0;
        let e = random_build(rng, n_gens, &mut counter);
        if flatten(&e).map(|nf| max_width_of(&nf) <= max_width).unwrap_or(false) {
            return e;
        }
    }
}

/// Largest number of strands crossing any horizontal line.
pub fn max_width_of(nf: &NormalForm) -> usize {
    nf.layers
        .iter()
        .flat_map(|l| [l.input_width(), l.output_width()])
        .chain([nf.inputs, nf.outputs])
        .max()
        .unwrap_or(0)
}

fn fresh(rng: &mut impl rand::Rng, counter: &mut usize, outputs: Option<usize>) -> PropExpr {
    let name = format!("g{counter}");
    *counter += 1;
    let m = outputs.unwrap_or_else(|| rng.gen_range(1..=2));
    PropExpr::gen(&name, m, rng.gen_range(1..=2))
}

fn random_build(rng: &mut impl rand::Rng, gens: usize, counter: &mut usize) -> PropExpr {
    if gens == 0 {
        return PropExpr::Unit(rng.gen_range(0..=2));
    }
    if gens == 1 {
        let g = fresh(rng, counter, None);
        return match rng.gen_range(0..3) {
            0 => g,
            1 => PropExpr::h(vec![PropExpr::Unit(rng.gen_range(0..=1)), g]),
            _ => PropExpr::h(vec![g, PropExpr::Unit(1)]),
        };
    }
    let left = rng.gen_range(1..gens);
    if rng.gen_bool(0.5) {
        PropExpr::h(vec![random_build(rng, left, counter), random_build(rng, gens - left, counter)])
    } else {
        let lower = random_build(rng, left, counter);
        let (_, n) = lower.arity().expect("built consistently");
        let upper = random_with_outputs(rng, gens - left, n, counter);
        PropExpr::v(vec![lower, upper])
    }
}

fn random_with_outputs(rng: &mut impl rand::Rng, gens: usize, outputs: usize, counter: &mut usize) -> PropExpr {
    if gens == 0 || outputs == 0 {
        return PropExpr::Unit(outputs);
    }
    if outputs == 1 || (outputs <= 2 && rng.gen_bool(0.5)) {
        let g = fresh(rng, counter, Some(outputs));
        let n = g.arity().expect("generator").1;
        if gens == 1 {
            return g;
        }
        return PropExpr::v(vec![g, random_with_outputs(rng, gens - 1, n, counter)]);
    }
    let k = rng.gen_range(1..outputs);
    let g1 = rng.gen_range(0..=gens);
    PropExpr::h(vec![
        random_with_outputs(rng, g1, k, counter),
        random_with_outputs(rng, gens - g1, outputs - k, counter),
    ])
}
