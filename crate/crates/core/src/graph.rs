//! Directed acyclic planar graphs with genus marks.
//!
//! Half-edges are addressed by ports `(vertex, kind, index)`. Each vertex
//! lists its inputs and then its outputs, which is exactly the gathered
//! cyclic order. Data flows from inputs (top) to outputs (bottom); an edge
//! joins an output port of one vertex to an input port of another.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortKind {
    In,
    Out,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Port {
    pub vertex: usize,
    pub kind: PortKind,
    pub index: usize,
}

impl fmt::Debug for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            PortKind::In => "in",
            PortKind::Out => "out",
        };
        write!(f, "v{}.{}{}", self.vertex, k, self.index)
    }
}

impl Port {
    pub fn input(vertex: usize, index: usize) -> Self {
        Port {
            vertex,
            kind: PortKind::In,
            index,
        }
    }

    pub fn output(vertex: usize, index: usize) -> Self {
        Port {
            vertex,
            kind: PortKind::Out,
            index,
        }
    }
}

/// A single-vertex graph: arities and genus mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Corolla {
    pub n_in: usize,
    pub n_out: usize,
    #[serde(default)]
    pub mark: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanarGraph {
    pub vertices: Vec<Corolla>,
    /// `(output port, input port)` pairs.
    pub edges: Vec<(Port, Port)>,
    /// Graph inputs, left to right; each is an unglued vertex input.
    pub inputs: Vec<Port>,
    /// Graph outputs, left to right; each is an unglued vertex output.
    pub outputs: Vec<Port>,
}

/// A pending strand on the frontier: the upstream end of an edge, or a
/// graph input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strand {
    Out(usize, usize),
    GraphInput(usize),
}

impl fmt::Display for Strand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strand::Out(v, i) => write!(f, "v{v}.out{i}"),
            Strand::GraphInput(i) => write!(f, "in{i}"),
        }
    }
}

/// One extracted vertex with its padding at extraction time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Level {
    pub vertex: usize,
    pub left: usize,
    pub right: usize,
}

/// Canonical level embedding: levels listed bottom-up, and the frontier
/// below each level (the last entry is the frontier above the top level).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelEmbedding {
    pub levels: Vec<Level>,
    pub frontiers: Vec<Vec<Strand>>,
}

impl LevelEmbedding {
    pub fn order(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.vertex).collect()
    }
}

/// The homological data entering the genus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenusReport {
    pub h0: i64,
    pub h1: i64,
    pub marks: i64,
    pub genus: i64,
}

impl PlanarGraph {
    pub fn corolla(n_in: usize, n_out: usize, mark: i64) -> Self {
        PlanarGraph {
            vertices: vec![Corolla { n_in, n_out, mark }],
            edges: Vec::new(),
            inputs: (0..n_in).map(|i| Port::input(0, i)).collect(),
            outputs: (0..n_out).map(|i| Port::output(0, i)).collect(),
        }
    }

    pub fn empty() -> Self {
        PlanarGraph {
            vertices: Vec::new(),
            edges: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn shifted(&self, by: usize) -> PlanarGraph {
        let s = |p: &Port| Port {
            vertex: p.vertex + by,
            ..*p
        };
        PlanarGraph {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|(a, b)| (s(a), s(b))).collect(),
            inputs: self.inputs.iter().map(s).collect(),
            outputs: self.outputs.iter().map(s).collect(),
        }
    }

    /// Side-by-side juxtaposition, `left` first.
    pub fn horizontal(left: &PlanarGraph, right: &PlanarGraph) -> PlanarGraph {
        let r = right.shifted(left.vertices.len());
        let mut g = left.clone();
        g.vertices.extend(r.vertices);
        g.edges.extend(r.edges);
        g.inputs.extend(r.inputs);
        g.outputs.extend(r.outputs);
        g
    }

    /// Grafts the outputs of `upper` onto the inputs of `lower`, in order.
    /// Vertices of `lower` come first.
    pub fn vertical(lower: &PlanarGraph, upper: &PlanarGraph) -> Result<PlanarGraph> {
        if lower.inputs.len() != upper.outputs.len() {
            return Err(Error::Arity(format!(
                "vertical grafting of {} outputs onto {} inputs",
                upper.outputs.len(),
                lower.inputs.len()
            )));
        }
        let u = upper.shifted(lower.vertices.len());
        let mut g = lower.clone();
        g.vertices.extend(u.vertices);
        g.edges.extend(u.edges);
        g.edges.extend(u.outputs.iter().copied().zip(lower.inputs.iter().copied()));
        g.inputs = u.inputs;
        Ok(g)
    }

    /// Checks port ranges, the pairing of half-edges and acyclicity.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        let mut seen: BTreeSet<Port> = BTreeSet::new();
        let mut claim = |p: Port, what: &str| -> Result<()> {
            if p.vertex >= nv {
                return Err(Error::Graph(format!("{what} refers to missing vertex {}", p.vertex)));
            }
            let c = self.vertices[p.vertex];
            let bound = match p.kind {
                PortKind::In => c.n_in,
                PortKind::Out => c.n_out,
            };
            if p.index >= bound {
                return Err(Error::Graph(format!("{what} uses nonexistent port {p:?}")));
            }
            if !seen.insert(p) {
                return Err(Error::Graph(format!("half-edge {p:?} is used twice")));
            }
            Ok(())
        };
        for (a, b) in &self.edges {
            if a.kind != PortKind::Out || b.kind != PortKind::In {
                return Err(Error::Graph(format!(
                    "decoration mismatch: edge {a:?} -> {b:?} must join an output to an input"
                )));
            }
            claim(*a, "edge")?;
            claim(*b, "edge")?;
        }
        for p in &self.inputs {
            if p.kind != PortKind::In {
                return Err(Error::Graph(format!("graph input {p:?} is not a vertex input")));
            }
            claim(*p, "graph input")?;
        }
        for p in &self.outputs {
            if p.kind != PortKind::Out {
                return Err(Error::Graph(format!("graph output {p:?} is not a vertex output")));
            }
            claim(*p, "graph output")?;
        }
        let total: usize = self.vertices.iter().map(|c| c.n_in + c.n_out).sum();
        if seen.len() != total {
            let dangling = self
                .vertices
                .iter()
                .enumerate()
                .flat_map(|(v, c)| {
                    (0..c.n_in)
                        .map(move |i| Port::input(v, i))
                        .chain((0..c.n_out).map(move |i| Port::output(v, i)))
                })
                .find(|p| !seen.contains(p))
                .expect("some port is unclaimed");
            return Err(Error::Graph(format!("dangling half-edge {dangling:?}")));
        }
        self.topological_order().map(|_| ())
    }

    /// Kahn's algorithm along edge direction (upstream first).
    fn topological_order(&self) -> Result<Vec<usize>> {
        let nv = self.vertices.len();
        let mut indeg = vec![0usize; nv];
        let mut succ = vec![Vec::new(); nv];
        for (a, b) in &self.edges {
            succ[a.vertex].push(b.vertex);
            indeg[b.vertex] += 1;
        }
        let mut queue: VecDeque<usize> = (0..nv).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(nv);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        if order.len() < nv {
            let stuck = (0..nv).find(|&v| indeg[v] > 0).expect("a vertex on a cycle");
            return Err(Error::Cycle(stuck));
        }
        Ok(order)
    }

    pub fn is_essential(&self) -> bool {
        self.vertices.iter().all(|c| c.n_in >= 1 && c.n_out >= 1)
    }

    fn first_non_essential(&self) -> Option<usize> {
        self.vertices.iter().position(|c| c.n_in == 0 || c.n_out == 0)
    }

    pub fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for (a, b) in &self.edges {
            let (x, y) = (find(&mut parent, a.vertex), find(&mut parent, b.vertex));
            parent[x] = y;
        }
        (0..self.vertices.len()).filter(|&v| find(&mut parent, v) == v).count()
    }

    /// `dim H_1 − dim H_0 + 1 + Σ γ(v)`.
    pub fn genus_report(&self) -> GenusReport {
        let h0 = self.components() as i64;
        let h1 = self.edges.len() as i64 - self.vertices.len() as i64 + h0;
        let marks: i64 = self.vertices.iter().map(|c| c.mark).sum();
        GenusReport {
            h0,
            h1,
            marks,
            genus: h1 - h0 + 1 + marks,
        }
    }

    pub fn genus(&self) -> i64 {
        self.genus_report().genus
    }

    /// The strand feeding input port `j` of vertex `v`.
    fn feeder(&self, v: usize, j: usize) -> Strand {
        let target = Port::input(v, j);
        if let Some((a, _)) = self.edges.iter().find(|(_, b)| *b == target) {
            return Strand::Out(a.vertex, a.index);
        }
        let pos = self
            .inputs
            .iter()
            .position(|p| *p == target)
            .expect("validated graphs glue every input");
        Strand::GraphInput(pos)
    }

    fn initial_frontier(&self) -> Vec<Strand> {
        self.outputs.iter().map(|p| Strand::Out(p.vertex, p.index)).collect()
    }

    /// Positions of the outputs of `v` in the frontier, if all are present.
    fn output_positions(&self, frontier: &[Strand], v: usize) -> Option<Vec<usize>> {
        (0..self.vertices[v].n_out)
            .map(|k| frontier.iter().position(|s| *s == Strand::Out(v, k)))
            .collect()
    }

    fn extract(&self, frontier: &[Strand], v: usize, start: usize) -> Vec<Strand> {
        let c = self.vertices[v];
        let mut next = frontier[..start].to_vec();
        next.extend((0..c.n_in).map(|j| self.feeder(v, j)));
        next.extend_from_slice(&frontier[start + c.n_out..]);
        next
    }

    fn trace(frontiers: &[Vec<Strand>]) -> Vec<Vec<String>> {
        frontiers
            .iter()
            .map(|f| f.iter().map(ToString::to_string).collect())
            .collect()
    }

    fn check_preconditions(&self) -> Result<()> {
        self.validate()?;
        if let Some(v) = self.first_non_essential() {
            return Err(Error::NotEssential(v));
        }
        Ok(())
    }

    /// The canonical level embedding: repeatedly extract, among vertices
    /// whose outputs are all pending, the one whose first output comes first;
    /// its outputs must be consecutive and in order.
    pub fn level_embed(&self) -> Result<LevelEmbedding> {
        self.check_preconditions()?;
        let mut frontier = self.initial_frontier();
        let mut frontiers = vec![frontier.clone()];
        let mut levels = Vec::new();
        let mut done = vec![false; self.vertices.len()];
        while levels.len() < self.vertices.len() {
            let choice = (0..self.vertices.len())
                .filter(|&v| !done[v])
                .filter_map(|v| self.output_positions(&frontier, v).map(|pos| (v, pos)))
                .min_by_key(|(_, pos)| pos.iter().copied().min());
            let Some((v, pos)) = choice else {
                return Err(Error::NotPlanar {
                    reason: "no remaining vertex has all of its outputs on the frontier".into(),
                    trace: Self::trace(&frontiers),
                });
            };
            let start = pos[0];
            if pos.iter().enumerate().any(|(k, &p)| p != start + k) {
                return Err(Error::NotPlanar {
                    reason: format!("outputs of vertex {v} are not consecutive and in order on the frontier"),
                    trace: Self::trace(&frontiers),
                });
            }
            let width = frontier.len();
            levels.push(Level {
                vertex: v,
                left: start,
                right: width - start - self.vertices[v].n_out,
            });
            done[v] = true;
            frontier = self.extract(&frontier, v, start);
            frontiers.push(frontier.clone());
        }
        let expected: Vec<Strand> = (0..self.inputs.len()).map(Strand::GraphInput).collect();
        if frontier != expected {
            return Err(Error::NotPlanar {
                reason: "the final frontier does not list the graph inputs in order".into(),
                trace: Self::trace(&frontiers),
            });
        }
        Ok(LevelEmbedding { levels, frontiers })
    }

    /// Exhaustive search over all extraction orders; `None` if no order
    /// yields a level embedding. Exponential, for cross-checks only.
    pub fn level_embed_backtrack(&self) -> Result<Option<Vec<usize>>> {
        self.check_preconditions()?;
        let expected: Vec<Strand> = (0..self.inputs.len()).map(Strand::GraphInput).collect();
        let mut order = Vec::new();
        let mut done = vec![false; self.vertices.len()];
        fn rec(
            g: &PlanarGraph,
            frontier: Vec<Strand>,
            order: &mut Vec<usize>,
            done: &mut [bool],
            expected: &[Strand],
        ) -> bool {
            if order.len() == g.vertices.len() {
                return frontier == expected;
            }
            for v in 0..g.vertices.len() {
                if done[v] {
                    continue;
                }
                let Some(pos) = g.output_positions(&frontier, v) else {
                    continue;
                };
                let start = pos.first().copied().unwrap_or(0);
                if pos.iter().enumerate().any(|(k, &p)| p != start + k) {
                    continue;
                }
                done[v] = true;
                order.push(v);
                if rec(g, g.extract(&frontier, v, start), order, done, expected) {
                    return true;
                }
                order.pop();
                done[v] = false;
            }
            false
        }
        let found = rec(self, self.initial_frontier(), &mut order, &mut done, &expected);
        Ok(found.then_some(order))
    }

    /// `H ∘_v G`: replace vertex `v` of `self` by `h`, splicing the vertices
    /// of `h` in at position `v`.
    pub fn substitute(&self, v: usize, h: &PlanarGraph) -> Result<PlanarGraph> {
        let Some(c) = self.vertices.get(v).copied() else {
            return Err(Error::Graph(format!("no vertex {v}")));
        };
        if h.inputs.len() != c.n_in || h.outputs.len() != c.n_out {
            return Err(Error::Arity(format!(
                "vertex {v} has arity ({}, {}) but the inserted graph has ({}, {})",
                c.n_in,
                c.n_out,
                h.inputs.len(),
                h.outputs.len()
            )));
        }
        let hv = h.vertices.len();
        let remap = |p: &Port| -> Port {
            let vertex = if p.vertex < v { p.vertex } else { p.vertex + hv - 1 };
            Port { vertex, ..*p }
        };
        let inner = |p: &Port| Port {
            vertex: p.vertex + v,
            ..*p
        };
        let resolve = |p: &Port| -> Port {
            if p.vertex == v {
                match p.kind {
                    PortKind::In => inner(&h.inputs[p.index]),
                    PortKind::Out => inner(&h.outputs[p.index]),
                }
            } else {
                remap(p)
            }
        };
        let mut vertices = self.vertices[..v].to_vec();
        vertices.extend_from_slice(&h.vertices);
        vertices.extend_from_slice(&self.vertices[v + 1..]);
        let mut edges: Vec<(Port, Port)> = self.edges.iter().map(|(a, b)| (resolve(a), resolve(b))).collect();
        edges.extend(h.edges.iter().map(|(a, b)| (inner(a), inner(b))));
        Ok(PlanarGraph {
            vertices,
            edges,
            inputs: self.inputs.iter().map(resolve).collect(),
            outputs: self.outputs.iter().map(resolve).collect(),
        })
    }

    /// Two corollas `a` (left) and `b` (right) side by side.
    pub fn horizontal_pair(a: Corolla, b: Corolla) -> PlanarGraph {
        PlanarGraph::horizontal(
            &PlanarGraph::corolla(a.n_in, a.n_out, a.mark),
            &PlanarGraph::corolla(b.n_in, b.n_out, b.mark),
        )
    }

    /// Corolla `upper` grafted onto corolla `lower` along all its outputs.
    pub fn vertical_pair(lower: Corolla, upper: Corolla) -> Result<PlanarGraph> {
        PlanarGraph::vertical(
            &PlanarGraph::corolla(lower.n_in, lower.n_out, lower.mark),
            &PlanarGraph::corolla(upper.n_in, upper.n_out, upper.mark),
        )
    }

    /// Two `(2, 2)` vertices joined by two edges with their order swapped.
    pub fn crossing() -> PlanarGraph {
        PlanarGraph {
            vertices: vec![
                Corolla { n_in: 2, n_out: 2, mark: 0 },
                Corolla { n_in: 2, n_out: 2, mark: 0 },
            ],
            edges: vec![
                (Port::output(1, 0), Port::input(0, 1)),
                (Port::output(1, 1), Port::input(0, 0)),
            ],
            inputs: vec![Port::input(1, 0), Port::input(1, 1)],
            outputs: vec![Port::output(0, 0), Port::output(0, 1)],
        }
    }

    /// Relabels vertices by the permutation `perm` (old index `i` becomes
    /// `perm[i]`). The graph is unchanged up to isomorphism.
    pub fn relabel(&self, perm: &[usize]) -> PlanarGraph {
        let mut vertices = self.vertices.clone();
        for (i, &j) in perm.iter().enumerate() {
            vertices[j] = self.vertices[i];
        }
        let m = |p: &Port| Port {
            vertex: perm[p.vertex],
            ..*p
        };
        PlanarGraph {
            vertices,
            edges: self.edges.iter().map(|(a, b)| (m(a), m(b))).collect(),
            inputs: self.inputs.iter().map(m).collect(),
            outputs: self.outputs.iter().map(m).collect(),
        }
    }
}

/// Deterministic generator of planar graphs: starting from a corolla,
/// repeatedly replace a vertex by a horizontal or vertical pair of corollas
/// with the same boundary. `choices` drives every decision.
pub fn grow(n_in: usize, n_out: usize, steps: usize, choices: &mut impl FnMut(usize) -> usize) -> PlanarGraph {
    let mut g = PlanarGraph::corolla(n_in, n_out, 0);
    for _ in 0..steps {
        let v = choices(g.vertices.len());
        let c = g.vertices[v];
        let can_split_h = c.n_in >= 2 && c.n_out >= 2;
        let h = if can_split_h && choices(2) == 0 {
            let a_in = 1 + choices(c.n_in - 1);
            let a_out = 1 + choices(c.n_out - 1);
            PlanarGraph::horizontal_pair(
                Corolla { n_in: a_in, n_out: a_out, mark: 0 },
                Corolla { n_in: c.n_in - a_in, n_out: c.n_out - a_out, mark: 0 },
            )
        } else {
            let k = 1 + choices(3);
            PlanarGraph::vertical_pair(
                Corolla { n_in: k, n_out: c.n_out, mark: 0 },
                Corolla { n_in: c.n_in, n_out: k, mark: 0 },
            )
            .expect("arities agree")
        };
        // A horizontal pair has genus −1, so the replaced vertex must carry
        // the same mark for the genus to be preserved.
        let mut h = h;
        let hg = h.genus();
        h.vertices[0].mark += c.mark - hg;
        g = g.substitute(v, &h).expect("arities agree");
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_corolla() {
        let g = PlanarGraph::corolla(2, 1, 0);
        g.validate().unwrap();
        assert!(g.is_essential());
        assert_eq!(g.genus(), 0);
        assert!(!PlanarGraph::corolla(0, 2, 0).is_essential());
    }

    #[test]
    fn cycle_detected() {
        let g = PlanarGraph {
            vertices: vec![Corolla { n_in: 1, n_out: 1, mark: 0 }; 2],
            edges: vec![
                (Port::output(0, 0), Port::input(1, 0)),
                (Port::output(1, 0), Port::input(0, 0)),
            ],
            inputs: vec![],
            outputs: vec![],
        };
        assert!(matches!(g.validate(), Err(Error::Cycle(_))));
    }

    #[test]
    fn output_to_output_rejected() {
        let g = PlanarGraph {
            vertices: vec![Corolla { n_in: 0, n_out: 1, mark: 0 }; 2],
            edges: vec![(Port::output(0, 0), Port::output(1, 0))],
            inputs: vec![],
            outputs: vec![],
        };
        let err = g.validate().unwrap_err().to_string();
        assert!(err.contains("decoration mismatch"), "{err}");
    }

    #[test]
    fn dangling_rejected() {
        let mut g = PlanarGraph::corolla(1, 1, 0);
        g.outputs.clear();
        assert!(g.validate().is_err());
    }

    #[test]
    fn horizontal_pair_embeds_left_to_right() {
        let a = Corolla { n_in: 1, n_out: 2, mark: 0 };
        let b = Corolla { n_in: 2, n_out: 1, mark: 0 };
        let e = PlanarGraph::horizontal_pair(a, b).level_embed().unwrap();
        assert_eq!(e.order(), vec![0, 1]);
        assert_eq!(e.levels[0], Level { vertex: 0, left: 0, right: 1 });
        assert_eq!(e.levels[1], Level { vertex: 1, left: 1, right: 0 });
    }

    #[test]
    fn vertical_pair_embeds_bottom_up() {
        let lower = Corolla { n_in: 2, n_out: 1, mark: 0 };
        let upper = Corolla { n_in: 1, n_out: 2, mark: 0 };
        let g = PlanarGraph::vertical_pair(lower, upper).unwrap();
        assert_eq!(g.level_embed().unwrap().order(), vec![0, 1]);
        assert_eq!(g.genus(), 1);
    }

    #[test]
    fn crossing_is_not_planar() {
        let g = PlanarGraph::crossing();
        g.validate().unwrap();
        assert!(matches!(g.level_embed(), Err(Error::NotPlanar { .. })));
        assert_eq!(g.level_embed_backtrack().unwrap(), None);
    }

    #[test]
    fn genus_cases() {
        let a = Corolla { n_in: 1, n_out: 1, mark: 2 };
        let b = Corolla { n_in: 1, n_out: 1, mark: 3 };
        assert_eq!(PlanarGraph::horizontal_pair(a, b).genus(), 4);
        for p in 1..5 {
            let lower = Corolla { n_in: p, n_out: 1, mark: 0 };
            let upper = Corolla { n_in: 1, n_out: p, mark: 0 };
            assert_eq!(PlanarGraph::vertical_pair(lower, upper).unwrap().genus(), p as i64 - 1);
        }
    }

    #[test]
    fn substituting_a_corolla_changes_nothing() {
        let g = PlanarGraph::vertical_pair(
            Corolla { n_in: 2, n_out: 1, mark: 0 },
            Corolla { n_in: 1, n_out: 2, mark: 0 },
        )
        .unwrap();
        assert_eq!(g.substitute(1, &PlanarGraph::corolla(1, 2, 0)).unwrap(), g);
    }

    #[test]
    fn chain_into_chain() {
        let chain = PlanarGraph::vertical_pair(
            Corolla { n_in: 1, n_out: 1, mark: 0 },
            Corolla { n_in: 1, n_out: 1, mark: 0 },
        )
        .unwrap();
        let g = chain.substitute(0, &chain).unwrap();
        g.validate().unwrap();
        assert_eq!(g.vertices.len(), 3);
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.level_embed().unwrap().order(), vec![0, 1, 2]);
    }
}
