//! The shrinking map `f` (drop `x_n` and `y_n`) and the growing map `g` (add them back at
//! a complement pair), built from two primitives on a mutable graph: turning a node into
//! an edge and turning an edge back into a node.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::structure::{Node, NodeId, NodeKind, Structure, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("need at least {min} inputs, got {n}")]
    TooFewInputs { n: usize, min: usize },
    #[error("input structure is invalid: {0}")]
    Invalid(String),
    #[error("structure is not complexity-optimal (complexity {complexity}, optimum {optimum})")]
    NotComplexityOptimal { complexity: usize, optimum: usize },
    #[error("<{0}, {1}> is not a complement pair")]
    NotComplementPair(NodeId, NodeId),
    #[error("no live node {0}")]
    MissingNode(NodeId),
    #[error("no edge {0:?}")]
    MissingEdge(EdgeRef),
    #[error("merging {0:?} would give one node two {1} labels")]
    LabelConflict(EdgeRef, &'static str),
    #[error("node {0} cannot be expressed as a structure node")]
    BadArity(NodeId),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// An operand-to-consumer edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgeRef {
    pub from: NodeId,
    pub to: NodeId,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct GraphNode {
    ins: Vec<NodeId>,
    outs: Vec<NodeId>,
    input: Option<usize>,
    output: Option<usize>,
}

/// Mutable directed graph with input/output labels. Removed nodes leave tombstones so
/// that surviving ids stay stable across edits.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    nodes: Vec<Option<GraphNode>>,
}

/// Compares live nodes only, with edge lists as sets.
impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.live_view() == other.live_view()
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn from_structure(s: &Structure) -> Self {
        let mut nodes: Vec<Option<GraphNode>> = s
            .nodes()
            .iter()
            .map(|node| {
                Some(GraphNode {
                    ins: node.operands().map(|o| o.to_vec()).unwrap_or_default(),
                    outs: Vec::new(),
                    input: node.input_index(),
                    output: node.output,
                })
            })
            .collect();
        for id in s.ids() {
            nodes[id.0].as_mut().expect("fresh").outs = s.consumers(id).to_vec();
        }
        Graph { n: s.n(), nodes }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn live_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_some()).map(|(i, _)| NodeId(i))
    }

    pub fn live_count(&self) -> usize {
        self.nodes.iter().flatten().count()
    }

    pub fn has_edge(&self, e: EdgeRef) -> bool {
        self.get(e.from).is_ok_and(|n| n.outs.contains(&e.to))
    }

    fn live_view(&self) -> BTreeMap<NodeId, GraphNode> {
        self.live_ids()
            .map(|id| {
                let mut node = self.nodes[id.0].clone().expect("live");
                node.ins.sort_unstable();
                node.outs.sort_unstable();
                (id, node)
            })
            .collect()
    }

    fn get(&self, id: NodeId) -> Result<&GraphNode, TransformError> {
        self.nodes.get(id.0).and_then(Option::as_ref).ok_or(TransformError::MissingNode(id))
    }

    fn get_mut(&mut self, id: NodeId) -> Result<&mut GraphNode, TransformError> {
        self.nodes.get_mut(id.0).and_then(Option::as_mut).ok_or(TransformError::MissingNode(id))
    }

    fn add_node(&mut self) -> NodeId {
        self.nodes.push(Some(GraphNode::default()));
        NodeId(self.nodes.len() - 1)
    }

    fn add_edge(&mut self, from: NodeId, to: NodeId) {
        self.nodes[from.0].as_mut().expect("live").outs.push(to);
        self.nodes[to.0].as_mut().expect("live").ins.push(from);
    }

    /// Deletes a node together with all its edges.
    pub fn remove_node(&mut self, id: NodeId) -> Result<(), TransformError> {
        let node = self.get(id)?.clone();
        for p in node.ins {
            self.nodes[p.0].as_mut().expect("live").outs.retain(|&o| o != id);
        }
        for c in node.outs {
            self.nodes[c.0].as_mut().expect("live").ins.retain(|&o| o != id);
        }
        self.nodes[id.0] = None;
        Ok(())
    }

    /// Turns node `a` into an edge `(a_1, a_2)`. `a_1` keeps the id, the in-edges and any
    /// input label; the new node `a_2` takes the out-edges and any output label.
    pub fn split_node(&mut self, a: NodeId) -> Result<(NodeId, NodeId), TransformError> {
        self.get(a)?;
        let a2 = self.add_node();
        let outs = std::mem::take(&mut self.get_mut(a)?.outs);
        let output = self.get_mut(a)?.output.take();
        for &c in &outs {
            for slot in self.nodes[c.0].as_mut().expect("live").ins.iter_mut() {
                if *slot == a {
                    *slot = a2;
                }
            }
        }
        let node = self.get_mut(a2)?;
        node.outs = outs;
        node.output = output;
        self.add_edge(a, a2);
        Ok((a, a2))
    }

    /// Contracts edge `e` into one node that keeps the id `e.from`, every other edge of
    /// both endpoints, and the labels of both.
    pub fn merge_edge(&mut self, e: EdgeRef) -> Result<NodeId, TransformError> {
        if !self.has_edge(e) {
            return Err(TransformError::MissingEdge(e));
        }
        let (from, to) = (self.get(e.from)?.clone(), self.get(e.to)?.clone());
        let input = merge_label(from.input, to.input).ok_or(TransformError::LabelConflict(e, "input"))?;
        let output = merge_label(from.output, to.output).ok_or(TransformError::LabelConflict(e, "output"))?;
        for &p in to.ins.iter().filter(|&&p| p != e.from) {
            for slot in self.nodes[p.0].as_mut().expect("live").outs.iter_mut() {
                if *slot == e.to {
                    *slot = e.from;
                }
            }
        }
        for &c in &to.outs {
            for slot in self.nodes[c.0].as_mut().expect("live").ins.iter_mut() {
                if *slot == e.to {
                    *slot = e.from;
                }
            }
        }
        let merged = self.get_mut(e.from)?;
        merged.outs.retain(|&o| o != e.to);
        merged.outs.extend(to.outs);
        merged.ins.extend(to.ins.into_iter().filter(|&p| p != e.from));
        merged.input = input;
        merged.output = output;
        self.nodes[e.to.0] = None;
        Ok(e.from)
    }

    /// Converts back to a structure on `n` inputs, numbering live nodes in id order.
    pub fn to_structure(&self) -> Result<Structure, TransformError> {
        let mut dense = vec![usize::MAX; self.nodes.len()];
        for (pos, id) in self.live_ids().enumerate() {
            dense[id.0] = pos;
        }
        let mut nodes = Vec::with_capacity(dense.len());
        for id in self.live_ids() {
            let g = self.nodes[id.0].as_ref().expect("live");
            let kind = match (g.input, g.ins.as_slice()) {
                (Some(j), []) => NodeKind::Input(j),
                (None, &[a, b]) => NodeKind::Computation([NodeId(dense[a.0]), NodeId(dense[b.0])]),
                _ => return Err(TransformError::BadArity(id)),
            };
            nodes.push(Node { kind, output: g.output });
        }
        Ok(Structure::from_nodes(self.n, nodes)?)
    }
}

fn merge_label(a: Option<usize>, b: Option<usize>) -> Option<Option<usize>> {
    match (a, b) {
        (Some(_), Some(_)) => None,
        (x, y) => Some(x.or(y)),
    }
}

fn require_for_y(s: &Structure) -> Result<(), TransformError> {
    let report = s.validate();
    if report.is_for_y {
        return Ok(());
    }
    let rules: Vec<_> = report.violations.iter().map(|v| v.rule.describe()).collect();
    Err(TransformError::Invalid(rules.join("; ")))
}

/// The map `f`: removes `y_n`, then every sink that is not one of `y_1..y_{n-1}`
/// (repeatedly), then `x_n`, and finally contracts every edge that has become the only
/// in-edge of its consumer. For complexity-optimal input the result is complexity-optimal
/// on `n - 1` inputs with exactly three fewer computation nodes.
///
/// The input must compute `y`. The output is returned as computed, without
/// re-validation.
pub fn shrink_f(s: &Structure) -> Result<Structure, TransformError> {
    let n = s.n();
    if n < 4 {
        return Err(TransformError::TooFewInputs { n, min: 4 });
    }
    require_for_y(s)?;
    let mut g = Graph::from_structure(s);
    g.n = n - 1;

    let y_n = s.output_node(n).expect("validated");
    let mut work = vec![y_n];
    while let Some(id) = work.pop() {
        let Ok(node) = g.get(id) else { continue };
        let keep = node.output.is_some_and(|j| j < n);
        if !node.outs.is_empty() || keep {
            continue;
        }
        let operands = node.ins.clone();
        g.remove_node(id)?;
        work.extend(operands);
    }

    let x_n = s.input_node(n).expect("validated");
    let orphaned = match g.get(x_n) {
        Ok(node) => node.outs.clone(),
        Err(_) => Vec::new(),
    };
    if g.get(x_n).is_ok() {
        g.remove_node(x_n)?;
    }

    for c in orphaned {
        let Ok(node) = g.get(c) else { continue };
        if let [p] = node.ins[..] {
            g.merge_edge(EdgeRef { from: p, to: c })?;
        }
    }
    g.to_structure()
}

/// The map `g`: splits `a` and `b` into edges, feeds the new input `x_n` into both lower
/// halves' consumers, and joins `a_1`, `b_1` into the new output `y_n`. Adds exactly
/// three computation nodes.
pub fn grow_g(a: NodeId, b: NodeId, s: &Structure) -> Result<Structure, TransformError> {
    let m = s.n();
    if m < 3 {
        return Err(TransformError::TooFewInputs { n: m, min: 3 });
    }
    require_for_y(s)?;
    let optimum = 3 * m - 6;
    if s.complexity() != optimum {
        return Err(TransformError::NotComplexityOptimal { complexity: s.complexity(), optimum });
    }
    let (lo, hi) = (a.min(b), a.max(b));
    if !s.complement_pairs().iter().any(|p| p.a == lo && p.b == hi) {
        return Err(TransformError::NotComplementPair(a, b));
    }
    let n = m + 1;
    let mut g = Graph::from_structure(s);
    g.n = n;
    let (a1, a2) = g.split_node(a)?;
    let (b1, b2) = g.split_node(b)?;
    let x_n = g.add_node();
    g.get_mut(x_n)?.input = Some(n);
    g.add_edge(x_n, a2);
    g.add_edge(x_n, b2);
    let y_n = g.add_node();
    g.get_mut(y_n)?.output = Some(n);
    g.add_edge(a1, y_n);
    g.add_edge(b1, y_n);
    g.to_structure()
}
