//! Computation structures.
//!
//! A [`Structure`] is a DAG over input nodes `x_1..x_n` and computation nodes, each
//! computation node combining exactly two operands with one binary operation. Output
//! labels `y_j` mark the nodes whose values leave the node update. For the structure to
//! be usable, every node's ancestor subgraph must be a binary tree, no two nodes may
//! compute the same subtree, and `y_j` must fold every input except `x_j`; see
//! [`Structure::validate`].
//!
//! Structures are immutable. New ones are produced either with a [`StructureBuilder`],
//! which shares equal subtrees automatically, or from a raw node list with
//! [`Structure::from_nodes`], which keeps whatever it is given so that broken inputs
//! can still be inspected.

mod analysis;
mod baseline;
mod eval;
mod io;
mod union;
mod validate;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::{ComplementPair, Pi, Subgraph};
pub use baseline::{forward_backward, two_input};
pub use eval::{
    check_commutative_associative, leave_one_out_fold, BinaryOperator, EvalError, LookupTable,
    OperatorError,
};
pub use io::{FormatError, STRUCTURE_FORMAT};
pub use validate::{Rule, ValidationReport, Violation};

/// Dense index of a node inside one structure.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// Input `x_j`, 1-based.
    Input(usize),
    /// Two distinct operands. Their order carries no meaning.
    Computation([NodeId; 2]),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub kind: NodeKind,
    /// `Some(j)` when this node is the output `y_j`.
    pub output: Option<usize>,
}

impl Node {
    pub fn input(index: usize) -> Self {
        Node { kind: NodeKind::Input(index), output: None }
    }

    pub fn computation(a: NodeId, b: NodeId) -> Self {
        Node { kind: NodeKind::Computation([a, b]), output: None }
    }

    pub fn with_output(mut self, index: usize) -> Self {
        self.output = Some(index);
        self
    }

    pub fn operands(&self) -> Option<[NodeId; 2]> {
        match self.kind {
            NodeKind::Computation(ops) => Some(ops),
            NodeKind::Input(_) => None,
        }
    }

    pub fn input_index(&self) -> Option<usize> {
        match self.kind {
            NodeKind::Input(j) => Some(j),
            NodeKind::Computation(_) => None,
        }
    }

    pub fn is_computation(&self) -> bool {
        matches!(self.kind, NodeKind::Computation(_))
    }
}

/// A node collection that cannot be interpreted as a graph at all, as opposed to a graph
/// that merely fails validation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("input count {n} is below the minimum of {min}")]
    TooFewInputs { n: usize, min: usize },
    #[error("node {node} references missing operand {operand}")]
    DanglingOperand { node: NodeId, operand: NodeId },
    #[error("node {0} uses the same operand twice")]
    RepeatedOperand(NodeId),
    #[error("node {node} has input index {index} outside 1..={n}")]
    InputIndexOutOfRange { node: NodeId, index: usize, n: usize },
    #[error("node {node} has output index {index} outside 1..={n}")]
    OutputIndexOutOfRange { node: NodeId, index: usize, n: usize },
    #[error("output index {index} is carried by both {first} and {second}")]
    DuplicateOutputLabel { index: usize, first: NodeId, second: NodeId },
    #[error("node {node} would be labelled both y{first} and y{second}")]
    ConflictingOutputLabels { node: NodeId, first: usize, second: usize },
    #[error("node id {0} appears more than once")]
    DuplicateNodeId(usize),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("structures have different input counts ({0} and {1})")]
    InputCountMismatch(usize, usize),
}

#[derive(Clone, Debug)]
pub struct Structure {
    n: usize,
    nodes: Vec<Node>,
    consumers: Vec<Vec<NodeId>>,
    // None when the node collection has a cycle.
    order: Option<Vec<NodeId>>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.nodes == other.nodes
    }
}

impl Eq for Structure {}

impl Structure {
    /// Wraps a raw node list; node `i` gets id `NodeId(i)`.
    ///
    /// Only checks that the list describes a graph: operand ids resolve, operands are
    /// distinct, indices are in range and output labels are unique. Cycles, duplicate
    /// subtrees and the like are reported by [`Structure::validate`].
    pub fn from_nodes(n: usize, nodes: Vec<Node>) -> Result<Self, StructureError> {
        if n < 2 {
            return Err(StructureError::TooFewInputs { n, min: 2 });
        }
        let mut consumers = vec![Vec::new(); nodes.len()];
        let mut seen_outputs: HashMap<usize, NodeId> = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            let id = NodeId(i);
            match node.kind {
                NodeKind::Input(index) => {
                    if index == 0 || index > n {
                        return Err(StructureError::InputIndexOutOfRange { node: id, index, n });
                    }
                }
                NodeKind::Computation([a, b]) => {
                    for op in [a, b] {
                        if op.0 >= nodes.len() {
                            return Err(StructureError::DanglingOperand { node: id, operand: op });
                        }
                    }
                    if a == b {
                        return Err(StructureError::RepeatedOperand(id));
                    }
                    consumers[a.0].push(id);
                    consumers[b.0].push(id);
                }
            }
            if let Some(index) = node.output {
                if index == 0 || index > n {
                    return Err(StructureError::OutputIndexOutOfRange { node: id, index, n });
                }
                if let Some(&first) = seen_outputs.get(&index) {
                    return Err(StructureError::DuplicateOutputLabel { index, first, second: id });
                }
                seen_outputs.insert(index, id);
            }
        }
        let order = kahn_order(&nodes, &consumers);
        Ok(Structure { n, nodes, consumers, order })
    }

    /// Number of inputs `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, StructureError> {
        self.nodes.get(id.0).ok_or(StructureError::UnknownNode(id))
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    /// Nodes that use `id` as an operand.
    pub fn consumers(&self, id: NodeId) -> &[NodeId] {
        &self.consumers[id.0]
    }

    pub fn is_sink(&self, id: NodeId) -> bool {
        self.consumers[id.0].is_empty()
    }

    pub fn input_node(&self, index: usize) -> Option<NodeId> {
        self.ids().find(|&id| self.nodes[id.0].input_index() == Some(index))
    }

    pub fn output_node(&self, index: usize) -> Option<NodeId> {
        self.ids().find(|&id| self.nodes[id.0].output == Some(index))
    }

    /// A topological order (operands before consumers), or `None` if the graph is cyclic.
    pub fn topological_order(&self) -> Option<&[NodeId]> {
        self.order.as_deref()
    }

    pub fn is_acyclic(&self) -> bool {
        self.order.is_some()
    }

    pub(crate) fn order(&self) -> &[NodeId] {
        self.order
            .as_deref()
            .expect("operation requires an acyclic structure")
    }

    /// Height of every node's subtree, indexed by node id.
    pub fn heights(&self) -> Vec<usize> {
        let mut h = vec![0; self.nodes.len()];
        for &id in self.order() {
            if let Some([a, b]) = self.nodes[id.0].operands() {
                h[id.0] = 1 + h[a.0].max(h[b.0]);
            }
        }
        h
    }

    /// Leaf set of every node's subtree as a bitset over `0..n` (bit `j-1` for `x_j`).
    pub fn leaf_sets(&self) -> Vec<FixedBitSet> {
        let mut sets = vec![FixedBitSet::with_capacity(self.n); self.nodes.len()];
        for &id in self.order() {
            match self.nodes[id.0].kind {
                NodeKind::Input(j) => sets[id.0].insert(j - 1),
                NodeKind::Computation([a, b]) => {
                    let mut s = sets[a.0].clone();
                    s.union_with(&sets[b.0]);
                    sets[id.0] = s;
                }
            }
        }
        sets
    }

    /// Interned subtree classes: two nodes share a class iff their subtrees are equal
    /// with children unordered and leaves labelled.
    pub fn canonical_classes(&self) -> Vec<usize> {
        #[derive(Hash, PartialEq, Eq)]
        enum Key {
            Leaf(usize),
            Pair(usize, usize),
        }
        let mut table: HashMap<Key, usize> = HashMap::new();
        let mut class = vec![0; self.nodes.len()];
        for &id in self.order() {
            let key = match self.nodes[id.0].kind {
                NodeKind::Input(j) => Key::Leaf(j),
                NodeKind::Computation([a, b]) => {
                    let (p, q) = (class[a.0], class[b.0]);
                    Key::Pair(p.min(q), p.max(q))
                }
            };
            let next = table.len();
            class[id.0] = *table.entry(key).or_insert(next);
        }
        class
    }

    /// Canonical form of every node, indexed by node id.
    pub fn canonical_forms(&self) -> Vec<CanonicalForm> {
        let mut forms: Vec<Option<CanonicalForm>> = vec![None; self.nodes.len()];
        for &id in self.order() {
            let form = match self.nodes[id.0].kind {
                NodeKind::Input(j) => CanonicalForm::Leaf(j),
                NodeKind::Computation([a, b]) => CanonicalForm::pair(
                    forms[a.0].clone().expect("operand precedes consumer"),
                    forms[b.0].clone().expect("operand precedes consumer"),
                ),
            };
            forms[id.0] = Some(form);
        }
        forms.into_iter().map(|f| f.expect("every node visited")).collect()
    }

    pub fn canonical_form(&self, id: NodeId) -> Result<CanonicalForm, StructureError> {
        self.node(id)?;
        Ok(self.canonical_forms().swap_remove(id.0))
    }

    /// Label-aware identity of the structure: its set of subtrees plus the subtree behind
    /// each output label. Independent of node numbering.
    pub fn signature(&self) -> StructureSignature {
        let forms = self.canonical_forms();
        let outputs = self
            .ids()
            .filter_map(|id| self.nodes[id.0].output.map(|j| (j, forms[id.0].clone())))
            .collect();
        StructureSignature { n: self.n, forms: forms.into_iter().collect(), outputs }
    }

    /// Same subtrees and same output labelling, regardless of node numbering.
    pub fn same_as(&self, other: &Structure) -> bool {
        self.signature() == other.signature()
    }

    /// Rebuilds the structure through a [`StructureBuilder`], merging nodes with equal
    /// subtrees. Fails only if two merged nodes carry different output labels.
    pub fn canonicalize(&self) -> Result<Structure, StructureError> {
        let mut builder = StructureBuilder::new(self.n);
        builder.absorb(self)?;
        Ok(builder.build())
    }
}

/// Kahn's algorithm taking the smallest ready id first, so an id order that is already
/// topological is returned unchanged.
fn kahn_order(nodes: &[Node], consumers: &[Vec<NodeId>]) -> Option<Vec<NodeId>> {
    let mut pending: Vec<usize> = nodes
        .iter()
        .map(|node| if node.is_computation() { 2 } else { 0 })
        .collect();
    let mut ready: BinaryHeap<Reverse<NodeId>> =
        (0..nodes.len()).filter(|&i| pending[i] == 0).map(|i| Reverse(NodeId(i))).collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(Reverse(id)) = ready.pop() {
        order.push(id);
        for &c in &consumers[id.0] {
            pending[c.0] -= 1;
            if pending[c.0] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    (order.len() == nodes.len()).then_some(order)
}

/// Structure of a subtree with unordered children and labelled leaves.
///
/// Pairs are stored with the smaller child first, so derived equality, ordering and
/// hashing all ignore operand order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CanonicalForm {
    Leaf(usize),
    Pair(Arc<CanonicalForm>, Arc<CanonicalForm>),
}

impl CanonicalForm {
    pub fn pair(a: CanonicalForm, b: CanonicalForm) -> Self {
        if a <= b {
            CanonicalForm::Pair(Arc::new(a), Arc::new(b))
        } else {
            CanonicalForm::Pair(Arc::new(b), Arc::new(a))
        }
    }

    pub fn height(&self) -> usize {
        match self {
            CanonicalForm::Leaf(_) => 0,
            CanonicalForm::Pair(a, b) => 1 + a.height().max(b.height()),
        }
    }

    /// Input indices below this subtree, ascending.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out.sort_unstable();
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            CanonicalForm::Leaf(j) => out.push(*j),
            CanonicalForm::Pair(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }

    /// Number of computation nodes in the subtree.
    pub fn internal_count(&self) -> usize {
        match self {
            CanonicalForm::Leaf(_) => 0,
            CanonicalForm::Pair(a, b) => 1 + a.internal_count() + b.internal_count(),
        }
    }

    /// Adds this subtree to `builder`, returning the node computing it.
    pub fn insert_into(&self, builder: &mut StructureBuilder) -> NodeId {
        match self {
            CanonicalForm::Leaf(j) => builder.input(*j),
            CanonicalForm::Pair(a, b) => {
                let a = a.insert_into(builder);
                let b = b.insert_into(builder);
                builder.combine(a, b)
            }
        }
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalForm::Leaf(j) => write!(f, "x{j}"),
            CanonicalForm::Pair(a, b) => write!(f, "({a} {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructureSignature {
    pub n: usize,
    pub forms: BTreeSet<CanonicalForm>,
    pub outputs: BTreeMap<usize, CanonicalForm>,
}

/// Builds structures with automatic subtree sharing: asking for an input or a
/// combination that already exists returns the existing node.
#[derive(Clone, Debug)]
pub struct StructureBuilder {
    n: usize,
    nodes: Vec<Node>,
    inputs: HashMap<usize, NodeId>,
    pairs: HashMap<(NodeId, NodeId), NodeId>,
}

impl StructureBuilder {
    pub fn new(n: usize) -> Self {
        StructureBuilder { n, nodes: Vec::new(), inputs: HashMap::new(), pairs: HashMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn computation_count(&self) -> usize {
        self.pairs.len()
    }

    /// Node for input `x_index`.
    ///
    /// # Panics
    /// If `index` is outside `1..=n`.
    pub fn input(&mut self, index: usize) -> NodeId {
        assert!((1..=self.n).contains(&index), "input index {index} outside 1..={}", self.n);
        if let Some(&id) = self.inputs.get(&index) {
            return id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node::input(index));
        self.inputs.insert(index, id);
        id
    }

    /// Node combining `a` and `b`.
    ///
    /// # Panics
    /// If `a == b` or either id is unknown.
    pub fn combine(&mut self, a: NodeId, b: NodeId) -> NodeId {
        assert_ne!(a, b, "a computation node needs two distinct operands");
        assert!(a.0 < self.nodes.len() && b.0 < self.nodes.len(), "unknown operand");
        let key = (a.min(b), a.max(b));
        if let Some(&id) = self.pairs.get(&key) {
            return id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node::computation(key.0, key.1));
        self.pairs.insert(key, id);
        id
    }

    pub fn label_output(&mut self, node: NodeId, index: usize) -> Result<(), StructureError> {
        if index == 0 || index > self.n {
            return Err(StructureError::OutputIndexOutOfRange { node, index, n: self.n });
        }
        if let Some(other) = self.nodes.iter().position(|nd| nd.output == Some(index)) {
            if other != node.0 {
                return Err(StructureError::DuplicateOutputLabel {
                    index,
                    first: NodeId(other),
                    second: node,
                });
            }
        }
        let slot = self.nodes.get_mut(node.0).ok_or(StructureError::UnknownNode(node))?;
        match slot.output {
            Some(prev) if prev != index => Err(StructureError::ConflictingOutputLabels {
                node,
                first: prev,
                second: index,
            }),
            _ => {
                slot.output = Some(index);
                Ok(())
            }
        }
    }

    /// Copies every node and label of `s` into the builder. Returns the id mapping.
    pub fn absorb(&mut self, s: &Structure) -> Result<Vec<NodeId>, StructureError> {
        if s.n() != self.n {
            return Err(StructureError::InputCountMismatch(self.n, s.n()));
        }
        let mut map = vec![NodeId(usize::MAX); s.len()];
        for &id in s.order() {
            let node = &s.nodes()[id.0];
            map[id.0] = match node.kind {
                NodeKind::Input(j) => self.input(j),
                NodeKind::Computation([a, b]) => self.combine(map[a.0], map[b.0]),
            };
            if let Some(j) = node.output {
                self.label_output(map[id.0], j)?;
            }
        }
        Ok(map)
    }

    pub fn build(self) -> Structure {
        Structure::from_nodes(self.n, self.nodes).expect("builder output is well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_shares_subtrees() {
        let mut b = StructureBuilder::new(3);
        let x1 = b.input(1);
        let x2 = b.input(2);
        let p = b.combine(x1, x2);
        assert_eq!(b.combine(x2, x1), p);
        assert_eq!(b.input(1), x1);
        assert_eq!(b.computation_count(), 1);
    }

    #[test]
    fn from_nodes_rejects_malformed() {
        let dangling = vec![Node::input(1), Node::computation(NodeId(0), NodeId(5))];
        assert!(matches!(
            Structure::from_nodes(2, dangling),
            Err(StructureError::DanglingOperand { .. })
        ));
        let repeated = vec![Node::input(1), Node::computation(NodeId(0), NodeId(0))];
        assert_eq!(
            Structure::from_nodes(2, repeated),
            Err(StructureError::RepeatedOperand(NodeId(1)))
        );
        assert!(matches!(
            Structure::from_nodes(1, vec![Node::input(1)]),
            Err(StructureError::TooFewInputs { .. })
        ));
        let twice = vec![Node::input(1).with_output(2), Node::input(2).with_output(2)];
        assert!(matches!(
            Structure::from_nodes(2, twice),
            Err(StructureError::DuplicateOutputLabel { index: 2, .. })
        ));
    }

    #[test]
    fn cycles_are_representable() {
        let nodes = vec![
            Node::input(1),
            Node::computation(NodeId(0), NodeId(2)),
            Node::computation(NodeId(0), NodeId(1)),
        ];
        let s = Structure::from_nodes(2, nodes).unwrap();
        assert!(!s.is_acyclic());
    }

    #[test]
    fn canonical_form_ignores_operand_order() {
        let ab = CanonicalForm::pair(CanonicalForm::Leaf(1), CanonicalForm::Leaf(2));
        let ba = CanonicalForm::pair(CanonicalForm::Leaf(2), CanonicalForm::Leaf(1));
        assert_eq!(ab, ba);
        assert_eq!(ab.to_string(), "(x1 x2)");
        let abc = CanonicalForm::pair(CanonicalForm::Leaf(3), ab.clone());
        assert_eq!(abc.height(), 2);
        assert_eq!(abc.leaves(), vec![1, 2, 3]);
        assert_eq!(abc.internal_count(), 2);
    }
}
