use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{NodeId, NodeKind, Structure};

/// Rule broken by a node collection. The first four belong to the plain structure
/// definition; the rest only matter for structures that compute `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Cycle,
    DuplicateInput,
    NotATree,
    DuplicateSubtree,
    MissingInput,
    UnlabelledSink,
    LabelledNonSink,
    MissingOutput,
    WrongOutputLeaves,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::Cycle => "graph has a cycle",
            Rule::DuplicateInput => "input index used by more than one node",
            Rule::NotATree => "ancestor subgraph is not a binary tree",
            Rule::DuplicateSubtree => "duplicate subtree",
            Rule::MissingInput => "input index has no node",
            Rule::UnlabelledSink => "sink without an output label",
            Rule::LabelledNonSink => "output label on a node that has consumers",
            Rule::MissingOutput => "output index has no node",
            Rule::WrongOutputLeaves => "output does not fold exactly the other inputs",
        }
    }

    fn is_structural(self) -> bool {
        matches!(self, Rule::Cycle | Rule::DuplicateInput | Rule::NotATree | Rule::DuplicateSubtree)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    /// Offending nodes; for [`Rule::MissingInput`] / [`Rule::MissingOutput`] this is empty
    /// and `index` names the absent label.
    pub nodes: Vec<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub is_structure: bool,
    pub is_for_y: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }
}

impl Structure {
    /// Checks, in order: acyclicity, input uniqueness, the binary-tree property of every
    /// ancestor subgraph, subtree uniqueness, and then the output conditions (exactly `n`
    /// labelled sinks, `y_j` folding all inputs but `x_j`).
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if !self.is_acyclic() {
            let stuck = self.cycle_members();
            violations.push(Violation { rule: Rule::Cycle, nodes: stuck, index: None });
            return ValidationReport { is_structure: false, is_for_y: false, violations };
        }

        let mut by_input: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        for id in self.ids() {
            if let NodeKind::Input(j) = self.nodes[id.0].kind {
                by_input.entry(j).or_default().push(id);
            }
        }
        for nodes in by_input.values().filter(|v| v.len() > 1) {
            violations.push(Violation { rule: Rule::DuplicateInput, nodes: nodes.clone(), index: None });
        }

        let not_trees = self.tree_breaks();
        if !not_trees.is_empty() {
            violations.push(Violation { rule: Rule::NotATree, nodes: not_trees, index: None });
        }

        let classes = self.canonical_classes();
        let mut by_class: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        for id in self.ids() {
            by_class.entry(classes[id.0]).or_default().push(id);
        }
        for nodes in by_class.values().filter(|v| v.len() > 1) {
            // inputs sharing an index are already reported
            if self.nodes[nodes[0].0].is_computation() {
                violations.push(Violation {
                    rule: Rule::DuplicateSubtree,
                    nodes: nodes.clone(),
                    index: None,
                });
            }
        }

        for j in 1..=self.n {
            if !by_input.contains_key(&j) {
                violations.push(Violation { rule: Rule::MissingInput, nodes: vec![], index: Some(j) });
            }
        }

        let leaves = self.leaf_sets();
        let mut labelled = BTreeMap::new();
        for id in self.ids() {
            let node = &self.nodes[id.0];
            match (node.output, self.is_sink(id)) {
                (None, true) => violations.push(Violation {
                    rule: Rule::UnlabelledSink,
                    nodes: vec![id],
                    index: None,
                }),
                (Some(j), false) => violations.push(Violation {
                    rule: Rule::LabelledNonSink,
                    nodes: vec![id],
                    index: Some(j),
                }),
                _ => {}
            }
            if let Some(j) = node.output {
                labelled.insert(j, id);
            }
        }
        for j in 1..=self.n {
            match labelled.get(&j) {
                None => violations.push(Violation {
                    rule: Rule::MissingOutput,
                    nodes: vec![],
                    index: Some(j),
                }),
                Some(&id) => {
                    let mut want = FixedBitSet::with_capacity(self.n);
                    want.insert_range(..);
                    want.set(j - 1, false);
                    if leaves[id.0] != want {
                        violations.push(Violation {
                            rule: Rule::WrongOutputLeaves,
                            nodes: vec![id],
                            index: Some(j),
                        });
                    }
                }
            }
        }

        let is_structure = !violations.iter().any(|v| v.rule.is_structural());
        let is_for_y = violations.is_empty();
        ValidationReport { is_structure, is_for_y, violations }
    }

    /// Nodes where two operand subtrees overlap, so the ancestor subgraph has a node
    /// reachable along two paths.
    fn tree_breaks(&self) -> Vec<NodeId> {
        let size = self.nodes.len();
        let mut ancestors = vec![FixedBitSet::with_capacity(size); size];
        let mut breaks = Vec::new();
        for &id in self.order() {
            let mut set = FixedBitSet::with_capacity(size);
            set.insert(id.0);
            if let Some([a, b]) = self.nodes[id.0].operands() {
                if !ancestors[a.0].is_disjoint(&ancestors[b.0]) {
                    breaks.push(id);
                }
                set.union_with(&ancestors[a.0]);
                set.union_with(&ancestors[b.0]);
            }
            ancestors[id.0] = set;
        }
        breaks.sort_unstable();
        breaks
    }

    fn cycle_members(&self) -> Vec<NodeId> {
        // Peel sources repeatedly; whatever is left sits on or behind a cycle.
        let mut pending: Vec<usize> =
            self.nodes.iter().map(|n| if n.is_computation() { 2 } else { 0 }).collect();
        let mut ready: Vec<usize> = (0..self.nodes.len()).filter(|&i| pending[i] == 0).collect();
        let mut done = vec![false; self.nodes.len()];
        while let Some(i) = ready.pop() {
            done[i] = true;
            for c in &self.consumers[i] {
                pending[c.0] -= 1;
                if pending[c.0] == 0 {
                    ready.push(c.0);
                }
            }
        }
        (0..self.nodes.len()).filter(|&i| !done[i]).map(NodeId).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{forward_backward, Node, StructureBuilder};

    fn s3() -> Structure {
        // Only member of S_3: y1 = x2+x3, y2 = x1+x3, y3 = x1+x2.
        let mut b = StructureBuilder::new(3);
        let x: Vec<_> = (1..=3).map(|j| b.input(j)).collect();
        let y1 = b.combine(x[1], x[2]);
        let y2 = b.combine(x[0], x[2]);
        let y3 = b.combine(x[0], x[1]);
        for (j, y) in [(1, y1), (2, y2), (3, y3)] {
            b.label_output(y, j).unwrap();
        }
        b.build()
    }

    #[test]
    fn s3_is_valid() {
        let r = s3().validate();
        assert!(r.is_structure && r.is_for_y, "{r:?}");
        assert!(r.violations.is_empty());
    }

    #[test]
    fn forward_backward_is_valid() {
        let r = forward_backward(6).unwrap().validate();
        assert!(r.is_for_y);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn duplicate_subtree_detected() {
        let nodes = vec![
            Node::input(1),
            Node::input(2),
            Node::input(3),
            Node::computation(NodeId(0), NodeId(1)),
            Node::computation(NodeId(1), NodeId(0)),
        ];
        let r = Structure::from_nodes(3, nodes).unwrap().validate();
        assert!(!r.is_structure);
        let dup = r.violations.iter().find(|v| v.rule == Rule::DuplicateSubtree).unwrap();
        assert_eq!(dup.nodes, vec![NodeId(3), NodeId(4)]);
        assert_eq!(Rule::DuplicateSubtree.describe(), "duplicate subtree");
    }

    #[test]
    fn shared_ancestor_is_not_a_tree() {
        // (x1+x2) + ((x1+x2)+x3): x1 reaches the root along two paths.
        let nodes = vec![
            Node::input(1),
            Node::input(2),
            Node::input(3),
            Node::computation(NodeId(0), NodeId(1)),
            Node::computation(NodeId(3), NodeId(2)),
            Node::computation(NodeId(3), NodeId(4)),
        ];
        let r = Structure::from_nodes(3, nodes).unwrap().validate();
        assert!(r.has(Rule::NotATree));
        assert!(!r.is_structure && !r.is_for_y);
    }

    #[test]
    fn cycle_stops_validation() {
        let nodes = vec![
            Node::input(1),
            Node::computation(NodeId(0), NodeId(2)),
            Node::computation(NodeId(0), NodeId(1)),
        ];
        let r = Structure::from_nodes(2, nodes).unwrap().validate();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].rule, Rule::Cycle);
        assert_eq!(r.violations[0].nodes, vec![NodeId(1), NodeId(2)]);
    }

    #[test]
    fn output_rules() {
        // A single DBT is a structure but does not compute y.
        let mut b = StructureBuilder::new(3);
        let (x1, x2) = (b.input(1), b.input(2));
        let p = b.combine(x1, x2);
        b.label_output(p, 1).unwrap();
        let r = b.build().validate();
        assert!(r.is_structure);
        assert!(!r.is_for_y);
        assert!(r.has(Rule::MissingInput));
        assert!(r.has(Rule::MissingOutput));
        assert!(r.has(Rule::WrongOutputLeaves));

        let mut s = s3().nodes().to_vec();
        s[3].output = None;
        let r = Structure::from_nodes(3, s).unwrap().validate();
        assert!(r.is_structure);
        assert!(r.has(Rule::UnlabelledSink));
    }
}
