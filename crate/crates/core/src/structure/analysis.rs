use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{NodeId, Structure, StructureError};

/// Two nodes whose subtree leaf sets partition the inputs. `a < b` always.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ComplementPair {
    pub a: NodeId,
    pub b: NodeId,
    /// One plus the larger of the two subtree heights: the height of a node joining them.
    pub pi_value: usize,
}

impl ComplementPair {
    pub fn contains(&self, id: NodeId) -> bool {
        self.a == id || self.b == id
    }
}

/// Minimum join height over all complement pairs and the pairs achieving it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pi {
    pub value: usize,
    pub pairs: Vec<ComplementPair>,
}

/// Node and edge sets of an ancestor- or descendant-closed subgraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subgraph {
    pub nodes: BTreeSet<NodeId>,
    /// `(operand, consumer)` edges.
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

impl Structure {
    /// Number of computation nodes.
    pub fn complexity(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_computation()).count()
    }

    /// Length of the longest directed path, i.e. the tallest subtree.
    pub fn latency(&self) -> usize {
        self.heights().into_iter().max().unwrap_or(0)
    }

    /// Every unordered pair of nodes whose leaf sets partition `{x_1..x_n}`, sorted.
    pub fn complement_pairs(&self) -> Vec<ComplementPair> {
        let leaves = self.leaf_sets();
        let heights = self.heights();
        let mut by_set: HashMap<&FixedBitSet, Vec<NodeId>> = HashMap::new();
        for id in self.ids() {
            by_set.entry(&leaves[id.0]).or_default().push(id);
        }
        let mut pairs = Vec::new();
        for id in self.ids() {
            let mut complement = leaves[id.0].clone();
            complement.toggle_range(..);
            if let Some(partners) = by_set.get(&complement) {
                for &other in partners.iter().filter(|&&o| o > id) {
                    pairs.push(ComplementPair {
                        a: id,
                        b: other,
                        pi_value: 1 + heights[id.0].max(heights[other.0]),
                    });
                }
            }
        }
        pairs.sort();
        pairs
    }

    /// `None` only when the structure has no complement pair at all.
    pub fn pi(&self) -> Option<Pi> {
        let pairs = self.complement_pairs();
        let value = pairs.iter().map(|p| p.pi_value).min()?;
        let pairs = pairs.into_iter().filter(|p| p.pi_value == value).collect();
        Some(Pi { value, pairs })
    }

    /// Ancestor-closed subgraph `E(a, S)`: `a`, everything reaching it, and the edges
    /// into those nodes.
    pub fn entering(&self, a: NodeId) -> Result<Subgraph, StructureError> {
        self.node(a)?;
        let mut sub = Subgraph::default();
        let mut stack = vec![a];
        while let Some(id) = stack.pop() {
            if !sub.nodes.insert(id) {
                continue;
            }
            if let Some(ops) = self.nodes[id.0].operands() {
                for op in ops {
                    sub.edges.insert((op, id));
                    stack.push(op);
                }
            }
        }
        Ok(sub)
    }

    /// Descendant-closed subgraph `L(a, S)`: `a`, everything it reaches, and the edges
    /// leaving those nodes.
    pub fn leaving(&self, a: NodeId) -> Result<Subgraph, StructureError> {
        self.node(a)?;
        let mut sub = Subgraph::default();
        let mut stack = vec![a];
        while let Some(id) = stack.pop() {
            if !sub.nodes.insert(id) {
                continue;
            }
            for &c in self.consumers(id) {
                sub.edges.insert((id, c));
                stack.push(c);
            }
        }
        Ok(sub)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{forward_backward, two_input, StructureBuilder};

    #[test]
    fn forward_backward_pairs() {
        let s = forward_backward(4).unwrap();
        assert_eq!(s.len(), 10);
        let leaves = s.leaf_sets();
        let set = |id: NodeId| -> Vec<usize> { leaves[id.0].ones().map(|i| i + 1).collect() };
        // independent check: every pair of the 10 nodes against the partition predicate
        let mut brute = Vec::new();
        for a in s.ids() {
            for b in s.ids().filter(|&b| b > a) {
                let (sa, sb) = (set(a), set(b));
                let disjoint = sa.iter().all(|j| !sb.contains(j));
                if disjoint && sa.len() + sb.len() == 4 {
                    brute.push((a, b));
                }
            }
        }
        let got: Vec<_> = s.complement_pairs().iter().map(|p| (p.a, p.b)).collect();
        assert_eq!(got, brute);
        assert_eq!(got.len(), 2 * 4 - 3);
        let x4 = s.input_node(4).unwrap();
        let y4 = s.output_node(4).unwrap();
        assert!(got.contains(&(x4.min(y4), x4.max(y4))));
        assert!(got.iter().any(|&(a, b)| {
            let (sa, sb) = (set(a), set(b));
            (sa == [1, 2] && sb == [3, 4]) || (sa == [3, 4] && sb == [1, 2])
        }));
    }

    #[test]
    fn trivial_pi() {
        let s = two_input();
        let pi = s.pi().unwrap();
        assert_eq!(pi.value, 1);
        assert_eq!(pi.pairs.len(), 1);
        assert_eq!(s.latency(), 0);
        assert_eq!(s.complexity(), 0);
    }

    #[test]
    fn forward_backward_pi_8() {
        let s = forward_backward(8).unwrap();
        // brute force: minimise over all node pairs partitioning the inputs
        let leaves = s.leaf_sets();
        let h = s.heights();
        let mut best = usize::MAX;
        for a in s.ids() {
            for b in s.ids() {
                if a < b && leaves[a.0].is_disjoint(&leaves[b.0])
                    && leaves[a.0].count_ones(..) + leaves[b.0].count_ones(..) == 8
                {
                    best = best.min(1 + h[a.0].max(h[b.0]));
                }
            }
        }
        // prefix and suffix folds of four leaves each have height 3
        assert_eq!(best, 4);
        assert_eq!(s.pi().unwrap().value, best);
    }

    #[test]
    fn entering_and_leaving_endpoints() {
        let s = forward_backward(5).unwrap();
        for j in 1..=5 {
            let x = s.input_node(j).unwrap();
            let y = s.output_node(j).unwrap();
            let e = s.entering(x).unwrap();
            assert_eq!(e.nodes.len(), 1);
            assert!(e.edges.is_empty());
            let l = s.leaving(y).unwrap();
            assert_eq!(l.nodes.into_iter().collect::<Vec<_>>(), vec![y]);
        }
        assert!(s.entering(NodeId(999)).is_err());
    }

    #[test]
    fn entering_is_a_tree() {
        let mut b = StructureBuilder::new(4);
        let x: Vec<_> = (1..=4).map(|j| b.input(j)).collect();
        let l = b.combine(x[0], x[1]);
        let r = b.combine(x[2], x[3]);
        let root = b.combine(l, r);
        let s = b.build();
        let e = s.entering(root).unwrap();
        assert_eq!(e.nodes.len(), 7);
        assert_eq!(e.edges.len(), 6);
    }
}
