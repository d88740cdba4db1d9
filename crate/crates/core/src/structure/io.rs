//! JSON and DOT encodings.
//!
//! The JSON layout is
//!
//! ```text
//! {"format":"mps-structure/v1","n":3,"nodes":[
//!   {"id":0,"index":1,"kind":"input"},
//!   {"id":3,"kind":"comp","operands":[1,2],"output_index":1}, ...]}
//! ```
//!
//! Writers list nodes in topological order with ids `0..len` assigned in that order,
//! sort operand pairs ascending and sort object keys, so equal structures serialize to
//! identical bytes. Operand order carries no meaning. Input nodes may also carry an
//! `output_index`; this only happens for `n = 2`, where `y_1 = x_2` and `y_2 = x_1`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Node, NodeId, NodeKind, Structure, StructureError};

pub const STRUCTURE_FORMAT: &str = "mps-structure/v1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {found:?}, expected {expected:?}")]
    WrongFormat { found: String, expected: &'static str },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    n: usize,
    nodes: Vec<NodeRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum NodeRecord {
    Input {
        id: usize,
        index: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output_index: Option<usize>,
    },
    Comp {
        id: usize,
        operands: [usize; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        output_index: Option<usize>,
    },
}

impl Structure {
    /// Serializes to the `mps-structure/v1` JSON layout.
    ///
    /// # Panics
    /// If the structure is cyclic; such node collections have no topological numbering.
    pub fn to_json(&self) -> String {
        let mut dense = vec![0usize; self.len()];
        for (pos, &id) in self.order().iter().enumerate() {
            dense[id.0] = pos;
        }
        let nodes = self
            .order()
            .iter()
            .map(|&id| {
                let node = &self.nodes[id.0];
                match node.kind {
                    NodeKind::Input(index) => {
                        NodeRecord::Input { id: dense[id.0], index, output_index: node.output }
                    }
                    NodeKind::Computation([a, b]) => {
                        let (p, q) = (dense[a.0], dense[b.0]);
                        NodeRecord::Comp {
                            id: dense[id.0],
                            operands: [p.min(q), p.max(q)],
                            output_index: node.output,
                        }
                    }
                }
            })
            .collect();
        let doc = Document { format: STRUCTURE_FORMAT.to_string(), n: self.n, nodes };
        // round trip through Value so that object keys come out sorted
        let value = serde_json::to_value(doc).expect("document is plain data");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Parses the `mps-structure/v1` layout. Ids may be any distinct integers and nodes
    /// may appear in any order; the result numbers nodes by position in the file.
    pub fn from_json(text: &str) -> Result<Structure, FormatError> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.format != STRUCTURE_FORMAT {
            return Err(FormatError::WrongFormat { found: doc.format, expected: STRUCTURE_FORMAT });
        }
        let mut position = HashMap::new();
        for (pos, rec) in doc.nodes.iter().enumerate() {
            let id = match rec {
                NodeRecord::Input { id, .. } | NodeRecord::Comp { id, .. } => *id,
            };
            if position.insert(id, pos).is_some() {
                return Err(StructureError::DuplicateNodeId(id).into());
            }
        }
        let resolve = |node: usize, operand: usize| {
            position.get(&operand).map(|&p| NodeId(p)).ok_or(StructureError::DanglingOperand {
                node: NodeId(node),
                operand: NodeId(operand),
            })
        };
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for rec in &doc.nodes {
            nodes.push(match *rec {
                NodeRecord::Input { index, output_index, .. } => {
                    Node { kind: NodeKind::Input(index), output: output_index }
                }
                NodeRecord::Comp { id, operands: [a, b], output_index } => Node {
                    kind: NodeKind::Computation([resolve(id, a)?, resolve(id, b)?]),
                    output: output_index,
                },
            });
        }
        Ok(Structure::from_nodes(doc.n, nodes)?)
    }

    /// Graphviz rendering: inputs as boxes, computation nodes as circles, outputs dotted.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph structure {\n  rankdir=BT;\n");
        let ids: Vec<NodeId> = match self.topological_order() {
            Some(order) => order.to_vec(),
            None => self.ids().collect(),
        };
        for &id in &ids {
            let node = &self.nodes[id.0];
            let (label, shape) = match (node.kind, node.output) {
                (NodeKind::Input(j), Some(k)) => (format!("x{j} / y{k}"), "shape=box,style=dotted"),
                (NodeKind::Input(j), None) => (format!("x{j}"), "shape=box"),
                (NodeKind::Computation(_), Some(k)) => (format!("y{k}"), "shape=circle,style=dotted"),
                (NodeKind::Computation(_), None) => (String::new(), "shape=circle"),
            };
            let _ = writeln!(out, "  n{} [label=\"{label}\",{shape}];", id.0);
        }
        for &id in &ids {
            if let Some([a, b]) = self.nodes[id.0].operands() {
                let _ = writeln!(out, "  n{} -> n{};", a.0, id.0);
                let _ = writeln!(out, "  n{} -> n{};", b.0, id.0);
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{forward_backward, two_input};

    #[test]
    fn round_trip() {
        for s in [two_input(), forward_backward(3).unwrap(), forward_backward(9).unwrap()] {
            let text = s.to_json();
            let back = Structure::from_json(&text).unwrap();
            assert!(back.same_as(&s));
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn layout_is_exact() {
        let text = forward_backward(3).unwrap().to_json();
        assert!(text.starts_with(r#"{"format":"mps-structure/v1","n":3,"nodes":[{"id":0,"index":1,"kind":"input"}"#));
        assert!(text.contains(r#""kind":"comp","operands":["#));
        let two = two_input().to_json();
        assert!(two.contains(r#"{"id":0,"index":1,"kind":"input","output_index":2}"#));
    }

    #[test]
    fn operand_order_and_ids_are_not_semantic() {
        let text = r#"{"format":"mps-structure/v1","n":3,"nodes":[
            {"id":30,"kind":"comp","operands":[12,11],"output_index":3},
            {"id":11,"kind":"input","index":1},
            {"id":12,"kind":"input","index":2},
            {"id":13,"kind":"input","index":3},
            {"id":31,"kind":"comp","operands":[13,12],"output_index":1},
            {"id":32,"kind":"comp","operands":[11,13],"output_index":2}]}"#;
        let s = Structure::from_json(text).unwrap();
        assert!(s.validate().is_for_y);
        assert!(s.same_as(&forward_backward(3).unwrap()));
    }

    #[test]
    fn malformed_documents() {
        let wrong = r#"{"format":"mps-ttree/v1","n":2,"nodes":[]}"#;
        assert!(matches!(Structure::from_json(wrong), Err(FormatError::WrongFormat { .. })));
        let dup = r#"{"format":"mps-structure/v1","n":2,"nodes":[
            {"id":0,"kind":"input","index":1},{"id":0,"kind":"input","index":2}]}"#;
        assert!(matches!(
            Structure::from_json(dup),
            Err(FormatError::Structure(StructureError::DuplicateNodeId(0)))
        ));
        let dangling = r#"{"format":"mps-structure/v1","n":2,"nodes":[
            {"id":0,"kind":"input","index":1},{"id":1,"kind":"comp","operands":[0,7]}]}"#;
        assert!(matches!(
            Structure::from_json(dangling),
            Err(FormatError::Structure(StructureError::DanglingOperand { .. }))
        ));
        assert!(matches!(Structure::from_json("{"), Err(FormatError::Json(_))));
    }

    #[test]
    fn dot_shapes() {
        let dot = forward_backward(4).unwrap().to_dot();
        assert_eq!(dot.matches("shape=box").count(), 4);
        assert_eq!(dot.matches("shape=circle,style=dotted").count(), 4);
        assert_eq!(dot.matches("[label=\"\",shape=circle]").count(), 2);
        assert_eq!(dot.matches("->").count(), 12);
    }
}
