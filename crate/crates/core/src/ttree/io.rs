use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{TTree, TTreeError};

pub const TTREE_FORMAT: &str = "mps-ttree/v1";

#[derive(Serialize, Deserialize)]
struct Document {
    edges: Vec<[String; 2]>,
    format: String,
    n: usize,
}

impl TTree {
    /// `{"edges":[["x1","v1"],...],"format":"mps-ttree/v1","n":..}` with edges in
    /// ascending id order.
    pub fn to_json(&self) -> String {
        let doc = Document {
            edges: self.edges().into_iter().map(|(a, b)| [self.name(a), self.name(b)]).collect(),
            format: TTREE_FORMAT.to_string(),
            n: self.n,
        };
        serde_json::to_string(&doc).expect("document is plain data")
    }

    pub fn from_json(text: &str) -> Result<TTree, TTreeError> {
        let doc: Document = serde_json::from_str(text)?;
        if doc.format != TTREE_FORMAT {
            return Err(TTreeError::WrongFormat(doc.format));
        }
        let n = doc.n;
        let parse = |name: &str| -> Result<usize, TTreeError> {
            let bad = || TTreeError::Malformed(format!("bad node name {name:?}"));
            let (kind, rest) = name.split_at_checked(1).ok_or_else(bad)?;
            let k: usize = rest.parse().map_err(|_| bad())?;
            match kind {
                "x" if (1..=n).contains(&k) => Ok(k - 1),
                "v" if k >= 1 => Ok(n + k - 1),
                _ => Err(bad()),
            }
        };
        let edges = doc
            .edges
            .iter()
            .map(|[a, b]| Ok((parse(a)?, parse(b)?)))
            .collect::<Result<Vec<_>, TTreeError>>()?;
        TTree::from_edges(n, &edges)
    }

    /// Graphviz rendering with leaves as boxes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph ttree {\n");
        for v in 0..self.node_count() {
            let shape = if self.is_leaf(v) { "box" } else { "circle" };
            let _ = writeln!(out, "  {} [shape={shape}];", self.name(v));
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  {} -- {};", self.name(a), self.name(b));
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = TTree::caterpillar(5).unwrap();
        let text = t.to_json();
        assert!(text.starts_with(r#"{"edges":[["x1","v1"],"#));
        assert!(text.ends_with(r#""format":"mps-ttree/v1","n":5}"#));
        let back = TTree::from_json(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn bad_names() {
        let doc = r#"{"format":"mps-ttree/v1","n":3,"edges":[["x1","v1"],["x4","v1"]]}"#;
        assert!(matches!(TTree::from_json(doc), Err(TTreeError::Malformed(_))));
        let doc = r#"{"format":"mps-ttree/v1","n":3,"edges":[["y1","v1"]]}"#;
        assert!(TTree::from_json(doc).is_err());
        let doc = r#"{"format":"mps-structure/v1","n":3,"edges":[]}"#;
        assert!(matches!(TTree::from_json(doc), Err(TTreeError::WrongFormat(_))));
    }

    #[test]
    fn dot_boxes() {
        let dot = TTree::star3().to_dot();
        assert_eq!(dot.matches("shape=box").count(), 3);
        assert_eq!(dot.matches(" -- ").count(), 3);
    }
}
