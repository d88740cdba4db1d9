//! T-trees: undirected trees with `n` labelled leaves and internal nodes of degree three.
//!
//! A T-tree encodes a complexity-optimal structure. For each leaf `x_j`, orienting the
//! tree away from `x_j` gives a binary tree on the other leaves, rooted at the
//! neighbour of `x_j`; [`TTree::h`] takes the union of these `n` trees and labels their
//! roots `y_j`. [`h_inverse`] recovers the tree from the structure.
//!
//! Node numbering: ids `0..n` are the leaves `x_1..x_n` (`x_j` is id `j - 1`), and ids
//! from `n` upward are internal.

mod enumerate;
mod io;

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::math::{ceil_log2, delta, min_diameter};
use crate::structure::{CanonicalForm, NodeId, NodeKind, Structure, StructureBuilder};

pub use enumerate::{
    enum_cap, enumerate_ttrees, enumerate_ttrees_capped, TTreeStream, DEFAULT_ENUM_CAP, ENUM_CAP_ENV,
};
pub use io::TTREE_FORMAT;

#[derive(Debug, Error)]
pub enum TTreeError {
    #[error("need at least {min} leaves, got {n}")]
    TooFewLeaves { n: usize, min: usize },
    #[error("enumeration of {n}-leaf trees exceeds the cap of {cap}")]
    AboveCap { n: usize, cap: usize },
    #[error("edge list is malformed: {0}")]
    Malformed(String),
    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("not a T-tree: {0}")]
    Invalid(String),
    #[error("structure is not complexity-optimal: {0}")]
    NotComplexityOptimal(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {0:?}")]
    WrongFormat(String),
}

/// Undirected tree stored as sorted adjacency lists.
#[derive(Clone, Debug)]
pub struct TTree {
    n: usize,
    adj: Vec<Vec<usize>>,
}

/// Leaf-label-aware equality, independent of internal node numbering.
impl PartialEq for TTree {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.canonical() == other.canonical()
    }
}

impl Eq for TTree {}

impl TTree {
    /// Builds a graph on `n` leaves from an edge list. Node count is one more than the
    /// largest id mentioned (at least `n`). Rejects self-loops and repeated edges only;
    /// the T-tree conditions are checked by [`TTree::check`].
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TTreeError> {
        if n < 2 {
            return Err(TTreeError::TooFewLeaves { n, min: 2 });
        }
        let size = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0).max(n);
        let mut adj = vec![Vec::new(); size];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(TTreeError::Malformed(format!("self-loop at {a}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(TTreeError::Malformed(format!("repeated edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(TTree { n, adj })
    }

    /// The only tree for three leaves: one internal node joined to each leaf.
    pub fn star3() -> Self {
        TTree::from_edges(3, &[(0, 3), (1, 3), (2, 3)]).expect("static tree")
    }

    /// Spine `v_1..v_{n-2}` with `x_1, x_2` on `v_1`, `x_{k+1}` on `v_k` and `x_n` on
    /// `v_{n-2}`. Its image under `h` is the forward-backward structure.
    pub fn caterpillar(n: usize) -> Result<Self, TTreeError> {
        if n < 3 {
            return Err(TTreeError::TooFewLeaves { n, min: 3 });
        }
        let v = |k: usize| n + k - 1;
        let mut edges = vec![(0, v(1))];
        for k in 1..=n - 2 {
            edges.push((k, v(k)));
            if k > 1 {
                edges.push((v(k - 1), v(k)));
            }
        }
        edges.push((n - 1, v(n - 2)));
        TTree::from_edges(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Node id of leaf `x_j`.
    pub fn leaf(j: usize) -> usize {
        j - 1
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v < self.n
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Edges as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, list) in self.adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        out
    }

    /// `x<j>` for leaves, `v<k>` for internal nodes counted from 1.
    pub fn name(&self, v: usize) -> String {
        if v < self.n {
            format!("x{}", v + 1)
        } else {
            format!("v{}", v - self.n + 1)
        }
    }

    /// Every leaf has degree one, every internal node degree three, and the graph is a
    /// connected tree with `n - 2` internal nodes.
    pub fn check(&self) -> Result<(), TTreeError> {
        let size = self.adj.len();
        if size != 2 * self.n - 2 {
            return Err(TTreeError::Invalid(format!(
                "{size} nodes, expected {} for {} leaves",
                2 * self.n - 2,
                self.n
            )));
        }
        for (v, list) in self.adj.iter().enumerate() {
            let want = if v < self.n { 1 } else { 3 };
            if list.len() != want {
                return Err(TTreeError::Invalid(format!(
                    "{} has degree {}, expected {want}",
                    self.name(v),
                    list.len()
                )));
            }
        }
        let edges: usize = self.adj.iter().map(Vec::len).sum::<usize>() / 2;
        if edges != size - 1 || self.bfs(0).iter().any(|d| d.is_none()) {
            return Err(TTreeError::Invalid("graph is not a single tree".into()));
        }
        Ok(())
    }

    fn bfs(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.adj.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued nodes have a distance");
            for &w in &self.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Longest path length, by two breadth-first sweeps.
    pub fn diameter(&self) -> usize {
        let far = |start: usize| {
            self.bfs(start)
                .into_iter()
                .enumerate()
                .filter_map(|(v, d)| d.map(|d| (d, v)))
                .max()
                .expect("start node is reachable")
        };
        let (_, end) = far(0);
        far(end).0
    }

    fn check_edge(&self, a: usize, b: usize) -> Result<(), TTreeError> {
        for v in [a, b] {
            if v >= self.adj.len() {
                return Err(TTreeError::UnknownNode(v));
            }
        }
        if self.adj[a].binary_search(&b).is_err() {
            return Err(TTreeError::NotAnEdge(a, b));
        }
        Ok(())
    }

    /// `D(a, b, T)`: the binary tree hanging off `a` when the tree is rooted at `b`, with
    /// edges directed toward `a`. Leaves are labelled by input index.
    pub fn oriented_subtree(&self, a: usize, b: usize) -> Result<CanonicalForm, TTreeError> {
        self.check_edge(a, b)?;
        Ok(self.oriented_form(a, b))
    }

    fn oriented_form(&self, a: usize, from: usize) -> CanonicalForm {
        if a < self.n {
            return CanonicalForm::Leaf(a + 1);
        }
        let mut kids = self.adj[a].iter().filter(|&&w| w != from).map(|&w| self.oriented_form(w, a));
        let (l, r) = (kids.next().expect("degree three"), kids.next().expect("degree three"));
        CanonicalForm::pair(l, r)
    }

    /// `D(nbr(x_1), x_1, T)`, which determines the whole tree.
    pub fn canonical(&self) -> CanonicalForm {
        let root = self.adj[0][0];
        self.oriented_form(root, 0)
    }

    /// The complexity-optimal structure `h(T)`.
    ///
    /// # Panics
    /// If the tree fails [`TTree::check`] or has fewer than three leaves.
    pub fn h(&self) -> Structure {
        assert!(self.n >= 3, "h needs at least three leaves");
        self.check().expect("h needs a valid T-tree");
        let mut b = StructureBuilder::new(self.n);
        let mut memo: HashMap<(usize, usize), NodeId> = HashMap::new();
        for j in 0..self.n {
            let a = self.adj[j][0];
            let root = self.build_oriented(a, j, &mut b, &mut memo);
            b.label_output(root, j + 1).expect("roots are distinct subtrees");
        }
        b.build()
    }

    fn build_oriented(
        &self,
        a: usize,
        from: usize,
        b: &mut StructureBuilder,
        memo: &mut HashMap<(usize, usize), NodeId>,
    ) -> NodeId {
        if let Some(&id) = memo.get(&(a, from)) {
            return id;
        }
        let id = if a < self.n {
            b.input(a + 1)
        } else {
            let kids: Vec<usize> = self.adj[a].iter().copied().filter(|&w| w != from).collect();
            let l = self.build_oriented(kids[0], a, b, memo);
            let r = self.build_oriented(kids[1], a, b, memo);
            b.combine(l, r)
        };
        memo.insert((a, from), id);
        id
    }
}

/// True iff `t` satisfies every T-tree condition.
pub fn validate_ttree(t: &TTree) -> bool {
    t.check().is_ok()
}

/// Smallest diameter over all `n`-leaf T-trees.
pub fn d_min(n: usize) -> Result<usize, TTreeError> {
    if n < 3 {
        return Err(TTreeError::TooFewLeaves { n, min: 3 });
    }
    Ok(min_diameter(n))
}

/// Recovers the T-tree of a complexity-optimal structure: the undirected version of the
/// tree behind `y_1`, with `y_1` turned into an internal node carrying leaf `x_1`.
pub fn h_inverse(s: &Structure) -> Result<TTree, TTreeError> {
    let n = s.n();
    if n < 3 {
        return Err(TTreeError::TooFewLeaves { n, min: 3 });
    }
    let report = s.validate();
    if !report.is_for_y {
        return Err(TTreeError::NotComplexityOptimal("structure does not compute y".into()));
    }
    if s.complexity() != 3 * n - 6 {
        return Err(TTreeError::NotComplexityOptimal(format!(
            "complexity {} differs from {}",
            s.complexity(),
            3 * n - 6
        )));
    }
    let y1 = s.output_node(1).expect("validated structure labels y1");
    let sub = s.entering(y1).map_err(|e| TTreeError::Malformed(e.to_string()))?;
    let mut ids: HashMap<NodeId, usize> = HashMap::new();
    let mut next = n;
    for &node in &sub.nodes {
        let id = match s.nodes()[node.0].kind {
            NodeKind::Input(j) => j - 1,
            NodeKind::Computation(_) => {
                next += 1;
                next - 1
            }
        };
        ids.insert(node, id);
    }
    let mut edges: Vec<(usize, usize)> = sub.edges.iter().map(|(a, b)| (ids[a], ids[b])).collect();
    edges.push((0, ids[&y1]));
    let t = TTree::from_edges(n, &edges)?;
    t.check()?;
    Ok(t)
}

/// The smallest-diameter T-tree: a perfect binary tree on `x_1..x_{2^δ}` joined by one edge
/// to a left-packed complete binary tree on the remaining leaves, `δ = ⌊log(n/2)⌋`.
pub fn complexity_optimal_ttree(n: usize) -> Result<TTree, TTreeError> {
    if n < 3 {
        return Err(TTreeError::TooFewLeaves { n, min: 3 });
    }
    let split = 1 << delta(n);
    let mut edges = Vec::new();
    let mut next = n;
    let left = complete(0, split, &mut next, &mut edges);
    let right = complete(split, n - split, &mut next, &mut edges);
    edges.push((left, right));
    let t = TTree::from_edges(n, &edges)?;
    debug_assert_eq!(t.diameter(), min_diameter(n));
    Ok(t)
}

/// Complete binary tree on leaf ids `first..first + count`, bottom level filled from the
/// left. Returns the root id.
fn complete(first: usize, count: usize, next: &mut usize, edges: &mut Vec<(usize, usize)>) -> usize {
    if count == 1 {
        return first;
    }
    let h = ceil_log2(count);
    let bottom = 2 * (count - (1 << (h - 1)));
    let left_count = if bottom >= 1 << (h - 1) {
        1 << (h - 1)
    } else {
        (1 << (h - 2)) + bottom / 2
    };
    let l = complete(first, left_count, next, edges);
    let r = complete(first + left_count, count - left_count, next, edges);
    let root = *next;
    *next += 1;
    edges.push((l, root));
    edges.push((r, root));
    root
}

/// `h` of [`complexity_optimal_ttree`]: complexity `3n - 6`, latency `d_min(n) - 1`.
pub fn construct_complexity_optimal(n: usize) -> Result<Structure, TTreeError> {
    Ok(complexity_optimal_ttree(n)?.h())
}

/// Latency of [`construct_complexity_optimal`], `δ + ⌈log(n − 2^δ)⌉`.
pub fn complexity_optimal_latency(n: usize) -> usize {
    let d = delta(n);
    d + ceil_log2(n - (1 << d))
}
