use super::{TTree, TTreeError};

/// Largest `n` accepted by [`enumerate_ttrees`]; `|T_9| = 135135`.
pub const DEFAULT_ENUM_CAP: usize = 9;

/// Environment variable that replaces [`DEFAULT_ENUM_CAP`] in [`enum_cap`].
pub const ENUM_CAP_ENV: &str = "NODECOMP_ENUM_CAP";

/// The cap from [`ENUM_CAP_ENV`] when set to an integer, else [`DEFAULT_ENUM_CAP`].
pub fn enum_cap() -> usize {
    std::env::var(ENUM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ENUM_CAP)
}

/// Every `n`-leaf T-tree exactly once, `(2n-5)!!` in total, for `3 <= n <= 9`.
pub fn enumerate_ttrees(n: usize) -> Result<TTreeStream, TTreeError> {
    enumerate_ttrees_capped(n, DEFAULT_ENUM_CAP)
}

/// As [`enumerate_ttrees`] with an explicit upper limit on `n`.
pub fn enumerate_ttrees_capped(n: usize, cap: usize) -> Result<TTreeStream, TTreeError> {
    if n < 3 {
        return Err(TTreeError::TooFewLeaves { n, min: 3 });
    }
    if n > cap {
        return Err(TTreeError::AboveCap { n, cap });
    }
    // the star on x_1, x_2, x_3, using final numbering
    let root = Frame { edges: vec![(0, n), (1, n), (2, n)], leaves: 3, next_edge: 0 };
    Ok(TTreeStream { n, stack: vec![root], done_single: false })
}

struct Frame {
    edges: Vec<(usize, usize)>,
    leaves: usize,
    next_edge: usize,
}

/// Depth-first stream over the insertion recursion: the trees with `k` leaves come from
/// putting `x_k` on a new node subdividing each edge of each tree with `k - 1` leaves.
/// Only the current branch of the recursion is held in memory.
pub struct TTreeStream {
    n: usize,
    stack: Vec<Frame>,
    done_single: bool,
}

impl Iterator for TTreeStream {
    type Item = TTree;

    fn next(&mut self) -> Option<TTree> {
        let n = self.n;
        if n == 3 {
            if self.done_single {
                return None;
            }
            self.done_single = true;
            return Some(TTree::from_edges(3, &self.stack[0].edges).expect("star"));
        }
        loop {
            let top = self.stack.last_mut()?;
            if top.next_edge == top.edges.len() {
                self.stack.pop();
                continue;
            }
            let e = top.next_edge;
            top.next_edge += 1;
            // insert leaf x_{k+1} (id k) through new internal node v
            let k = top.leaves;
            let v = n + k - 2;
            let mut edges = top.edges.clone();
            let (a, b) = edges[e];
            edges[e] = (a, v);
            edges.push((b, v));
            edges.push((k, v));
            if k + 1 == n {
                return Some(TTree::from_edges(n, &edges).expect("insertion keeps a simple tree"));
            }
            self.stack.push(Frame { edges, leaves: k + 1, next_edge: 0 });
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::math::double_factorial;
    use crate::ttree::validate_ttree;

    #[test]
    fn counts_and_distinctness() {
        for n in 3..=8 {
            let mut seen = HashSet::new();
            for t in enumerate_ttrees(n).unwrap() {
                assert!(validate_ttree(&t));
                assert!(seen.insert(t.canonical()), "duplicate tree at n={n}");
            }
            assert_eq!(seen.len() as u64, double_factorial(2 * n - 5), "n={n}");
        }
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(enumerate_ttrees(10), Err(TTreeError::AboveCap { n: 10, cap: 9 })));
        assert!(enumerate_ttrees_capped(10, 10).is_ok());
        assert!(enumerate_ttrees(2).is_err());
    }
}
