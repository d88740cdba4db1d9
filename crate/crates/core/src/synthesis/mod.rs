//! Structures that trade complexity for latency.
//!
//! * [`construct_latency_optimal_pow2`]: minimum latency `k` for `n = 2^k + 1`.
//! * [`compose`]: joins a base structure and several parts into a larger structure.
//! * [`Synthesizer`]: the general dispatcher producing a structure with `n` inputs and
//!   latency at most `τ` whose complexity equals the table value `φ(n, τ)`.
//! * [`adapt_variable_node`]: turns `y_1` into the fold of all inputs.

mod adapt;
mod general;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::dp::{Case, DpError};
use crate::math::ceil_log2;
use crate::structure::{ComplementPair, Node, NodeId, NodeKind, Structure, StructureBuilder, StructureError};

pub use crate::dp::Decomposition;
pub use adapt::adapt_variable_node;
pub use general::{construct_general, Manifest, Synthesized, Synthesizer};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("infeasible: tau < ceil(log(n-1)) (n = {n}, tau = {tau})")]
    Infeasible { n: usize, tau: usize },
    #[error("need at least {min} inputs, got {n}")]
    TooFewInputs { n: usize, min: usize },
    #[error("{0} is not of the form 2^k + 1")]
    NotPowerOfTwoPlusOne(usize),
    #[error("composition precondition violated: {0}")]
    Composition(String),
    #[error("<{a}, {b}> is not a minimum-height complement pair of part {part}")]
    NotPiPair { part: usize, a: NodeId, b: NodeId },
    #[error("input structure does not compute y: {0}")]
    Invalid(String),
    #[error("case {case} for ({n}, {tau}) is outside the tables")]
    Tables { n: usize, tau: usize, case: Case },
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

fn require_for_y(s: &Structure) -> Result<(), SynthesisError> {
    let report = s.validate();
    if report.is_for_y {
        Ok(())
    } else {
        let rules: Vec<_> = report.violations.iter().map(|v| v.rule.describe()).collect();
        Err(SynthesisError::Invalid(rules.join("; ")))
    }
}

/// Layered circulant structure for `n = 2^k + 1`: `v_{0,j} = x_j` and
/// `v_{i,j} = v_{i-1,j} ⊕ v_{i-1,j+2^{i-1}}` with indices taken cyclically in `1..=n`.
/// `v_{k,j}` folds every input except `x_{j-1}` (with `x_0 = x_n`) and is labelled
/// `y_{j-1}`. Latency `k`, complexity `nk`.
pub fn construct_latency_optimal_pow2(n: usize) -> Result<Structure, SynthesisError> {
    if n < 3 || !(n - 1).is_power_of_two() {
        return Err(SynthesisError::NotPowerOfTwoPlusOne(n));
    }
    let k = ceil_log2(n - 1);
    let mut b = StructureBuilder::new(n);
    let mut layer: Vec<NodeId> = (1..=n).map(|j| b.input(j)).collect();
    for i in 1..=k {
        let step = 1 << (i - 1);
        layer = (0..n).map(|j| b.combine(layer[j], layer[(j + step) % n])).collect();
    }
    for (j, &v) in layer.iter().enumerate() {
        // 0-based j is v_{k,j+1}, which misses x_j, i.e. x_n when j = 0
        let missing = if j == 0 { n } else { j };
        b.label_output(v, missing)?;
    }
    Ok(b.build())
}

/// Node ids ranked by position in the structure's topological (serialization) order.
fn serial_positions(s: &Structure) -> Vec<usize> {
    let mut pos = vec![0; s.len()];
    for (p, id) in s.topological_order().expect("acyclic").iter().enumerate() {
        pos[id.0] = p;
    }
    pos
}

/// The minimum-height complement pair that comes first in serialization order, skipping
/// pairs rejected by `exclude`.
pub(crate) fn first_pi_pair(s: &Structure, exclude: impl Fn(&ComplementPair) -> bool) -> Option<ComplementPair> {
    let pi = s.pi()?;
    let pos = serial_positions(s);
    pi.pairs.into_iter().filter(|p| !exclude(p)).min_by_key(|p| {
        let (x, y) = (pos[p.a.0], pos[p.b.0]);
        (x.min(y), x.max(y))
    })
}

/// A part for [`compose`]: a structure computing `y` and the minimum-height complement
/// pair that will feed the base.
#[derive(Clone, Copy, Debug)]
pub struct Part<'a> {
    pub structure: &'a Structure,
    pub pair: (NodeId, NodeId),
}

impl<'a> Part<'a> {
    /// Uses the first minimum-height complement pair in serialization order.
    pub fn new(structure: &'a Structure) -> Self {
        let p = first_pi_pair(structure, |_| false).expect("structures computing y have complement pairs");
        Part { structure, pair: (p.a, p.b) }
    }

    pub fn with_pair(structure: &'a Structure, a: NodeId, b: NodeId) -> Self {
        Part { structure, pair: (a, b) }
    }
}

/// Joins `base` (on `n_0` inputs) and `parts` (on `n_1..n_m` inputs) into a structure on
/// `n = Σ n_i - m` inputs:
///
/// 1. copy every part, then the base, without merging anything;
/// 2. turn base input `x_i` (`i <= m`) into the node combining the chosen pair of part `i`;
/// 3. for every output `y_j` of part `i` add a node combining it with base output `y_i`;
/// 4. number the sources part by part (ascending within a part), then the base inputs
///    `x_{m+1}..x_{n_0}`, and label each sink by the one input its tree misses.
///
/// Complexity is `c(S_0) + Σ (c(S_i) + n_i + 1)`. The result is not deduplicated.
pub fn compose(base: &Structure, parts: &[Part<'_>]) -> Result<Structure, SynthesisError> {
    let m = parts.len();
    let n0 = base.n();
    let total: usize = n0 + parts.iter().map(|p| p.structure.n()).sum::<usize>();
    if m == 0 {
        return Err(SynthesisError::Composition("at least one part required".into()));
    }
    if n0 < m {
        return Err(SynthesisError::Composition(format!("base has {n0} inputs for {m} parts")));
    }
    let n = total - m;
    if let Some(k) = std::iter::once(n0).chain(parts.iter().map(|p| p.structure.n())).find(|&k| k > n - 1) {
        return Err(SynthesisError::Composition(format!("size {k} exceeds n - 1 = {}", n - 1)));
    }
    require_for_y(base)?;
    for (i, part) in parts.iter().enumerate() {
        require_for_y(part.structure)?;
        let (a, b) = part.pair;
        let ok = part
            .structure
            .pi()
            .is_some_and(|pi| pi.pairs.iter().any(|p| (p.a, p.b) == (a.min(b), a.max(b))));
        if !ok {
            return Err(SynthesisError::NotPiPair { part: i + 1, a, b });
        }
    }

    let mut nodes: Vec<Node> = Vec::new();
    let mut part_maps = Vec::with_capacity(m);
    let mut next_input = 0;
    for part in parts {
        let s = part.structure;
        let offset = nodes.len();
        for node in s.nodes() {
            let kind = match node.kind {
                NodeKind::Input(j) => NodeKind::Input(next_input + j),
                NodeKind::Computation([a, b]) => NodeKind::Computation([NodeId(a.0 + offset), NodeId(b.0 + offset)]),
            };
            nodes.push(Node { kind, output: None });
        }
        next_input += s.n();
        part_maps.push(offset);
    }
    let base_offset = nodes.len();
    for node in base.nodes() {
        let kind = match node.kind {
            NodeKind::Input(j) => NodeKind::Input(next_input + j - m),
            NodeKind::Computation([a, b]) => {
                NodeKind::Computation([NodeId(a.0 + base_offset), NodeId(b.0 + base_offset)])
            }
        };
        nodes.push(Node { kind, output: None });
    }
    for (i, part) in parts.iter().enumerate() {
        let a0 = base.input_node(i + 1).expect("validated base").0 + base_offset;
        let (u, v) = part.pair;
        nodes[a0].kind = NodeKind::Computation([NodeId(u.0 + part_maps[i]), NodeId(v.0 + part_maps[i])]);
    }
    for (i, part) in parts.iter().enumerate() {
        let b0 = NodeId(base.output_node(i + 1).expect("validated base").0 + base_offset);
        for j in 1..=part.structure.n() {
            let bij = NodeId(part.structure.output_node(j).expect("validated part").0 + part_maps[i]);
            nodes.push(Node::computation(bij, b0));
        }
    }

    let unlabelled = Structure::from_nodes(n, nodes)?;
    let leaves = unlabelled.leaf_sets();
    let mut nodes = unlabelled.nodes().to_vec();
    for id in unlabelled.ids().filter(|&id| unlabelled.is_sink(id)) {
        let missing = missing_index(&leaves[id.0], n).ok_or_else(|| {
            SynthesisError::Composition(format!("sink {id} does not miss exactly one input"))
        })?;
        nodes[id.0].output = Some(missing);
    }
    Ok(Structure::from_nodes(n, nodes)?)
}

fn missing_index(set: &FixedBitSet, n: usize) -> Option<usize> {
    let mut zeros = (0..n).filter(|&i| !set.contains(i));
    let first = zeros.next()?;
    zeros.next().is_none().then_some(first + 1)
}

/// Latency bound for a composition: `max(max l(S_i) + 1, l(S_0) + 1 + max π(S_i))`.
pub fn composition_latency_bound(base: &Structure, parts: &[Part<'_>]) -> usize {
    let part_latency = parts.iter().map(|p| p.structure.latency()).max().unwrap_or(0);
    let part_pi = parts.iter().filter_map(|p| p.structure.pi()).map(|p| p.value).max().unwrap_or(0);
    (part_latency + 1).max(base.latency() + 1 + part_pi)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::structure::{leave_one_out_fold, two_input, BinaryOperator};
    use crate::ttree::TTree;

    fn label_map(s: &Structure) -> HashMap<usize, NodeId> {
        s.ids().filter_map(|id| s.nodes()[id.0].output.map(|j| (j, id))).collect()
    }

    #[test]
    fn pow2_examples() {
        for (n, c, l) in [(3, 3, 1), (5, 10, 2), (9, 27, 3), (17, 68, 4), (33, 165, 5), (65, 390, 6)] {
            let s = construct_latency_optimal_pow2(n).unwrap();
            assert!(s.validate().is_for_y, "n={n}");
            assert_eq!((s.complexity(), s.latency()), (c, l), "n={n}");
        }
        assert!(construct_latency_optimal_pow2(3).unwrap().same_as(&TTree::star3().h()));
        assert_eq!(construct_latency_optimal_pow2(6), Err(SynthesisError::NotPowerOfTwoPlusOne(6)));
    }

    #[test]
    fn pow2_trees_are_perfect() {
        let s = construct_latency_optimal_pow2(9).unwrap();
        let forms = s.canonical_forms();
        for j in 1..=9 {
            let f = &forms[label_map(&s)[&j].0];
            assert_eq!(f.height(), 3);
            assert_eq!(f.internal_count(), 7);
        }
    }

    #[test]
    fn small_to_large_example() {
        // (n, m, n0, n1, n2) = (6, 2, 3, 3, 2)
        let s3 = TTree::star3().h();
        let s2 = two_input();
        let parts = [Part::new(&s3), Part::new(&s2)];
        let s = compose(&s3, &parts).unwrap();
        assert_eq!(s.n(), 6);
        assert!(s.validate().is_for_y, "{:?}", s.validate());
        assert_eq!(s.complexity(), 3 + (3 + 3 + 1) + (2 + 1));
        assert!(s.pi().unwrap().value <= 2 * s3.pi().unwrap().value);
        assert!(s.latency() <= composition_latency_bound(&s3, &parts));
        let x: Vec<i64> = vec![4, -1, 7, 3, 9, 2];
        let op = BinaryOperator::sum();
        assert_eq!(s.evaluate(&op, &x).unwrap(), leave_one_out_fold(&op, &x));
    }

    #[test]
    fn compose_preconditions() {
        let s3 = TTree::star3().h();
        let s2 = two_input();
        assert!(matches!(compose(&s3, &[]), Err(SynthesisError::Composition(_))));
        // base with 2 inputs cannot take 3 parts
        let parts = [Part::new(&s3), Part::new(&s3), Part::new(&s3)];
        assert!(matches!(compose(&s2, &parts), Err(SynthesisError::Composition(_))));
        let x1 = s3.input_node(1).unwrap();
        let x2 = s3.input_node(2).unwrap();
        let bad = [Part::with_pair(&s3, x1, x2)];
        assert!(matches!(compose(&s3, &bad), Err(SynthesisError::NotPiPair { .. })));
    }
}
