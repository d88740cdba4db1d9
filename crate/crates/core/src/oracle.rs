//! Exhaustive checks at small sizes, independent of the constructions they verify.
//!
//! * [`enumerate_dbts`]: every binary tree over a labelled leaf set.
//! * [`brute_force_min`]: the least complexity of any structure for `n <= 5`, found by
//!   choosing one tree per output and counting the distinct subtrees of the union.
//! * [`verify_co_enumeration`]: properties of every complexity-optimal structure.
//! * [`verify_dp_small`]: the table values against a direct search over decompositions.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dp::{classify, compute_tables, Case, Cost};
use crate::math::{ceil_log2, double_factorial, min_diameter};
use crate::structure::{CanonicalForm, Structure, StructureBuilder};
use crate::ttree::{enumerate_ttrees, h_inverse};

/// A binary tree with unordered children over labelled leaves.
pub type DbtShape = CanonicalForm;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} = {got} is outside the supported range {lo}..={hi}")]
    OutOfRange { what: &'static str, got: usize, lo: usize, hi: usize },
    #[error("leaf indices must be distinct")]
    RepeatedLeaf,
    #[error("no structure exists with these bounds")]
    NoStructure,
}

fn in_range(what: &'static str, got: usize, lo: usize, hi: usize) -> Result<(), OracleError> {
    if (lo..=hi).contains(&got) {
        Ok(())
    } else {
        Err(OracleError::OutOfRange { what, got, lo, hi })
    }
}

/// All `(2m-3)!!` trees over `m` leaves (`1 <= m <= 8`), optionally only those of height
/// at most `max_height`. Each tree appears exactly once.
pub fn enumerate_dbts(leaves: &[usize], max_height: Option<usize>) -> Result<Vec<DbtShape>, OracleError> {
    in_range("leaf count", leaves.len(), 1, 8)?;
    let mut sorted = leaves.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != leaves.len() {
        return Err(OracleError::RepeatedLeaf);
    }
    let limit = max_height.unwrap_or(usize::MAX);
    let mut trees = vec![CanonicalForm::Leaf(leaves[0])];
    for &leaf in &leaves[1..] {
        trees = trees
            .iter()
            .flat_map(|t| insertions(t, leaf))
            .filter(|t| t.height() <= limit)
            .collect();
    }
    Ok(trees)
}

/// Every tree obtained by hanging `leaf` above one node of `t` (the root included).
fn insertions(t: &CanonicalForm, leaf: usize) -> Vec<CanonicalForm> {
    let mut out = vec![CanonicalForm::pair(t.clone(), CanonicalForm::Leaf(leaf))];
    if let CanonicalForm::Pair(a, b) = t {
        for a2 in insertions(a, leaf) {
            out.push(CanonicalForm::pair(a2, (**b).clone()));
        }
        for b2 in insertions(b, leaf) {
            out.push(CanonicalForm::pair((**a).clone(), b2));
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct BruteForceResult {
    pub n: usize,
    pub tau: Option<usize>,
    pub min_complexity: usize,
    pub witness: Structure,
    /// Complete assignments examined after pruning.
    pub leaves_visited: u64,
}

/// Interns every internal subtree so a tree becomes a sorted list of small ids.
#[derive(Default)]
struct Interner {
    ids: HashMap<CanonicalForm, u32>,
}

impl Interner {
    fn internal_ids(&mut self, t: &CanonicalForm, out: &mut Vec<u32>) {
        if let CanonicalForm::Pair(a, b) = t {
            let next = self.ids.len() as u32;
            out.push(*self.ids.entry(t.clone()).or_insert(next));
            self.internal_ids(a, out);
            self.internal_ids(b, out);
        }
    }
}

/// Least complexity over every structure on `n <= 5` inputs (with latency at most `tau`
/// when given), with one structure attaining it.
///
/// A structure is determined by the tree behind each output, and its complexity is the
/// number of distinct subtrees across those trees. The search tries every combination,
/// pruning any branch that cannot beat the best found so far.
pub fn brute_force_min(n: usize, tau: Option<usize>) -> Result<BruteForceResult, OracleError> {
    in_range("n", n, 2, 5)?;
    let mut interner = Interner::default();
    let mut choices: Vec<Vec<(CanonicalForm, Vec<u32>)>> = Vec::with_capacity(n);
    for j in 1..=n {
        let leaves: Vec<usize> = (1..=n).filter(|&i| i != j).collect();
        let shapes = enumerate_dbts(&leaves, tau)?;
        if shapes.is_empty() {
            return Err(OracleError::NoStructure);
        }
        let encoded = shapes
            .into_iter()
            .map(|s| {
                let mut ids = Vec::new();
                interner.internal_ids(&s, &mut ids);
                (s, ids)
            })
            .collect();
        choices.push(encoded);
    }
    let forms = interner.ids.len();
    let best = AtomicUsize::new(usize::MAX);
    let witness: Mutex<Option<Vec<usize>>> = Mutex::new(None);
    let visited = AtomicUsize::new(0);

    choices[0].par_iter().enumerate().for_each(|(first, (_, ids))| {
        let mut counts = vec![0u32; forms];
        let mut distinct = 0;
        for &f in ids {
            if counts[f as usize] == 0 {
                distinct += 1;
            }
            counts[f as usize] += 1;
        }
        let mut pick = vec![first];
        let mut local_visits = 0u64;
        search(&choices, 1, &mut counts, distinct, &mut pick, &best, &witness, &mut local_visits);
        visited.fetch_add(local_visits as usize, Ordering::Relaxed);
    });

    let pick = witness.into_inner().expect("no poisoned lock").expect("some assignment completes");
    let mut b = StructureBuilder::new(n);
    for (j, &k) in pick.iter().enumerate() {
        let root = choices[j][k].0.insert_into(&mut b);
        b.label_output(root, j + 1).expect("roots have distinct leaf sets");
    }
    Ok(BruteForceResult {
        n,
        tau,
        min_complexity: best.into_inner(),
        witness: b.build(),
        leaves_visited: visited.into_inner() as u64,
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    choices: &[Vec<(CanonicalForm, Vec<u32>)>],
    depth: usize,
    counts: &mut [u32],
    distinct: usize,
    pick: &mut Vec<usize>,
    best: &AtomicUsize,
    witness: &Mutex<Option<Vec<usize>>>,
    visits: &mut u64,
) {
    // each remaining output root is a subtree no other output can contain
    if distinct + (choices.len() - depth) >= best.load(Ordering::Relaxed) {
        return;
    }
    if depth == choices.len() {
        *visits += 1;
        let mut slot = witness.lock().expect("no poisoned lock");
        // ties keep the assignment that is first in lexicographic order
        let current = best.load(Ordering::Relaxed);
        if distinct < current || (distinct == current && slot.as_ref().is_none_or(|w| *pick < *w)) {
            best.store(distinct, Ordering::Relaxed);
            *slot = Some(pick.clone());
        }
        return;
    }
    for (k, (_, ids)) in choices[depth].iter().enumerate() {
        let mut added = 0;
        for &f in ids {
            if counts[f as usize] == 0 {
                added += 1;
            }
            counts[f as usize] += 1;
        }
        pick.push(k);
        search(choices, depth + 1, counts, distinct + added, pick, best, witness, visits);
        pick.pop();
        for &f in ids {
            counts[f as usize] -= 1;
        }
    }
}

/// Outcome of checking every complexity-optimal structure on `n` inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CoEnumerationReport {
    pub n: usize,
    pub expected: u64,
    pub count: u64,
    pub distinct: u64,
    /// Structures failing the output conditions.
    pub invalid: u64,
    /// Structures whose complexity is not `3n - 6`.
    pub wrong_complexity: u64,
    /// Non-sink nodes with other than two consumers.
    pub degree_failures: u64,
    /// `(node, j)` where `x_j` below the node and `y_j` above it are not exclusive.
    pub reachability_failures: u64,
    /// Nodes without exactly one complement partner, or pair counts other than `2n - 3`.
    pub complement_failures: u64,
    /// Structures whose latency is not the tree diameter minus one.
    pub latency_failures: u64,
    /// Trees not recovered from their structure.
    pub round_trip_failures: u64,
    /// Smallest diameter seen, against the closed form.
    pub min_diameter: usize,
    pub expected_min_diameter: usize,
    pub passed: bool,
}

/// Maps every `n`-leaf T-tree (`3 <= n <= 7`) through `h` and checks the count, mutual
/// distinctness, validity, complexity, degree, reachability and complement properties of
/// the images, the latency/diameter relation and the inverse map.
pub fn verify_co_enumeration(n: usize) -> Result<CoEnumerationReport, OracleError> {
    in_range("n", n, 3, 7)?;
    let trees: Vec<_> = enumerate_ttrees(n).expect("within cap").collect();
    let mut report = CoEnumerationReport {
        n,
        expected: double_factorial(2 * n - 5),
        count: trees.len() as u64,
        min_diameter: usize::MAX,
        expected_min_diameter: min_diameter(n),
        ..Default::default()
    };
    let mut signatures = std::collections::HashSet::new();
    for t in &trees {
        let s = t.h();
        if signatures.insert(s.signature()) {
            report.distinct += 1;
        }
        if !s.validate().is_for_y {
            report.invalid += 1;
            continue;
        }
        if s.complexity() != 3 * n - 6 {
            report.wrong_complexity += 1;
        }
        for id in s.ids() {
            let k = s.consumers(id).len();
            if k != 0 && k != 2 {
                report.degree_failures += 1;
            }
        }
        report.reachability_failures += reachability_failures(&s);
        report.complement_failures += complement_failures(&s);
        let d = t.diameter();
        report.min_diameter = report.min_diameter.min(d);
        if s.latency() + 1 != d {
            report.latency_failures += 1;
        }
        if h_inverse(&s).map_or(true, |back| back != *t) {
            report.round_trip_failures += 1;
        }
    }
    report.passed = report.count == report.expected
        && report.distinct == report.count
        && report.invalid == 0
        && report.wrong_complexity == 0
        && report.degree_failures == 0
        && report.reachability_failures == 0
        && report.complement_failures == 0
        && report.latency_failures == 0
        && report.round_trip_failures == 0
        && report.min_diameter == report.expected_min_diameter;
    Ok(report)
}

fn reachability_failures(s: &Structure) -> u64 {
    let n = s.n();
    let below = s.leaf_sets();
    // outputs reachable from each node, filled in reverse topological order
    let mut above = vec![FixedBitSet::with_capacity(n + 1); s.len()];
    let order = s.topological_order().expect("valid structures are acyclic");
    for &id in order.iter().rev() {
        let mut set = FixedBitSet::with_capacity(n + 1);
        if let Some(j) = s.nodes()[id.0].output {
            set.insert(j);
        }
        for c in s.consumers(id) {
            set.union_with(&above[c.0]);
        }
        above[id.0] = set;
    }
    let mut failures = 0;
    for id in s.ids() {
        for j in 1..=n {
            if below[id.0].contains(j - 1) == above[id.0].contains(j) {
                failures += 1;
            }
        }
    }
    failures
}

fn complement_failures(s: &Structure) -> u64 {
    let pairs = s.complement_pairs();
    let mut partners = vec![0u32; s.len()];
    for p in &pairs {
        partners[p.a.0] += 1;
        partners[p.b.0] += 1;
    }
    let mut failures = partners.iter().filter(|&&k| k != 1).count() as u64;
    if pairs.len() != 2 * s.n() - 3 {
        failures += 1;
    }
    failures
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DpCell {
    pub n: usize,
    pub tau: usize,
    pub dp: Cost,
    pub search: Cost,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DpSmallReport {
    pub n_max: usize,
    pub tau_max: usize,
    pub cells: Vec<DpCell>,
    pub disagreements: usize,
    pub passed: bool,
}

/// Compares `φ(n, τ)` for `2 <= n <= n_max <= 9` and every `τ` up to one past the last
/// non-saturated latency with a search that lists every admissible decomposition
/// explicitly and costs parts recursively.
pub fn verify_dp_small(n_max: usize) -> Result<DpSmallReport, OracleError> {
    in_range("n_max", n_max, 2, 9)?;
    let tau_max = min_diameter(n_max);
    let tables = compute_tables(n_max, tau_max).expect("n_max >= 2");
    let mut memo = HashMap::new();
    let mut cells = Vec::new();
    for n in 2..=n_max {
        for tau in 0..=tau_max {
            let dp = tables.phi(n, tau).expect("within bounds");
            let search = search_cost(n, tau, &mut memo);
            cells.push(DpCell { n, tau, dp, search, agree: dp == search });
        }
    }
    let disagreements = cells.iter().filter(|c| !c.agree).count();
    Ok(DpSmallReport { n_max, tau_max, cells, disagreements, passed: disagreements == 0 })
}

fn search_cost(n: usize, tau: usize, memo: &mut HashMap<(usize, usize), Cost>) -> Cost {
    if let Some(&c) = memo.get(&(n, tau)) {
        return c;
    }
    let cost = match classify(n, tau) {
        Case::E1 => Cost::Finite(0),
        Case::E2 => Cost::Finite(3 * n as i64 - 6),
        Case::E3 => Cost::Infinite,
        Case::E4 => Cost::Finite((n * tau) as i64),
        Case::E5 => {
            let mut best = Cost::Infinite;
            for n0 in 2..n {
                for tau0 in 0..tau {
                    let base = search_cost(n0, tau0, memo);
                    if !base.is_finite() {
                        continue;
                    }
                    let depth = (ceil_log2(n) - ceil_log2(n0)).min(tau - 1 - tau0);
                    let largest = (1usize << depth).min(n - 1);
                    for m in 1..=n0.min(n - 1) {
                        // parts sum to n + m - n0, each in [2, largest]
                        let total = n + m;
                        if total <= n0 {
                            continue;
                        }
                        for sizes in partitions(total - n0, m, 2, largest) {
                            let mut c = base;
                            for &k in &sizes {
                                let part = (0..tau).map(|t| search_cost(k, t, memo)).min().expect("tau >= 1");
                                c = c + part + (k as i64 + 1);
                            }
                            best = best.min(c);
                        }
                    }
                }
            }
            best
        }
    };
    memo.insert((n, tau), cost);
    cost
}

/// Multisets of `parts` integers in `[lo, hi]` summing to `total`, each non-increasing.
fn partitions(total: usize, parts: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn rec(total: usize, parts: usize, lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if total < parts * lo || total > parts * hi {
            return;
        }
        for k in (lo..=hi.min(total)).rev() {
            cur.push(k);
            rec(total - k, parts - 1, lo, k, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, lo, hi, &mut cur, &mut out);
    out
}
