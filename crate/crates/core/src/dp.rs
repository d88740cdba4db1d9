//! The complexity/latency dynamic program.
//!
//! `φ(n, τ)` is the complexity of the synthesized structure on `n` inputs with latency at
//! most `τ`. `η(i1, i2, i3, i4)` is the cheapest way to split `i1` inputs into `i2` groups
//! of size at most `2^i3`, a group of size `k > 1` costing `φ(k, i4) + k + 1` and a
//! singleton costing nothing. Both tables are filled with `n` in the outer loop so that
//! every `φ(n', ·)` with `n' < n` is final when `η` is read for `n`.

use std::fmt;
use std::ops::Add;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::math::{ceil_log2, complexity_upper_bound, min_diameter, min_latency, saturation_latency};

/// An exact cost or infinity. Addition saturates at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cost {
    Finite(i64),
    Infinite,
}

impl Cost {
    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Add<i64> for Cost {
    type Output = Cost;

    fn add(self, rhs: i64) -> Cost {
        self + Cost::Finite(rhs)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cost::Finite(v) => s.serialize_i64(*v),
            Cost::Infinite => s.serialize_none(),
        }
    }
}

/// Which rule of the general construction applies to `(n, τ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Case {
    /// `n = 2`: no computation.
    E1,
    /// `τ >= d_min(n) - 1`: complexity-optimal tree.
    E2,
    /// `τ < ⌈log(n-1)⌉`: infeasible.
    E3,
    /// `2^τ = n - 1`: circulant latency-optimal structure.
    E4,
    /// Composition of smaller structures.
    E5,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Case of `(n, τ)`, tested in the order E1..E5. `n` must be at least 2.
pub fn classify(n: usize, tau: usize) -> Case {
    assert!(n >= 2, "no case for n < 2");
    if n == 2 {
        Case::E1
    } else if tau >= saturation_latency(n) {
        Case::E2
    } else if tau < min_latency(n) {
        Case::E3
    } else if tau < usize::BITS as usize && 1usize << tau == n - 1 {
        Case::E4
    } else {
        Case::E5
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DpError {
    #[error("n_max must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("({n}, {tau}) lies outside the computed tables")]
    OutOfBounds { n: usize, tau: usize },
    #[error("eta index ({0}, {1}, {2}, {3}) lies outside the computed tables")]
    EtaOutOfBounds(usize, usize, usize, usize),
    #[error("({n}, {tau}) is case {case}, which has no decomposition")]
    NoDecomposition { n: usize, tau: usize, case: Case },
}

/// One application of the composition step: a base structure on `n_0` inputs with
/// latency `τ_0` and parts on `n_1..n_m` inputs, each with latency `τ - 1`. The base has
/// `n_0 - m` inputs that are not fed by any part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub n: usize,
    pub tau: usize,
    pub n0: usize,
    pub tau0: usize,
    /// `n_1..n_m`, descending.
    pub sizes: Vec<usize>,
    /// `τ_1..τ_m`.
    pub taus: Vec<usize>,
    /// `φ(n_0, τ_0) + Σ (φ(n_i, τ_i) + n_i + 1)`.
    pub cost: i64,
}

impl Decomposition {
    pub fn m(&self) -> usize {
        self.sizes.len()
    }

    /// Checks the admissibility conditions: `1 <= m <= n - 1`, `n_0 >= m`,
    /// `Σ n_i = n + m`, every size in `[2, n-1]`, part depth bounded by both
    /// `⌈log n⌉ - ⌈log n_0⌉` and `τ - 1 - τ_0`, and every `τ_i <= τ - 1`.
    pub fn check(&self) -> Result<(), String> {
        let (n, m) = (self.n, self.m());
        if m == 0 || m > n - 1 {
            return Err(format!("m = {m} outside [1, {}]", n - 1));
        }
        if self.taus.len() != m {
            return Err("one latency per part required".into());
        }
        if self.n0 < m {
            return Err(format!("n0 = {} < m = {m}", self.n0));
        }
        let total = self.n0 + self.sizes.iter().sum::<usize>();
        if total != n + m {
            return Err(format!("sizes sum to {total}, expected {}", n + m));
        }
        if let Some(bad) = std::iter::once(&self.n0).chain(&self.sizes).find(|&&k| k < 2 || k > n - 1) {
            return Err(format!("size {bad} outside [2, {}]", n - 1));
        }
        if self.tau == 0 || self.tau0 > self.tau - 1 {
            return Err(format!("tau0 = {} not below tau = {}", self.tau0, self.tau));
        }
        let depth = self.sizes.iter().map(|&k| ceil_log2(k)).max().expect("m >= 1");
        let room = ceil_log2(n).saturating_sub(ceil_log2(self.n0));
        if depth > room {
            return Err(format!("part depth {depth} exceeds log budget {room}"));
        }
        if depth > self.tau - 1 - self.tau0 {
            return Err(format!("part depth {depth} exceeds latency budget {}", self.tau - 1 - self.tau0));
        }
        if let Some(t) = self.taus.iter().find(|&&t| t > self.tau - 1) {
            return Err(format!("part latency {t} exceeds {}", self.tau - 1));
        }
        Ok(())
    }
}

/// Filled `φ` and `η` tables with traceback records.
#[derive(Clone, Debug)]
pub struct PhiEtaTables {
    n_max: usize,
    tau_max: usize,
    // largest τ actually stored; larger τ saturate
    tau_cap: usize,
    log_max: usize,
    phi: Vec<Cost>,
    phi_back: Vec<Option<(usize, usize)>>,
    eta: Vec<Cost>,
    eta_back: Vec<Option<usize>>,
}

impl PhiEtaTables {
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn tau_max(&self) -> usize {
        self.tau_max
    }

    /// Largest stored latency, `min(tau_max, d_min(n_max) - 1)`.
    pub fn tau_cap(&self) -> usize {
        self.tau_cap
    }

    fn phi_index(&self, n: usize, tau: usize) -> usize {
        n * (self.tau_cap + 1) + tau
    }

    fn eta_index(&self, i1: usize, i2: usize, i3: usize, i4: usize) -> usize {
        ((i1 * (self.n_max + 1) + i2) * (self.log_max + 1) + i3) * (self.tau_cap + 1) + i4
    }

    /// `φ(n, τ)`. `φ(1, τ) = -2`; latencies above the stored range follow the saturation
    /// rule `φ = 3n - 6`.
    pub fn phi(&self, n: usize, tau: usize) -> Result<Cost, DpError> {
        if n == 0 || n > self.n_max {
            return Err(DpError::OutOfBounds { n, tau });
        }
        if n == 1 {
            return Ok(Cost::Finite(-2));
        }
        if tau <= self.tau_cap {
            return Ok(self.phi[self.phi_index(n, tau)]);
        }
        match classify(n, tau) {
            Case::E1 => Ok(Cost::Finite(0)),
            Case::E2 => Ok(Cost::Finite(3 * n as i64 - 6)),
            _ => Err(DpError::OutOfBounds { n, tau }),
        }
    }

    pub fn eta(&self, i1: usize, i2: usize, i3: usize, i4: usize) -> Result<Cost, DpError> {
        if i1 > self.n_max || i2 > self.n_max || i3 > self.log_max || i4 > self.tau_cap {
            return Err(DpError::EtaOutOfBounds(i1, i2, i3, i4));
        }
        Ok(self.eta[self.eta_index(i1, i2, i3, i4)])
    }

    /// Recovers the decomposition behind an E5 cell.
    pub fn traceback(&self, n: usize, tau: usize) -> Result<Decomposition, DpError> {
        let cost = self.phi(n, tau)?;
        let case = classify(n, tau);
        if case != Case::E5 {
            return Err(DpError::NoDecomposition { n, tau, case });
        }
        let (n0, tau0) = self.phi_back[self.phi_index(n, tau)].expect("finite E5 cells have a record");
        let theta = (ceil_log2(n) - ceil_log2(n0)).min(tau - 1 - tau0);
        let (mut i1, mut i2) = (n, n0);
        let mut sizes = Vec::new();
        while let Some(k) = self.eta_back[self.eta_index(i1, i2, theta, tau - 1)] {
            sizes.push(k);
            i1 -= k;
            i2 -= 1;
        }
        debug_assert_eq!(i1, i2, "the remainder is all singletons");
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let taus = vec![tau - 1; sizes.len()];
        Ok(Decomposition { n, tau, n0, tau0, sizes, taus, cost: cost.finite().expect("E5 cells are finite") })
    }

    /// Rows `n = 2..=n_max` in the printed layout: `φ(n, ⌈log(n-1)⌉ + i)` for
    /// `i = 0..=4`, the latency range where φ changes, and the upper bound.
    pub fn rows(&self) -> Vec<TableRow> {
        (2..=self.n_max)
            .map(|n| {
                let lo = min_latency(n);
                let cells = std::array::from_fn(|i| self.phi(n, lo + i).expect("within bounds or saturated"));
                TableRow { n, tau_lo: lo, tau_hi: saturation_latency(n), cells, ub: complexity_upper_bound(n) }
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,tau_lo,tau_hi,i0,i1,i2,i3,i4,ub\n");
        for r in self.rows() {
            let cells: Vec<String> = r.cells.iter().map(Cost::to_string).collect();
            out.push_str(&format!("{},{},{},{},{}\n", r.n, r.tau_lo, r.tau_hi, cells.join(","), r.ub));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.rows()).expect("rows are plain data")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub tau_lo: usize,
    pub tau_hi: usize,
    pub cells: [Cost; 5],
    pub ub: usize,
}

/// Runs the dynamic program for `2 <= n <= n_max` and `0 <= τ <= tau_max` (latencies past
/// `d_min(n_max) - 1` are not stored since every row has saturated by then).
pub fn compute_tables(n_max: usize, tau_max: usize) -> Result<PhiEtaTables, DpError> {
    if n_max < 2 {
        return Err(DpError::TooSmall(n_max));
    }
    let tau_cap = tau_max.min(min_diameter(n_max) - 1);
    let log_max = ceil_log2(n_max);
    let mut t = PhiEtaTables {
        n_max,
        tau_max,
        tau_cap,
        log_max,
        phi: vec![Cost::Infinite; (n_max + 1) * (tau_cap + 1)],
        phi_back: vec![None; (n_max + 1) * (tau_cap + 1)],
        eta: vec![Cost::Infinite; (n_max + 1) * (n_max + 1) * (log_max + 1) * (tau_cap + 1)],
        eta_back: vec![None; (n_max + 1) * (n_max + 1) * (log_max + 1) * (tau_cap + 1)],
    };
    for i in 0..=n_max {
        for i3 in 0..=log_max {
            for i4 in 0..=tau_cap {
                let at = t.eta_index(i, i, i3, i4);
                t.eta[at] = Cost::Finite(0);
            }
        }
    }

    for n in 2..=n_max {
        for tau in 0..=tau_cap {
            let value = match classify(n, tau) {
                Case::E1 => Cost::Finite(0),
                Case::E2 => Cost::Finite(3 * n as i64 - 6),
                Case::E3 => Cost::Infinite,
                Case::E4 => Cost::Finite((n * tau) as i64),
                Case::E5 => {
                    let mut best = Cost::Infinite;
                    let mut arg = None;
                    for n0 in 2..n {
                        for tau0 in 0..tau {
                            let theta = (ceil_log2(n) - ceil_log2(n0)).min(tau - 1 - tau0);
                            let omega = t.phi[t.phi_index(n0, tau0)] + t.eta[t.eta_index(n, n0, theta, tau - 1)];
                            if omega < best {
                                best = omega;
                                arg = Some((n0, tau0));
                            }
                        }
                    }
                    let at = t.phi_index(n, tau);
                    t.phi_back[at] = arg;
                    best
                }
            };
            let at = t.phi_index(n, tau);
            t.phi[at] = value;
            if !value.is_finite() {
                continue;
            }
            let item = value + (n as i64 + 1);
            for i1 in n..=n_max {
                for i2 in 1..=n_max {
                    for i3 in ceil_log2(n)..=log_max {
                        let lambda = t.eta[t.eta_index(i1 - n, i2 - 1, i3, tau)] + item;
                        let at = t.eta_index(i1, i2, i3, tau);
                        if lambda < t.eta[at] {
                            t.eta[at] = lambda;
                            t.eta_back[at] = Some(n);
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

/// Free-function form of [`PhiEtaTables::phi`].
pub fn phi(tables: &PhiEtaTables, n: usize, tau: usize) -> Result<Cost, DpError> {
    tables.phi(n, tau)
}

/// Free-function form of [`PhiEtaTables::traceback`].
pub fn traceback(tables: &PhiEtaTables, n: usize, tau: usize) -> Result<Decomposition, DpError> {
    tables.traceback(n, tau)
}

/// The printed table bundled with the crate.
pub const GOLDEN_TABLE: &str = include_str!("../data/table1.csv");

/// A cell where computed and printed values disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableDiff {
    pub n: usize,
    pub column: String,
    pub expected: String,
    pub actual: String,
}

/// Compares every non-blank cell of a golden CSV in the layout of
/// [`PhiEtaTables::to_csv`] with the computed tables. Rows beyond `n_max` are skipped.
pub fn compare_golden(tables: &PhiEtaTables, golden: &str) -> Result<Vec<TableDiff>, String> {
    let mut lines = golden.lines();
    let header: Vec<&str> = lines.next().ok_or("empty golden file")?.split(',').collect();
    if header != ["n", "tau_lo", "tau_hi", "i0", "i1", "i2", "i3", "i4", "ub"] {
        return Err(format!("unexpected header {header:?}"));
    }
    let computed = tables.rows();
    let mut diffs = Vec::new();
    for (line_no, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(format!("line {} has {} fields", line_no + 2, fields.len()));
        }
        let n: usize = fields[0].parse().map_err(|_| format!("bad n on line {}", line_no + 2))?;
        let Some(row) = computed.iter().find(|r| r.n == n) else { continue };
        let mut actual = vec![row.tau_lo.to_string(), row.tau_hi.to_string()];
        actual.extend(row.cells.iter().map(Cost::to_string));
        actual.push(row.ub.to_string());
        for (col, (want, got)) in header[1..].iter().zip(fields[1..].iter().zip(actual)) {
            if !want.is_empty() && *want != got {
                diffs.push(TableDiff { n, column: col.to_string(), expected: want.to_string(), actual: got });
            }
        }
    }
    Ok(diffs)
}
