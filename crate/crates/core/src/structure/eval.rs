//! Evaluation of structures under a pluggable binary operation.
//!
//! Sharing one subtree between several outputs only preserves the meaning of
//! `y_j = fold_{i != j} x_i` when the operation is commutative and associative, so
//! user-supplied operators are checked on sample values before they can be used.

use std::fmt;
use std::ops::BitXor;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{NodeKind, Structure};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error("operator {name} is not commutative: {detail}")]
    NotCommutative { name: String, detail: String },
    #[error("operator {name} is not associative: {detail}")]
    NotAssociative { name: String, detail: String },
    #[error("bad lookup table: {0}")]
    BadTable(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("expected {expected} input values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("no node carries output y{0}")]
    MissingOutput(usize),
    #[error("no node carries input x{0}")]
    MissingInput(usize),
    #[error("structure has a cycle")]
    Cyclic,
}

type ApplyFn<T> = dyn Fn(&T, &T) -> T + Send + Sync;

/// A named two-input operation on message values.
#[derive(Clone)]
pub struct BinaryOperator<T> {
    name: String,
    apply: Arc<ApplyFn<T>>,
}

impl<T> fmt::Debug for BinaryOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryOperator").field("name", &self.name).finish()
    }
}

impl<T> BinaryOperator<T> {
    /// Registers a custom operator after checking commutativity on every sample pair and
    /// associativity on every sample triple.
    pub fn register<F>(name: impl Into<String>, f: F, samples: &[T]) -> Result<Self, OperatorError>
    where
        F: Fn(&T, &T) -> T + Send + Sync + 'static,
        T: PartialEq + fmt::Debug,
    {
        let name = name.into();
        check_commutative_associative(&name, &f, samples)?;
        Ok(BinaryOperator { name, apply: Arc::new(f) })
    }

    fn builtin<F>(name: &str, f: F) -> Self
    where
        F: Fn(&T, &T) -> T + Send + Sync + 'static,
    {
        BinaryOperator { name: name.to_string(), apply: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, a: &T, b: &T) -> T {
        (self.apply)(a, b)
    }
}

impl<T: PartialOrd + Clone + 'static> BinaryOperator<T> {
    pub fn min() -> Self {
        Self::builtin("min", |a: &T, b: &T| if b < a { b.clone() } else { a.clone() })
    }

    pub fn max() -> Self {
        Self::builtin("max", |a: &T, b: &T| if b > a { b.clone() } else { a.clone() })
    }
}

impl<T: BitXor<Output = T> + Clone + 'static> BinaryOperator<T> {
    pub fn xor() -> Self {
        Self::builtin("xor", |a: &T, b: &T| a.clone() ^ b.clone())
    }
}

impl BinaryOperator<i64> {
    /// Integer addition, wrapping on overflow so that it stays associative.
    pub fn sum() -> Self {
        Self::builtin("sum", |a: &i64, b: &i64| a.wrapping_add(*b))
    }
}

impl BinaryOperator<f64> {
    /// Floating-point addition. Results depend on association order, so compare them
    /// against a reference fold with a relative tolerance.
    pub fn float_sum() -> Self {
        Self::builtin("sum", |a: &f64, b: &f64| a + b)
    }
}

impl BinaryOperator<u16> {
    pub fn lookup(table: LookupTable) -> Self {
        let name = table.name.clone().unwrap_or_else(|| "lut".to_string());
        let size = table.size;
        let entries = table.entries;
        Self::builtin(&name, move |a: &u16, b: &u16| {
            entries[*a as usize * size + *b as usize]
        })
    }
}

/// Checks `f` for commutativity on all sample pairs and associativity on all triples.
pub fn check_commutative_associative<T, F>(name: &str, f: &F, samples: &[T]) -> Result<(), OperatorError>
where
    F: Fn(&T, &T) -> T + ?Sized,
    T: PartialEq + fmt::Debug,
{
    for a in samples {
        for b in samples {
            let (ab, ba) = (f(a, b), f(b, a));
            if ab != ba {
                return Err(OperatorError::NotCommutative {
                    name: name.to_string(),
                    detail: format!("f({a:?}, {b:?}) = {ab:?} but f({b:?}, {a:?}) = {ba:?}"),
                });
            }
        }
    }
    for a in samples {
        for b in samples {
            let ab = f(a, b);
            for c in samples {
                let left = f(&ab, c);
                let right = f(a, &f(b, c));
                if left != right {
                    return Err(OperatorError::NotAssociative {
                        name: name.to_string(),
                        detail: format!("inputs ({a:?}, {b:?}, {c:?}): {left:?} vs {right:?}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// A two-input table over the symbol alphabet `0..size`, as used by lookup-table
/// decoders. Construction checks the full domain for commutativity and associativity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LookupTableFile", into = "LookupTableFile")]
pub struct LookupTable {
    name: Option<String>,
    size: usize,
    entries: Vec<u16>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct LookupTableFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    table: Vec<Vec<u16>>,
}

impl TryFrom<LookupTableFile> for LookupTable {
    type Error = OperatorError;

    fn try_from(file: LookupTableFile) -> Result<Self, Self::Error> {
        LookupTable::new(file.name, file.table)
    }
}

impl From<LookupTable> for LookupTableFile {
    fn from(t: LookupTable) -> Self {
        LookupTableFile { name: t.name, table: t.entries.chunks(t.size).map(<[u16]>::to_vec).collect() }
    }
}

impl LookupTable {
    pub fn new(name: Option<String>, rows: Vec<Vec<u16>>) -> Result<Self, OperatorError> {
        let size = rows.len();
        if size == 0 || size > u16::MAX as usize {
            return Err(OperatorError::BadTable(format!("unsupported alphabet size {size}")));
        }
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != size) {
            return Err(OperatorError::BadTable(format!(
                "row {i} has {} entries, expected {size}",
                row.len()
            )));
        }
        let entries: Vec<u16> = rows.into_iter().flatten().collect();
        if let Some(bad) = entries.iter().find(|&&e| e as usize >= size) {
            return Err(OperatorError::BadTable(format!("entry {bad} outside 0..{size}")));
        }
        let label = name.clone().unwrap_or_else(|| "lut".to_string());
        let domain: Vec<u16> = (0..size as u16).collect();
        let f = |a: &u16, b: &u16| entries[*a as usize * size + *b as usize];
        check_commutative_associative(&label, &f, &domain)?;
        Ok(LookupTable { name, size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Reference semantics: `y_j` folds every input except `x_j`, left to right.
pub fn leave_one_out_fold<T: Clone>(op: &BinaryOperator<T>, inputs: &[T]) -> Vec<T> {
    (0..inputs.len())
        .map(|j| {
            let mut rest = inputs.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v);
            let first = rest.next().expect("at least two inputs").clone();
            rest.fold(first, |acc, v| op.apply(&acc, v))
        })
        .collect()
}

impl Structure {
    /// Evaluates every node in topological order and returns `(y_1, .., y_n)`.
    pub fn evaluate<T: Clone>(&self, op: &BinaryOperator<T>, inputs: &[T]) -> Result<Vec<T>, EvalError> {
        if inputs.len() != self.n {
            return Err(EvalError::Arity { expected: self.n, got: inputs.len() });
        }
        let order = self.topological_order().ok_or(EvalError::Cyclic)?;
        let mut values: Vec<Option<T>> = vec![None; self.nodes.len()];
        let mut outputs: Vec<Option<T>> = vec![None; self.n];
        for &id in order {
            let node = &self.nodes[id.0];
            let v = match node.kind {
                NodeKind::Input(j) => inputs[j - 1].clone(),
                NodeKind::Computation([a, b]) => {
                    let (va, vb) = (values[a.0].as_ref(), values[b.0].as_ref());
                    op.apply(va.expect("operand evaluated"), vb.expect("operand evaluated"))
                }
            };
            if let Some(j) = node.output {
                outputs[j - 1] = Some(v.clone());
            }
            values[id.0] = Some(v);
        }
        outputs
            .into_iter()
            .enumerate()
            .map(|(j, v)| v.ok_or(EvalError::MissingOutput(j + 1)))
            .collect()
    }
}
