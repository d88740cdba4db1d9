//! Leave-one-out folds over a commutative, associative operator.
//!
//! Given inputs `x_1..x_n`, a structure computes every `y_j`, the fold of all inputs
//! except `x_j`, as a shared network of two-operand nodes. This crate builds such
//! structures with the least number of nodes for a given latency bound, and checks them.
//!
//! ```
//! use nodecomp::dp::compute_tables;
//! use nodecomp::structure::BinaryOperator;
//! use nodecomp::synthesis::construct_general;
//!
//! let tables = compute_tables(16, 8).unwrap();
//! let s = construct_general(12, 4, &tables).unwrap().structure;
//! assert!(s.latency() <= 4);
//! let y = s.evaluate(&BinaryOperator::<i64>::sum(), &[1; 12]).unwrap();
//! assert_eq!(y, vec![11; 12]);
//! ```

pub mod dp;
pub mod math;
pub mod oracle;
pub mod structure;
pub mod synthesis;
pub mod transforms;
pub mod ttree;

pub use dp::{compute_tables, Cost, PhiEtaTables};
pub use structure::{BinaryOperator, NodeId, Structure, StructureBuilder, ValidationReport};
pub use synthesis::{construct_general, Synthesizer};
pub use ttree::{enum_cap, TTree, ENUM_CAP_ENV};


#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/structures.md")]
    mod structures {}
    #[doc = include_str!("../../../book/src/ttrees.md")]
    mod ttrees {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    mod synthesis {}
    #[doc = include_str!("../../../book/src/table.md")]
    mod table {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
