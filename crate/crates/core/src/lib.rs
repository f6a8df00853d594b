//! Order statistics through recursive elimination.
//!
//! The n-th smallest of `x1..xN` is computed as a max over the (n-1)-th
//! smallest of subsequences with one term removed, bottoming out in a plain
//! minimum. The same recursion is compiled into explicit formulas over
//! `+ - |.| /2` and checked against a sort-based oracle.

pub mod arith;
pub mod bench;
pub mod error;
pub mod expr;
pub mod select;
pub mod sequence;
pub mod verify;

pub use arith::{max_chain, min_chain, pairwise_max_arith, pairwise_min_arith};
pub use error::{Error, Result};
pub use select::{
    median, median_with, select, select_fullrange, select_memo, select_naive, sort_witness, Budget,
    EvalStats, Mode,
};
pub use sequence::{IndexSubset, Rank, RealSequence, SortWitness};
pub use verify::oracle_select;
