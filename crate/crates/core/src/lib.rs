//! Timed tuplix calculus.
//!
//! Terms describe money transfers spread over discrete time slices. This
//! crate parses them, normalizes them symbolically, evaluates them in the
//! standard model over exact zero-totalized rationals, and answers financial
//! questions about purity, implicit capital and profit.

pub mod cli;
pub mod finance;
pub mod meadow;
pub mod model;
pub mod rewrite;
pub mod syntax;

pub use meadow::Rational;
pub use syntax::{Action, ActionUniverse, Quantity, Tuplix};
