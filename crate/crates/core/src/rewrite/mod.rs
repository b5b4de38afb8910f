//! Symbolic normalization, quantity evaluation and randomized equality of
//! open quantity terms.

mod eval;
mod normalize;

pub use eval::{
    check_equal_random, check_equal_random_tuplix, eval_quantity, sample_assignment, sample_value,
    substitute, substitute_quantity, Assignment, EvalError, Verdict,
};
pub use normalize::{
    normalize, reify, reify_unconditional, CanonicalTuplix, NormalizeError, SymbolicSlice,
};
