//! Abstract syntax, parser and printer for quantity and tuplix terms.
//!
//! Concrete syntax:
//!
//! ```text
//! tuplix  := prim ('&' prim)*
//! prim    := 'eps' | 'bot' | ACTION '(' qty ')' | 'test(' qty ')'
//!          | 'delay' ('^' NAT)? '(' tuplix ')' | 'abs{' actlist '}(' tuplix ')'
//!          | 'enc{' actlist '}' ('@' qatom)? '(' tuplix ')' | '(' tuplix ')'
//! qty     := arithmetic over numerals, variables, 'sign', 'inv', 'max', 'min',
//!            'icap@' qatom '(' tuplix ')'
//! qatom   := numeral | variable | '(' qty ')'
//! ```
//!
//! Unary minus binds tighter than `^`, which binds tighter than `*` and `/`.

mod ast;
mod parser;
mod printer;

pub use ast::{actions_of, delay_depth, Action, ActionSet, ActionUniverse, Quantity, Tuplix, IOTA};
pub use parser::{parse_quantity, parse_tuplix, ParseError, Position};
pub use printer::{print_quantity, print_tuplix};
