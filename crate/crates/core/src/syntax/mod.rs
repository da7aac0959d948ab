//! Abstract syntax, concrete grammar and theories.

pub mod parse;
pub mod pretty;
pub mod shuffle;
pub mod term;
pub mod theory;

pub use parse::{parse_context, parse_term, parse_term_with, parse_type, ParseError};
pub use pretty::pretty;
pub use shuffle::{is_shuffle, shuffles, OverlapError};
pub use term::{fresh_name, Context, Hint, Term, Type};
pub use theory::{parse_equation, parse_equation_raw, parse_theory, OpSig, Theory, TheoryError};
