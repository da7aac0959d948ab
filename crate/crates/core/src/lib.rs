//! Kernel for quantale-labelled equational reasoning about linear and affine
//! λ-terms, with executable semantic models.

pub mod gen;
pub mod quantale;
pub mod quantum;
pub mod semantics;
pub mod syntax;
pub mod theories;
pub mod typing;
pub mod veq;

pub use quantale::{Ext, QValue, QuantaleKind};
pub use syntax::{Context, Term, Theory, Type};
