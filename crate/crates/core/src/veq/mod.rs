//! Quantale-labelled equations and their proofs.

use std::fmt;

use crate::quantale::QValue;
use crate::syntax::{Context, Term, Type};

/// `ctx |- lhs =[label] rhs : ty`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VEquation {
    pub ctx: Context,
    pub lhs: Term,
    pub rhs: Term,
    pub ty: Type,
    pub label: QValue,
}

impl VEquation {
    pub fn new(ctx: Context, lhs: Term, rhs: Term, ty: Type, label: QValue) -> VEquation {
        VEquation { ctx, lhs, rhs, ty, label }
    }

    /// Same sides and context; labels may differ.
    pub fn same_judgement(&self, other: &VEquation) -> bool {
        self.ctx == other.ctx && self.lhs == other.lhs && self.rhs == other.rhs && self.ty == other.ty
    }
}

impl fmt::Display for VEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {} =[{}] {} : {}", self.ctx, self.lhs, self.label, self.rhs, self.ty)
    }
}

pub mod normalize;
pub mod proof;

pub use normalize::{normalize, Normalized};
pub use proof::{check_proof, BaseEq, ProofError, ProofRule, ProofTree};
pub mod search;

pub use search::{derive_bound, derive_bound_with, Bound, Budget, JoinMode, SearchError};
pub mod json;
