//! Theories and the theory file format.
//!
//! A theory file is UTF-8 text split into sections. A section header is a
//! keyword followed by `:`; its entries follow on the same line or on the
//! lines below. `#` starts a comment.
//!
//! ```text
//! quantale: lawvere
//! types: X
//! ops:
//!   wait1 : X -> X
//!   origin : I -> X
//! defs:
//!   w1 := \x:X. wait1(x)
//! axioms:
//!   x:X |- wait1(x) =[1] wait2(x) : X
//! flags: symmetric
//! ```
//!
//! `defs` is optional; a definition is expanded wherever its name appears
//! free in later terms. Flags are `symmetric` and `affine`.

use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use super::parse::{lex, ParseError, Parser, Tok};
use super::term::{Term, Type};
use crate::quantale::{QValue, QuantaleKind};
use crate::typing::{derive, TypeError};
use crate::veq::VEquation;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("line {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error("axiom {index}: {source}")]
    Axiom { index: usize, source: TypeError },
    #[error("{0}")]
    Other(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSig {
    pub args: Vec<Type>,
    pub result: Type,
}

impl OpSig {
    /// The domain `A1 * ... * An`, left nested.
    pub fn domain(&self) -> Type {
        let mut it = self.args.iter().cloned();
        let first = it.next().unwrap_or(Type::Unit);
        it.fold(first, Type::tensor)
    }
}

#[derive(Clone, Debug)]
pub struct Theory {
    pub quantale: QuantaleKind,
    pub ground: Vec<String>,
    pub ops: IndexMap<String, OpSig>,
    pub defs: IndexMap<String, Term>,
    pub axioms: Vec<VEquation>,
    pub symmetric: bool,
    pub affine: bool,
}

impl Theory {
    pub fn new(quantale: QuantaleKind) -> Theory {
        Theory {
            quantale,
            ground: Vec::new(),
            ops: IndexMap::new(),
            defs: IndexMap::new(),
            axioms: Vec::new(),
            symmetric: false,
            affine: false,
        }
    }

    pub fn add_ground(&mut self, name: &str) {
        if !self.ground.iter().any(|g| g == name) {
            self.ground.push(name.to_string());
        }
    }

    pub fn add_op(&mut self, name: &str, args: Vec<Type>, result: Type) {
        self.ops.insert(name.to_string(), OpSig { args, result });
    }

    /// Adds an axiom after checking both sides have type `ty` in `ctx`.
    pub fn add_axiom(&mut self, eq: VEquation) -> Result<(), TheoryError> {
        let index = self.axioms.len();
        self.check_equation(&eq).map_err(|source| TheoryError::Axiom { index, source })?;
        if eq.label.kind() != self.quantale {
            return Err(TheoryError::Other(format!(
                "axiom {index}: label {} is not a {} value",
                eq.label, self.quantale
            )));
        }
        self.axioms.push(eq);
        Ok(())
    }

    pub fn check_equation(&self, eq: &VEquation) -> Result<(), TypeError> {
        for side in [&eq.lhs, &eq.rhs] {
            let d = derive(self, &eq.ctx, side)?;
            if d.ty != eq.ty {
                return Err(TypeError::Mismatch {
                    term: side.to_string(),
                    expected: eq.ty.clone(),
                    found: d.ty,
                });
            }
        }
        Ok(())
    }

    pub fn parse_term(&self, text: &str) -> Result<Term, ParseError> {
        super::parse::parse_term_with(text, &self.defs)
    }

    /// Checks that every type mentions declared ground types only and that
    /// operations have at least one argument.
    pub fn check_signature(&self) -> Result<(), TheoryError> {
        for (name, sig) in &self.ops {
            if sig.args.is_empty() {
                return Err(TheoryError::Other(format!("operation `{name}` needs at least one argument")));
            }
            for t in sig.args.iter().chain([&sig.result]) {
                self.check_type(t).map_err(|g| {
                    TheoryError::Other(format!("operation `{name}` uses undeclared type `{g}`"))
                })?;
            }
        }
        Ok(())
    }

    pub fn check_type(&self, t: &Type) -> Result<(), String> {
        let mut gs = Vec::new();
        t.grounds(&mut gs);
        match gs.into_iter().find(|g| !self.ground.contains(g)) {
            Some(g) => Err(g),
            None => Ok(()),
        }
    }

    /// Renders the theory in the file format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "quantale: {}", self.quantale);
        let _ = writeln!(s, "types: {}", self.ground.join(", "));
        let _ = writeln!(s, "ops:");
        for (name, sig) in &self.ops {
            let args: Vec<String> = sig.args.iter().map(|t| t.to_string()).collect();
            let _ = writeln!(s, "  {name} : {} -> {}", args.join(", "), sig.result);
        }
        if !self.defs.is_empty() {
            let _ = writeln!(s, "defs:");
            for (name, t) in &self.defs {
                let _ = writeln!(s, "  {name} := {t}");
            }
        }
        let _ = writeln!(s, "axioms:");
        for ax in &self.axioms {
            let _ = writeln!(s, "  {ax}");
        }
        let mut flags = Vec::new();
        if self.symmetric {
            flags.push("symmetric");
        }
        if self.affine {
            flags.push("affine");
        }
        let _ = writeln!(s, "flags: {}", flags.join(", "));
        s
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Quantale,
    Types,
    Ops,
    Defs,
    Axioms,
    Flags,
}

const SECTIONS: [(&str, Section); 6] = [
    ("quantale", Section::Quantale),
    ("types", Section::Types),
    ("ops", Section::Ops),
    ("defs", Section::Defs),
    ("axioms", Section::Axioms),
    ("flags", Section::Flags),
];

pub fn parse_theory(text: &str) -> Result<Theory, TheoryError> {
    let mut quantale: Option<QuantaleKind> = None;
    let mut th = Theory::new(QuantaleKind::Lawvere);
    let mut section = Section::None;
    let mut pending_axioms: Vec<(usize, VEquation)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |msg: String| TheoryError::Invalid { line: line_no, msg };
        let mut rest = line;
        let mut col = 1;
        let trimmed = line.trim_start();
        for (kw, sec) in SECTIONS {
            if let Some(after) = trimmed.strip_prefix(kw) {
                if let Some(after) = after.trim_start().strip_prefix(':') {
                    section = sec;
                    let consumed = line.len() - after.len();
                    col = line[..consumed].chars().count() + 1;
                    rest = after;
                    break;
                }
            }
        }
        if rest.trim().is_empty() {
            continue;
        }
        match section {
            Section::None => return Err(invalid("entry outside of any section".into())),
            Section::Quantale => {
                let k: QuantaleKind = rest.parse().map_err(invalid)?;
                quantale = Some(k);
                th.quantale = k;
            }
            Section::Types => {
                for g in rest.split([',', ' ', '\t']).filter(|g| !g.is_empty()) {
                    if g == "I" {
                        return Err(invalid("`I` is reserved for the unit type".into()));
                    }
                    th.add_ground(g);
                }
            }
            Section::Flags => {
                for f in rest.split([',', ' ', '\t']).filter(|g| !g.is_empty()) {
                    match f {
                        "symmetric" => th.symmetric = true,
                        "affine" => th.affine = true,
                        "linear" => {}
                        other => return Err(invalid(format!("unknown flag `{other}`"))),
                    }
                }
            }
            Section::Ops => {
                let mut p = Parser::new(lex(rest, line_no, col)?, None);
                let name = p.ident()?;
                p.expect_tok(Tok::Colon, "`:`")?;
                let mut args = vec![p.ty()?];
                while p.eat(Tok::Comma) {
                    args.push(p.ty()?);
                }
                p.expect_tok(Tok::Arrow, "`->`")?;
                let result = p.ty()?;
                p.expect_eof()?;
                th.add_op(&name, args, result);
            }
            Section::Defs => {
                let defs = th.defs.clone();
                let mut p = Parser::new(lex(rest, line_no, col)?, Some(&defs));
                let name = p.ident()?;
                p.expect_tok(Tok::ColonEq, "`:=`")?;
                let t = p.term()?;
                p.expect_eof()?;
                th.defs.insert(name, t);
            }
            Section::Axioms => {
                let k = quantale.ok_or_else(|| invalid("axioms before `quantale:`".into()))?;
                let defs = th.defs.clone();
                let mut p = Parser::new(lex(rest, line_no, col)?, Some(&defs));
                let ctx = p.context()?;
                p.expect_tok(Tok::Turnstile, "`|-`")?;
                let lhs = p.term()?;
                let label = p.label()?;
                let rhs = p.term()?;
                p.expect_tok(Tok::Colon, "`:`")?;
                let ty = p.ty()?;
                p.expect_eof()?;
                let label = k.parse_value(&label).map_err(|e| invalid(e.to_string()))?;
                pending_axioms.push((line_no, VEquation { ctx, lhs, rhs, ty, label }));
            }
        }
    }
    if quantale.is_none() {
        return Err(TheoryError::Other("missing `quantale:` section".into()));
    }
    th.check_signature()?;
    for (line, ax) in pending_axioms {
        th.add_axiom(ax).map_err(|e| TheoryError::Invalid { line, msg: e.to_string() })?;
    }
    Ok(th)
}

/// Builds an axiom from source text against `th`'s definitions.
pub fn parse_equation(th: &Theory, text: &str) -> Result<VEquation, TheoryError> {
    equation(th.quantale, text, Some(&th.defs))
}

/// Parses an equation without expanding definitions.
pub fn parse_equation_raw(kind: QuantaleKind, text: &str) -> Result<VEquation, TheoryError> {
    equation(kind, text, None)
}

fn equation(kind: QuantaleKind, text: &str, defs: Option<&IndexMap<String, Term>>) -> Result<VEquation, TheoryError> {
    let mut p = Parser::new(lex(text, 1, 1)?, defs);
    let ctx = p.context()?;
    p.expect_tok(Tok::Turnstile, "`|-`")?;
    let lhs = p.term()?;
    let label = p.label()?;
    let rhs = p.term()?;
    p.expect_tok(Tok::Colon, "`:`")?;
    let ty = p.ty()?;
    p.expect_eof()?;
    let label: QValue = kind
        .parse_value(&label)
        .map_err(|e| TheoryError::Other(e.to_string()))?;
    Ok(VEquation { ctx, lhs, rhs, ty, label })
}

#[cfg(test)]
mod tests {
    use super::*;

    const WAITS: &str = "\
quantale: lawvere   # distances
types: X
ops:
  wait0 : X -> X
  wait1 : X -> X
  wait2 : X -> X
defs:
  w1 := \\x:X. wait1(x)
axioms:
  x:X |- wait0(x) =[0] x : X
  x:X |- wait1(x) =[1] wait2(x) : X
flags: symmetric
";

    #[test]
    fn parses_sections() {
        let th = parse_theory(WAITS).unwrap();
        assert_eq!(th.quantale, QuantaleKind::Lawvere);
        assert_eq!(th.ground, vec!["X"]);
        assert_eq!(th.ops.len(), 3);
        assert_eq!(th.axioms.len(), 2);
        assert!(th.symmetric && !th.affine);
        assert_eq!(th.axioms[1].label.to_string(), "1");
        let again = parse_theory(&th.to_text()).unwrap();
        assert_eq!(again.axioms, th.axioms);
        assert_eq!(again.defs, th.defs);
    }

    #[test]
    fn reports_line_of_bad_axiom() {
        let bad = WAITS.replace("wait2(x) : X", "wait9(x) : X");
        match parse_theory(&bad) {
            Err(TheoryError::Invalid { line, .. }) => assert_eq!(line, 11),
            other => panic!("{other:?}"),
        }
        let bad = WAITS.replace("wait1(x) =[1]", "wait1(x) =[1");
        assert!(matches!(parse_theory(&bad), Err(TheoryError::Parse(_))));
    }

    #[test]
    fn rejects_nullary_ops() {
        let mut th = parse_theory(WAITS).unwrap();
        th.add_op("c", vec![], Type::ground("X"));
        assert!(th.check_signature().is_err());
    }
}
