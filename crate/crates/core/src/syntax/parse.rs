//! Lexer and recursive-descent parser for types, terms and contexts.
//!
//! ```text
//! type   ::= tens ('->o' type)?
//! tens   ::= tatom ('*' tatom)*
//! tatom  ::= IDENT | 'I' | '(' type ')'
//! term   ::= '\' IDENT ':' type '.' term
//!          | 'pm' tensor 'to' IDENT '*' IDENT '.' term
//!          | tensor ('to' '*' '.' term)?
//! tensor ::= app ('*' app)*
//! app    ::= atom arg*
//! atom   ::= IDENT | OP '(' term (',' term)* ')' | 'dis(' term ')' | '*' | '(' term ')'
//! ctx    ::= '-' | IDENT ':' type (',' IDENT ':' type)*
//! ```
//!
//! An identifier glued to `(` is an operation call; `f (x)` with a space is
//! application. A bare `*` never starts an application argument.

use indexmap::IndexMap;
use thiserror::Error;

use super::term::{Context, Hint, Term, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String, bool),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    ColonEq,
    Star,
    Lambda,
    Lolli,
    Arrow,
    Dash,
    Turnstile,
    Label(String),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const KEYWORDS: [&str; 3] = ["pm", "to", "dis"];

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let err = |msg: String| ParseError { line: start.0, col: start.1, msg };
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let peek = |k: usize| chars.get(i + k).copied();
        let (tok, len) = match c {
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            ':' if peek(1) == Some('=') => (Tok::ColonEq, 2),
            ':' => (Tok::Colon, 1),
            '*' | '⊗' => (Tok::Star, 1),
            '\\' | 'λ' => (Tok::Lambda, 1),
            '⊸' => (Tok::Lolli, 1),
            '→' => (Tok::Arrow, 1),
            '▷' => (Tok::Turnstile, 1),
            '|' if peek(1) == Some('-') => (Tok::Turnstile, 2),
            '-' if peek(1) == Some('>') => {
                if peek(2) == Some('o') && !peek(3).is_some_and(ident_char) {
                    (Tok::Lolli, 3)
                } else {
                    (Tok::Arrow, 2)
                }
            }
            '-' => (Tok::Dash, 1),
            '=' if peek(1) == Some('[') => {
                let close = chars[i..].iter().position(|&c| c == ']');
                match close {
                    Some(k) => (Tok::Label(chars[i + 2..i + k].iter().collect()), k + 1),
                    None => return Err(err("unterminated label `=[`".into())),
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut k = i;
                while k < chars.len() && ident_char(chars[k]) {
                    k += 1;
                }
                let name: String = chars[i..k].iter().collect();
                let call = chars.get(k) == Some(&'(');
                (Tok::Ident(name, call), k - i)
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        };
        advance(len, &mut i);
        out.push(Token { tok, line: start.0, col: start.1 });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    scope: Vec<String>,
    defs: Option<&'a IndexMap<String, Term>>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: Vec<Token>, defs: Option<&'a IndexMap<String, Term>>) -> Self {
        Parser { toks, pos: 0, scope: Vec::new(), defs }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, col: t.col, msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(n, _) if n == kw)
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            self.error(format!("unexpected {}", describe(self.peek())))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n, _) if !KEYWORDS.contains(&n.as_str()) => {
                self.bump();
                Ok(n)
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }

    pub(crate) fn ty(&mut self) -> Result<Type, ParseError> {
        let a = self.tens_ty()?;
        if *self.peek() == Tok::Lolli {
            self.bump();
            let b = self.ty()?;
            return Ok(Type::lolli(a, b));
        }
        Ok(a)
    }

    fn tens_ty(&mut self) -> Result<Type, ParseError> {
        let mut a = self.atom_ty()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let b = self.atom_ty()?;
            a = Type::tensor(a, b);
        }
        Ok(a)
    }

    fn atom_ty(&mut self) -> Result<Type, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(n, _) if n == "I" => {
                self.bump();
                Ok(Type::Unit)
            }
            Tok::Ident(..) => Ok(Type::Ground(self.ident()?)),
            other => self.error(format!("expected a type, found {}", describe(&other))),
        }
    }

    pub(crate) fn context(&mut self) -> Result<Context, ParseError> {
        if *self.peek() == Tok::Dash {
            self.bump();
            return Ok(Context::empty());
        }
        let mut ctx = Context::empty();
        loop {
            let n = self.ident()?;
            self.expect(Tok::Colon, "`:`")?;
            let t = self.ty()?;
            if ctx.contains(&n) {
                return self.error(format!("variable `{n}` declared twice in context"));
            }
            ctx.0.push((n, t));
            if *self.peek() != Tok::Comma {
                break;
            }
            self.bump();
        }
        Ok(ctx)
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let x = self.ident()?;
            self.expect(Tok::Colon, "`:`")?;
            let ty = self.ty()?;
            self.expect(Tok::Dot, "`.`")?;
            self.scope.push(x.clone());
            let body = self.term();
            self.scope.pop();
            return Ok(Term::Lam(Hint(x), ty, Box::new(body?)));
        }
        if self.is_kw("pm") {
            self.bump();
            let s = self.tensor()?;
            if !self.is_kw("to") {
                return self.error("expected `to` after pm scrutinee");
            }
            self.bump();
            let x = self.ident()?;
            self.expect(Tok::Star, "`*`")?;
            let y = self.ident()?;
            if x == y {
                return self.error(format!("pattern binds `{x}` twice"));
            }
            self.expect(Tok::Dot, "`.`")?;
            self.scope.push(x.clone());
            self.scope.push(y.clone());
            let body = self.term();
            self.scope.truncate(self.scope.len() - 2);
            return Ok(Term::PmTo(Box::new(s), Hint(x), Hint(y), Box::new(body?)));
        }
        let t = self.tensor()?;
        if self.is_kw("to") && *self.peek_at(1) == Tok::Star {
            self.bump();
            self.bump();
            self.expect(Tok::Dot, "`.`")?;
            let body = self.term()?;
            return Ok(Term::unit_to(t, body));
        }
        Ok(t)
    }

    fn tensor(&mut self) -> Result<Term, ParseError> {
        let mut t = self.app()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let r = self.app()?;
            t = Term::pair(t, r);
        }
        Ok(t)
    }

    fn starts_arg(&self) -> bool {
        match self.peek() {
            Tok::Ident(n, _) => n != "pm" && n != "to",
            Tok::LParen => true,
            _ => false,
        }
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.starts_arg() {
            let a = self.atom()?;
            t = Term::app(t, a);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Term::Star)
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(n, true) if n == "dis" => {
                self.bump();
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::dis(t))
            }
            Tok::Ident(n, true) if !KEYWORDS.contains(&n.as_str()) => {
                self.bump();
                self.bump();
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                Ok(Term::Op(n, args))
            }
            Tok::Ident(n, false) if !KEYWORDS.contains(&n.as_str()) => {
                self.bump();
                if let Some(k) = self.scope.iter().rev().position(|s| *s == n) {
                    return Ok(Term::Bound(k));
                }
                if let Some(def) = self.defs.and_then(|d| d.get(&n)) {
                    return Ok(def.clone());
                }
                Ok(Term::Free(n))
            }
            other => self.error(format!("expected a term, found {}", describe(&other))),
        }
    }

    pub(crate) fn label(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Label(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected `=[label]`, found {}", describe(&other))),
        }
    }

    pub(crate) fn eat(&mut self, t: Tok) -> bool {
        if *self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_tok(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        self.expect(t, what)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(n, _) => format!("`{n}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Dot => "`.`".into(),
        Tok::Colon => "`:`".into(),
        Tok::ColonEq => "`:=`".into(),
        Tok::Star => "`*`".into(),
        Tok::Lambda => "`\\`".into(),
        Tok::Lolli => "`->o`".into(),
        Tok::Arrow => "`->`".into(),
        Tok::Dash => "`-`".into(),
        Tok::Turnstile => "`|-`".into(),
        Tok::Label(l) => format!("`=[{l}]`"),
        Tok::Eof => "end of input".into(),
    }
}

fn whole<T>(
    text: &str,
    defs: Option<&IndexMap<String, Term>>,
    f: impl FnOnce(&mut Parser) -> Result<T, ParseError>,
) -> Result<T, ParseError> {
    let toks = lex(text, 1, 1)?;
    let mut p = Parser::new(toks, defs);
    let v = f(&mut p)?;
    p.expect_eof()?;
    Ok(v)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    whole(text, None, |p| p.term())
}

/// Parses a term, expanding identifiers that name a definition.
pub fn parse_term_with(text: &str, defs: &IndexMap<String, Term>) -> Result<Term, ParseError> {
    whole(text, Some(defs), |p| p.term())
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    whole(text, None, |p| p.ty())
}

pub fn parse_context(text: &str) -> Result<Context, ParseError> {
    if text.trim().is_empty() {
        return Ok(Context::empty());
    }
    whole(text, None, |p| p.context())
}
