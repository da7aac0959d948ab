//! Printing in the concrete grammar accepted by the parser.

use std::collections::HashSet;
use std::fmt;

use super::term::{fresh_name, Term, Type};

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&type_at(self, 0))
    }
}

fn type_at(t: &Type, lvl: u8) -> String {
    match t {
        Type::Ground(g) => g.clone(),
        Type::Unit => "I".into(),
        Type::Tensor(a, b) => {
            let s = format!("{} * {}", type_at(a, 1), type_at(b, 2));
            if lvl > 1 {
                format!("({s})")
            } else {
                s
            }
        }
        Type::Lolli(a, b) => {
            let s = format!("{} ->o {}", type_at(a, 1), type_at(b, 0));
            if lvl > 0 {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

/// Renders a term; binder names are chosen so nothing is shadowed.
pub fn pretty(t: &Term) -> String {
    let free = t.free_set();
    let mut p = Printer { free, env: Vec::new() };
    p.term(t, 0, false)
}

struct Printer {
    free: HashSet<String>,
    env: Vec<String>,
}

impl Printer {
    fn bind(&mut self, hint: &str) -> String {
        let n = fresh_name(hint, |n| {
            self.free.contains(n) || self.env.iter().any(|e| e == n) || is_reserved(n)
        });
        self.env.push(n.clone());
        n
    }

    fn term(&mut self, t: &Term, lvl: u8, arg: bool) -> String {
        match t {
            Term::Free(x) => x.clone(),
            Term::Bound(i) => match self.env.len().checked_sub(i + 1) {
                Some(k) => self.env[k].clone(),
                None => format!("#{i}"),
            },
            Term::Star => {
                if arg {
                    "(*)".into()
                } else {
                    "*".into()
                }
            }
            Term::Op(f, args) => {
                let parts: Vec<String> = args.iter().map(|a| self.term(a, 0, false)).collect();
                format!("{f}({})", parts.join(", "))
            }
            Term::Dis(a) => format!("dis({})", self.term(a, 0, false)),
            Term::Pair(a, b) => {
                let s = format!("{} * {}", self.term(a, 1, false), self.term(b, 2, false));
                paren(s, lvl > 1)
            }
            Term::App(a, b) => {
                let s = format!("{} {}", self.term(a, 2, false), self.term(b, 3, true));
                paren(s, lvl > 2)
            }
            Term::Lam(x, ty, body) => {
                let n = self.bind(&x.0);
                let b = self.term(body, 0, false);
                self.env.pop();
                paren(format!("\\{n}:{}. {b}", type_at(ty, 0)), lvl > 0)
            }
            Term::PmTo(s, x, y, body) => {
                let s = self.term(s, 1, false);
                let nx = self.bind(&x.0);
                let ny = self.bind(&y.0);
                let b = self.term(body, 0, false);
                self.env.truncate(self.env.len() - 2);
                paren(format!("pm {s} to {nx} * {ny}. {b}"), lvl > 0)
            }
            Term::UnitTo(s, body) => {
                let s = self.term(s, 1, false);
                let b = self.term(body, 0, false);
                paren(format!("{s} to *. {b}"), lvl > 0)
            }
        }
    }
}

fn is_reserved(n: &str) -> bool {
    matches!(n, "pm" | "to" | "dis" | "I")
}

fn paren(s: String, yes: bool) -> String {
    if yes {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::{parse_term, parse_type};

    #[test]
    fn roundtrips() {
        for src in [
            "\\x:X. wait1(x)",
            "pm x to x1 * x2. S(H(x1) * x2)",
            "f (g x) (*)",
            "(\\x:A. x) y",
            "a * (b * c)",
            "a * b * c",
            "(x to *. y) * z",
            "pm (pm p to a * b. a * b) to c * d. c * d",
            "dis(x * y) to *. *",
            "\\f:A ->o B. \\x:A. f x",
        ] {
            let t = parse_term(src).unwrap();
            assert_eq!(pretty(&t), src, "source {src}");
            assert_eq!(parse_term(&pretty(&t)).unwrap(), t);
        }
    }

    #[test]
    fn shadowing_is_avoided() {
        // \x. \x. (outer x)
        let a = Type::ground("A");
        let inner = Term::Lam(
            super::super::term::Hint("x".into()),
            a.clone(),
            Box::new(Term::Bound(1)),
        );
        let t = Term::Lam(super::super::term::Hint("x".into()), a, Box::new(inner));
        let s = pretty(&t);
        assert_eq!(parse_term(&s).unwrap(), t, "{s}");
    }

    #[test]
    fn type_printing() {
        for src in ["A * B ->o C", "(A ->o B) ->o C", "A * (B * C)", "I"] {
            assert_eq!(parse_type(src).unwrap().to_string(), src);
        }
    }
}
