//! Types, terms and contexts.
//!
//! Binders are locally nameless: bound occurrences are de Bruijn indices and
//! free variables are names. Binder names survive only as display hints, which
//! compare equal to each other, so alpha-equivalent terms are `==`.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Ground(String),
    Unit,
    Tensor(Box<Type>, Box<Type>),
    Lolli(Box<Type>, Box<Type>),
}

impl Type {
    pub fn ground(name: &str) -> Type {
        Type::Ground(name.to_string())
    }
    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }
    pub fn lolli(a: Type, b: Type) -> Type {
        Type::Lolli(Box::new(a), Box::new(b))
    }

    pub fn grounds(&self, out: &mut Vec<String>) {
        match self {
            Type::Ground(g) => out.push(g.clone()),
            Type::Unit => {}
            Type::Tensor(a, b) | Type::Lolli(a, b) => {
                a.grounds(out);
                b.grounds(out);
            }
        }
    }

    pub fn has_lolli(&self) -> bool {
        match self {
            Type::Ground(_) | Type::Unit => false,
            Type::Tensor(a, b) => a.has_lolli() || b.has_lolli(),
            Type::Lolli(..) => true,
        }
    }
}

/// Display name of a binder. All hints are equal.
#[derive(Clone, Debug)]
pub struct Hint(pub String);

impl PartialEq for Hint {
    fn eq(&self, _: &Hint) -> bool {
        true
    }
}
impl Eq for Hint {}
impl Hash for Hint {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}
impl PartialOrd for Hint {
    fn partial_cmp(&self, other: &Hint) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Hint {
    fn cmp(&self, _: &Hint) -> Ordering {
        Ordering::Equal
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Free(String),
    Bound(usize),
    Op(String, Vec<Term>),
    Star,
    Pair(Box<Term>, Box<Term>),
    /// `pm s to x * y. body`; inside `body`, `x` is index 1 and `y` index 0.
    PmTo(Box<Term>, Hint, Hint, Box<Term>),
    UnitTo(Box<Term>, Box<Term>),
    Lam(Hint, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Dis(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Free(name.to_string())
    }
    pub fn op(name: &str, args: Vec<Term>) -> Term {
        Term::Op(name.to_string(), args)
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(Box::new(a), Box::new(b))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }
    pub fn unit_to(s: Term, body: Term) -> Term {
        Term::UnitTo(Box::new(s), Box::new(body))
    }
    pub fn dis(t: Term) -> Term {
        Term::Dis(Box::new(t))
    }
    /// `\x:ty. body`, binding the free variable `x` of `body`.
    pub fn lam(x: &str, ty: Type, body: Term) -> Term {
        Term::Lam(Hint(x.to_string()), ty, Box::new(body.close(&[x])))
    }
    /// `pm s to x * y. body`, binding the free variables `x`, `y` of `body`.
    pub fn pm(s: Term, x: &str, y: &str, body: Term) -> Term {
        Term::PmTo(
            Box::new(s),
            Hint(x.to_string()),
            Hint(y.to_string()),
            Box::new(body.close(&[x, y])),
        )
    }

    /// Applies `f` to `args` left to right.
    pub fn apply_all(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    /// Abstracts the named free variables; `names[i]` becomes index `len-1-i`.
    pub fn close(&self, names: &[&str]) -> Term {
        self.close_at(0, names)
    }

    fn close_at(&self, depth: usize, names: &[&str]) -> Term {
        match self {
            Term::Free(x) => match names.iter().position(|n| n == x) {
                Some(i) => Term::Bound(depth + names.len() - 1 - i),
                None => self.clone(),
            },
            _ => self.map_children(depth, &mut |t, d| t.close_at(d, names)),
        }
    }

    /// Instantiates the outermost bound indices; inverse of [`Term::close`].
    pub fn open(&self, args: &[Term]) -> Term {
        self.open_at(0, args)
    }

    fn open_at(&self, depth: usize, args: &[Term]) -> Term {
        match self {
            Term::Bound(i) if *i >= depth && *i < depth + args.len() => {
                args[args.len() - 1 - (*i - depth)].clone()
            }
            Term::Bound(i) if *i >= depth + args.len() => Term::Bound(i - args.len()),
            _ => self.map_children(depth, &mut |t, d| t.open_at(d, args)),
        }
    }

    /// Rebuilds the node with `f(child, binder depth of child)`.
    pub fn map_children(&self, depth: usize, f: &mut impl FnMut(&Term, usize) -> Term) -> Term {
        match self {
            Term::Free(_) | Term::Bound(_) | Term::Star => self.clone(),
            Term::Op(name, args) => Term::Op(name.clone(), args.iter().map(|a| f(a, depth)).collect()),
            Term::Pair(a, b) => Term::Pair(Box::new(f(a, depth)), Box::new(f(b, depth))),
            Term::PmTo(s, x, y, b) => {
                Term::PmTo(Box::new(f(s, depth)), x.clone(), y.clone(), Box::new(f(b, depth + 2)))
            }
            Term::UnitTo(s, b) => Term::UnitTo(Box::new(f(s, depth)), Box::new(f(b, depth))),
            Term::Lam(x, ty, b) => Term::Lam(x.clone(), ty.clone(), Box::new(f(b, depth + 1))),
            Term::App(a, b) => Term::App(Box::new(f(a, depth)), Box::new(f(b, depth))),
            Term::Dis(a) => Term::Dis(Box::new(f(a, depth))),
        }
    }

    /// Direct subterms paired with the number of binders crossed to reach them.
    pub fn children(&self) -> Vec<(&Term, usize)> {
        match self {
            Term::Free(_) | Term::Bound(_) | Term::Star => vec![],
            Term::Op(_, args) => args.iter().map(|a| (a, 0)).collect(),
            Term::Pair(a, b) | Term::UnitTo(a, b) | Term::App(a, b) => vec![(a, 0), (b, 0)],
            Term::PmTo(s, _, _, b) => vec![(s, 0), (b, 2)],
            Term::Lam(_, _, b) => vec![(b, 1)],
            Term::Dis(a) => vec![(a, 0)],
        }
    }

    /// Every subterm position in preorder with the binder depth at it.
    pub fn positions(&self) -> Vec<(Vec<usize>, usize)> {
        let mut out = Vec::new();
        self.collect_positions(&mut Vec::new(), 0, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, depth: usize, out: &mut Vec<(Vec<usize>, usize)>) {
        out.push((path.clone(), depth));
        for (i, (c, d)) in self.children().into_iter().enumerate() {
            path.push(i);
            c.collect_positions(path, depth + d, out);
            path.pop();
        }
    }

    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i).and_then(|(c, _)| c.at(rest)),
        }
    }

    /// Replaces the subterm at `path` verbatim, without adjusting indices.
    pub fn replace_at(&self, path: &[usize], new: &Term) -> Term {
        match path.split_first() {
            None => new.clone(),
            Some((i, rest)) => {
                let mut k = 0;
                self.map_children(0, &mut |c, _| {
                    let out = if k == *i { c.replace_at(rest, new) } else { c.clone() };
                    k += 1;
                    out
                })
            }
        }
    }

    /// Capture-free simultaneous substitution for free variables.
    pub fn subst_many(&self, map: &HashMap<String, Term>) -> Term {
        match self {
            Term::Free(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            _ => self.map_children(0, &mut |t, _| t.subst_many(map)),
        }
    }

    pub fn subst(&self, x: &str, w: &Term) -> Term {
        let mut map = HashMap::new();
        map.insert(x.to_string(), w.clone());
        self.subst_many(&map)
    }

    /// Free variable occurrences, left to right, with repetition.
    pub fn free_occurrences(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut Vec<String>) {
        if let Term::Free(x) = self {
            out.push(x.clone());
        }
        for (c, _) in self.children() {
            c.collect_free(out);
        }
    }

    pub fn free_set(&self) -> HashSet<String> {
        self.free_occurrences().into_iter().collect()
    }

    /// True when no bound index escapes `depth` enclosing binders.
    pub fn closed_at(&self, depth: usize) -> bool {
        match self {
            Term::Bound(i) => *i < depth,
            _ => self.children().into_iter().all(|(c, d)| c.closed_at(depth + d)),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(|(c, _)| c.size()).sum::<usize>()
    }

    pub fn ops(&self, out: &mut Vec<String>) {
        if let Term::Op(f, _) = self {
            out.push(f.clone());
        }
        for (c, _) in self.children() {
            c.ops(out);
        }
    }

    /// Names used by binder hints, free variables included.
    pub fn all_names(&self, out: &mut HashSet<String>) {
        match self {
            Term::Free(x) => {
                out.insert(x.clone());
            }
            Term::PmTo(_, x, y, _) => {
                out.insert(x.0.clone());
                out.insert(y.0.clone());
            }
            Term::Lam(x, _, _) => {
                out.insert(x.0.clone());
            }
            _ => {}
        }
        for (c, _) in self.children() {
            c.all_names(out);
        }
    }
}

/// Picks `base` or a numbered variant of it that `taken` rejects.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    let base = if base.is_empty() { "x" } else { base };
    if !taken(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
    let stem = if stem.is_empty() { "x" } else { stem };
    (1..)
        .map(|i| format!("{stem}{i}"))
        .find(|n| !taken(n))
        .expect("unbounded supply")
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context(pub Vec<(String, Type)>);

impl Context {
    pub fn empty() -> Context {
        Context(Vec::new())
    }

    pub fn from_pairs(pairs: &[(&str, Type)]) -> Context {
        Context(pairs.iter().map(|(n, t)| (n.to_string(), t.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(n, _)| n.as_str())
    }
    pub fn get(&self, name: &str) -> Option<&Type> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }
    pub fn position(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|(n, _)| n == name)
    }

    pub fn with(&self, name: &str, ty: Type) -> Context {
        let mut c = self.clone();
        c.0.push((name.to_string(), ty));
        c
    }

    pub fn concat(&self, other: &Context) -> Context {
        let mut c = self.clone();
        c.0.extend(other.0.iter().cloned());
        c
    }

    /// Entries whose names are in `keep`, in this context's order.
    pub fn restrict(&self, keep: &HashSet<String>) -> Context {
        Context(self.0.iter().filter(|(n, _)| keep.contains(n)).cloned().collect())
    }

    pub fn without(&self, name: &str) -> Context {
        Context(self.0.iter().filter(|(n, _)| n != name).cloned().collect())
    }

    /// First duplicated variable, if any.
    pub fn duplicate(&self) -> Option<&str> {
        let mut seen = HashSet::new();
        self.names().find(|n| !seen.insert(*n))
    }

    pub fn name_set(&self) -> HashSet<String> {
        self.names().map(str::to_string).collect()
    }

    /// Same entries, possibly reordered.
    pub fn is_permutation_of(&self, other: &Context) -> bool {
        let mut a = self.0.clone();
        let mut b = other.0.clone();
        a.sort();
        b.sort();
        a == b
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for (i, (n, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{n}:{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_equivalence_is_structural() {
        let a = Type::ground("A");
        let t1 = Term::lam("x", a.clone(), Term::var("x"));
        let t2 = Term::lam("y", a.clone(), Term::var("y"));
        assert_eq!(t1, t2);
        let t3 = Term::lam("x", a, Term::var("z"));
        assert_ne!(t1, t3);
    }

    #[test]
    fn open_close_roundtrip() {
        let body = Term::pair(Term::var("x"), Term::var("y"));
        let t = Term::pm(Term::var("p"), "x", "y", body.clone());
        if let Term::PmTo(_, _, _, b) = &t {
            assert_eq!(**b, Term::pair(Term::Bound(1), Term::Bound(0)));
            assert_eq!(b.open(&[Term::var("x"), Term::var("y")]), body);
        } else {
            panic!()
        }
    }

    #[test]
    fn substitution_does_not_capture() {
        // (\y. x y)[y/x] must not bind the substituted y
        let a = Type::ground("A");
        let t = Term::lam("y", a.clone(), Term::app(Term::var("x"), Term::var("y")));
        let s = t.subst("x", &Term::var("y"));
        let expect = Term::lam("z", a, Term::app(Term::var("y"), Term::var("z")));
        assert_eq!(s, expect);
    }

    #[test]
    fn fresh_names_avoid_taken() {
        let taken = ["x", "x1"];
        assert_eq!(fresh_name("x", |n| taken.contains(&n)), "x2");
        assert_eq!(fresh_name("y", |n| taken.contains(&n)), "y");
    }
}
