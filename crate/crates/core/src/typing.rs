//! Typing derivations.
//!
//! The head constructor of a term fixes its rule, and in a linear calculus
//! the free variables of each premise fix how the context splits. `derive`
//! therefore builds the only derivation there is, or says why none exists.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::syntax::{fresh_name, is_shuffle, Context, Term, Theory, Type};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is used more than once")]
    DuplicateUse(String),
    #[error("variable `{0}` is never used (linear context)")]
    UnusedLinear(String),
    #[error("variable `{0}` is never used; discard it with `dis({0}) to *. ...`")]
    UnusedAffine(String),
    #[error("variable `{0}` is declared twice in the context")]
    DuplicateDeclaration(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("unknown ground type `{0}`")]
    UnknownGround(String),
    #[error("operation `{op}` takes {expected} argument(s), given {found}")]
    Arity { op: String, expected: usize, found: usize },
    #[error("`{term}` has type {found}, expected {expected}")]
    Mismatch { term: String, expected: Type, found: Type },
    #[error("`{term}` has type {found}, which is not a tensor")]
    NotTensor { term: String, found: Type },
    #[error("`{term}` has type {found}, which is not a function")]
    NotFunction { term: String, found: Type },
    #[error("`dis` is only available in affine theories")]
    DisNotAffine,
    #[error("context {ctx} is not a shuffle of the premise contexts")]
    NoShuffle { ctx: String },
    #[error("dangling bound index in `{0}`")]
    Dangling(String),
    #[error("malformed derivation: {0}")]
    Malformed(String),
    #[error("context position {0} out of range")]
    OutOfRange(usize),
}

pub type Result<T> = std::result::Result<T, TypeError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Ax(String),
    Hyp,
    UnitIntro,
    UnitElim,
    TensorIntro,
    TensorElim,
    LolliIntro,
    LolliElim,
    Discard,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Ax(_) => "ax",
            Rule::Hyp => "hyp",
            Rule::UnitIntro => "I_i",
            Rule::UnitElim => "I_e",
            Rule::TensorIntro => "tensor_i",
            Rule::TensorElim => "tensor_e",
            Rule::LolliIntro => "lolli_i",
            Rule::LolliElim => "lolli_e",
            Rule::Discard => "discardable",
        }
    }
}

/// A derivation of `ctx |- term : ty`. Premises under binders carry the
/// opened body, with the bound variables appended to their context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub ctx: Context,
    pub term: Term,
    pub ty: Type,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn uses_lolli(&self) -> bool {
        matches!(self.rule, Rule::LolliIntro | Rule::LolliElim)
            || self.premises.iter().any(Derivation::uses_lolli)
    }

    pub fn uses_dis(&self) -> bool {
        self.rule == Rule::Discard || self.premises.iter().any(Derivation::uses_dis)
    }

    /// Rules, types and context sizes in preorder; equal for derivations
    /// that differ only in the names chosen for bound variables.
    pub fn skeleton(&self) -> Vec<(Rule, Type, usize)> {
        let mut out = vec![(self.rule.clone(), self.ty.clone(), self.ctx.len())];
        for p in &self.premises {
            out.extend(p.skeleton());
        }
        out
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }

    /// Premise contexts with the variables bound by this rule removed.
    pub fn blocks(&self) -> Vec<Context> {
        self.premises
            .iter()
            .enumerate()
            .map(|(i, p)| match (&self.rule, i) {
                (Rule::TensorElim, 1) => Context(p.ctx.0[..p.ctx.len() - 2].to_vec()),
                (Rule::LolliIntro, 0) => Context(p.ctx.0[..p.ctx.len() - 1].to_vec()),
                _ => p.ctx.clone(),
            })
            .collect()
    }
}

/// Builds the derivation of `ctx |- term : A`.
pub fn derive(th: &Theory, ctx: &Context, term: &Term) -> Result<Derivation> {
    if !term.closed_at(0) {
        return Err(TypeError::Dangling(term.to_string()));
    }
    let avoid: HashSet<String> = ctx.name_set();
    node(th, ctx, term, &avoid)
}

fn check_usage(th: &Theory, ctx: &Context, term: &Term) -> Result<()> {
    if let Some(d) = ctx.duplicate() {
        return Err(TypeError::DuplicateDeclaration(d.to_string()));
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for x in term.free_occurrences() {
        *counts.entry(x).or_default() += 1;
    }
    for x in term.free_occurrences() {
        if !ctx.contains(&x) {
            return Err(TypeError::UnknownVariable(x));
        }
        if counts[&x] > 1 {
            return Err(TypeError::DuplicateUse(x));
        }
    }
    for (x, ty) in &ctx.0 {
        if !counts.contains_key(x) {
            return Err(if th.affine {
                TypeError::UnusedAffine(x.clone())
            } else {
                TypeError::UnusedLinear(x.clone())
            });
        }
        th.check_type(ty).map_err(TypeError::UnknownGround)?;
    }
    Ok(())
}

fn node(th: &Theory, ctx: &Context, term: &Term, avoid: &HashSet<String>) -> Result<Derivation> {
    check_usage(th, ctx, term)?;
    let sub = |t: &Term| ctx.restrict(&t.free_set());
    let mut avoid = avoid.clone();
    avoid.extend(ctx.name_set());
    let fresh = |hint: &str, avoid: &mut HashSet<String>| {
        let n = fresh_name(hint, |n| avoid.contains(n));
        avoid.insert(n.clone());
        n
    };
    let done = |ty: Type, rule: Rule, premises: Vec<Derivation>| {
        Ok(Derivation { ctx: ctx.clone(), term: term.clone(), ty, rule, premises })
    };
    match term {
        Term::Free(x) => {
            let ty = ctx.get(x).cloned().ok_or_else(|| TypeError::UnknownVariable(x.clone()))?;
            done(ty, Rule::Hyp, vec![])
        }
        Term::Bound(_) => Err(TypeError::Dangling(term.to_string())),
        Term::Op(f, args) => {
            let sig = th.ops.get(f).ok_or_else(|| TypeError::UnknownOp(f.clone()))?;
            if sig.args.len() != args.len() {
                return Err(TypeError::Arity { op: f.clone(), expected: sig.args.len(), found: args.len() });
            }
            let mut ps = Vec::new();
            for (a, want) in args.iter().zip(&sig.args) {
                let p = node(th, &sub(a), a, &avoid)?;
                expect_ty(a, want, &p.ty)?;
                ps.push(p);
            }
            done(sig.result.clone(), Rule::Ax(f.clone()), ps)
        }
        Term::Star => done(Type::Unit, Rule::UnitIntro, vec![]),
        Term::Pair(a, b) => {
            let pa = node(th, &sub(a), a, &avoid)?;
            let pb = node(th, &sub(b), b, &avoid)?;
            done(Type::tensor(pa.ty.clone(), pb.ty.clone()), Rule::TensorIntro, vec![pa, pb])
        }
        Term::UnitTo(s, body) => {
            let ps = node(th, &sub(s), s, &avoid)?;
            expect_ty(s, &Type::Unit, &ps.ty)?;
            let pb = node(th, &sub(body), body, &avoid)?;
            done(pb.ty.clone(), Rule::UnitElim, vec![ps, pb])
        }
        Term::PmTo(s, hx, hy, body) => {
            let ps = node(th, &sub(s), s, &avoid)?;
            let (a, b) = match &ps.ty {
                Type::Tensor(a, b) => ((**a).clone(), (**b).clone()),
                other => return Err(TypeError::NotTensor { term: s.to_string(), found: other.clone() }),
            };
            let x = fresh(&hx.0, &mut avoid);
            let y = fresh(&hy.0, &mut avoid);
            let opened = body.open(&[Term::Free(x.clone()), Term::Free(y.clone())]);
            let bctx = ctx.restrict(&body.free_set()).with(&x, a).with(&y, b);
            let pb = node(th, &bctx, &opened, &avoid)?;
            done(pb.ty.clone(), Rule::TensorElim, vec![ps, pb])
        }
        Term::Lam(hx, a, body) => {
            th.check_type(a).map_err(TypeError::UnknownGround)?;
            let x = fresh(&hx.0, &mut avoid);
            let opened = body.open(&[Term::Free(x.clone())]);
            let pb = node(th, &ctx.with(&x, a.clone()), &opened, &avoid)?;
            done(Type::lolli(a.clone(), pb.ty.clone()), Rule::LolliIntro, vec![pb])
        }
        Term::App(f, a) => {
            let pf = node(th, &sub(f), f, &avoid)?;
            let pa = node(th, &sub(a), a, &avoid)?;
            match &pf.ty {
                Type::Lolli(dom, cod) => {
                    expect_ty(a, dom, &pa.ty)?;
                    let cod = (**cod).clone();
                    done(cod, Rule::LolliElim, vec![pf, pa])
                }
                other => Err(TypeError::NotFunction { term: f.to_string(), found: other.clone() }),
            }
        }
        Term::Dis(a) => {
            if !th.affine {
                return Err(TypeError::DisNotAffine);
            }
            let pa = node(th, &sub(a), a, &avoid)?;
            done(Type::Unit, Rule::Discard, vec![pa])
        }
    }
}

fn expect_ty(t: &Term, want: &Type, found: &Type) -> Result<()> {
    if want == found {
        Ok(())
    } else {
        Err(TypeError::Mismatch { term: t.to_string(), expected: want.clone(), found: found.clone() })
    }
}

/// Checks every node of `d` against its rule schema.
pub fn validate(th: &Theory, d: &Derivation) -> Result<()> {
    let bad = |m: &str| Err(TypeError::Malformed(format!("{} at `{}`: {m}", d.rule.name(), d.term)));
    if let Some(x) = d.ctx.duplicate() {
        return Err(TypeError::DuplicateDeclaration(x.to_string()));
    }
    for p in &d.premises {
        validate(th, p)?;
    }
    let ps = &d.premises;
    let blocks = d.blocks();
    let refs: Vec<&Context> = blocks.iter().collect();
    if !ps.is_empty() && !is_shuffle(&d.ctx, &refs) {
        return Err(TypeError::NoShuffle { ctx: d.ctx.to_string() });
    }
    match (&d.rule, &d.term) {
        (Rule::Hyp, Term::Free(x)) => {
            if d.ctx.0 != vec![(x.clone(), d.ty.clone())] {
                return bad("context must be exactly the variable");
            }
        }
        (Rule::UnitIntro, Term::Star) => {
            if !d.ctx.is_empty() || d.ty != Type::Unit {
                return bad("needs empty context and type I");
            }
        }
        (Rule::Ax(f), Term::Op(g, args)) if f == g => {
            let sig = th.ops.get(f).ok_or_else(|| TypeError::UnknownOp(f.clone()))?;
            let ok = args.len() == ps.len()
                && sig.args.len() == ps.len()
                && ps.iter().zip(args).zip(&sig.args).all(|((p, a), t)| p.term == *a && p.ty == *t)
                && sig.result == d.ty;
            if !ok {
                return bad("premises do not match the signature");
            }
        }
        (Rule::TensorIntro, Term::Pair(a, b)) => {
            if ps.len() != 2
                || ps[0].term != **a
                || ps[1].term != **b
                || d.ty != Type::tensor(ps[0].ty.clone(), ps[1].ty.clone())
            {
                return bad("premises do not match");
            }
        }
        (Rule::UnitElim, Term::UnitTo(s, body)) => {
            if ps.len() != 2 || ps[0].term != **s || ps[0].ty != Type::Unit || ps[1].term != **body || ps[1].ty != d.ty {
                return bad("premises do not match");
            }
        }
        (Rule::TensorElim, Term::PmTo(s, _, _, body)) => {
            if ps.len() != 2 || ps[0].term != **s || ps[1].ctx.len() < 2 {
                return bad("premises do not match");
            }
            let n = ps[1].ctx.len();
            let (x, a) = &ps[1].ctx.0[n - 2];
            let (y, b) = &ps[1].ctx.0[n - 1];
            if ps[0].ty != Type::tensor(a.clone(), b.clone())
                || ps[1].term.close(&[x, y]) != **body
                || ps[1].ty != d.ty
            {
                return bad("premises do not match");
            }
        }
        (Rule::LolliIntro, Term::Lam(_, a, body)) => {
            if ps.len() != 1 || ps[0].ctx.is_empty() {
                return bad("premise missing");
            }
            let (x, ta) = ps[0].ctx.0.last().expect("nonempty");
            if ta != a || ps[0].term.close(&[x]) != **body || d.ty != Type::lolli(a.clone(), ps[0].ty.clone()) {
                return bad("premise does not match");
            }
        }
        (Rule::LolliElim, Term::App(f, a)) => {
            if ps.len() != 2 || ps[0].term != **f || ps[1].term != **a {
                return bad("premises do not match");
            }
            if ps[0].ty != Type::lolli(ps[1].ty.clone(), d.ty.clone()) {
                return bad("function type does not match");
            }
        }
        (Rule::Discard, Term::Dis(a)) => {
            if !th.affine {
                return Err(TypeError::DisNotAffine);
            }
            if ps.len() != 1 || ps[0].term != **a || d.ty != Type::Unit {
                return bad("premise does not match");
            }
        }
        _ => return bad("rule does not fit the term"),
    }
    Ok(())
}

/// Counts derivations of `ctx |- term : A` by trying every rule and every
/// assignment of context entries to premises. Returns the conclusion type of
/// each derivation found. Exponential; meant as an oracle for small terms.
pub fn enumerate_derivations(th: &Theory, ctx: &Context, term: &Term) -> Vec<Type> {
    const RULES: [&str; 9] = ["hyp", "ax", "I_i", "I_e", "tensor_i", "tensor_e", "lolli_i", "lolli_e", "dis"];
    let mut out = Vec::new();
    if ctx.duplicate().is_some() {
        return out;
    }
    for rule in RULES {
        match (rule, term) {
            ("hyp", Term::Free(x)) => {
                if ctx.len() == 1 && ctx.0[0].0 == *x {
                    out.push(ctx.0[0].1.clone());
                }
            }
            ("ax", Term::Op(f, args)) => {
                let Some(sig) = th.ops.get(f) else { continue };
                if sig.args.len() != args.len() {
                    continue;
                }
                for split in splits(ctx, args.len()) {
                    let counts: Vec<usize> = args
                        .iter()
                        .zip(&split)
                        .zip(&sig.args)
                        .map(|((a, c), t)| enumerate_derivations(th, c, a).iter().filter(|u| *u == t).count())
                        .collect();
                    let n: usize = counts.iter().product();
                    out.extend(std::iter::repeat(sig.result.clone()).take(n));
                }
            }
            ("I_i", Term::Star) => {
                if ctx.is_empty() {
                    out.push(Type::Unit);
                }
            }
            ("tensor_i", Term::Pair(a, b)) => {
                for split in splits(ctx, 2) {
                    for ta in enumerate_derivations(th, &split[0], a) {
                        for tb in enumerate_derivations(th, &split[1], b) {
                            out.push(Type::tensor(ta.clone(), tb));
                        }
                    }
                }
            }
            ("I_e", Term::UnitTo(s, body)) => {
                for split in splits(ctx, 2) {
                    let n = enumerate_derivations(th, &split[0], s).iter().filter(|t| **t == Type::Unit).count();
                    for tb in enumerate_derivations(th, &split[1], body) {
                        out.extend(std::iter::repeat(tb).take(n));
                    }
                }
            }
            ("tensor_e", Term::PmTo(s, hx, hy, body)) => {
                let x = fresh_name(&hx.0, |n| ctx.contains(n));
                let y = fresh_name(&hy.0, |n| ctx.contains(n) || n == x);
                let opened = body.open(&[Term::Free(x.clone()), Term::Free(y.clone())]);
                for split in splits(ctx, 2) {
                    for ts in enumerate_derivations(th, &split[0], s) {
                        if let Type::Tensor(a, b) = ts {
                            let bctx = split[1].with(&x, *a).with(&y, *b);
                            out.extend(enumerate_derivations(th, &bctx, &opened));
                        }
                    }
                }
            }
            ("lolli_i", Term::Lam(hx, a, body)) => {
                let x = fresh_name(&hx.0, |n| ctx.contains(n));
                let opened = body.open(&[Term::Free(x.clone())]);
                for tb in enumerate_derivations(th, &ctx.with(&x, a.clone()), &opened) {
                    out.push(Type::lolli(a.clone(), tb));
                }
            }
            ("lolli_e", Term::App(f, a)) => {
                for split in splits(ctx, 2) {
                    let tas = enumerate_derivations(th, &split[1], a);
                    for tf in enumerate_derivations(th, &split[0], f) {
                        if let Type::Lolli(dom, cod) = tf {
                            let n = tas.iter().filter(|t| **t == *dom).count();
                            out.extend(std::iter::repeat(*cod).take(n));
                        }
                    }
                }
            }
            ("dis", Term::Dis(a)) => {
                if th.affine {
                    let n = enumerate_derivations(th, ctx, a).len();
                    out.extend(std::iter::repeat(Type::Unit).take(n));
                }
            }
            _ => {}
        }
    }
    out
}

/// Every way to distribute `ctx` over `n` order-preserving blocks.
fn splits(ctx: &Context, n: usize) -> Vec<Vec<Context>> {
    let mut out = Vec::new();
    let total = n.pow(ctx.len() as u32);
    for mut code in 0..total {
        let mut blocks = vec![Context::empty(); n];
        for entry in &ctx.0 {
            blocks[code % n].0.push(entry.clone());
            code /= n;
        }
        out.push(blocks);
    }
    out
}

/// Swaps context entries `i` and `i + 1` throughout the derivation.
pub fn exchange(d: &Derivation, i: usize) -> Result<Derivation> {
    if i + 1 >= d.ctx.len() {
        return Err(TypeError::OutOfRange(i));
    }
    let x = d.ctx.0[i].0.clone();
    let y = d.ctx.0[i + 1].0.clone();
    Ok(exch(d, &x, &y))
}

fn exch(d: &Derivation, x: &str, y: &str) -> Derivation {
    let mut out = d.clone();
    if let (Some(i), Some(j)) = (d.ctx.position(x), d.ctx.position(y)) {
        out.ctx.0.swap(i, j);
        out.premises = d
            .premises
            .iter()
            .map(|p| if p.ctx.contains(x) && p.ctx.contains(y) { exch(p, x, y) } else { p.clone() })
            .collect();
    }
    out
}

/// Renames the free variable `old` to `new` throughout the derivation.
pub fn rename(d: &Derivation, old: &str, new: &str) -> Derivation {
    let mut out = d.clone();
    if !d.ctx.contains(old) {
        return out;
    }
    for entry in &mut out.ctx.0 {
        if entry.0 == old {
            entry.0 = new.to_string();
        }
    }
    out.term = d.term.subst(old, &Term::var(new));
    out.premises = d.premises.iter().map(|p| rename(p, old, new)).collect();
    out
}

fn all_names(d: &Derivation, out: &mut HashSet<String>) {
    out.extend(d.ctx.name_set());
    for p in &d.premises {
        all_names(p, out);
    }
}

/// From `Γ, x:A |- v : B` and `Δ |- w : A` builds `Γ, Δ |- v[w/x] : B`.
/// Variables of Δ that clash with Γ are renamed first.
pub fn subst(outer: &Derivation, inner: &Derivation) -> Result<Derivation> {
    let (x, a) = outer
        .ctx
        .0
        .last()
        .cloned()
        .ok_or_else(|| TypeError::Malformed("substitution needs a nonempty outer context".into()))?;
    if a != inner.ty {
        return Err(TypeError::Mismatch { term: inner.term.to_string(), expected: a, found: inner.ty.clone() });
    }
    let gamma = outer.ctx.without(&x);
    let mut inner = inner.clone();
    let mut taken = gamma.name_set();
    taken.extend(inner.ctx.name_set());
    taken.insert(x.clone());
    for (n, _) in inner.ctx.0.clone() {
        if gamma.contains(&n) {
            let m = fresh_name(&n, |c| taken.contains(c));
            taken.insert(m.clone());
            inner = rename(&inner, &n, &m);
        }
    }
    Ok(subst_at(outer, &x, &inner))
}

fn subst_at(d: &Derivation, x: &str, inner: &Derivation) -> Derivation {
    if d.rule == Rule::Hyp {
        return inner.clone();
    }
    let delta = inner.ctx.name_set();
    let premises = d
        .premises
        .iter()
        .map(|p| {
            if !p.ctx.contains(x) {
                return p.clone();
            }
            // binder names introduced by this premise must not meet Δ
            let mut p = p.clone();
            let mut taken = HashSet::new();
            all_names(&p, &mut taken);
            taken.extend(delta.iter().cloned());
            for (n, _) in p.ctx.0.clone() {
                if !d.ctx.contains(&n) && delta.contains(&n) {
                    let m = fresh_name(&n, |c| taken.contains(c));
                    taken.insert(m.clone());
                    p = rename(&p, &n, &m);
                }
            }
            subst_at(&p, x, inner)
        })
        .collect();
    let mut ctx = Vec::new();
    for entry in &d.ctx.0 {
        if entry.0 == x {
            ctx.extend(inner.ctx.0.iter().cloned());
        } else {
            ctx.push(entry.clone());
        }
    }
    Derivation {
        ctx: Context(ctx),
        term: d.term.subst(x, &inner.term),
        ty: d.ty.clone(),
        rule: d.rule.clone(),
        premises,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::QuantaleKind;
    use crate::syntax::{parse_context, parse_term, parse_type};

    fn theory(affine: bool) -> Theory {
        let mut th = Theory::new(QuantaleKind::Lawvere);
        for g in ["A", "B", "C", "X"] {
            th.add_ground(g);
        }
        th.add_op("wait1", vec![Type::ground("X")], Type::ground("X"));
        th.add_op("f", vec![Type::ground("A"), Type::ground("B")], Type::ground("C"));
        th.affine = affine;
        th
    }

    fn d(th: &Theory, ctx: &str, t: &str) -> Result<Derivation> {
        derive(th, &parse_context(ctx).unwrap(), &parse_term(t).unwrap())
    }

    #[test]
    fn hyp_and_ax() {
        let th = theory(false);
        let h = d(&th, "x:A", "x").unwrap();
        assert_eq!(h.rule, Rule::Hyp);
        assert_eq!(h.ty, Type::ground("A"));
        let w = d(&th, "x:X", "wait1(wait1(x))").unwrap();
        assert_eq!(w.rule, Rule::Ax("wait1".into()));
        assert_eq!(w.premises[0].rule, Rule::Ax("wait1".into()));
        assert_eq!(w.ty, Type::ground("X"));
        validate(&th, &w).unwrap();
    }

    #[test]
    fn distinct_errors() {
        let th = theory(false);
        assert_eq!(d(&th, "x:A", "x * x").unwrap_err(), TypeError::DuplicateUse("x".into()));
        assert_eq!(d(&th, "x:A", "y").unwrap_err(), TypeError::UnknownVariable("y".into()));
        assert_eq!(d(&th, "x:A, y:A", "x").unwrap_err(), TypeError::UnusedLinear("y".into()));
        assert_eq!(
            d(&theory(true), "x:A, y:A", "x").unwrap_err(),
            TypeError::UnusedAffine("y".into())
        );
        assert!(matches!(d(&th, "x:A", "wait1(x)").unwrap_err(), TypeError::Mismatch { .. }));
        assert!(matches!(d(&th, "x:X, y:X", "wait1(x, y)").unwrap_err(), TypeError::Arity { .. }));
        assert!(matches!(d(&th, "x:X", "nope(x)").unwrap_err(), TypeError::UnknownOp(_)));
        assert_eq!(d(&th, "x:A", "dis(x)").unwrap_err(), TypeError::DisNotAffine);
        assert!(matches!(d(&th, "x:A", "x x").unwrap_err(), TypeError::DuplicateUse(_)));
        assert!(matches!(d(&th, "x:A, y:A", "x y").unwrap_err(), TypeError::NotFunction { .. }));
    }

    #[test]
    fn binders() {
        let th = theory(false);
        let t = d(&th, "-", "\\p:A * B. pm p to a * b. f(a, b)").unwrap();
        assert_eq!(t.ty, parse_type("A * B ->o C").unwrap());
        validate(&th, &t).unwrap();
        assert!(matches!(
            d(&th, "-", "\\p:A * B. pm p to a * b. a").unwrap_err(),
            TypeError::UnusedLinear(_)
        ));
    }

    #[test]
    fn shuffle_violations_are_caught_by_validate() {
        let th = theory(false);
        let mut t = d(&th, "a:A, b:B", "f(a, b)").unwrap();
        t.premises.swap(0, 1);
        assert!(validate(&th, &t).is_err());
        let mut t = d(&th, "a:A, b:B", "a * b").unwrap();
        t.premises[0].ctx = parse_context("b:B").unwrap();
        assert!(validate(&th, &t).is_err());
    }

    #[test]
    fn exchange_example() {
        let th = theory(false);
        let t = d(&th, "x:A, y:B", "x * y").unwrap();
        let e = exchange(&t, 0).unwrap();
        assert_eq!(e.ctx, parse_context("y:B, x:A").unwrap());
        assert_eq!(e.term, t.term);
        validate(&th, &e).unwrap();
        assert_eq!(exchange(&e, 0).unwrap(), t);
        assert!(exchange(&t, 1).is_err());
    }

    #[test]
    fn subst_identity_and_capture() {
        let th = theory(false);
        let id = d(&th, "x:A", "x").unwrap();
        let w = d(&th, "a:A", "a").unwrap();
        assert_eq!(subst(&id, &w).unwrap(), w);

        // outer binds `a` internally; inner uses free `a`
        let outer = d(&th, "b:B, x:A", "(\\a:A. f(a, b)) x").unwrap();
        let s = subst(&outer, &w).unwrap();
        validate(&th, &s).unwrap();
        assert_eq!(s.ctx, parse_context("b:B, a:A").unwrap());
        assert_eq!(s.skeleton(), derive(&th, &s.ctx, &s.term).unwrap().skeleton());
    }

    #[test]
    fn derived_weakening_in_affine_mode() {
        let th = theory(true);
        d(&th, "y:A, x:B", "dis(x) to *. y").unwrap();
    }

    #[test]
    fn brute_force_agrees_on_small_terms() {
        let th = theory(false);
        for (ctx, t) in [
            ("x:A, y:B", "f(x, y)"),
            ("y:B, x:A", "f(x, y)"),
            ("-", "\\p:A * B. pm p to a * b. f(a, b)"),
            ("x:A, y:B", "(\\u:B. f(x, u)) y"),
            ("u:I, v:I", "u to *. v"),
        ] {
            let c = parse_context(ctx).unwrap();
            let tm = parse_term(t).unwrap();
            let dv = derive(&th, &c, &tm).unwrap();
            assert_eq!(enumerate_derivations(&th, &c, &tm), vec![dv.ty]);
        }
        let c = parse_context("x:A").unwrap();
        assert!(enumerate_derivations(&th, &c, &parse_term("x * x").unwrap()).is_empty());
    }
}
