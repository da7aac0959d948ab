//! Random well-typed terms over a small fixed signature.
//!
//! Generation is type directed: given a context and a target type it picks
//! an introduction or elimination step, splits the context between the
//! premises, and recurses. Once fuel runs out the remaining variables are
//! consumed by the cheapest elimination, so every variable is used exactly
//! once and the result always typechecks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quantale::QuantaleKind;
use crate::syntax::{Context, Term, Theory, Type};

/// Ground `X` with `k : I -> X`, `m : X, X -> X`, `g : X -> X`, `e : X -> I`.
pub fn gen_theory(kind: QuantaleKind, affine: bool) -> Theory {
    let mut th = Theory::new(kind);
    th.add_ground("X");
    let x = Type::ground("X");
    th.add_op("k", vec![Type::Unit], x.clone());
    th.add_op("m", vec![x.clone(), x.clone()], x.clone());
    th.add_op("g", vec![x.clone()], x.clone());
    th.add_op("e", vec![x], Type::Unit);
    th.affine = affine;
    th
}

pub struct TermGen {
    rng: ChaCha8Rng,
    next: usize,
    pub affine: bool,
    /// Largest nesting depth of generated types.
    pub type_depth: usize,
}

impl TermGen {
    pub fn new(seed: u64) -> TermGen {
        TermGen { rng: ChaCha8Rng::seed_from_u64(seed), next: 0, affine: false, type_depth: 2 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn fresh(&mut self, base: &str) -> String {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    pub fn random_type(&mut self, depth: usize) -> Type {
        let x = Type::ground("X");
        if depth == 0 {
            return if self.rng.gen_bool(0.75) { x } else { Type::Unit };
        }
        match self.rng.gen_range(0..6) {
            0 | 1 | 2 => x,
            3 => Type::Unit,
            4 => Type::tensor(self.random_type(depth - 1), self.random_type(depth - 1)),
            _ => Type::lolli(self.random_type(depth - 1), self.random_type(depth - 1)),
        }
    }

    pub fn random_context(&mut self, max_len: usize) -> Context {
        let n = self.rng.gen_range(0..=max_len);
        let mut ctx = Context::empty();
        for _ in 0..n {
            let name = self.fresh("v");
            let ty = self.random_type(self.type_depth.saturating_sub(1));
            ctx = ctx.with(&name, ty);
        }
        ctx
    }

    /// A random judgement `ctx |- t : ty`.
    pub fn judgement(&mut self, max_ctx: usize, fuel: usize) -> (Context, Term, Type) {
        let ctx = self.random_context(max_ctx);
        let ty = self.random_type(self.type_depth);
        let t = self.term(&ctx, &ty, fuel);
        (ctx, t, ty)
    }

    /// A term of type `target` using every variable of `ctx` exactly once.
    pub fn term(&mut self, ctx: &Context, target: &Type, fuel: usize) -> Term {
        if fuel == 0 {
            return self.consume(ctx, target);
        }
        let fuel = fuel - 1;
        if ctx.len() == 1 && ctx.0[0].1 == *target && self.rng.gen_bool(0.4) {
            return Term::var(&ctx.0[0].0);
        }
        if !ctx.is_empty() && self.rng.gen_bool(0.35) {
            let i = self.rng.gen_range(0..ctx.len());
            return self.eliminate(ctx, i, target, fuel);
        }
        if self.rng.gen_bool(0.12) {
            // beta redex `(\y:C. u) w`
            let c = self.random_type(1);
            let (c1, c2) = self.split(ctx);
            let y = self.fresh("y");
            let body = self.term(&c1.with(&y, c.clone()), target, fuel / 2);
            let arg = self.term(&c2, &c, fuel / 2);
            return Term::app(Term::lam(&y, c, body), arg);
        }
        self.introduce(ctx, target, fuel)
    }

    fn introduce(&mut self, ctx: &Context, target: &Type, fuel: usize) -> Term {
        match target {
            Type::Unit => {
                if ctx.is_empty() && self.rng.gen_bool(0.6) {
                    return Term::Star;
                }
                match self.rng.gen_range(0..3) {
                    0 => Term::op("e", vec![self.term(ctx, &Type::ground("X"), fuel)]),
                    1 if self.affine => Term::dis(self.term_any(ctx, fuel)),
                    _ => {
                        let (c1, c2) = self.split(ctx);
                        Term::unit_to(self.term(&c1, &Type::Unit, fuel / 2), self.term(&c2, &Type::Unit, fuel / 2))
                    }
                }
            }
            Type::Ground(_) => {
                if ctx.is_empty() && self.rng.gen_bool(0.5) {
                    return Term::op("k", vec![Term::Star]);
                }
                let x = Type::ground("X");
                if self.rng.gen_bool(0.5) {
                    Term::op("g", vec![self.term(ctx, &x, fuel)])
                } else {
                    let (c1, c2) = self.split(ctx);
                    Term::op("m", vec![self.term(&c1, &x, fuel / 2), self.term(&c2, &x, fuel / 2)])
                }
            }
            Type::Tensor(a, b) => {
                let (c1, c2) = self.split(ctx);
                Term::pair(self.term(&c1, a, fuel / 2), self.term(&c2, b, fuel / 2))
            }
            Type::Lolli(a, b) => {
                let x = self.fresh("x");
                let body = self.term(&ctx.with(&x, (**a).clone()), b, fuel);
                Term::lam(&x, (**a).clone(), body)
            }
        }
    }

    fn term_any(&mut self, ctx: &Context, fuel: usize) -> Term {
        let ty = self.random_type(1);
        self.term(ctx, &ty, fuel)
    }

    /// Uses variable `i` of `ctx` by an elimination at its type.
    fn eliminate(&mut self, ctx: &Context, i: usize, target: &Type, fuel: usize) -> Term {
        let (v, ty) = ctx.0[i].clone();
        let rest = ctx.without(&v);
        let var = Term::var(&v);
        if self.affine && self.rng.gen_bool(0.2) {
            return Term::unit_to(Term::dis(var), self.term(&rest, target, fuel));
        }
        match ty {
            Type::Unit => Term::unit_to(var, self.term(&rest, target, fuel)),
            Type::Tensor(a, b) => {
                let (x, y) = (self.fresh("p"), self.fresh("q"));
                let body = self.term(&rest.with(&x, *a).with(&y, *b), target, fuel);
                Term::pm(var, &x, &y, body)
            }
            Type::Ground(_) => {
                if *target == ty && self.rng.gen_bool(0.5) {
                    Term::op("m", vec![var, self.term(&rest, target, fuel)])
                } else {
                    Term::unit_to(Term::op("e", vec![var]), self.term(&rest, target, fuel))
                }
            }
            Type::Lolli(a, b) => {
                let (c1, c2) = self.split(&rest);
                let arg = self.term(&c1, &a, fuel / 2);
                let applied = Term::app(var, arg);
                if *b == *target && c2.is_empty() {
                    return applied;
                }
                let y = self.fresh("y");
                let body = self.term(&c2.with(&y, (*b).clone()), target, fuel / 2);
                Term::app(Term::lam(&y, *b, body), applied)
            }
        }
    }

    /// Deterministic completion: eliminate every variable, then build the
    /// smallest closed term of `target`.
    fn consume(&mut self, ctx: &Context, target: &Type) -> Term {
        if ctx.is_empty() {
            return closed(target);
        }
        if ctx.len() == 1 && ctx.0[0].1 == *target {
            return Term::var(&ctx.0[0].0);
        }
        let (v, ty) = ctx.0[0].clone();
        let rest = ctx.without(&v);
        let var = Term::var(&v);
        match ty {
            Type::Unit => Term::unit_to(var, self.consume(&rest, target)),
            Type::Tensor(a, b) => {
                let (x, y) = (self.fresh("p"), self.fresh("q"));
                let body = self.consume(&rest.with(&x, *a).with(&y, *b), target);
                Term::pm(var, &x, &y, body)
            }
            Type::Ground(_) => Term::unit_to(Term::op("e", vec![var]), self.consume(&rest, target)),
            Type::Lolli(a, b) => {
                let y = self.fresh("y");
                let body = self.consume(&rest.with(&y, (*b).clone()), target);
                Term::app(Term::lam(&y, *b, body), Term::app(var, closed(&a)))
            }
        }
    }

    /// Splits `ctx` into two order-preserving parts.
    fn split(&mut self, ctx: &Context) -> (Context, Context) {
        let mut a = Context::empty();
        let mut b = Context::empty();
        for (x, t) in &ctx.0 {
            if self.rng.gen_bool(0.5) {
                a = a.with(x, t.clone());
            } else {
                b = b.with(x, t.clone());
            }
        }
        (a, b)
    }

    /// A random reordering of `ctx`.
    pub fn permute(&mut self, ctx: &Context) -> Context {
        let mut v = ctx.0.clone();
        v.shuffle(&mut self.rng);
        Context(v)
    }
}

/// The smallest closed term of a type.
pub fn closed(ty: &Type) -> Term {
    match ty {
        Type::Unit => Term::Star,
        Type::Ground(_) => Term::op("k", vec![Term::Star]),
        Type::Tensor(a, b) => Term::pair(closed(a), closed(b)),
        Type::Lolli(a, b) => {
            // the argument is consumed before building the result
            let x = "a";
            let mut g = TermGen::new(0);
            let body = g.consume(&Context::empty().with(x, (**a).clone()), b);
            Term::lam(x, (**a).clone(), body)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::derive;

    #[test]
    fn generated_terms_typecheck() {
        for affine in [false, true] {
            let th = gen_theory(QuantaleKind::Lawvere, affine);
            let mut g = TermGen::new(7);
            g.affine = affine;
            for fuel in [0, 3, 8, 20] {
                for _ in 0..200 {
                    let (ctx, t, ty) = g.judgement(3, fuel);
                    let d = derive(&th, &ctx, &t).unwrap_or_else(|e| panic!("{ctx} |- {t} : {ty}: {e}"));
                    assert_eq!(d.ty, ty);
                }
            }
        }
    }

    #[test]
    fn closed_terms() {
        let th = gen_theory(QuantaleKind::Lawvere, false);
        let ty = crate::syntax::parse_type("(X ->o X * I) ->o I ->o X").unwrap();
        assert_eq!(derive(&th, &Context::empty(), &closed(&ty)).unwrap().ty, ty);
    }
}
