//! Rewriting with the base equations oriented left to right.
//!
//! Redexes are contracted leftmost-outermost. Each step is recorded as a
//! base-equation instance wrapped in congruence rules, so the whole trace is
//! a proof at the top label.

use super::proof::{dis_chain, BaseEq, ProofRule, ProofTree};
use super::VEquation;
use crate::syntax::{fresh_name, Term, Theory};
use crate::typing::{derive, Derivation, Rule, TypeError};

pub const DEFAULT_STEPS: usize = 10_000;

#[derive(Clone, Debug)]
pub struct Normalized {
    pub term: Term,
    /// Proves `input =[top] term`.
    pub proof: ProofTree,
    pub steps: usize,
    /// True when the step budget ran out before a normal form was reached.
    pub exhausted: bool,
}

pub fn normalize(th: &Theory, d: &Derivation, max_steps: usize) -> Result<Normalized, TypeError> {
    let mut cur = d.clone();
    let mut proof = ProofTree::refl(th, d.ctx.clone(), d.term.clone(), d.ty.clone());
    let mut steps = 0;
    loop {
        let Some((next, p)) = step(th, &cur) else {
            return Ok(Normalized { term: cur.term, proof, steps, exhausted: false });
        };
        if steps == max_steps {
            return Ok(Normalized { term: cur.term, proof, steps, exhausted: true });
        }
        steps += 1;
        proof = ProofTree::trans(proof, p);
        cur = derive(th, &d.ctx, &next)?;
    }
}

/// Normal form of a term typed in `ctx`, ignoring the proof.
pub fn normal_form(th: &Theory, d: &Derivation) -> Result<Term, TypeError> {
    Ok(normalize(th, d, DEFAULT_STEPS)?.term)
}

/// One leftmost-outermost step, with its proof.
pub fn step(th: &Theory, d: &Derivation) -> Option<(Term, ProofTree)> {
    if let Some((eq, next)) = root_redex(th, d) {
        return Some(base_step(th, d, eq, false, next));
    }
    if let Some(hit) = hoist_from_lam(th, d) {
        return Some(hit);
    }
    for (i, p) in d.premises.iter().enumerate() {
        if let Some((child, proof)) = step(th, p) {
            return Some(congruence(th, d, i, &child, proof));
        }
    }
    None
}

fn base_step(th: &Theory, d: &Derivation, eq: BaseEq, reversed: bool, next: Term) -> (Term, ProofTree) {
    let c = VEquation::new(d.ctx.clone(), d.term.clone(), next.clone(), d.ty.clone(), th.quantale.top());
    (next, ProofTree::new(ProofRule::Base { eq, reversed }, vec![], c))
}

/// Lifts a step on premise `i` (with result `child`, opened) to `d`.
fn congruence(th: &Theory, d: &Derivation, i: usize, child: &Term, proof: ProofTree) -> (Term, ProofTree) {
    let cong = match d.rule {
        Rule::Ax(_) => ProofRule::CongOp,
        Rule::TensorIntro => ProofRule::CongTensor,
        Rule::UnitElim => ProofRule::CongTo,
        Rule::TensorElim => ProofRule::CongPm,
        Rule::LolliIntro => ProofRule::CongLam,
        Rule::LolliElim => ProofRule::CongApp,
        Rule::Discard => ProofRule::CongDis,
        Rule::Hyp | Rule::UnitIntro => unreachable!("leaf rules have no premises"),
    };
    let closed = close_premise(d, i, child);
    let next = d.term.replace_at(&[i], &closed);
    let mut proof = Some(proof);
    let premises = d
        .premises
        .iter()
        .enumerate()
        .map(|(j, q)| match proof.take_if(|_| j == i) {
            Some(p) => p,
            None => ProofTree::refl(th, q.ctx.clone(), q.term.clone(), q.ty.clone()),
        })
        .collect();
    let c = VEquation::new(d.ctx.clone(), d.term.clone(), next.clone(), d.ty.clone(), th.quantale.top());
    (next, ProofTree::new(cong, premises, c))
}

/// Rewrites the subterm at `path` (premise indices) with a base equation.
fn rewrite_at(
    th: &Theory,
    d: &Derivation,
    path: &[usize],
    f: &dyn Fn(&Derivation) -> Option<(BaseEq, bool, Term)>,
) -> Option<(Term, ProofTree)> {
    match path.split_first() {
        None => {
            let (eq, reversed, next) = f(d)?;
            Some(base_step(th, d, eq, reversed, next))
        }
        Some((&i, rest)) => {
            let (child, proof) = rewrite_at(th, d.premises.get(i)?, rest, f)?;
            Some(congruence(th, d, i, &child, proof))
        }
    }
}

/// `\x. s to *. t  =  s to *. \x. t` when `s` does not use `x`, and the
/// same for `pm`. Not a base equation: it is proved by expanding `t` to
/// `(\x. t) x`, commuting the let out of the application, and contracting
/// the outer abstraction by eta.
fn hoist_from_lam(th: &Theory, d: &Derivation) -> Option<(Term, ProofTree)> {
    let Term::Lam(_, a, body) = &d.term else { return None };
    let (cc, cont) = match &**body {
        Term::UnitTo(s, _) if s.closed_at(0) => (BaseEq::CcUnit, vec![0, 1]),
        Term::PmTo(s, ..) if s.closed_at(0) => (BaseEq::CcPm, vec![0, 1]),
        _ => return None,
    };
    let x = d.premises[0].ctx.0.last()?.0.clone();
    let a = a.clone();
    let expand = |q: &Derivation| Some((BaseEq::LamBeta, true, Term::app(Term::lam(&x, a.clone(), q.term.clone()), Term::var(&x))));
    let (t1, p1) = rewrite_at(th, d, &cont, &expand)?;
    let d1 = derive(th, &d.ctx, &t1).ok()?;
    let commute = |q: &Derivation| match &q.term {
        Term::UnitTo(s, inner) => match &**inner {
            Term::App(f, arg) => Some((cc, true, Term::app(Term::UnitTo(s.clone(), f.clone()), (**arg).clone()))),
            _ => None,
        },
        Term::PmTo(s, hx, hy, inner) => match &**inner {
            Term::App(f, arg) => {
                Some((cc, true, Term::app(Term::PmTo(s.clone(), hx.clone(), hy.clone(), f.clone()), (**arg).clone())))
            }
            _ => None,
        },
        _ => None,
    };
    let (t2, p2) = rewrite_at(th, &d1, &[0], &commute)?;
    let d2 = derive(th, &d.ctx, &t2).ok()?;
    let Term::Lam(_, _, b2) = &t2 else { return None };
    let Term::App(g, _) = &**b2 else { return None };
    let (t3, p3) = base_step(th, &d2, BaseEq::LamEta, false, (**g).clone());
    Some((t3, ProofTree::trans(ProofTree::trans(p1, p2), p3)))
}

/// Abstracts the variables a binder premise introduced.
fn close_premise(d: &Derivation, i: usize, t: &Term) -> Term {
    let ctx = &d.premises[i].ctx.0;
    match (&d.rule, i) {
        (Rule::TensorElim, 1) => t.close(&[&ctx[ctx.len() - 2].0, &ctx[ctx.len() - 1].0]),
        (Rule::LolliIntro, 0) => t.close(&[&ctx[ctx.len() - 1].0]),
        _ => t.clone(),
    }
}

fn root_redex(th: &Theory, d: &Derivation) -> Option<(BaseEq, Term)> {
    let t = &d.term;
    match t {
        Term::App(f, w) => {
            if let Term::Lam(_, _, body) = &**f {
                return Some((BaseEq::LamBeta, body.open(&[(**w).clone()])));
            }
        }
        Term::PmTo(s, _, _, body) => {
            if let Term::Pair(a, b) = &**s {
                return Some((BaseEq::PmBeta, body.open(&[(**a).clone(), (**b).clone()])));
            }
        }
        Term::UnitTo(s, body) => {
            if **s == Term::Star {
                return Some((BaseEq::UnitBeta, (**body).clone()));
            }
            if **body == Term::Star {
                return Some((BaseEq::UnitEta, (**s).clone()));
            }
        }
        Term::Dis(v) if th.affine && !matches!(**v, Term::Free(_)) => {
            return Some((BaseEq::DisExpand, dis_chain(&d.ctx)));
        }
        _ => {}
    }
    // lets in argument or scrutinee position move outwards
    let positions: Vec<usize> = match t {
        Term::Op(_, args) => (0..args.len()).collect(),
        Term::Pair(..) | Term::App(..) => vec![0, 1],
        Term::Dis(_) | Term::UnitTo(..) | Term::PmTo(..) => vec![0],
        _ => vec![],
    };
    for i in positions {
        match t.at(&[i]) {
            Some(Term::UnitTo(v, w)) => {
                return Some((BaseEq::CcUnit, Term::unit_to((**v).clone(), t.replace_at(&[i], w))));
            }
            Some(Term::PmTo(v, hx, hy, w)) => {
                let mut taken = d.ctx.name_set();
                t.all_names(&mut taken);
                let x = fresh_name(&hx.0, |n| taken.contains(n));
                taken.insert(x.clone());
                let y = fresh_name(&hy.0, |n| taken.contains(n));
                let w = w.open(&[Term::var(&x), Term::var(&y)]);
                let body = t.replace_at(&[i], &w);
                return Some((BaseEq::CcPm, Term::pm((**v).clone(), &x, &y, body)));
            }
            _ => {}
        }
    }
    None
}
