//! Proof trees for labelled equations and their checker.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use super::VEquation;
use crate::quantale::QValue;
use crate::syntax::{fresh_name, is_shuffle, Context, Term, Theory, Type};
use crate::typing::derive;

/// The unlabelled equations that every theory contains, each an equality at
/// the top element. `DisExpand` and `DisUnit` exist only in affine theories.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseEq {
    PmBeta,
    PmEta,
    UnitBeta,
    UnitEta,
    LamBeta,
    LamEta,
    CcUnit,
    CcPm,
    DisExpand,
    DisUnit,
}

impl BaseEq {
    pub const ALL: [BaseEq; 10] = [
        BaseEq::PmBeta,
        BaseEq::PmEta,
        BaseEq::UnitBeta,
        BaseEq::UnitEta,
        BaseEq::LamBeta,
        BaseEq::LamEta,
        BaseEq::CcUnit,
        BaseEq::CcPm,
        BaseEq::DisExpand,
        BaseEq::DisUnit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseEq::PmBeta => "pm_beta",
            BaseEq::PmEta => "pm_eta",
            BaseEq::UnitBeta => "unit_beta",
            BaseEq::UnitEta => "unit_eta",
            BaseEq::LamBeta => "lam_beta",
            BaseEq::LamEta => "lam_eta",
            BaseEq::CcUnit => "cc_unit",
            BaseEq::CcPm => "cc_pm",
            BaseEq::DisExpand => "dis_expand",
            BaseEq::DisUnit => "dis_unit",
        }
    }

    pub fn from_name(s: &str) -> Option<BaseEq> {
        BaseEq::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn affine_only(self) -> bool {
        matches!(self, BaseEq::DisExpand | BaseEq::DisUnit)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProofRule {
    /// Simultaneous instance of an axiom; `subst[i]` replaces the i-th
    /// variable of the axiom's context.
    Axiom { index: usize, subst: Vec<Term> },
    Base { eq: BaseEq, reversed: bool },
    Refl,
    Trans,
    /// The conclusion label is the weakened value.
    Weak,
    Arch { witnesses: Vec<QValue> },
    Join,
    CongOp,
    CongTensor,
    CongTo,
    CongPm,
    CongLam,
    CongApp,
    CongDis,
    /// Premises prove `v = w` (over a context containing `var`) and
    /// `v' = w'`; the conclusion substitutes them for `var`.
    CongSubst { var: String },
    Perm,
    Sym,
}

impl ProofRule {
    pub fn name(&self) -> &'static str {
        match self {
            ProofRule::Axiom { .. } => "axiom",
            ProofRule::Base { .. } => "base_eq",
            ProofRule::Refl => "refl",
            ProofRule::Trans => "trans",
            ProofRule::Weak => "weak",
            ProofRule::Arch { .. } => "arch",
            ProofRule::Join => "join",
            ProofRule::CongOp => "cong_op",
            ProofRule::CongTensor => "cong_tensor",
            ProofRule::CongTo => "cong_to",
            ProofRule::CongPm => "cong_pm",
            ProofRule::CongLam => "cong_lam",
            ProofRule::CongApp => "cong_app",
            ProofRule::CongDis => "cong_dis",
            ProofRule::CongSubst { .. } => "cong_subst",
            ProofRule::Perm => "perm",
            ProofRule::Sym => "sym",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofTree {
    pub rule: ProofRule,
    pub premises: Vec<ProofTree>,
    pub conclusion: VEquation,
}

impl ProofTree {
    pub fn new(rule: ProofRule, premises: Vec<ProofTree>, conclusion: VEquation) -> ProofTree {
        ProofTree { rule, premises, conclusion }
    }

    pub fn label(&self) -> &QValue {
        &self.conclusion.label
    }

    pub fn refl(th: &Theory, ctx: Context, t: Term, ty: Type) -> ProofTree {
        let eq = VEquation::new(ctx, t.clone(), t, ty, th.quantale.top());
        ProofTree::new(ProofRule::Refl, vec![], eq)
    }

    /// Chains two proofs sharing a middle term. Reflexivity steps are dropped.
    pub fn trans(a: ProofTree, b: ProofTree) -> ProofTree {
        if a.rule == ProofRule::Refl {
            return b;
        }
        if b.rule == ProofRule::Refl {
            return a;
        }
        let label = a.label().tensor(b.label()).expect("same quantale");
        let eq = VEquation::new(
            a.conclusion.ctx.clone(),
            a.conclusion.lhs.clone(),
            b.conclusion.rhs.clone(),
            a.conclusion.ty.clone(),
            label,
        );
        ProofTree::new(ProofRule::Trans, vec![a, b], eq)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::size).sum::<usize>()
    }

    /// Rule names in preorder, used to break ties between proofs.
    pub fn rule_sequence(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule.name()];
        for p in &self.premises {
            out.extend(p.rule_sequence());
        }
        out
    }

    /// Whether some node joins one or more premises.
    pub fn uses_nonempty_join(&self) -> bool {
        (self.rule == ProofRule::Join && !self.premises.is_empty())
            || self.premises.iter().any(ProofTree::uses_nonempty_join)
    }

    /// Reverses a proof whose every label is the top element and whose rules
    /// are all reversible without symmetry.
    pub fn reverse_top(&self) -> Option<ProofTree> {
        if !self.label().is_top() {
            return None;
        }
        let mut c = self.conclusion.clone();
        std::mem::swap(&mut c.lhs, &mut c.rhs);
        let rule = match &self.rule {
            ProofRule::Base { eq, reversed } => ProofRule::Base { eq: *eq, reversed: !reversed },
            ProofRule::Axiom { .. } | ProofRule::Weak | ProofRule::Arch { .. } | ProofRule::Join | ProofRule::Sym => {
                return None
            }
            other => other.clone(),
        };
        let mut premises: Vec<ProofTree> =
            self.premises.iter().map(ProofTree::reverse_top).collect::<Option<_>>()?;
        if self.rule == ProofRule::Trans {
            premises.reverse();
        }
        Some(ProofTree::new(rule, premises, c))
    }
}

impl fmt::Display for ProofTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &ProofTree, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let extra = match &t.rule {
                ProofRule::Axiom { index, .. } => format!(" #{index}"),
                ProofRule::Base { eq, reversed } => {
                    format!(" {}{}", eq.name(), if *reversed { " (reversed)" } else { "" })
                }
                ProofRule::CongSubst { var } => format!(" [{var}]"),
                _ => String::new(),
            };
            writeln!(f, "{:indent$}{}{}: {}", "", t.rule.name(), extra, t.conclusion, indent = indent)?;
            for p in &t.premises {
                go(p, indent + 2, f)?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("at node {path} ({rule}): {msg}")]
pub struct ProofError {
    pub path: String,
    pub rule: String,
    pub msg: String,
}

/// Validates every node and returns the root conclusion.
pub fn check_proof(th: &Theory, tree: &ProofTree) -> Result<VEquation, ProofError> {
    check_node(th, tree, &mut Vec::new())?;
    Ok(tree.conclusion.clone())
}

fn check_node(th: &Theory, t: &ProofTree, path: &mut Vec<usize>) -> Result<(), ProofError> {
    for (i, p) in t.premises.iter().enumerate() {
        path.push(i);
        check_node(th, p, path)?;
        path.pop();
    }
    check_rule(th, t).map_err(|msg| ProofError {
        path: if path.is_empty() {
            "/".into()
        } else {
            path.iter().map(|i| format!("/{i}")).collect()
        },
        rule: t.rule.name().into(),
        msg,
    })
}

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn check_rule(th: &Theory, t: &ProofTree) -> Check {
    let c = &t.conclusion;
    let ps: Vec<&VEquation> = t.premises.iter().map(|p| &p.conclusion).collect();
    ensure(c.label.kind() == th.quantale, || format!("label {} is not a {} value", c.label, th.quantale))?;
    for (side, term) in [("left", &c.lhs), ("right", &c.rhs)] {
        let d = derive(th, &c.ctx, term).map_err(|e| format!("{side} side is ill-typed: {e}"))?;
        ensure(d.ty == c.ty, || format!("{side} side has type {}, expected {}", d.ty, c.ty))?;
    }
    let arity = |n: usize| ensure(ps.len() == n, || format!("expected {n} premise(s), found {}", ps.len()));
    let same = |p: &VEquation| {
        ensure(p.same_judgement(c), || format!("premise `{p}` does not match the conclusion"))
    };
    let top = th.quantale.top();
    let tensor = |xs: &[&VEquation]| {
        th.quantale
            .tensor_all(xs.iter().map(|p| &p.label))
            .map_err(|e| e.to_string())
    };
    let expect_label = |q: QValue| {
        ensure(q == c.label, || format!("rule yields label {q}, node states {}", c.label))
    };
    match &t.rule {
        ProofRule::Refl => {
            arity(0)?;
            ensure(c.lhs == c.rhs, || "sides differ".into())?;
            expect_label(top)
        }
        ProofRule::Axiom { index, subst } => {
            arity(0)?;
            check_axiom(th, c, *index, subst)
        }
        ProofRule::Base { eq, reversed } => {
            arity(0)?;
            ensure(!eq.affine_only() || th.affine, || format!("{} needs an affine theory", eq.name()))?;
            let (l, r) = if *reversed { (&c.rhs, &c.lhs) } else { (&c.lhs, &c.rhs) };
            ensure(base_holds(*eq, &c.ctx, l, r), || {
                format!("`{l}` and `{r}` are not an instance of {}", eq.name())
            })?;
            expect_label(top)
        }
        ProofRule::Trans => {
            arity(2)?;
            let (a, b) = (ps[0], ps[1]);
            ensure(a.ctx == c.ctx && b.ctx == c.ctx, || "contexts differ".into())?;
            ensure(a.ty == c.ty && b.ty == c.ty, || "types differ".into())?;
            ensure(a.lhs == c.lhs && b.rhs == c.rhs, || "outer terms do not match".into())?;
            ensure(a.rhs == b.lhs, || format!("middle terms `{}` and `{}` differ", a.rhs, b.lhs))?;
            expect_label(tensor(&ps)?)
        }
        ProofRule::Weak => {
            arity(1)?;
            same(ps[0])?;
            let ok = c.label.leq(&ps[0].label).map_err(|e| e.to_string())?;
            ensure(ok, || format!("{} is not below {}", c.label, ps[0].label))
        }
        ProofRule::Arch { witnesses } => {
            ensure(!witnesses.is_empty(), || "no witnesses".into())?;
            arity(witnesses.len())?;
            for (p, r) in ps.iter().zip(witnesses) {
                same(p)?;
                ensure(r.leq(&p.label).unwrap_or(false), || format!("premise proves {}, not {r}", p.label))?;
                ensure(r.way_below(&c.label).unwrap_or(false), || format!("{r} is not way-below {}", c.label))?;
            }
            let j = th.quantale.join(witnesses.iter()).map_err(|e| e.to_string())?;
            ensure(c.label.leq(&j).unwrap_or(false), || {
                format!("witnesses only reach {j}, below {}", c.label)
            })
        }
        ProofRule::Join => {
            for p in &ps {
                same(p)?;
            }
            let j = th.quantale.join(ps.iter().map(|p| &p.label)).map_err(|e| e.to_string())?;
            expect_label(j)
        }
        ProofRule::Sym => {
            arity(1)?;
            ensure(th.symmetric, || "symmetry is not available in this theory".into())?;
            let p = ps[0];
            ensure(p.ctx == c.ctx && p.ty == c.ty && p.lhs == c.rhs && p.rhs == c.lhs, || {
                "conclusion is not the premise reversed".into()
            })?;
            expect_label(p.label.clone())
        }
        ProofRule::Perm => {
            arity(1)?;
            let p = ps[0];
            ensure(p.ctx.is_permutation_of(&c.ctx), || format!("{} is not a permutation of {}", c.ctx, p.ctx))?;
            ensure(p.lhs == c.lhs && p.rhs == c.rhs && p.ty == c.ty, || "sides differ".into())?;
            expect_label(p.label.clone())
        }
        ProofRule::CongOp => {
            let (Term::Op(f, xs), Term::Op(g, ys)) = (&c.lhs, &c.rhs) else {
                return Err("sides are not operation applications".into());
            };
            ensure(f == g, || format!("operations `{f}` and `{g}` differ"))?;
            arity(xs.len())?;
            for ((p, x), y) in ps.iter().zip(xs).zip(ys) {
                ensure(p.lhs == *x && p.rhs == *y, || format!("premise `{p}` is not an argument pair"))?;
            }
            shuffle_of(c, &ps.iter().map(|p| p.ctx.clone()).collect::<Vec<_>>())?;
            expect_label(tensor(&ps)?)
        }
        ProofRule::CongTensor | ProofRule::CongTo | ProofRule::CongApp => {
            arity(2)?;
            let parts = match (&t.rule, &c.lhs, &c.rhs) {
                (ProofRule::CongTensor, Term::Pair(a, b), Term::Pair(x, y))
                | (ProofRule::CongTo, Term::UnitTo(a, b), Term::UnitTo(x, y))
                | (ProofRule::CongApp, Term::App(a, b), Term::App(x, y)) => (a, b, x, y),
                _ => return Err("sides do not have the rule's shape".into()),
            };
            let (a, b, x, y) = parts;
            ensure(ps[0].lhs == **a && ps[0].rhs == **x, || "first premise does not match".into())?;
            ensure(ps[1].lhs == **b && ps[1].rhs == **y, || "second premise does not match".into())?;
            shuffle_of(c, &[ps[0].ctx.clone(), ps[1].ctx.clone()])?;
            expect_label(tensor(&ps)?)
        }
        ProofRule::CongPm => {
            arity(2)?;
            let (Term::PmTo(a, _, _, b), Term::PmTo(x, _, _, y)) = (&c.lhs, &c.rhs) else {
                return Err("sides are not pattern matches".into());
            };
            ensure(ps[0].lhs == **a && ps[0].rhs == **x, || "scrutinee premise does not match".into())?;
            let n = ps[1].ctx.len();
            ensure(n >= 2, || "body premise lacks the bound variables".into())?;
            let bx = ps[1].ctx.0[n - 2].0.as_str();
            let by = ps[1].ctx.0[n - 1].0.as_str();
            ensure(bx != by, || "bound variables coincide".into())?;
            ensure(ps[1].lhs.close(&[bx, by]) == **b && ps[1].rhs.close(&[bx, by]) == **y, || {
                "body premise does not match".into()
            })?;
            let delta = Context(ps[1].ctx.0[..n - 2].to_vec());
            shuffle_of(c, &[ps[0].ctx.clone(), delta])?;
            expect_label(tensor(&ps)?)
        }
        ProofRule::CongLam => {
            arity(1)?;
            let (Term::Lam(_, ta, b), Term::Lam(_, tb, y)) = (&c.lhs, &c.rhs) else {
                return Err("sides are not abstractions".into());
            };
            let p = ps[0];
            ensure(p.ctx.len() == c.ctx.len() + 1 && p.ctx.0[..c.ctx.len()] == c.ctx.0[..], || {
                "premise context must extend the conclusion context by one variable".into()
            })?;
            let (x, a) = p.ctx.0.last().expect("nonempty");
            ensure(a == ta && a == tb, || "binder types differ".into())?;
            ensure(p.lhs.close(&[x]) == **b && p.rhs.close(&[x]) == **y, || "bodies do not match".into())?;
            expect_label(p.label.clone())
        }
        ProofRule::CongDis => {
            arity(1)?;
            ensure(th.affine, || "dis needs an affine theory".into())?;
            let (Term::Dis(a), Term::Dis(b)) = (&c.lhs, &c.rhs) else {
                return Err("sides are not discards".into());
            };
            let p = ps[0];
            ensure(p.lhs == **a && p.rhs == **b && p.ctx == c.ctx, || "premise does not match".into())?;
            expect_label(p.label.clone())
        }
        ProofRule::CongSubst { var } => {
            arity(2)?;
            let (outer, inner) = (ps[0], ps[1]);
            let a = outer.ctx.get(var).ok_or_else(|| format!("`{var}` is not in {}", outer.ctx))?;
            ensure(*a == inner.ty, || format!("`{var}` has type {a}, argument has type {}", inner.ty))?;
            let gamma = outer.ctx.without(var);
            ensure(gamma.name_set().is_disjoint(&inner.ctx.name_set()), || "contexts overlap".into())?;
            ensure(c.ctx.is_permutation_of(&gamma.concat(&inner.ctx)), || {
                format!("{} is not a permutation of {}, {}", c.ctx, gamma, inner.ctx)
            })?;
            ensure(c.lhs == outer.lhs.subst(var, &inner.lhs), || "left side is not the substitution".into())?;
            ensure(c.rhs == outer.rhs.subst(var, &inner.rhs), || "right side is not the substitution".into())?;
            ensure(c.ty == outer.ty, || "types differ".into())?;
            expect_label(tensor(&ps)?)
        }
    }
}

fn shuffle_of(c: &VEquation, blocks: &[Context]) -> Check {
    let refs: Vec<&Context> = blocks.iter().collect();
    ensure(is_shuffle(&c.ctx, &refs), || {
        let bs: Vec<String> = blocks.iter().map(|b| format!("[{b}]")).collect();
        format!("{} is not a shuffle of {}", c.ctx, bs.join("; "))
    })
}

fn check_axiom(th: &Theory, c: &VEquation, index: usize, subst: &[Term]) -> Check {
    let ax = th
        .axioms
        .get(index)
        .ok_or_else(|| format!("axiom index {index} out of range ({} axioms)", th.axioms.len()))?;
    ensure(subst.len() == ax.ctx.len(), || {
        format!("axiom {index} has {} variables, substitution gives {}", ax.ctx.len(), subst.len())
    })?;
    let mut seen: HashSet<String> = HashSet::new();
    let mut map = HashMap::new();
    for ((x, a), s) in ax.ctx.0.iter().zip(subst) {
        ensure(s.closed_at(0), || format!("substitution for `{x}` has a dangling index"))?;
        let fv = s.free_set();
        ensure(fv.is_disjoint(&seen), || format!("substitution for `{x}` shares variables"))?;
        seen.extend(fv.iter().cloned());
        let d = derive(th, &c.ctx.restrict(&fv), s).map_err(|e| format!("substitution for `{x}`: {e}"))?;
        ensure(d.ty == *a, || format!("substitution for `{x}` has type {}, expected {a}", d.ty))?;
        map.insert(x.clone(), s.clone());
    }
    ensure(seen == c.ctx.name_set(), || "substitution does not use exactly the context".into())?;
    ensure(c.lhs == ax.lhs.subst_many(&map) && c.rhs == ax.rhs.subst_many(&map), || {
        format!("sides are not the instance of axiom {index}")
    })?;
    ensure(c.ty == ax.ty, || "type differs from the axiom".into())?;
    ensure(c.label == ax.label, || format!("axiom {index} has label {}, node states {}", ax.label, c.label))
}

/// Names free in any of the terms or the context, for picking fresh ones.
fn taken_names(ctx: &Context, ts: &[&Term]) -> HashSet<String> {
    let mut out = ctx.name_set();
    for t in ts {
        t.all_names(&mut out);
    }
    out
}

fn fresh_in(base: &str, taken: &mut HashSet<String>) -> String {
    let n = fresh_name(base, |c| taken.contains(c));
    taken.insert(n.clone());
    n
}

/// `dis(x1) to *. ... dis(xn) to *. *`
pub fn dis_chain(ctx: &Context) -> Term {
    ctx.0
        .iter()
        .rev()
        .fold(Term::Star, |acc, (x, _)| Term::unit_to(Term::dis(Term::var(x)), acc))
}

/// Whether `l = r` is an instance of `eq` read left to right.
pub fn base_holds(eq: BaseEq, ctx: &Context, l: &Term, r: &Term) -> bool {
    match eq {
        BaseEq::PmBeta => match l {
            Term::PmTo(s, _, _, body) => match &**s {
                Term::Pair(a, b) => body.open(&[(**a).clone(), (**b).clone()]) == *r,
                _ => false,
            },
            _ => false,
        },
        BaseEq::PmEta => {
            let Term::PmTo(v, _, _, body) = l else { return false };
            let mut taken = taken_names(ctx, &[l, r]);
            let x = fresh_in("x", &mut taken);
            let y = fresh_in("y", &mut taken);
            let z = fresh_in("z", &mut taken);
            let opened = body.open(&[Term::var(&x), Term::var(&y)]);
            let pair = Term::pair(Term::var(&x), Term::var(&y));
            opened.positions().into_iter().any(|(p, _)| {
                if opened.at(&p) != Some(&pair) {
                    return false;
                }
                let u = opened.replace_at(&p, &Term::var(&z));
                let fv = u.free_set();
                !fv.contains(&x) && !fv.contains(&y) && u.subst(&z, v) == *r
            })
        }
        BaseEq::UnitBeta => matches!(l, Term::UnitTo(s, body) if **s == Term::Star && **body == *r),
        BaseEq::UnitEta => {
            let Term::UnitTo(v, w) = l else { return false };
            w.positions()
                .into_iter()
                .any(|(p, _)| w.at(&p) == Some(&Term::Star) && w.replace_at(&p, v) == *r)
        }
        BaseEq::LamBeta => match l {
            Term::App(f, w) => match &**f {
                Term::Lam(_, _, body) => body.open(&[(**w).clone()]) == *r,
                _ => false,
            },
            _ => false,
        },
        BaseEq::LamEta => match l {
            Term::Lam(_, _, body) => match &**body {
                Term::App(f, x) => **x == Term::Bound(0) && f.closed_at(0) && **f == *r,
                _ => false,
            },
            _ => false,
        },
        BaseEq::CcUnit => {
            let Term::UnitTo(v, body2) = r else { return false };
            l.positions().into_iter().any(|(p, _)| match l.at(&p) {
                Some(occ @ Term::UnitTo(v2, w)) => {
                    v2 == v && occ.closed_at(0) && l.replace_at(&p, w) == **body2
                }
                _ => false,
            })
        }
        BaseEq::CcPm => {
            let Term::PmTo(v, _, _, body2) = r else { return false };
            let mut taken = taken_names(ctx, &[l, r]);
            let x = fresh_in("x", &mut taken);
            let y = fresh_in("y", &mut taken);
            l.positions().into_iter().any(|(p, _)| match l.at(&p) {
                Some(occ @ Term::PmTo(v2, _, _, w)) if v2 == v && occ.closed_at(0) => {
                    let w = w.open(&[Term::var(&x), Term::var(&y)]);
                    l.replace_at(&p, &w).close(&[&x, &y]) == **body2
                }
                _ => false,
            })
        }
        BaseEq::DisExpand => matches!(l, Term::Dis(_)) && *r == dis_chain(ctx),
        BaseEq::DisUnit => match (l, r) {
            (Term::UnitTo(v, s), Term::UnitTo(dv, s2)) => {
                **s == Term::Star && **s2 == Term::Star && **dv == Term::dis((**v).clone())
            }
            _ => false,
        },
    }
}
