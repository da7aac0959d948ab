//! Bounded search for the best derivable label between two terms.
//!
//! Both sides are normalized first. The normal forms are then compared by
//! reflexivity, by axiom instances (with differing metavariable instances
//! compared recursively and plugged in by substitution), by congruence along
//! matching head constructors, and by a limited number of transitivity
//! pivots through axiom instances. Every answer comes with a proof tree.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::normalize::{normalize, DEFAULT_STEPS};
use super::proof::{ProofRule, ProofTree};
use super::VEquation;
use crate::quantale::QValue;
use crate::syntax::{fresh_name, Context, Term, Theory, Type};
use crate::typing::{derive, TypeError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum nesting of recursive comparisons.
    pub depth: usize,
    /// Maximum number of transitivity pivots along one branch.
    pub pivots: usize,
    /// Normalization step limit per side.
    pub steps: usize,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { depth: 64, pivots: 1, steps: DEFAULT_STEPS }
    }
}

impl Budget {
    pub fn with_depth(depth: usize) -> Budget {
        Budget { depth, ..Budget::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JoinMode {
    /// Several candidate proofs may be combined with a join node.
    Full,
    /// Only the empty join is used; the best single candidate wins.
    BottomOnly,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("sides have different types: {left} and {right}")]
    SideMismatch { left: Type, right: Type },
}

#[derive(Clone, Debug)]
pub struct Bound {
    pub label: QValue,
    pub proof: ProofTree,
}

pub fn derive_bound(th: &Theory, ctx: &Context, v: &Term, w: &Term, budget: Budget) -> Result<Bound, SearchError> {
    derive_bound_with(th, ctx, v, w, budget, JoinMode::Full)
}

pub fn derive_bound_with(
    th: &Theory,
    ctx: &Context,
    v: &Term,
    w: &Term,
    budget: Budget,
    mode: JoinMode,
) -> Result<Bound, SearchError> {
    let dv = derive(th, ctx, v)?;
    let dw = derive(th, ctx, w)?;
    if dv.ty != dw.ty {
        return Err(SearchError::SideMismatch { left: dv.ty, right: dw.ty });
    }
    let nv = normalize(th, &dv, budget.steps)?;
    let nw = normalize(th, &dw, budget.steps)?;
    let mut s = Searcher { th, mode, memo: HashMap::new() };
    let core = s.compare(ctx, &nv.term, &nw.term, &dv.ty, budget.depth, budget.pivots);
    let proof = match core {
        Some(p) => {
            let back = nw.proof.reverse_top().expect("normalization proofs are reversible");
            ProofTree::trans(ProofTree::trans(nv.proof, p), back)
        }
        None => ProofTree::new(
            ProofRule::Join,
            vec![],
            VEquation::new(ctx.clone(), v.clone(), w.clone(), dv.ty.clone(), th.quantale.bottom()),
        ),
    };
    Ok(Bound { label: proof.label().clone(), proof })
}

type Key = (Context, Term, Term, usize, usize);

struct Searcher<'a> {
    th: &'a Theory,
    mode: JoinMode,
    memo: HashMap<Key, Option<ProofTree>>,
}

impl Searcher<'_> {
    fn compare(&mut self, ctx: &Context, a: &Term, b: &Term, ty: &Type, depth: usize, pivots: usize) -> Option<ProofTree> {
        let key = (ctx.clone(), a.clone(), b.clone(), depth, pivots);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let out = self.compare_uncached(ctx, a, b, ty, depth, pivots);
        self.memo.insert(key, out.clone());
        out
    }

    fn compare_uncached(
        &mut self,
        ctx: &Context,
        a: &Term,
        b: &Term,
        ty: &Type,
        depth: usize,
        pivots: usize,
    ) -> Option<ProofTree> {
        if a == b {
            return Some(ProofTree::refl(self.th, ctx.clone(), a.clone(), ty.clone()));
        }
        let mut cands = Vec::new();
        for (index, reversed) in self.orientations() {
            if let Some(p) = self.axiom_instance(ctx, a, b, index, reversed, depth, pivots) {
                cands.push(p);
            }
        }
        if depth > 0 {
            if let Some(p) = self.decompose(ctx, a, b, ty, depth - 1, pivots) {
                cands.push(p);
            }
        }
        if depth > 0 && pivots > 0 {
            for (index, reversed) in self.orientations() {
                // a -> u, then u ~ b
                if let Some((step, u)) = self.rewrite_root(ctx, a, index, reversed) {
                    if u != *a {
                        if let Some(rest) = self.compare(ctx, &u, b, ty, depth - 1, pivots - 1) {
                            cands.push(ProofTree::trans(step, rest));
                        }
                    }
                }
                // a ~ u, then u -> b
                if let Some((step, u)) = self.rewrite_root_into(ctx, b, index, reversed) {
                    if u != *b {
                        if let Some(first) = self.compare(ctx, a, &u, ty, depth - 1, pivots - 1) {
                            cands.push(ProofTree::trans(first, step));
                        }
                    }
                }
            }
        }
        self.choose(ctx, a, b, ty, cands)
    }

    /// Axiom indices with the orientations available in this theory.
    fn orientations(&self) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for i in 0..self.th.axioms.len() {
            out.push((i, false));
            if self.th.symmetric {
                out.push((i, true));
            }
        }
        out
    }

    fn sides(&self, index: usize, reversed: bool) -> (&Term, &Term) {
        let ax = &self.th.axioms[index];
        if reversed {
            (&ax.rhs, &ax.lhs)
        } else {
            (&ax.lhs, &ax.rhs)
        }
    }

    /// Proves `l[σ'] = r[σ']` from the axiom, flipping with symmetry when
    /// the axiom is used right to left.
    fn axiom_node(&self, ctx: &Context, index: usize, reversed: bool, subst: Vec<Term>) -> ProofTree {
        let ax = &self.th.axioms[index];
        let map: HashMap<String, Term> =
            ax.ctx.0.iter().map(|(x, _)| x.clone()).zip(subst.iter().cloned()).collect();
        let eq = VEquation::new(
            ctx.clone(),
            ax.lhs.subst_many(&map),
            ax.rhs.subst_many(&map),
            ax.ty.clone(),
            ax.label.clone(),
        );
        let node = ProofTree::new(ProofRule::Axiom { index, subst }, vec![], eq);
        if reversed {
            let mut c = node.conclusion.clone();
            std::mem::swap(&mut c.lhs, &mut c.rhs);
            ProofTree::new(ProofRule::Sym, vec![node], c)
        } else {
            node
        }
    }

    fn axiom_instance(
        &mut self,
        ctx: &Context,
        a: &Term,
        b: &Term,
        index: usize,
        reversed: bool,
        depth: usize,
        pivots: usize,
    ) -> Option<ProofTree> {
        let (pl, pr) = self.sides(index, reversed);
        if matches!(pl, Term::Free(_)) && matches!(pr, Term::Free(_)) {
            return None;
        }
        let ax = self.th.axioms[index].clone();
        let vars: HashSet<String> = ax.ctx.name_set();
        let s1 = match_pattern(pl, a, &vars)?;
        let s2 = match_pattern(pr, b, &vars)?;
        let mut taken = ctx.name_set();
        a.all_names(&mut taken);
        b.all_names(&mut taken);
        let mut subst = Vec::new();
        let mut holes = Vec::new();
        for (x, ty) in &ax.ctx.0 {
            let (u, v) = (s1.get(x)?, s2.get(x)?);
            if u == v {
                subst.push(u.clone());
                continue;
            }
            if depth == 0 || u.free_set() != v.free_set() {
                return None;
            }
            let sub_ctx = ctx.restrict(&u.free_set());
            let p = self.compare(&sub_ctx, u, v, ty, depth - 1, pivots)?;
            if p.label().is_bottom() {
                return None;
            }
            let z = fresh_name(x, |n| taken.contains(n));
            taken.insert(z.clone());
            subst.push(Term::var(&z));
            holes.push((z, ty.clone(), sub_ctx, p));
        }
        let mut base_ctx = ctx.clone();
        for (_, _, sub_ctx, _) in &holes {
            for n in sub_ctx.names() {
                base_ctx = base_ctx.without(n);
            }
        }
        for (z, ty, _, _) in &holes {
            base_ctx = base_ctx.with(z, ty.clone());
        }
        let mut node = self.axiom_node(&base_ctx, index, reversed, subst);
        for (z, _, sub_ctx, p) in holes {
            let c = &node.conclusion;
            let label = c.label.tensor(p.label()).expect("same quantale");
            let eq = VEquation::new(
                c.ctx.without(&z).concat(&sub_ctx),
                c.lhs.subst(&z, &p.conclusion.lhs),
                c.rhs.subst(&z, &p.conclusion.rhs),
                c.ty.clone(),
                label,
            );
            node = ProofTree::new(ProofRule::CongSubst { var: z }, vec![node, p], eq);
        }
        Some(permute_to(node, ctx))
    }

    /// One axiom step from `t` at the root: proves `t = u`.
    fn rewrite_root(&self, ctx: &Context, t: &Term, index: usize, reversed: bool) -> Option<(ProofTree, Term)> {
        let (pl, _) = self.sides(index, reversed);
        if matches!(pl, Term::Free(_)) {
            return None;
        }
        let ax = &self.th.axioms[index];
        let s = match_pattern(pl, t, &ax.ctx.name_set())?;
        let subst: Vec<Term> = ax.ctx.0.iter().map(|(x, _)| s.get(x).cloned()).collect::<Option<_>>()?;
        let node = self.axiom_node(ctx, index, reversed, subst);
        let u = node.conclusion.rhs.clone();
        Some((node, u))
    }

    /// One axiom step into `t` at the root: proves `u = t`.
    fn rewrite_root_into(&self, ctx: &Context, t: &Term, index: usize, reversed: bool) -> Option<(ProofTree, Term)> {
        let (_, pr) = self.sides(index, reversed);
        if matches!(pr, Term::Free(_)) {
            return None;
        }
        let ax = &self.th.axioms[index];
        let s = match_pattern(pr, t, &ax.ctx.name_set())?;
        let subst: Vec<Term> = ax.ctx.0.iter().map(|(x, _)| s.get(x).cloned()).collect::<Option<_>>()?;
        let node = self.axiom_node(ctx, index, reversed, subst);
        let u = node.conclusion.lhs.clone();
        Some((node, u))
    }

    /// Congruence along equal head constructors.
    fn decompose(&mut self, ctx: &Context, a: &Term, b: &Term, ty: &Type, depth: usize, pivots: usize) -> Option<ProofTree> {
        if !same_head(a, b) {
            return None;
        }
        let th = self.th;
        let sub = |t: &Term| ctx.restrict(&t.free_set());
        let type_of = |c: &Context, t: &Term| derive(th, c, t).ok().map(|d| d.ty);
        let mut premises = Vec::new();
        let mut pair = |s: &mut Self, x: &Term, y: &Term, c: Context, t: &Type| -> Option<()> {
            if x.free_set() != y.free_set() {
                return None;
            }
            let p = s.compare(&c, x, y, t, depth, pivots)?;
            if p.label().is_bottom() {
                return None;
            }
            premises.push(p);
            Some(())
        };
        let rule = match (a, b) {
            (Term::Op(f, xs), Term::Op(_, ys)) => {
                let sig = th.ops.get(f)?.clone();
                for ((x, y), t) in xs.iter().zip(ys).zip(&sig.args) {
                    pair(self, x, y, sub(x), t)?;
                }
                ProofRule::CongOp
            }
            (Term::Pair(x1, x2), Term::Pair(y1, y2)) => {
                let Type::Tensor(t1, t2) = ty else { return None };
                pair(self, x1, y1, sub(x1), t1)?;
                pair(self, x2, y2, sub(x2), t2)?;
                ProofRule::CongTensor
            }
            (Term::UnitTo(x1, x2), Term::UnitTo(y1, y2)) => {
                pair(self, x1, y1, sub(x1), &Type::Unit)?;
                pair(self, x2, y2, sub(x2), ty)?;
                ProofRule::CongTo
            }
            (Term::App(x1, x2), Term::App(y1, y2)) => {
                let ta = type_of(&sub(x2), x2)?;
                if type_of(&sub(y2), y2)? != ta {
                    return None;
                }
                pair(self, x1, y1, sub(x1), &Type::lolli(ta.clone(), ty.clone()))?;
                pair(self, x2, y2, sub(x2), &ta)?;
                ProofRule::CongApp
            }
            (Term::Dis(x), Term::Dis(y)) => {
                let tx = type_of(&sub(x), x)?;
                if type_of(&sub(y), y)? != tx {
                    return None;
                }
                pair(self, x, y, sub(x), &tx)?;
                ProofRule::CongDis
            }
            (Term::PmTo(s1, hx, hy, b1), Term::PmTo(s2, _, _, b2)) => {
                let ts = type_of(&sub(s1), s1)?;
                if type_of(&sub(s2), s2)? != ts {
                    return None;
                }
                let Type::Tensor(ta, tb) = &ts else { return None };
                pair(self, s1, s2, sub(s1), &ts)?;
                let mut taken = ctx.name_set();
                a.all_names(&mut taken);
                b.all_names(&mut taken);
                let x = fresh_name(&hx.0, |n| taken.contains(n));
                taken.insert(x.clone());
                let y = fresh_name(&hy.0, |n| taken.contains(n));
                let o1 = b1.open(&[Term::var(&x), Term::var(&y)]);
                let o2 = b2.open(&[Term::var(&x), Term::var(&y)]);
                let c = ctx.restrict(&b1.free_set()).with(&x, (**ta).clone()).with(&y, (**tb).clone());
                pair(self, &o1, &o2, c, ty)?;
                ProofRule::CongPm
            }
            (Term::Lam(hx, ta, b1), Term::Lam(_, _, b2)) => {
                let Type::Lolli(_, tb) = ty else { return None };
                let mut taken = ctx.name_set();
                a.all_names(&mut taken);
                b.all_names(&mut taken);
                let x = fresh_name(&hx.0, |n| taken.contains(n));
                let o1 = b1.open(&[Term::var(&x)]);
                let o2 = b2.open(&[Term::var(&x)]);
                pair(self, &o1, &o2, ctx.with(&x, ta.clone()), tb)?;
                ProofRule::CongLam
            }
            _ => return None,
        };
        let label = th
            .quantale
            .tensor_all(premises.iter().map(|p| p.label()))
            .expect("same quantale");
        let eq = VEquation::new(ctx.clone(), a.clone(), b.clone(), ty.clone(), label);
        Some(ProofTree::new(rule, premises, eq))
    }

    fn choose(&self, ctx: &Context, a: &Term, b: &Term, ty: &Type, cands: Vec<ProofTree>) -> Option<ProofTree> {
        let cands: Vec<ProofTree> = cands.into_iter().filter(|p| !p.label().is_bottom()).collect();
        if cands.is_empty() {
            return None;
        }
        let best = self
            .th
            .quantale
            .join(cands.iter().map(|p| p.label()))
            .expect("same quantale");
        let pick = |ps: Vec<&ProofTree>| {
            ps.into_iter()
                .min_by(|x, y| x.rule_sequence().cmp(&y.rule_sequence()).then(x.size().cmp(&y.size())))
                .cloned()
        };
        let exact: Vec<&ProofTree> = cands.iter().filter(|p| *p.label() == best).collect();
        if !exact.is_empty() {
            return pick(exact);
        }
        match self.mode {
            JoinMode::Full => {
                let eq = VEquation::new(ctx.clone(), a.clone(), b.clone(), ty.clone(), best);
                Some(ProofTree::new(ProofRule::Join, cands, eq))
            }
            JoinMode::BottomOnly => {
                let maximal: Vec<&ProofTree> = cands
                    .iter()
                    .filter(|p| {
                        !cands.iter().any(|q| {
                            q.label() != p.label() && p.label().leq(q.label()).unwrap_or(false)
                        })
                    })
                    .collect();
                pick(maximal)
            }
        }
    }
}

/// Wraps `p` in a permutation node when its context order differs.
fn permute_to(p: ProofTree, ctx: &Context) -> ProofTree {
    if p.conclusion.ctx == *ctx {
        return p;
    }
    let mut c = p.conclusion.clone();
    c.ctx = ctx.clone();
    ProofTree::new(ProofRule::Perm, vec![p], c)
}

fn same_head(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Op(f, xs), Term::Op(g, ys)) => f == g && xs.len() == ys.len(),
        (Term::Lam(_, x, _), Term::Lam(_, y, _)) => x == y,
        (Term::Pair(..), Term::Pair(..))
        | (Term::UnitTo(..), Term::UnitTo(..))
        | (Term::PmTo(..), Term::PmTo(..))
        | (Term::App(..), Term::App(..))
        | (Term::Dis(..), Term::Dis(..)) => true,
        _ => false,
    }
}

/// First-order matching of an axiom side against a term. Metavariables may
/// only capture locally closed subterms.
pub fn match_pattern(pat: &Term, t: &Term, vars: &HashSet<String>) -> Option<HashMap<String, Term>> {
    let mut s = HashMap::new();
    if go(pat, t, vars, &mut s) {
        Some(s)
    } else {
        None
    }
}

fn go(pat: &Term, t: &Term, vars: &HashSet<String>, s: &mut HashMap<String, Term>) -> bool {
    match pat {
        Term::Free(x) if vars.contains(x) => {
            if !t.closed_at(0) {
                return false;
            }
            match s.get(x) {
                Some(prev) => prev == t,
                None => {
                    s.insert(x.clone(), t.clone());
                    true
                }
            }
        }
        Term::Free(_) | Term::Bound(_) | Term::Star => pat == t,
        _ => {
            if !same_head(pat, t) {
                return false;
            }
            let pc = pat.children();
            let tc = t.children();
            pc.len() == tc.len() && pc.iter().zip(&tc).all(|((p, _), (u, _))| go(p, u, vars, s))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_term, parse_theory};
    use crate::veq::proof::check_proof;

    const WAITS: &str = "\
quantale: lawvere
types: X
ops:
  wait0 : X -> X
  wait1 : X -> X
  wait2 : X -> X
  wait3 : X -> X
axioms:
  x:X |- wait0(x) =[0] x : X
  x:X |- wait1(wait1(x)) =[0] wait2(x) : X
  x:X |- wait1(wait2(x)) =[0] wait3(x) : X
  x:X |- wait2(wait1(x)) =[0] wait3(x) : X
  x:X |- wait1(x) =[1] wait2(x) : X
  x:X |- wait1(x) =[2] wait3(x) : X
  x:X |- wait2(x) =[1] wait3(x) : X
flags: symmetric
";

    fn bound(th: &Theory, ctx: &str, a: &str, b: &str, budget: Budget) -> Bound {
        let ctx = parse_context(ctx).unwrap();
        let r = derive_bound(th, &ctx, &parse_term(a).unwrap(), &parse_term(b).unwrap(), budget).unwrap();
        let c = check_proof(th, &r.proof).unwrap();
        assert_eq!(c.label, r.label);
        r
    }

    #[test]
    fn direct_and_nested_instances() {
        let th = parse_theory(WAITS).unwrap();
        let b = Budget::default();
        assert_eq!(bound(&th, "z:X", "wait1(z)", "wait3(z)", b).label.to_string(), "2");
        assert_eq!(bound(&th, "z:X", "wait3(z)", "wait1(z)", b).label.to_string(), "2");
        assert_eq!(bound(&th, "z:X", "wait1(wait1(z))", "wait2(wait2(z))", b).label.to_string(), "2");
        assert_eq!(bound(&th, "z:X", "wait1(z)", "wait1(z)", b).label.to_string(), "0");
    }

    #[test]
    fn pivots_find_shortcuts() {
        let th = parse_theory(WAITS).unwrap();
        let none = Budget { pivots: 0, ..Budget::default() };
        let one = Budget::default();
        let a = "wait1(wait2(z))";
        let b = "wait2(wait1(z))";
        assert_eq!(bound(&th, "z:X", a, b, none).label.to_string(), "2");
        assert_eq!(bound(&th, "z:X", a, b, one).label.to_string(), "0");
    }

    #[test]
    fn unrelated_terms_get_bottom() {
        let th = parse_theory(WAITS).unwrap();
        let r = bound(&th, "z:X, y:X", "wait1(z) * y", "y * wait1(z)", Budget::default());
        assert!(r.label.is_bottom());
    }

    #[test]
    fn higher_order_terms_normalize_first() {
        let th = parse_theory(WAITS).unwrap();
        let a = "(\\f:X ->o X. \\g:X ->o X. g (f z)) (\\x:X. wait1(x))";
        let b = "(\\f:X ->o X. \\g:X ->o X. g (f z)) (\\x:X. wait1(wait1(x)))";
        let r = bound(&th, "z:X", a, b, Budget::default());
        assert_eq!(r.label.to_string(), "1");
    }

    #[test]
    fn budget_is_monotone() {
        let th = parse_theory(WAITS).unwrap();
        let mut prev: Option<QValue> = None;
        for depth in 0..5 {
            let r = bound(&th, "z:X", "wait1(wait1(wait2(z)))", "wait2(wait2(wait1(z)))", Budget::with_depth(depth));
            if let Some(p) = prev {
                assert!(p.leq(&r.label).unwrap());
            }
            prev = Some(r.label);
        }
        assert_eq!(prev.unwrap().to_string(), "1");
    }
}
