//! Housekeeping morphisms as structural programs over object shapes.
//!
//! Shapes are types: a context is read as the left-nested tensor of its
//! types (a single variable is just its type, the empty context is `I`).

use crate::syntax::{Context, Type};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plan {
    Id(Type),
    /// `I ⊗ A → A`
    Lambda(Type),
    LambdaInv(Type),
    /// `A ⊗ I → A`
    Rho(Type),
    RhoInv(Type),
    /// `A ⊗ (B ⊗ C) → (A ⊗ B) ⊗ C`
    Alpha(Type, Type, Type),
    AlphaInv(Type, Type, Type),
    /// `A ⊗ B → B ⊗ A`
    Sw(Type, Type),
    Tensor(Box<Plan>, Box<Plan>),
    /// Applied first to last; never empty.
    Seq(Vec<Plan>),
}

pub fn ctx_type(ctx: &Context) -> Type {
    let mut it = ctx.0.iter().map(|(_, t)| t.clone());
    match it.next() {
        None => Type::Unit,
        Some(first) => it.fold(first, Type::tensor),
    }
}

fn t2(a: &Type, b: &Type) -> Type {
    Type::tensor(a.clone(), b.clone())
}

impl Plan {
    pub fn tensor(a: Plan, b: Plan) -> Plan {
        Plan::Tensor(Box::new(a), Box::new(b))
    }

    /// Sequential composite, dropping identities.
    pub fn seq(steps: Vec<Plan>) -> Plan {
        let src = steps.first().map(Plan::source);
        let mut out: Vec<Plan> = Vec::new();
        for s in steps {
            match s {
                Plan::Id(_) => {}
                Plan::Seq(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Plan::Id(src.expect("seq of nothing")),
            1 => out.pop().unwrap(),
            _ => Plan::Seq(out),
        }
    }

    pub fn source(&self) -> Type {
        match self {
            Plan::Id(a) | Plan::LambdaInv(a) | Plan::RhoInv(a) => a.clone(),
            Plan::Lambda(a) => t2(&Type::Unit, a),
            Plan::Rho(a) => t2(a, &Type::Unit),
            Plan::Alpha(a, b, c) => t2(a, &t2(b, c)),
            Plan::AlphaInv(a, b, c) => t2(&t2(a, b), c),
            Plan::Sw(a, b) => t2(a, b),
            Plan::Tensor(p, q) => t2(&p.source(), &q.source()),
            Plan::Seq(ps) => ps[0].source(),
        }
    }

    pub fn target(&self) -> Type {
        self.inverse().source()
    }

    pub fn inverse(&self) -> Plan {
        match self {
            Plan::Id(a) => Plan::Id(a.clone()),
            Plan::Lambda(a) => Plan::LambdaInv(a.clone()),
            Plan::LambdaInv(a) => Plan::Lambda(a.clone()),
            Plan::Rho(a) => Plan::RhoInv(a.clone()),
            Plan::RhoInv(a) => Plan::Rho(a.clone()),
            Plan::Alpha(a, b, c) => Plan::AlphaInv(a.clone(), b.clone(), c.clone()),
            Plan::AlphaInv(a, b, c) => Plan::Alpha(a.clone(), b.clone(), c.clone()),
            Plan::Sw(a, b) => Plan::Sw(b.clone(), a.clone()),
            Plan::Tensor(p, q) => Plan::tensor(p.inverse(), q.inverse()),
            Plan::Seq(ps) => Plan::Seq(ps.iter().rev().map(Plan::inverse).collect()),
        }
    }

    /// Runs the plan on a tree of labelled leaves; `None` on a shape error.
    pub fn act(&self, t: Leaves) -> Option<Leaves> {
        use Leaves::*;
        Some(match (self, t) {
            (Plan::Id(_), t) => t,
            (Plan::Lambda(_), Pair(u, a)) if *u == Unit => *a,
            (Plan::LambdaInv(_), a) => Pair(Box::new(Unit), Box::new(a)),
            (Plan::Rho(_), Pair(a, u)) if *u == Unit => *a,
            (Plan::RhoInv(_), a) => Pair(Box::new(a), Box::new(Unit)),
            (Plan::Alpha(..), Pair(a, bc)) => match *bc {
                Pair(b, c) => Pair(Box::new(Pair(a, b)), c),
                _ => return None,
            },
            (Plan::AlphaInv(..), Pair(ab, c)) => match *ab {
                Pair(a, b) => Pair(a, Box::new(Pair(b, c))),
                _ => return None,
            },
            (Plan::Sw(..), Pair(a, b)) => Pair(b, a),
            (Plan::Tensor(p, q), Pair(a, b)) => Pair(Box::new(p.act(*a)?), Box::new(q.act(*b)?)),
            (Plan::Seq(ps), t) => {
                let mut t = t;
                for p in ps {
                    t = p.act(t)?;
                }
                t
            }
            _ => return None,
        })
    }
}

/// Shape trees for checking plans symbolically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Leaves {
    Unit,
    Leaf(String),
    Pair(Box<Leaves>, Box<Leaves>),
}

impl Leaves {
    /// The leaves of a context's interpretation, one per variable.
    pub fn of_ctx(ctx: &Context) -> Leaves {
        let mut it = ctx.0.iter().map(|(n, _)| Leaves::Leaf(n.clone()));
        match it.next() {
            None => Leaves::Unit,
            Some(first) => it.fold(first, |a, b| Leaves::Pair(Box::new(a), Box::new(b))),
        }
    }

    pub fn flatten(&self, out: &mut Vec<String>) {
        match self {
            Leaves::Unit => {}
            Leaves::Leaf(n) => out.push(n.clone()),
            Leaves::Pair(a, b) => {
                a.flatten(out);
                b.flatten(out);
            }
        }
    }
}

fn spl2(g: &Context, d: &Context) -> Plan {
    if g.is_empty() {
        return Plan::LambdaInv(ctx_type(d));
    }
    if d.is_empty() {
        return Plan::RhoInv(ctx_type(g));
    }
    if d.len() == 1 {
        return Plan::Id(ctx_type(&g.concat(d)));
    }
    let (init, last) = d.0.split_at(d.len() - 1);
    let init = Context(init.to_vec());
    let a = last[0].1.clone();
    Plan::seq(vec![
        Plan::tensor(spl2(g, &init), Plan::Id(a.clone())),
        Plan::AlphaInv(ctx_type(g), ctx_type(&init), a),
    ])
}

/// `⟦Γ1,…,Γn⟧ → ⟦Γ1⟧ ⊗ … ⊗ ⟦Γn⟧`
pub fn spl(blocks: &[Context]) -> Plan {
    match blocks.len() {
        0 => Plan::Id(Type::Unit),
        1 => Plan::Id(ctx_type(&blocks[0])),
        2 => spl2(&blocks[0], &blocks[1]),
        n => {
            let init = blocks[..n - 1].iter().fold(Context::empty(), |a, b| a.concat(b));
            Plan::seq(vec![
                spl2(&init, &blocks[n - 1]),
                Plan::tensor(spl(&blocks[..n - 1]), Plan::Id(ctx_type(&blocks[n - 1]))),
            ])
        }
    }
}

pub fn join(blocks: &[Context]) -> Plan {
    spl(blocks).inverse()
}

/// Swaps the variables at positions `i` and `i + 1`.
pub fn exch(ctx: &Context, i: usize) -> Plan {
    let g = Context(ctx.0[..i].to_vec());
    let xy = Context(ctx.0[i..i + 2].to_vec());
    let d = Context(ctx.0[i + 2..].to_vec());
    let yx = Context(vec![xy.0[1].clone(), xy.0[0].clone()]);
    let mid = Plan::tensor(
        Plan::tensor(Plan::Id(ctx_type(&g)), Plan::Sw(xy.0[0].1.clone(), xy.0[1].1.clone())),
        Plan::Id(ctx_type(&d)),
    );
    Plan::seq(vec![spl(&[g.clone(), xy, d.clone()]), mid, join(&[g, yx, d])])
}

/// Reorders `e` into the concatenation of `blocks` by adjacent exchanges.
pub fn sh(e: &Context, blocks: &[Context]) -> Plan {
    let target: Vec<&str> = blocks.iter().flat_map(|b| b.names()).collect();
    let rank = |n: &str| target.iter().position(|t| *t == n).expect("shuffle of the blocks");
    let mut cur = e.clone();
    let mut steps = vec![Plan::Id(ctx_type(e))];
    loop {
        let swap = (0..cur.len().saturating_sub(1)).find(|&i| rank(&cur.0[i].0) > rank(&cur.0[i + 1].0));
        let Some(i) = swap else { break };
        steps.push(exch(&cur, i));
        cur.0.swap(i, i + 1);
    }
    Plan::seq(steps)
}
