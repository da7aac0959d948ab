//! Interpretation of derivations in enriched autonomous categories.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::quantale::{QValue, QuantaleKind};
use crate::syntax::{fresh_name, Context, Term, Theory, Type};
use crate::typing::{derive, Derivation, Rule, TypeError};
use crate::veq::normalize::normal_form;
use crate::veq::VEquation;

pub mod finvcat;
pub mod meas;
pub mod model;
pub mod plan;
pub mod qchan;

pub use finvcat::{FinVCat, Space};
pub use meas::{Kernel, MeasL1, Support};
pub use model::{load_model, Model, ModelError};
pub use plan::{ctx_type, exch, join, sh, spl, Plan};
pub use qchan::{QChan, Stinespring};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SemError {
    #[error("{backend} has no {capability}")]
    Missing { backend: &'static str, capability: &'static str },
    #[error("ground type {0} is not interpreted")]
    UnmappedGround(String),
    #[error("operation {0} is not interpreted")]
    UnmappedOp(String),
    #[error("operation {op}: {msg}")]
    BadOp { op: String, msg: String },
    #[error("cannot compose {0}")]
    Compose(String),
    #[error("{0}")]
    Limit(String),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("quantale {found} does not match the backend's {expected}")]
    Quantale { expected: QuantaleKind, found: QuantaleKind },
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, SemError>;

/// A measured hom-distance.
#[derive(Clone, Debug, PartialEq)]
pub enum Distance {
    Exact(QValue),
    /// A real value in the lawvere quantale, from floating-point numerics.
    Approx(f64),
}

impl Distance {
    /// `q ≤ d` in the quantale order, allowing the distance to overshoot by `tol`.
    pub fn satisfies(&self, q: &QValue, tol: f64) -> bool {
        match self {
            Distance::Exact(d) => {
                if q.leq(d).unwrap_or(false) {
                    return true;
                }
                q.kind() == QuantaleKind::Lawvere && tol > 0.0 && d.to_f64() <= q.to_f64() + tol
            }
            Distance::Approx(d) => q.kind() == QuantaleKind::Lawvere && *d <= q.to_f64() + tol,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Distance::Exact(d) => d.to_f64(),
            Distance::Approx(d) => *d,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Exact(d) => write!(f, "{d}"),
            Distance::Approx(d) => write!(f, "{d:.9}"),
        }
    }
}

/// The operations an enriched autonomous category has to supply.
///
/// Every object has a finite basis, numbered in mixed radix for tensors
/// (`(i, j) ↦ i·|B| + j`), so the structural isomorphisms are basis
/// relabellings.
pub trait Backend: Sync {
    type Obj: Clone + fmt::Debug + PartialEq;
    type Mor: Clone + fmt::Debug;

    fn name(&self) -> &'static str;
    fn quantale(&self) -> QuantaleKind;
    /// Slack allowed on measured distances.
    fn tolerance(&self) -> f64 {
        0.0
    }

    fn unit(&self) -> Self::Obj;
    fn tensor_obj(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj;
    fn hom_obj(&self, _a: &Self::Obj, _b: &Self::Obj) -> Result<Self::Obj> {
        Err(SemError::Missing { backend: self.name(), capability: "internal hom" })
    }
    fn size(&self, a: &Self::Obj) -> usize;

    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;
    /// The morphism sending basis element `i` of `src` to `map[i]` of `dst`.
    fn relabel(&self, src: &Self::Obj, dst: &Self::Obj, map: &[usize]) -> Self::Mor;
    /// `g ∘ f`
    fn compose(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Self::Mor>;
    fn tensor(&self, f: &Self::Mor, g: &Self::Mor) -> Self::Mor;

    /// Right transpose of `f : A ⊗ B → C`.
    fn curry(&self, _f: &Self::Mor, _a: &Self::Obj, _b: &Self::Obj) -> Result<Self::Mor> {
        Err(SemError::Missing { backend: self.name(), capability: "internal hom" })
    }
    /// `(B ⊸ C) ⊗ B → C`
    fn app(&self, _b: &Self::Obj, _c: &Self::Obj) -> Result<Self::Mor> {
        Err(SemError::Missing { backend: self.name(), capability: "internal hom" })
    }
    /// `A → I`
    fn discard(&self, _a: &Self::Obj) -> Result<Self::Mor> {
        Err(SemError::Missing { backend: self.name(), capability: "terminal maps" })
    }

    fn distance(&self, f: &Self::Mor, g: &Self::Mor) -> Result<Distance>;
    fn describe(&self, f: &Self::Mor) -> String;

    fn id(&self, a: &Self::Obj) -> Self::Mor {
        let map: Vec<usize> = (0..self.size(a)).collect();
        self.relabel(a, a, &map)
    }

    fn sw(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Mor {
        let (na, nb) = (self.size(a), self.size(b));
        let map: Vec<usize> = (0..na * nb).map(|k| (k % nb) * na + k / nb).collect();
        self.relabel(&self.tensor_obj(a, b), &self.tensor_obj(b, a), &map)
    }
}

/// Ground types and operation symbols mapped into a backend.
#[derive(Clone, Debug)]
pub struct Interpretation<B: Backend> {
    pub backend: B,
    pub grounds: HashMap<String, B::Obj>,
    pub ops: HashMap<String, B::Mor>,
}

impl<B: Backend> Interpretation<B> {
    pub fn new(backend: B) -> Self {
        Interpretation { backend, grounds: HashMap::new(), ops: HashMap::new() }
    }

    pub fn interpret_type(&self, t: &Type) -> Result<B::Obj> {
        let b = &self.backend;
        Ok(match t {
            Type::Unit => b.unit(),
            Type::Ground(g) => self.grounds.get(g).cloned().ok_or_else(|| SemError::UnmappedGround(g.clone()))?,
            Type::Tensor(x, y) => b.tensor_obj(&self.interpret_type(x)?, &self.interpret_type(y)?),
            Type::Lolli(x, y) => b.hom_obj(&self.interpret_type(x)?, &self.interpret_type(y)?)?,
        })
    }

    pub fn interpret_ctx(&self, ctx: &Context) -> Result<B::Obj> {
        self.interpret_type(&ctx_type(ctx))
    }

    /// Checks that every symbol of `th` is mapped with the right sorts.
    pub fn validate(&self, th: &Theory) -> Result<()> {
        if th.quantale != self.backend.quantale() {
            return Err(SemError::Quantale { expected: self.backend.quantale(), found: th.quantale });
        }
        for g in &th.ground {
            if !self.grounds.contains_key(g) {
                return Err(SemError::UnmappedGround(g.clone()));
            }
        }
        for (name, sig) in &th.ops {
            let f = self.ops.get(name).ok_or_else(|| SemError::UnmappedOp(name.clone()))?;
            let dom = self.interpret_type(&sig.domain())?;
            let cod = self.interpret_type(&sig.result)?;
            if self.backend.dom(f) != dom || self.backend.cod(f) != cod {
                return Err(SemError::BadOp { op: name.clone(), msg: "domain or codomain does not match the signature".into() });
            }
        }
        Ok(())
    }

    pub fn plan(&self, p: &Plan) -> Result<B::Mor> {
        let b = &self.backend;
        let ty = |t: &Type| self.interpret_type(t);
        Ok(match p {
            Plan::Id(a) => b.id(&ty(a)?),
            // unitors and associators keep the mixed-radix index
            Plan::Lambda(_) | Plan::LambdaInv(_) | Plan::Rho(_) | Plan::RhoInv(_) | Plan::Alpha(..) | Plan::AlphaInv(..) => {
                let src = ty(&p.source())?;
                let dst = ty(&p.target())?;
                let map: Vec<usize> = (0..b.size(&src)).collect();
                b.relabel(&src, &dst, &map)
            }
            Plan::Sw(x, y) => b.sw(&ty(x)?, &ty(y)?),
            Plan::Tensor(x, y) => b.tensor(&self.plan(x)?, &self.plan(y)?),
            Plan::Seq(ps) => {
                let mut acc = self.plan(&ps[0])?;
                for q in &ps[1..] {
                    acc = b.compose(&acc, &self.plan(q)?)?;
                }
                acc
            }
        })
    }

    fn seq(&self, fs: Vec<B::Mor>) -> Result<B::Mor> {
        let mut it = fs.into_iter();
        let mut acc = it.next().expect("nonempty composite");
        for g in it {
            acc = self.backend.compose(&acc, &g)?;
        }
        Ok(acc)
    }

    /// `⟦d⟧ : ⟦Γ⟧ → ⟦A⟧`
    pub fn interpret(&self, d: &Derivation) -> Result<B::Mor> {
        let b = &self.backend;
        let blocks = d.blocks();
        let housekeeping = || -> Result<B::Mor> {
            self.plan(&Plan::seq(vec![sh(&d.ctx, &blocks), spl(&blocks)]))
        };
        let ms = d.premises.iter().map(|p| self.interpret(p)).collect::<Result<Vec<_>>>()?;
        match &d.rule {
            Rule::Hyp => Ok(b.id(&self.interpret_type(&d.ty)?)),
            Rule::UnitIntro => Ok(b.id(&b.unit())),
            Rule::Ax(f) => {
                let op = self.ops.get(f).ok_or_else(|| SemError::UnmappedOp(f.clone()))?;
                let args = match ms.len() {
                    0 => b.id(&b.unit()),
                    _ => ms[1..].iter().fold(ms[0].clone(), |acc, m| b.tensor(&acc, m)),
                };
                self.seq(vec![housekeeping()?, args, op.clone()])
            }
            Rule::TensorIntro => self.seq(vec![housekeeping()?, b.tensor(&ms[0], &ms[1])]),
            Rule::UnitElim => {
                let delta = self.interpret_ctx(&blocks[1])?;
                let lam = self.plan(&Plan::Lambda(ctx_type(&blocks[1])))?;
                self.seq(vec![housekeeping()?, b.tensor(&ms[0], &b.id(&delta)), lam, ms[1].clone()])
            }
            Rule::TensorElim => {
                let Type::Tensor(x, y) = &d.premises[0].ty else { unreachable!("typed pm scrutinee") };
                let delta_ty = ctx_type(&blocks[1]);
                let body_ctx = &d.premises[1].ctx;
                let n = body_ctx.len();
                let (xs, ys) = (Context(vec![body_ctx.0[n - 2].clone()]), Context(vec![body_ctx.0[n - 1].clone()]));
                let rearrange = Plan::seq(vec![
                    Plan::Sw(d.premises[0].ty.clone(), delta_ty.clone()),
                    Plan::Alpha(delta_ty, (**x).clone(), (**y).clone()),
                    join(&[blocks[1].clone(), xs, ys]),
                ]);
                let delta = self.interpret_ctx(&blocks[1])?;
                self.seq(vec![housekeeping()?, b.tensor(&ms[0], &b.id(&delta)), self.plan(&rearrange)?, ms[1].clone()])
            }
            Rule::LolliIntro => {
                let p = &d.premises[0];
                let xa = Context(vec![p.ctx.0[p.ctx.len() - 1].clone()]);
                let body = self.seq(vec![self.plan(&join(&[blocks[0].clone(), xa.clone()]))?, ms[0].clone()])?;
                b.curry(&body, &self.interpret_ctx(&blocks[0])?, &self.interpret_ctx(&xa)?)
            }
            Rule::LolliElim => {
                let Type::Lolli(x, y) = &d.premises[0].ty else { unreachable!("typed application") };
                let app = b.app(&self.interpret_type(x)?, &self.interpret_type(y)?)?;
                self.seq(vec![housekeeping()?, b.tensor(&ms[0], &ms[1]), app])
            }
            Rule::Discard => {
                let bang = b.discard(&self.interpret_type(&d.premises[0].ty)?)?;
                self.seq(vec![housekeeping()?, ms[0].clone(), bang])
            }
        }
    }

    pub fn interpret_term(&self, th: &Theory, ctx: &Context, t: &Term) -> Result<B::Mor> {
        self.interpret(&derive(th, ctx, t)?)
    }

    /// Measured distance between the two sides of `e`.
    pub fn measure(&self, th: &Theory, e: &VEquation) -> Result<Distance> {
        let (ctx, l, r) = first_order(th, e)?;
        let f = self.interpret_term(th, &ctx, &l)?;
        let g = self.interpret_term(th, &ctx, &r)?;
        self.backend.distance(&f, &g)
    }

    pub fn check_satisfaction(&self, th: &Theory, e: &VEquation, tol: f64) -> Result<Satisfaction> {
        let measured = self.measure(th, e)?;
        let ok = measured.satisfies(&e.label, tol);
        Ok(Satisfaction { measured, ok })
    }

    pub fn check_axioms(&self, th: &Theory, tol: f64) -> AxiomReport {
        let results = th
            .axioms
            .iter()
            .enumerate()
            .map(|(index, ax)| {
                let (measured, ok, error) = match self.check_satisfaction(th, ax, tol) {
                    Ok(s) => (Some(s.measured.to_string()), s.ok, None),
                    Err(e) => (None, false, Some(e.to_string())),
                };
                AxiomCheck { index, equation: ax.to_string(), label: ax.label.to_string(), measured, ok, error }
            })
            .collect();
        AxiomReport { results }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Satisfaction {
    pub measured: Distance,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomCheck {
    pub index: usize,
    pub equation: String,
    pub label: String,
    pub measured: Option<String>,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub results: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.results.iter().filter(|r| !r.ok)
    }
}

/// Normalizes both sides and uncurries function types, so an equation at
/// `A ⊸ B` is checked on its bodies applied to a fresh variable.
pub fn first_order(th: &Theory, e: &VEquation) -> Result<(Context, Term, Term)> {
    let mut ctx = e.ctx.clone();
    let mut l = normal_form(th, &derive(th, &ctx, &e.lhs)?)?;
    let mut r = normal_form(th, &derive(th, &ctx, &e.rhs)?)?;
    let mut ty = e.ty.clone();
    while let Type::Lolli(a, b) = ty {
        let mut taken = ctx.name_set();
        l.all_names(&mut taken);
        r.all_names(&mut taken);
        let x = fresh_name("u", |n| taken.contains(n));
        ctx = ctx.with(&x, (*a).clone());
        l = normal_form(th, &derive(th, &ctx, &Term::app(l, Term::var(&x)))?)?;
        r = normal_form(th, &derive(th, &ctx, &Term::app(r, Term::var(&x)))?)?;
        ty = *b;
    }
    Ok((ctx, l, r))
}
