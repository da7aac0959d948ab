//! Builtin case studies: theories, their models, and probe equations whose
//! derived bounds are replayed and checked against the model.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num::{BigRational, One, Signed};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::quantale::{QValue, QuantaleKind};
use crate::quantum::{hadamard, phase, ry, shift};
use crate::semantics::meas::Column;
use crate::semantics::{AxiomReport, Backend, Distance, FinVCat, Interpretation, MeasL1, Model, QChan, Space, Stinespring, Support};
use crate::syntax::{parse_context, parse_term_with, Context, Term, Theory, Type};
use crate::veq::json::proof_to_json;
use crate::veq::proof::check_proof;
use crate::veq::search::{derive_bound, Budget};
use crate::veq::VEquation;

pub const NAMES: [&str; 5] = ["wait-metric", "wait-ordered", "bernoulli", "qwalk", "affine-demo"];

/// Largest wait index of the metric wait theory.
pub const WAIT_MAX: usize = 12;
/// Top of the truncated chain of the metric wait model.
pub const WAIT_TRUNC: usize = 1024;
/// Top of the truncated chain of the ordered wait model.
pub const ORDERED_TRUNC: usize = 6;
pub const QWALK_POS: usize = 4;
pub const QWALK_DELTA: f64 = 0.07;

#[derive(Debug, Error)]
pub enum CaseError {
    #[error("unknown case study `{0}` (expected one of wait-metric, wait-ordered, bernoulli, qwalk, affine-demo)")]
    Unknown(String),
    #[error("seq_term needs n >= 1")]
    EmptySeq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    /// The measured distance equals the derived label.
    Exact,
    /// The measured distance is within the derived label, up to tolerance.
    LeqWithTol,
}

/// An equation to derive; its label is the expected bound.
#[derive(Clone, Debug)]
pub struct Probe {
    pub name: String,
    pub equation: VEquation,
    pub mode: CheckMode,
}

pub struct CaseStudy {
    pub name: String,
    pub theory: Theory,
    pub model: Model,
    pub probes: Vec<Probe>,
}

pub fn builtin(name: &str) -> Result<CaseStudy, CaseError> {
    Ok(match name {
        "wait-metric" => wait_metric(),
        "wait-ordered" => wait_ordered(),
        "bernoulli" => bernoulli(),
        "qwalk" => qwalk(),
        "affine-demo" => affine_demo(),
        other => return Err(CaseError::Unknown(other.to_string())),
    })
}

/// `\f1:A ->o A. ... \fn:A ->o A. \x:A. f1 (f2 (... (fn x)))`
pub fn seq_term(n: usize, ty: &Type) -> Result<Term, CaseError> {
    if n == 0 {
        return Err(CaseError::EmptySeq);
    }
    let names: Vec<String> = (1..=n).map(|i| format!("f{i}")).collect();
    let mut body = Term::var("x");
    for f in names.iter().rev() {
        body = Term::app(Term::var(f), body);
    }
    let mut t = Term::lam("x", ty.clone(), body);
    let fty = Type::lolli(ty.clone(), ty.clone());
    for f in names.iter().rev() {
        t = Term::lam(f, fty.clone(), t);
    }
    Ok(t)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn lawvere(r: BigRational) -> QValue {
    QValue::lawvere(r).expect("nonnegative label")
}

fn term(th: &Theory, text: &str) -> Term {
    parse_term_with(text, &th.defs).unwrap_or_else(|e| panic!("builtin term `{text}`: {e}"))
}

fn axiom(th: &mut Theory, ctx: &str, l: &str, r: &str, ty: Type, label: QValue) {
    let eq = VEquation::new(parse_context(ctx).expect("builtin context"), term(th, l), term(th, r), ty, label);
    th.add_axiom(eq).unwrap_or_else(|e| panic!("builtin axiom: {e}"));
}

fn probe(th: &Theory, name: &str, ctx: &str, l: &str, r: &str, ty: Type, label: QValue, mode: CheckMode) -> Probe {
    let equation = VEquation::new(parse_context(ctx).expect("builtin context"), term(th, l), term(th, r), ty, label);
    th.check_equation(&equation).unwrap_or_else(|e| panic!("probe {name}: {e}"));
    Probe { name: name.to_string(), equation, mode }
}

fn seq_defs(th: &mut Theory, ty: &Type, upto: usize) {
    for n in 1..=upto {
        th.defs.insert(format!("seq{n}"), seq_term(n, ty).expect("n >= 1"));
    }
}

fn applied(head: &str, arg: &str, n: usize, last: &str) -> String {
    let mut s = head.to_string();
    for _ in 0..n {
        s.push(' ');
        s.push_str(arg);
    }
    s.push(' ');
    s.push_str(last);
    s
}

fn wait_signature(kind: QuantaleKind, max: usize) -> Theory {
    let mut th = Theory::new(kind);
    th.add_ground("X");
    let x = Type::ground("X");
    for n in 0..=max {
        th.add_op(&format!("wait{n}"), vec![x.clone()], x.clone());
    }
    th.add_op("origin", vec![Type::Unit], x.clone());
    th.defs.insert("z'".into(), Term::op("origin", vec![Term::Star]));
    for n in 1..=3 {
        th.defs.insert(format!("w{n}"), Term::lam("x", x.clone(), Term::op(&format!("wait{n}"), vec![Term::var("x")])));
    }
    seq_defs(&mut th, &x, 5);
    th
}

fn wait_space(kind: QuantaleKind, top: usize) -> Space {
    Space::tensor(&Space::chain(top + 1), &Space::discrete(kind, vec!["a".into()]))
}

fn wait_model(th: &Theory, backend: FinVCat, top: usize) -> Interpretation<FinVCat> {
    let x = wait_space(backend.quantale(), top);
    let mut i = Interpretation::new(backend);
    i.grounds.insert("X".into(), x.clone());
    for name in th.ops.keys() {
        let f = match name.strip_prefix("wait") {
            Some(n) => {
                let n: usize = n.parse().expect("wait index");
                i.backend.map(&x, &x, |k| (k + n).min(top))
            }
            None => i.backend.point(&x, 0),
        };
        i.ops.insert(name.clone(), f);
    }
    i.validate(th).expect("wait model matches its theory");
    i
}

fn wait_metric() -> CaseStudy {
    let k = QuantaleKind::Lawvere;
    let mut th = wait_signature(k, WAIT_MAX);
    let x = Type::ground("X");
    axiom(&mut th, "x:X", "wait0(x)", "x", x.clone(), k.top());
    for n in 1..WAIT_MAX {
        for m in 1..=WAIT_MAX - n {
            axiom(&mut th, "x:X", &format!("wait{n}(wait{m}(x))"), &format!("wait{}(x)", n + m), x.clone(), k.top());
        }
    }
    for n in 0..=WAIT_MAX {
        for m in 0..=WAIT_MAX {
            if n != m {
                let d = lawvere(BigRational::from_integer((n.abs_diff(m) as i64).into()));
                axiom(&mut th, "x:X", &format!("wait{n}(x)"), &format!("wait{m}(x)"), x.clone(), d);
            }
        }
    }
    th.symmetric = true;
    let model = Model::Fin(wait_model(&th, FinVCat::metric(), WAIT_TRUNC));
    let mut probes = Vec::new();
    for (n, m) in [(0usize, 1usize), (1, 3), (5, 2), (0, 12), (7, 7)] {
        let d = lawvere(BigRational::from_integer((n.abs_diff(m) as i64).into()));
        let name = format!("wait{n} vs wait{m}");
        probes.push(probe(&th, &name, "x:X", &format!("wait{n}(x)"), &format!("wait{m}(x)"), x.clone(), d, CheckMode::Exact));
    }
    for n in [1, 2, 3, 5] {
        let l = applied(&format!("seq{n}"), "w1", n, "z'");
        let r = applied(&format!("seq{n}"), "w2", n, "z'");
        let d = lawvere(BigRational::from_integer((n as i64).into()));
        probes.push(probe(&th, &format!("seq{n} w1 vs w2"), "-", &l, &r, x.clone(), d, CheckMode::Exact));
    }
    CaseStudy { name: "wait-metric".into(), theory: th, model, probes }
}

fn wait_ordered() -> CaseStudy {
    let k = QuantaleKind::Boolean;
    let max = 3;
    let mut th = wait_signature(k, max);
    let x = Type::ground("X");
    let t = k.top();
    axiom(&mut th, "x:X", "wait0(x)", "x", x.clone(), t.clone());
    axiom(&mut th, "x:X", "x", "wait0(x)", x.clone(), t.clone());
    for n in 1..max {
        for m in 1..=max - n {
            let (l, r) = (format!("wait{n}(wait{m}(x))"), format!("wait{}(x)", n + m));
            axiom(&mut th, "x:X", &l, &r, x.clone(), t.clone());
            axiom(&mut th, "x:X", &r, &l, x.clone(), t.clone());
        }
    }
    for n in 0..=max {
        for m in n + 1..=max {
            axiom(&mut th, "x:X", &format!("wait{n}(x)"), &format!("wait{m}(x)"), x.clone(), t.clone());
        }
    }
    th.defs.insert("v".into(), term(&th, "\\f:X ->o X. \\g:X ->o X. g (f z)"));
    let model = Model::Fin(wait_model(&th, FinVCat::posets(), ORDERED_TRUNC));
    let fx = Type::lolli(Type::lolli(x.clone(), x.clone()), x.clone());
    let probes = vec![
        probe(&th, "wait1 before wait3", "x:X", "wait1(x)", "wait3(x)", x.clone(), t.clone(), CheckMode::Exact),
        probe(&th, "cheaper argument", "z:X", "v (\\x:X. wait1(x))", "v (\\x:X. wait1(wait1(x)))", fx, t.clone(), CheckMode::Exact),
        probe(&th, "seq2 w1 before w2", "-", "seq2 w1 w1 z'", "seq2 w2 w2 z'", x, t, CheckMode::Exact),
    ];
    CaseStudy { name: "wait-ordered".into(), theory: th, model, probes }
}

/// Probability constants of the Bernoulli theory, as (op name, value).
pub fn bernoulli_probabilities() -> Vec<(String, BigRational)> {
    [(0, 1), (1, 4), (3, 10), (1, 2), (1, 1)]
        .into_iter()
        .map(|(n, d)| {
            let name = if n == 0 { "p0".to_string() } else if d == 1 { format!("p{n}") } else { format!("p{n}_{d}") };
            (name, rat(n, d))
        })
        .collect()
}

/// `\x:real. bernoulli(r0(*), plus(x, normal(r0(*), rp1(*))), p(*))`
pub fn walk_text(p: &str) -> String {
    format!("\\x:real. bernoulli(r0(*), plus(x, normal(r0(*), rp1(*))), {p}(*))")
}

const REAL_MIN: i64 = -3;
const REAL_MAX: i64 = 3;

fn bernoulli() -> CaseStudy {
    let k = QuantaleKind::Lawvere;
    let mut th = Theory::new(k);
    for g in ["real", "realp", "unit"] {
        th.add_ground(g);
    }
    let real = Type::ground("real");
    let realp = Type::ground("realp");
    let unit = Type::ground("unit");
    th.add_op("r0", vec![Type::Unit], real.clone());
    th.add_op("rp1", vec![Type::Unit], realp.clone());
    let probs = bernoulli_probabilities();
    for (name, _) in &probs {
        th.add_op(name, vec![Type::Unit], unit.clone());
    }
    th.add_op("plus", vec![real.clone(), real.clone()], real.clone());
    th.add_op("normal", vec![real.clone(), realp.clone()], real.clone());
    th.add_op("bernoulli", vec![real.clone(), real.clone(), unit.clone()], real.clone());
    for (a, pa) in &probs {
        for (b, pb) in &probs {
            if a != b {
                let l = format!("bernoulli(x1, x2, {a}(*))");
                let r = format!("bernoulli(x1, x2, {b}(*))");
                axiom(&mut th, "x1:real, x2:real", &l, &r, real.clone(), lawvere((pa - pb).abs()));
            }
        }
    }
    th.symmetric = true;
    for (name, _) in &probs {
        let t = term(&th, &walk_text(name));
        th.defs.insert(format!("walk_{name}"), t);
    }

    let reals: Vec<String> = (REAL_MIN..=REAL_MAX).map(|r| r.to_string()).collect();
    let nr = reals.len();
    let idx = |r: i64| (r.clamp(REAL_MIN, REAL_MAX) - REAL_MIN) as usize;
    let sreal = Support::base(reals);
    let srealp = Support::base(vec!["0".into(), "1".into(), "2".into()]);
    let sunit = Support::base(probs.iter().map(|(_, p)| p.to_string()).collect());
    let b = MeasL1;
    let mut i = Interpretation::new(MeasL1);
    i.grounds.insert("real".into(), sreal.clone());
    i.grounds.insert("realp".into(), srealp.clone());
    i.grounds.insert("unit".into(), sunit.clone());
    i.ops.insert("r0".into(), b.deterministic(&Support::Unit, &sreal, |_| idx(0)));
    i.ops.insert("rp1".into(), b.deterministic(&Support::Unit, &srealp, |_| 1));
    for (j, (name, _)) in probs.iter().enumerate() {
        i.ops.insert(name.clone(), b.deterministic(&Support::Unit, &sunit, |_| j));
    }
    let rr = Support::Tensor(Box::new(sreal.clone()), Box::new(sreal.clone()));
    let value = |j: usize| j as i64 + REAL_MIN;
    i.ops.insert("plus".into(), b.deterministic(&rr, &sreal, |k| idx(value(k / nr) + value(k % nr))));
    // centred binomial with 4s trials, clamped to the support
    let rp = Support::Tensor(Box::new(sreal.clone()), Box::new(srealp.clone()));
    let normal_cols: Vec<Column> = (0..rp.size())
        .map(|k| {
            let (mu, s) = (value(k / 3), (k % 3) as i64);
            let trials = 4 * s;
            let total = BigRational::from_integer(num::BigInt::from(2).pow(trials as u32));
            let mut c: Vec<(usize, BigRational)> = Vec::new();
            let mut binom = num::BigInt::one();
            for j in 0..=trials {
                c.push((idx(mu + j - 2 * s), BigRational::from_integer(binom.clone()) / &total));
                binom = binom * (trials - j) / (j + 1);
            }
            c
        })
        .collect();
    i.ops.insert("normal".into(), b.kernel(&rp, &sreal, normal_cols).expect("normal kernel"));
    let rru = Support::Tensor(Box::new(rr), Box::new(sunit.clone()));
    let np = probs.len();
    let bern_cols: Vec<Column> = (0..rru.size())
        .map(|k| {
            let (uv, p) = (k / np, &probs[k % np].1);
            let (u, v) = (uv / nr, uv % nr);
            vec![(u, p.clone()), (v, BigRational::one() - p)]
        })
        .collect();
    i.ops.insert("bernoulli".into(), b.kernel(&rru, &sreal, bern_cols).expect("bernoulli kernel"));
    i.validate(&th).expect("bernoulli model matches its theory");

    let walk_ty = Type::lolli(real.clone(), real.clone());
    let mut probes = Vec::new();
    let lookup = |name: &str| probs.iter().find(|(n, _)| n == name).map(|(_, p)| p.clone()).expect("declared probability");
    for (a, bb) in [("p3_10", "p1_2"), ("p0", "p1"), ("p1_4", "p1_4")] {
        let d = lawvere((lookup(a) - lookup(bb)).abs());
        let name = format!("walk {a} vs {bb}");
        probes.push(probe(&th, &name, "-", &format!("walk_{a}"), &format!("walk_{bb}"), walk_ty.clone(), d, CheckMode::LeqWithTol));
    }
    let plane = Type::tensor(real.clone(), real.clone());
    let walk2d = |a: &str, bb: &str| format!("\\y:real * real. pm y to y1 * y2. walk_{a} y1 * walk_{bb} y2");
    probes.push(probe(
        &th,
        "planar walk",
        "-",
        &walk2d("p3_10", "p1_4"),
        &walk2d("p1_2", "p1_2"),
        Type::lolli(plane.clone(), plane),
        lawvere(rat(9, 20)),
        CheckMode::LeqWithTol,
    ));
    CaseStudy { name: "bernoulli".into(), theory: th, model: Model::Meas(i), probes }
}

pub fn qwalk_epsilon() -> BigRational {
    rat(1, 10)
}

fn qwalk() -> CaseStudy {
    let k = QuantaleKind::Lawvere;
    let mut th = Theory::new(k);
    th.add_ground("qbit");
    th.add_ground("pos");
    let q = Type::ground("qbit");
    let qp = Type::tensor(q.clone(), Type::ground("pos"));
    th.add_op("H", vec![q.clone()], q.clone());
    th.add_op("He", vec![q.clone()], q.clone());
    th.add_op("S", vec![qp.clone()], qp.clone());
    axiom(&mut th, "x:qbit", "H(x)", "He(x)", q.clone(), lawvere(qwalk_epsilon()));
    th.symmetric = true;
    th.defs.insert("step".into(), term(&th, "\\x:qbit * pos. pm x to x1 * x2. S(H(x1) * x2)"));
    th.defs.insert("stepe".into(), term(&th, "\\x:qbit * pos. pm x to x1 * x2. S(He(x1) * x2)"));
    seq_defs(&mut th, &qp, 4);

    let mut i = Interpretation::new(QChan::default());
    i.grounds.insert("qbit".into(), 2);
    i.grounds.insert("pos".into(), QWALK_POS);
    let iso = |m| Stinespring::isometry(m).expect("gate is an isometry");
    i.ops.insert("H".into(), iso(hadamard()));
    i.ops.insert("He".into(), iso(ry(PI / 2.0) * phase(PI + QWALK_DELTA)));
    i.ops.insert("S".into(), iso(shift(QWALK_POS)));
    i.validate(&th).expect("qwalk model matches its theory");

    let walk_ty = Type::lolli(qp.clone(), qp);
    let eps = qwalk_epsilon();
    let mut probes = vec![probe(&th, "step vs stepe", "-", "step", "stepe", walk_ty.clone(), lawvere(eps.clone()), CheckMode::LeqWithTol)];
    for n in [1, 2, 4] {
        let l = applied(&format!("seq{n}"), "step", n, "");
        let r = applied(&format!("seq{n}"), "stepe", n, "");
        let d = lawvere(eps.clone() * BigRational::from_integer((n as i64).into()));
        probes.push(probe(&th, &format!("seq{n} step vs stepe"), "-", l.trim_end(), r.trim_end(), walk_ty.clone(), d, CheckMode::LeqWithTol));
    }
    CaseStudy { name: "qwalk".into(), theory: th, model: Model::Q(i), probes }
}

fn affine_demo() -> CaseStudy {
    let k = QuantaleKind::Lawvere;
    let mut th = Theory::new(k);
    th.add_ground("X");
    let x = Type::ground("X");
    for c in ["w", "w'", "u", "u'"] {
        th.add_op(c, vec![Type::Unit], x.clone());
    }
    th.affine = true;
    th.symmetric = true;
    axiom(&mut th, "-", "w(*)", "w'(*)", x.clone(), lawvere(rat(1, 1)));
    axiom(&mut th, "-", "u(*)", "u'(*)", x.clone(), lawvere(rat(2, 1)));
    th.defs.insert("drop".into(), term(&th, "\\x:X. \\y:X. dis(x) to *. y"));

    let b = FinVCat::metric();
    let sx = Space::chain(3);
    let mut i = Interpretation::new(b);
    i.grounds.insert("X".into(), sx.clone());
    for (c, p) in [("w", 0), ("w'", 1), ("u", 0), ("u'", 2)] {
        let f = i.backend.point(&sx, p);
        i.ops.insert(c.into(), f);
    }
    i.validate(&th).expect("affine model matches its theory");
    let probes = vec![
        probe(&th, "discarded argument", "-", "drop w(*) u(*)", "drop w'(*) u'(*)", x.clone(), lawvere(rat(2, 1)), CheckMode::Exact),
        probe(
            &th,
            "both arguments kept",
            "-",
            "w(*) * u(*)",
            "w'(*) * u'(*)",
            Type::tensor(x.clone(), x.clone()),
            lawvere(rat(3, 1)),
            CheckMode::Exact,
        ),
        probe(&th, "weakened variable", "a:X, b:X", "dis(a) to *. b", "dis(a) to *. b", x, k.top(), CheckMode::Exact),
    ];
    CaseStudy { name: "affine-demo".into(), theory: th, model: Model::Fin(i), probes }
}

#[derive(Clone, Debug)]
pub struct RunOpts {
    pub budget: Budget,
    /// Overrides the model's tolerance.
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

impl Default for RunOpts {
    fn default() -> RunOpts {
        RunOpts { budget: Budget::default(), tol: None, seed: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub name: String,
    pub equation: String,
    pub mode: CheckMode,
    pub expected: String,
    pub derived: Option<String>,
    pub measured: Option<String>,
    pub replayed: bool,
    pub satisfied: bool,
    pub pass: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub proof: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u64,
    pub case_study: String,
    pub backend: String,
    pub tolerance: f64,
    pub axioms: AxiomReport,
    pub probes: Vec<ProbeReport>,
    pub passed: bool,
}

impl Report {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ok = |b: bool| if b { "ok" } else { "FAIL" };
        let _ = writeln!(s, "case study {} ({}, tolerance {:e})", self.case_study, self.backend, self.tolerance);
        let failed: Vec<_> = self.axioms.failures().collect();
        let _ = writeln!(s, "axioms: {}/{} satisfied", self.axioms.results.len() - failed.len(), self.axioms.results.len());
        for f in failed {
            let why = f.error.clone().or_else(|| f.measured.clone().map(|m| format!("measured {m}"))).unwrap_or_default();
            let _ = writeln!(s, "  axiom {} fails: {} ({why})", f.index, f.equation);
        }
        let w = self.probes.iter().map(|p| p.name.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(s, "{:<w$}  {:>10}  {:>10}  {:>14}  {:>6}  result", "probe", "expected", "derived", "measured", "replay");
        for p in &self.probes {
            let _ = writeln!(
                s,
                "{:<w$}  {:>10}  {:>10}  {:>14}  {:>6}  {}",
                p.name,
                p.expected,
                p.derived.as_deref().unwrap_or("-"),
                p.measured.as_deref().unwrap_or("-"),
                ok(p.replayed),
                ok(p.pass)
            );
            if let Some(e) = &p.error {
                let _ = writeln!(s, "    {e}");
            }
        }
        let _ = writeln!(s, "{}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

pub fn run_probe(cs: &CaseStudy, p: &Probe, opts: &RunOpts, tol: f64) -> ProbeReport {
    let th = &cs.theory;
    let e = &p.equation;
    let mut r = ProbeReport {
        name: p.name.clone(),
        equation: e.to_string(),
        mode: p.mode,
        expected: e.label.to_string(),
        derived: None,
        measured: None,
        replayed: false,
        satisfied: false,
        pass: false,
        error: None,
        proof: None,
    };
    let bound = match derive_bound(th, &e.ctx, &e.lhs, &e.rhs, opts.budget) {
        Ok(b) => b,
        Err(err) => {
            r.error = Some(format!("search: {err}"));
            return r;
        }
    };
    r.derived = Some(bound.label.to_string());
    r.proof = Some(proof_to_json(th.quantale, &bound.proof));
    match check_proof(th, &bound.proof) {
        Ok(c) => r.replayed = c.label == bound.label && c.same_judgement(&bound.proof.conclusion),
        Err(err) => r.error = Some(format!("replay: {err}")),
    }
    let derived_eq = VEquation { label: bound.label.clone(), ..e.clone() };
    match cs.model.check_satisfaction(th, &derived_eq, tol) {
        Ok(s) => {
            r.satisfied = s.ok;
            r.measured = Some(s.measured.to_string());
            let matches = match (p.mode, &s.measured) {
                (CheckMode::Exact, Distance::Exact(m)) => *m == bound.label,
                (CheckMode::Exact, Distance::Approx(_)) => false,
                (CheckMode::LeqWithTol, _) => true,
            };
            r.pass = r.replayed && s.ok && matches && bound.label == e.label;
            if !r.pass && r.error.is_none() {
                r.error = Some(if bound.label != e.label {
                    format!("derived {} but expected {}", bound.label, e.label)
                } else if !s.ok {
                    format!("model distance {} exceeds the derived label", s.measured)
                } else {
                    format!("measured {} differs from the derived label", s.measured)
                });
            }
        }
        Err(err) => r.error = Some(format!("model: {err}")),
    }
    r
}

pub fn run_case_study(cs: &CaseStudy, opts: &RunOpts) -> Report {
    let tol = opts.tol.unwrap_or_else(|| cs.model.tolerance());
    let axioms = cs.model.check_axioms(&cs.theory, tol);
    let probes: Vec<ProbeReport> = cs.probes.par_iter().map(|p| run_probe(cs, p, opts, tol)).collect();
    let passed = axioms.passed() && probes.iter().all(|p| p.pass);
    Report {
        schema_version: crate::semantics::model::SCHEMA_VERSION,
        case_study: cs.name.clone(),
        backend: cs.model.backend_name().to_string(),
        tolerance: tol,
        axioms,
        probes,
        passed,
    }
}

impl CaseStudy {
    pub fn set_seed(&mut self, seed: u64) {
        self.model.set_seed(seed);
    }

    /// The theory file and the model file of the case study.
    pub fn files(&self) -> (String, String) {
        let model = serde_json::to_string_pretty(&self.model.to_json(&self.theory)).expect("model json");
        (self.theory.to_text(), model)
    }
}

/// The context of a probe as the CLI expects it.
pub fn context_text(ctx: &Context) -> String {
    if ctx.is_empty() {
        "-".into()
    } else {
        ctx.to_string()
    }
}
