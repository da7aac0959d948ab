//! Model files: a backend, objects for the ground types and morphisms for
//! the operation symbols of a theory.
//!
//! ```json
//! { "schema_version": 1, "backend": "finmet",
//!   "grounds": { "X": { "chain": 8 } },
//!   "ops": { "succ": { "table": [1, 2, 3, 4, 5, 6, 7, 7] } } }
//! ```
//!
//! Finite V-categories take `chain`, `points`+`dist`, `discrete` and
//! `tensor` objects and `table`, `const` or `add` morphisms. Measure models
//! take `support` objects and `function` or `columns` kernels. Channel
//! models take `dim` objects and `isometry` matrices (row-major strings
//! like `"0.5-0.5i"`), optionally with an `env` dimension.

use num::BigRational;
use serde_json::{json, Map, Value};
use thiserror::Error;

use super::finvcat::{FinVCat, Space, SpaceNode};
use super::meas::{Column, MeasL1, Support};
use super::qchan::{QChan, Stinespring};
use super::{AxiomReport, Backend, Interpretation, SemError, Satisfaction};
use crate::quantale::{parse_rational, QuantaleKind};
use crate::quantum::{c, CMatrix, C64};
use crate::syntax::{Context, Term, Theory};
use crate::typing::derive;
use crate::veq::normalize::normal_form;
use crate::veq::VEquation;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("model file: {0}")]
    Schema(String),
    #[error(transparent)]
    Sem(#[from] SemError),
}

fn schema(msg: impl Into<String>) -> ModelError {
    ModelError::Schema(msg.into())
}

pub enum Model {
    Fin(Interpretation<FinVCat>),
    Meas(Interpretation<MeasL1>),
    Q(Interpretation<QChan>),
}

macro_rules! each {
    ($m:expr, $i:ident => $e:expr) => {
        match $m {
            Model::Fin($i) => $e,
            Model::Meas($i) => $e,
            Model::Q($i) => $e,
        }
    };
}

impl Model {
    pub fn backend_name(&self) -> &'static str {
        each!(self, i => i.backend.name())
    }

    pub fn tolerance(&self) -> f64 {
        each!(self, i => i.backend.tolerance())
    }

    pub fn set_seed(&mut self, seed: u64) {
        if let Model::Q(i) = self {
            i.backend.opts.seed = seed;
        }
    }

    pub fn validate(&self, th: &Theory) -> Result<(), SemError> {
        each!(self, i => i.validate(th))
    }

    pub fn check_axioms(&self, th: &Theory, tol: f64) -> AxiomReport {
        each!(self, i => i.check_axioms(th, tol))
    }

    pub fn check_satisfaction(&self, th: &Theory, e: &VEquation, tol: f64) -> Result<Satisfaction, SemError> {
        each!(self, i => i.check_satisfaction(th, e, tol))
    }

    /// Terms that need an internal hom the backend lacks are normalized first.
    pub fn describe(&self, th: &Theory, ctx: &Context, t: &Term) -> Result<String, SemError> {
        each!(self, i => {
            let f = match i.interpret_term(th, ctx, t) {
                Err(SemError::Missing { .. } | SemError::Limit(_)) => {
                    let nf = normal_form(th, &derive(th, ctx, t)?)?;
                    i.interpret_term(th, ctx, &nf)?
                }
                other => other?,
            };
            Ok(i.backend.describe(&f))
        })
    }

    pub fn to_json(&self, th: &Theory) -> Value {
        let mut grounds = Map::new();
        let mut ops = Map::new();
        let backend = self.backend_name();
        match self {
            Model::Fin(i) => {
                for g in &th.ground {
                    grounds.insert(g.clone(), space_json(&i.grounds[g]));
                }
                for name in th.ops.keys() {
                    ops.insert(name.clone(), json!({ "table": i.ops[name].table.as_ref() }));
                }
            }
            Model::Meas(i) => {
                for g in &th.ground {
                    grounds.insert(g.clone(), support_json(&i.grounds[g]));
                }
                for name in th.ops.keys() {
                    let cols: Vec<Value> = i.ops[name]
                        .cols
                        .iter()
                        .map(|col| Value::Object(col.iter().map(|(k, w)| (k.to_string(), Value::from(w.to_string()))).collect()))
                        .collect();
                    ops.insert(name.clone(), json!({ "columns": cols }));
                }
            }
            Model::Q(i) => {
                for g in &th.ground {
                    grounds.insert(g.clone(), json!({ "dim": i.grounds[g] }));
                }
                for name in th.ops.keys() {
                    let s = &i.ops[name];
                    let rows: Vec<Vec<String>> =
                        (0..s.v.nrows()).map(|r| (0..s.v.ncols()).map(|k| format_complex(s.v[(r, k)])).collect()).collect();
                    ops.insert(name.clone(), json!({ "isometry": rows, "env": s.env }));
                }
            }
        }
        let mut out = json!({
            "schema_version": SCHEMA_VERSION,
            "backend": backend,
            "grounds": grounds,
            "ops": ops,
        });
        if let Model::Q(i) = self {
            out["tolerance"] = json!(i.backend.tol);
        }
        out
    }
}

fn space_json(s: &Space) -> Value {
    match s.node() {
        SpaceNode::Unit => json!({ "unit": true }),
        SpaceNode::Chain(n) => json!({ "chain": n }),
        SpaceNode::Points { names, dist } => {
            let d: Vec<Vec<String>> = dist.iter().map(|r| r.iter().map(|q| q.to_string()).collect()).collect();
            json!({ "points": names, "dist": d })
        }
        SpaceNode::Tensor(a, b) => json!({ "tensor": [space_json(a), space_json(b)] }),
        SpaceNode::Hom { .. } => json!({ "hom": "unsupported" }),
    }
}

fn support_json(s: &Support) -> Value {
    match s {
        Support::Unit => json!({ "unit": true }),
        Support::Base(l) => json!({ "support": l.as_ref() }),
        Support::Tensor(a, b) => json!({ "tensor": [support_json(a), support_json(b)] }),
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return t.parse().ok().map(|re| c(re, 0.0));
    };
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && bytes[k - 1] != b'e' && bytes[k - 1] != b'E');
    let (re, im) = match split {
        Some(k) => (body[..k].parse().ok()?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse().ok()?,
    };
    Some(c(re, im))
}

pub fn load_model(th: &Theory, text: &str) -> Result<Model, ModelError> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    model_from_json(th, &v)
}

pub fn model_from_json(th: &Theory, v: &Value) -> Result<Model, ModelError> {
    match v.get("schema_version").and_then(Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(schema(format!("unsupported schema_version {other}"))),
        None => return Err(schema("missing schema_version")),
    }
    let backend = v.get("backend").and_then(Value::as_str).ok_or_else(|| schema("missing backend"))?;
    let grounds = v.get("grounds").and_then(Value::as_object).ok_or_else(|| schema("missing grounds"))?;
    let ops = v.get("ops").and_then(Value::as_object).ok_or_else(|| schema("missing ops"))?;
    let tol = v.get("tolerance").and_then(Value::as_f64);
    let model = match backend {
        "finmet" | "finpos" => {
            let b = if backend == "finmet" { FinVCat::metric() } else { FinVCat::posets() };
            let kind = b.quantale();
            let mut i = Interpretation::new(b);
            for (g, o) in grounds {
                i.grounds.insert(g.clone(), space_from(kind, o)?);
            }
            for (name, sig) in &th.ops {
                let entry = ops.get(name).ok_or_else(|| SemError::UnmappedOp(name.clone()))?;
                let dom = i.interpret_type(&sig.domain())?;
                let cod = i.interpret_type(&sig.result)?;
                let f = finmap_from(&i.backend, name, &dom, &cod, entry)?;
                if !i.backend.is_nonexpansive(&f) {
                    return Err(SemError::BadOp { op: name.clone(), msg: "not a V-functor".into() }.into());
                }
                i.ops.insert(name.clone(), f);
            }
            Model::Fin(i)
        }
        "meas" => {
            let mut i = Interpretation::new(MeasL1);
            for (g, o) in grounds {
                i.grounds.insert(g.clone(), support_from(o)?);
            }
            for (name, sig) in &th.ops {
                let entry = ops.get(name).ok_or_else(|| SemError::UnmappedOp(name.clone()))?;
                let dom = i.interpret_type(&sig.domain())?;
                let cod = i.interpret_type(&sig.result)?;
                let k = if let Some(f) = entry.get("function").and_then(Value::as_array) {
                    let idx = f.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<Vec<_>>>();
                    let idx = idx.ok_or_else(|| schema(format!("{name}: function entries must be indices")))?;
                    let cols = idx.into_iter().map(|j| vec![(j, BigRational::from_integer(1.into()))]).collect();
                    i.backend.kernel(&dom, &cod, cols)?
                } else if let Some(cs) = entry.get("columns").and_then(Value::as_array) {
                    let cols = cs.iter().map(|c| column_from(name, c)).collect::<Result<Vec<_>, _>>()?;
                    i.backend.kernel(&dom, &cod, cols)?
                } else {
                    return Err(schema(format!("{name}: expected function or columns")));
                };
                i.ops.insert(name.clone(), k);
            }
            Model::Meas(i)
        }
        "qchan" => {
            let mut b = QChan::default();
            if let Some(t) = tol {
                b.tol = t;
            }
            let mut i = Interpretation::new(b);
            for (g, o) in grounds {
                let d = o.get("dim").and_then(Value::as_u64).ok_or_else(|| schema(format!("{g}: expected dim")))?;
                i.grounds.insert(g.clone(), d as usize);
            }
            for (name, sig) in &th.ops {
                let entry = ops.get(name).ok_or_else(|| SemError::UnmappedOp(name.clone()))?;
                let rows = entry.get("isometry").and_then(Value::as_array).ok_or_else(|| schema(format!("{name}: expected isometry")))?;
                let m = matrix_from(name, rows)?;
                let env = entry.get("env").and_then(Value::as_u64).unwrap_or(1) as usize;
                let dom = i.interpret_type(&sig.domain())?;
                let cod = i.interpret_type(&sig.result)?;
                if m.ncols() != dom || m.nrows() != cod * env {
                    return Err(schema(format!("{name}: matrix is {}x{}, expected {}x{dom}", m.nrows(), m.ncols(), cod * env)));
                }
                let s = Stinespring::isometry(m).map_err(|e| SemError::BadOp { op: name.clone(), msg: e.to_string() })?;
                i.ops.insert(name.clone(), Stinespring { m: cod, env, ..s });
            }
            Model::Q(i)
        }
        other => return Err(schema(format!("unknown backend {other:?}"))),
    };
    model.validate(th)?;
    Ok(model)
}

fn space_from(kind: QuantaleKind, o: &Value) -> Result<Space, ModelError> {
    if o.get("unit").is_some() {
        return Ok(Space::unit());
    }
    if let Some(n) = o.get("chain").and_then(Value::as_u64) {
        return Ok(Space::chain(n as usize));
    }
    if let Some(t) = o.get("tensor").and_then(Value::as_array) {
        if t.len() != 2 {
            return Err(schema("tensor takes two objects"));
        }
        return Ok(Space::tensor(&space_from(kind, &t[0])?, &space_from(kind, &t[1])?));
    }
    let names = |key: &str| -> Option<Vec<String>> {
        o.get(key)?.as_array()?.iter().map(|x| x.as_str().map(str::to_string)).collect()
    };
    if let Some(ns) = names("discrete") {
        return Ok(Space::discrete(kind, ns));
    }
    if let Some(ns) = names("points") {
        let rows = o.get("dist").and_then(Value::as_array).ok_or_else(|| schema("points need a dist table"))?;
        let mut dist = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(|| schema("dist rows must be lists"))?;
            let row = r
                .iter()
                .map(|x| {
                    let s = x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string());
                    kind.parse_value(&s).map_err(|e| schema(e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != ns.len() {
                return Err(schema("dist table is not square"));
            }
            dist.push(row);
        }
        if dist.len() != ns.len() {
            return Err(schema("dist table is not square"));
        }
        let s = Space::points(ns, dist);
        if !FinVCat::new(kind).is_vcategory(&s) {
            return Err(schema("dist table violates the V-category laws"));
        }
        return Ok(s);
    }
    Err(schema(format!("unrecognised object {o}")))
}

fn finmap_from(b: &FinVCat, name: &str, dom: &Space, cod: &Space, entry: &Value) -> Result<super::finvcat::FinMap, ModelError> {
    let n = cod.size();
    if let Some(t) = entry.get("table").and_then(Value::as_array) {
        let t = t.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<Vec<_>>>();
        let t = t.ok_or_else(|| schema(format!("{name}: table entries must be indices")))?;
        if t.len() != dom.size() || t.iter().any(|&x| x >= n) {
            return Err(schema(format!("{name}: table does not fit {dom:?} -> {cod:?}")));
        }
        return Ok(b.map(dom, cod, |i| t[i]));
    }
    if let Some(p) = entry.get("const").and_then(Value::as_u64) {
        if dom.size() != 1 || p as usize >= n {
            return Err(schema(format!("{name}: const needs a one-point domain")));
        }
        return Ok(b.point(cod, p as usize));
    }
    if let Some(k) = entry.get("add").and_then(Value::as_u64) {
        // (i, a) ↦ (min(i + k, top), a) on a chain, possibly tensored with a tag space
        let (len, tag) = match cod.node() {
            SpaceNode::Chain(len) => (*len, 1),
            SpaceNode::Tensor(c, t) => match c.node() {
                SpaceNode::Chain(len) => (*len, t.size()),
                _ => return Err(schema(format!("{name}: add needs a chain"))),
            },
            _ => return Err(schema(format!("{name}: add needs a chain"))),
        };
        if dom != cod {
            return Err(schema(format!("{name}: add is an endomap")));
        }
        let k = k as usize;
        return Ok(b.map(dom, cod, |x| ((x / tag + k).min(len - 1)) * tag + x % tag));
    }
    Err(schema(format!("{name}: expected table, const or add")))
}

fn support_from(o: &Value) -> Result<Support, ModelError> {
    if o.get("unit").is_some() {
        return Ok(Support::Unit);
    }
    if let Some(t) = o.get("tensor").and_then(Value::as_array) {
        if t.len() != 2 {
            return Err(schema("tensor takes two objects"));
        }
        return Ok(Support::Tensor(Box::new(support_from(&t[0])?), Box::new(support_from(&t[1])?)));
    }
    let labels = o
        .get("support")
        .and_then(Value::as_array)
        .and_then(|l| l.iter().map(|x| x.as_str().map(str::to_string)).collect::<Option<Vec<_>>>())
        .ok_or_else(|| schema(format!("unrecognised support {o}")))?;
    Ok(Support::base(labels))
}

fn column_from(name: &str, c: &Value) -> Result<Column, ModelError> {
    let m = c.as_object().ok_or_else(|| schema(format!("{name}: columns are objects")))?;
    m.iter()
        .map(|(k, w)| {
            let i: usize = k.parse().map_err(|_| schema(format!("{name}: bad row index {k}")))?;
            let w = w.as_str().and_then(parse_rational).ok_or_else(|| schema(format!("{name}: bad weight {w}")))?;
            Ok((i, w))
        })
        .collect()
}

fn matrix_from(name: &str, rows: &[Value]) -> Result<CMatrix, ModelError> {
    let mut data = Vec::new();
    let mut width = None;
    for r in rows {
        let r = r.as_array().ok_or_else(|| schema(format!("{name}: rows must be lists")))?;
        if *width.get_or_insert(r.len()) != r.len() {
            return Err(schema(format!("{name}: ragged matrix")));
        }
        for x in r {
            let z = x.as_str().and_then(parse_complex).or_else(|| x.as_f64().map(|f| c(f, 0.0)));
            data.push(z.ok_or_else(|| schema(format!("{name}: bad entry {x}")))?);
        }
    }
    Ok(CMatrix::from_row_slice(rows.len(), width.unwrap_or(0), &data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_theory;

    #[test]
    fn complex_strings() {
        assert_eq!(parse_complex("0.5-0.5i"), Some(c(0.5, -0.5)));
        assert_eq!(parse_complex("-1i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("i"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("2"), Some(c(2.0, 0.0)));
        assert_eq!(parse_complex("1e-3+2e-2i"), Some(c(1e-3, 2e-2)));
        for z in [c(0.25, -3.0), c(-1.5, 0.0), c(0.0, 2.0)] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
        assert_eq!(parse_complex("x"), None);
    }

    #[test]
    fn finmet_file() {
        let th = parse_theory("quantale: lawvere\ntypes: X\nops:\n  s : X -> X\n  o : I -> X\n").unwrap();
        let text = r#"{"schema_version": 1, "backend": "finmet",
            "grounds": {"X": {"chain": 4}},
            "ops": {"s": {"add": 1}, "o": {"const": 0}}}"#;
        let m = load_model(&th, text).unwrap();
        assert_eq!(m.backend_name(), "finmet");
        let back = model_from_json(&th, &m.to_json(&th)).unwrap();
        let Model::Fin(i) = back else { panic!() };
        assert_eq!(i.ops["s"].table.as_ref(), &vec![1, 2, 3, 3]);
        let bad = r#"{"schema_version": 1, "backend": "finmet",
            "grounds": {"X": {"chain": 4}},
            "ops": {"s": {"table": [0, 3, 0, 0]}, "o": {"const": 0}}}"#;
        assert!(matches!(load_model(&th, bad), Err(ModelError::Sem(SemError::BadOp { .. }))));
        let missing = r#"{"schema_version": 1, "backend": "finmet", "grounds": {"X": {"chain": 4}}, "ops": {}}"#;
        assert!(load_model(&th, missing).is_err());
    }
}
