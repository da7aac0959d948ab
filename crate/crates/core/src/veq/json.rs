//! Proof files.
//!
//! A proof is stored as a tree of nodes; every conclusion is written as an
//! equation string, so files stay readable and independent of definitions.

use serde_json::{json, Map, Value};

use super::proof::{BaseEq, ProofRule, ProofTree};
use crate::quantale::QuantaleKind;
use crate::syntax::{parse_equation_raw, parse_term};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, thiserror::Error)]
#[error("proof file {path}: {msg}")]
pub struct ProofFileError {
    pub path: String,
    pub msg: String,
}

fn err(path: &str, msg: impl Into<String>) -> ProofFileError {
    ProofFileError { path: path.to_string(), msg: msg.into() }
}

pub fn proof_to_json(kind: QuantaleKind, tree: &ProofTree) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "quantale": kind.name(),
        "proof": node(tree),
    })
}

fn node(t: &ProofTree) -> Value {
    let mut m = Map::new();
    m.insert("rule".into(), t.rule.name().into());
    m.insert("conclusion".into(), t.conclusion.to_string().into());
    match &t.rule {
        ProofRule::Axiom { index, subst } => {
            m.insert("axiom".into(), (*index).into());
            m.insert("subst".into(), subst.iter().map(|s| Value::from(s.to_string())).collect());
        }
        ProofRule::Base { eq, reversed } => {
            m.insert("name".into(), eq.name().into());
            m.insert("reversed".into(), (*reversed).into());
        }
        ProofRule::Arch { witnesses } => {
            m.insert("witnesses".into(), witnesses.iter().map(|w| Value::from(w.to_string())).collect());
        }
        ProofRule::CongSubst { var } => {
            m.insert("var".into(), var.as_str().into());
        }
        ProofRule::Weak => {
            m.insert("r".into(), t.conclusion.label.to_string().into());
        }
        _ => {}
    }
    if !t.premises.is_empty() {
        m.insert("premises".into(), t.premises.iter().map(node).collect());
    }
    Value::Object(m)
}

pub fn proof_from_json(v: &Value) -> Result<(QuantaleKind, ProofTree), ProofFileError> {
    let version = v.get("schema_version").and_then(Value::as_u64).ok_or_else(|| err("/", "missing schema_version"))?;
    if version != SCHEMA_VERSION {
        return Err(err("/", format!("unsupported schema_version {version}")));
    }
    let kind: QuantaleKind = v
        .get("quantale")
        .and_then(Value::as_str)
        .ok_or_else(|| err("/", "missing quantale"))?
        .parse()
        .map_err(|e: String| err("/", e))?;
    let root = v.get("proof").ok_or_else(|| err("/", "missing proof"))?;
    Ok((kind, read_node(kind, root, "/")?))
}

pub fn proof_from_str(text: &str) -> Result<(QuantaleKind, ProofTree), ProofFileError> {
    let v: Value = serde_json::from_str(text).map_err(|e| err("/", e.to_string()))?;
    proof_from_json(&v)
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value, ProofFileError> {
    v.get(key).ok_or_else(|| err(path, format!("missing field {key}")))
}

fn string_list(v: &Value, key: &str, path: &str) -> Result<Vec<String>, ProofFileError> {
    field(v, key, path)?
        .as_array()
        .ok_or_else(|| err(path, format!("{key} must be a list")))?
        .iter()
        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| err(path, format!("{key} entries must be strings"))))
        .collect()
}

fn read_node(kind: QuantaleKind, v: &Value, path: &str) -> Result<ProofTree, ProofFileError> {
    let rule_name = field(v, "rule", path)?.as_str().ok_or_else(|| err(path, "rule must be a string"))?;
    let text = field(v, "conclusion", path)?.as_str().ok_or_else(|| err(path, "conclusion must be a string"))?;
    let conclusion = parse_equation_raw(kind, text).map_err(|e| err(path, e.to_string()))?;
    let rule = match rule_name {
        "axiom" => {
            let index = field(v, "axiom", path)?.as_u64().ok_or_else(|| err(path, "axiom must be an index"))? as usize;
            let subst = string_list(v, "subst", path)?
                .iter()
                .map(|s| parse_term(s).map_err(|e| err(path, e.to_string())))
                .collect::<Result<_, _>>()?;
            ProofRule::Axiom { index, subst }
        }
        "base_eq" => {
            let name = field(v, "name", path)?.as_str().unwrap_or_default();
            let eq = BaseEq::from_name(name).ok_or_else(|| err(path, format!("unknown base equation {name:?}")))?;
            let reversed = v.get("reversed").and_then(Value::as_bool).unwrap_or(false);
            ProofRule::Base { eq, reversed }
        }
        "arch" => {
            let witnesses = string_list(v, "witnesses", path)?
                .iter()
                .map(|s| kind.parse_value(s).map_err(|e| err(path, e.to_string())))
                .collect::<Result<_, _>>()?;
            ProofRule::Arch { witnesses }
        }
        "weak" => {
            let r = field(v, "r", path)?.as_str().ok_or_else(|| err(path, "r must be a string"))?;
            let r = kind.parse_value(r).map_err(|e| err(path, e.to_string()))?;
            if r != conclusion.label {
                return Err(err(path, format!("r = {r} but the conclusion is labelled {}", conclusion.label)));
            }
            ProofRule::Weak
        }
        "cong_subst" => {
            let var = field(v, "var", path)?.as_str().ok_or_else(|| err(path, "var must be a string"))?;
            ProofRule::CongSubst { var: var.to_string() }
        }
        other => simple_rule(other).ok_or_else(|| err(path, format!("unknown rule {other:?}")))?,
    };
    let premises = match v.get("premises") {
        None => vec![],
        Some(Value::Array(ps)) => ps
            .iter()
            .enumerate()
            .map(|(i, p)| read_node(kind, p, &child_path(path, i)))
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(err(path, "premises must be a list")),
    };
    Ok(ProofTree::new(rule, premises, conclusion))
}

fn child_path(path: &str, i: usize) -> String {
    if path == "/" {
        format!("/{i}")
    } else {
        format!("{path}/{i}")
    }
}

fn simple_rule(name: &str) -> Option<ProofRule> {
    let all = [
        ProofRule::Refl,
        ProofRule::Trans,
        ProofRule::Weak,
        ProofRule::Join,
        ProofRule::CongOp,
        ProofRule::CongTensor,
        ProofRule::CongTo,
        ProofRule::CongPm,
        ProofRule::CongLam,
        ProofRule::CongApp,
        ProofRule::CongDis,
        ProofRule::Perm,
        ProofRule::Sym,
    ];
    all.into_iter().find(|r| r.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_context, parse_term, parse_theory};
    use crate::veq::search::{derive_bound, Budget};
    use crate::veq::check_proof;

    const TH: &str = "\
quantale: lawvere
types: X
ops:
  f : X -> X
  g : X -> X
  c : I -> X
axioms:
  x:X |- f(x) =[1] g(x) : X
  - |- c(*) =[1/2] f(c(*)) : X
flags: symmetric
";

    #[test]
    fn round_trip() {
        let th = parse_theory(TH).unwrap();
        let ctx = parse_context("a:X").unwrap();
        let l = parse_term("(\\y:X. f(g(y))) a").unwrap();
        let r = parse_term("g(f(a))").unwrap();
        let b = derive_bound(&th, &ctx, &l, &r, Budget::default()).unwrap();
        let v = proof_to_json(th.quantale, &b.proof);
        let text = serde_json::to_string_pretty(&v).unwrap();
        let (kind, back) = proof_from_str(&text).unwrap();
        assert_eq!(kind, th.quantale);
        assert_eq!(back, b.proof);
        assert_eq!(check_proof(&th, &back).unwrap(), check_proof(&th, &b.proof).unwrap());
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(proof_from_str("{}").is_err());
        assert!(proof_from_str(r#"{"schema_version": 9, "quantale": "lawvere", "proof": {}}"#).is_err());
        let e = proof_from_str(
            r#"{"schema_version": 1, "quantale": "lawvere", "proof":
                {"rule": "trans", "conclusion": "- |- * =[0] * : I",
                 "premises": [{"rule": "nope", "conclusion": "- |- * =[0] * : I"}]}}"#,
        )
        .unwrap_err();
        assert_eq!(e.path, "/0");
    }
}
