//! `vlam`: batch front end for typing, proving, proof checking and model
//! checking.
//!
//! Exit codes: 0 on success, 1 when the input is well formed but the claim
//! fails (ill-typed term, rejected proof, violated axiom, failing probe),
//! 2 on usage or IO errors.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use vlam_core::semantics::{load_model, Model};
use vlam_core::syntax::{parse_context, parse_theory};
use vlam_core::theories::{self, RunOpts};
use vlam_core::typing::{derive, Derivation};
use vlam_core::veq::json::{proof_from_json, proof_to_json};
use vlam_core::veq::{check_proof, derive_bound, Budget};
use vlam_core::{Context, Term, Theory};

const SCHEMA_VERSION: u64 = 1;

#[derive(Parser)]
#[command(name = "vlam", version, about = "Quantale-labelled equational reasoning for linear lambda terms")]
struct Cli {
    /// Tolerance for numeric distance checks (overrides the model's).
    #[arg(long, global = true, value_parser = parse_tol)]
    tol: Option<f64>,
    /// Seed for randomized numerics.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print results as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Typecheck a term in a context.
    Check { theory: PathBuf, ctx: String, term: String },
    /// Derive the best label relating two terms and write the proof.
    Prove {
        theory: PathBuf,
        ctx: String,
        lhs: String,
        rhs: String,
        /// Search depth.
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=100_000))]
        budget: u64,
        #[arg(long, default_value = "proof.json")]
        proof_out: PathBuf,
        /// Also check the derived equation in this model.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Replay a proof file against a theory.
    Verify { theory: PathBuf, proof: PathBuf },
    /// Print the interpretation of a term.
    Interpret {
        theory: PathBuf,
        ctx: String,
        term: String,
        #[arg(long)]
        model: PathBuf,
    },
    /// Check that a model satisfies every axiom of a theory.
    ModelCheck { theory: PathBuf, model: PathBuf },
    /// Run a built-in case study.
    Casestudy {
        name: String,
        /// Write the theory and model files to this directory.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=100_000))]
        budget: u64,
    },
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !t.is_finite() || t < 0.0 {
        return Err("tolerance must be a finite nonnegative number".into());
    }
    Ok(t)
}

enum Failure {
    /// The claim does not hold.
    Domain(String),
    /// Bad input or IO.
    Usage(String),
}

type Res<T> = Result<T, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Command-line text, or the contents of a file for `@path`.
fn arg_text(s: &str) -> Res<String> {
    match s.strip_prefix('@') {
        Some(p) => Ok(read(Path::new(p))?.trim().to_string()),
        None => Ok(s.to_string()),
    }
}

fn load_theory(path: &Path) -> Res<Theory> {
    parse_theory(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(th: &Theory, path: &Path, seed: Option<u64>) -> Res<Model> {
    let mut m = load_model(th, &read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        m.set_seed(s);
    }
    Ok(m)
}

fn context(s: &str) -> Res<Context> {
    parse_context(&arg_text(s)?).map_err(|e| usage(format!("context: {e}")))
}

fn term(th: &Theory, s: &str) -> Res<Term> {
    th.parse_term(&arg_text(s)?).map_err(|e| usage(format!("term: {e}")))
}

fn derivation_json(d: &Derivation) -> Value {
    json!({
        "rule": d.rule.name(),
        "ctx": d.ctx.to_string(),
        "type": d.ty.to_string(),
        "premises": d.premises.iter().map(derivation_json).collect::<Vec<_>>(),
    })
}

fn derivation_text(d: &Derivation, depth: usize, out: &mut String) {
    out.push_str(&format!("{}{} : {}  [{}]\n", "  ".repeat(depth), d.term, d.ty, d.rule.name()));
    for p in &d.premises {
        derivation_text(p, depth + 1, out);
    }
}

struct Output {
    text: String,
    json: Value,
    ok: bool,
    /// Reason shown on the error stream when `ok` is false.
    why: Option<String>,
}

fn run(cli: &Cli) -> Res<Output> {
    match &cli.cmd {
        Cmd::Check { theory, ctx, term: t } => {
            let th = load_theory(theory)?;
            let ctx = context(ctx)?;
            let t = term(&th, t)?;
            match derive(&th, &ctx, &t) {
                Ok(d) => {
                    let mut text = format!("{} |- {} : {}\n", theories::context_text(&ctx), t, d.ty);
                    derivation_text(&d, 1, &mut text);
                    let json = json!({ "well_typed": true, "type": d.ty.to_string(), "derivation": derivation_json(&d) });
                    Ok(Output { text, json, ok: true, why: None })
                }
                Err(e) => Ok(Output {
                    text: String::new(),
                    json: json!({ "well_typed": false, "error": e.to_string() }),
                    ok: false,
                    why: Some(format!("ill-typed: {e}")),
                }),
            }
        }
        Cmd::Prove { theory, ctx, lhs, rhs, budget, proof_out, model } => {
            let th = load_theory(theory)?;
            let model = model.as_deref().map(|m| load(&th, m, cli.seed)).transpose()?;
            let ctx = context(ctx)?;
            let (l, r) = (term(&th, lhs)?, term(&th, rhs)?);
            let budget = Budget::with_depth(*budget as usize);
            let b = match derive_bound(&th, &ctx, &l, &r, budget) {
                Ok(b) => b,
                Err(e) => {
                    return Ok(Output {
                        text: String::new(),
                        json: json!({ "error": e.to_string() }),
                        ok: false,
                        why: Some(e.to_string()),
                    })
                }
            };
            let file = proof_to_json(th.quantale, &b.proof);
            let pretty = serde_json::to_string_pretty(&file).map_err(usage)?;
            fs::write(proof_out, pretty + "\n").map_err(|e| usage(format!("{}: {e}", proof_out.display())))?;
            let mut text = format!("label {}\n{}\nproof written to {}\n", b.label, b.proof.conclusion, proof_out.display());
            let mut json = json!({
                "label": b.label.to_string(),
                "equation": b.proof.conclusion.to_string(),
                "proof_size": b.proof.size(),
                "proof_out": proof_out.display().to_string(),
            });
            let mut ok = true;
            let mut why = None;
            if let Some(m) = model {
                let tol = cli.tol.unwrap_or_else(|| m.tolerance());
                let s = m.check_satisfaction(&th, &b.proof.conclusion, tol).map_err(|e| Failure::Domain(e.to_string()))?;
                text.push_str(&format!("model distance {} ({})\n", s.measured, if s.ok { "satisfied" } else { "VIOLATED" }));
                json["measured"] = json!(s.measured.to_string());
                json["satisfied"] = json!(s.ok);
                if !s.ok {
                    ok = false;
                    why = Some(format!("model distance {} exceeds label {}", s.measured, b.label));
                }
            }
            Ok(Output { text, json, ok, why })
        }
        Cmd::Verify { theory, proof } => {
            let th = load_theory(theory)?;
            let v: Value = serde_json::from_str(&read(proof)?).map_err(|e| usage(format!("{}: {e}", proof.display())))?;
            let fail = |path: &str, msg: String| Output {
                text: String::new(),
                json: json!({ "valid": false, "path": path, "error": msg }),
                ok: false,
                why: Some(format!("proof rejected at node {path}: {msg}")),
            };
            let (kind, tree) = match proof_from_json(&v) {
                Ok(p) => p,
                Err(e) => return Ok(fail(&e.path, e.msg)),
            };
            if kind != th.quantale {
                return Ok(fail("/", format!("proof is over {} but the theory is over {}", kind.name(), th.quantale.name())));
            }
            match check_proof(&th, &tree) {
                Ok(eq) => Ok(Output {
                    text: format!("valid: {eq}\n"),
                    json: json!({ "valid": true, "equation": eq.to_string(), "label": eq.label.to_string() }),
                    ok: true,
                    why: None,
                }),
                Err(e) => Ok(fail(&e.path, format!("{}: {}", e.rule, e.msg))),
            }
        }
        Cmd::Interpret { theory, ctx, term: t, model } => {
            let th = load_theory(theory)?;
            let m = load(&th, model, cli.seed)?;
            let ctx = context(ctx)?;
            let t = term(&th, t)?;
            if let Err(e) = derive(&th, &ctx, &t) {
                return Ok(Output { text: String::new(), json: json!({ "error": e.to_string() }), ok: false, why: Some(format!("ill-typed: {e}")) });
            }
            let d = m.describe(&th, &ctx, &t).map_err(|e| Failure::Domain(e.to_string()))?;
            Ok(Output { json: json!({ "backend": m.backend_name(), "interpretation": d }), text: d, ok: true, why: None })
        }
        Cmd::ModelCheck { theory, model } => {
            let th = load_theory(theory)?;
            let m = load(&th, model, cli.seed)?;
            let tol = cli.tol.unwrap_or_else(|| m.tolerance());
            let rep = m.check_axioms(&th, tol);
            let mut text = String::new();
            for r in &rep.results {
                let status = if r.ok { "ok" } else { "FAIL" };
                let detail = r.error.clone().or_else(|| r.measured.clone().map(|d| format!("distance {d}"))).unwrap_or_default();
                text.push_str(&format!("{status:>4}  axiom {}: {} ({detail})\n", r.index, r.equation));
            }
            let failed = rep.failures().count();
            text.push_str(&format!("{}/{} axioms satisfied\n", rep.results.len() - failed, rep.results.len()));
            let ok = rep.passed();
            Ok(Output {
                json: json!({ "backend": m.backend_name(), "tolerance": tol, "axioms": rep, "passed": ok }),
                text,
                ok,
                why: (!ok).then(|| format!("{failed} axiom(s) violated")),
            })
        }
        Cmd::Casestudy { name, export, budget } => {
            let mut cs = theories::builtin(name).map_err(usage)?;
            if let Some(s) = cli.seed {
                cs.set_seed(s);
            }
            let mut text = String::new();
            if let Some(dir) = export {
                fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
                let (th, model) = cs.files();
                for (file, body) in [(format!("{name}.th"), th), (format!("{name}.model.json"), model + "\n")] {
                    let p = dir.join(file);
                    fs::write(&p, body).map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    text.push_str(&format!("wrote {}\n", p.display()));
                }
            }
            let opts = RunOpts { budget: Budget::with_depth(*budget as usize), tol: cli.tol, seed: cli.seed };
            let rep = theories::run_case_study(&cs, &opts);
            text.push_str(&rep.to_text());
            let ok = rep.passed;
            Ok(Output {
                json: serde_json::to_value(&rep).map_err(usage)?,
                text,
                ok,
                why: (!ok).then(|| format!("case study {name} failed")),
            })
        }
    }
}

fn command_name(c: &Cmd) -> &'static str {
    match c {
        Cmd::Check { .. } => "check",
        Cmd::Prove { .. } => "prove",
        Cmd::Verify { .. } => "verify",
        Cmd::Interpret { .. } => "interpret",
        Cmd::ModelCheck { .. } => "model-check",
        Cmd::Casestudy { .. } => "casestudy",
    }
}

fn color() -> bool {
    match std::env::var("VLAM_COLOR").as_deref() {
        Ok("always") | Ok("1") => true,
        Ok("never") | Ok("0") => false,
        _ => std::io::stderr().is_terminal(),
    }
}

fn diag(msg: &str) {
    if color() {
        eprintln!("\x1b[1;31merror:\x1b[0m {msg}");
    } else {
        eprintln!("error: {msg}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let envelope = |mut v: Value, ok: bool| {
        if let Value::Object(m) = &mut v {
            m.insert("schema_version".into(), json!(SCHEMA_VERSION));
            m.insert("command".into(), json!(command_name(&cli.cmd)));
            m.insert("ok".into(), json!(ok));
        }
        v
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&envelope(out.json, out.ok)).expect("json"));
            } else {
                print!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                diag(out.why.as_deref().unwrap_or("failed"));
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Domain(m) => (1, m),
                Failure::Usage(m) => (2, m),
            };
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&envelope(json!({ "error": msg }), false)).expect("json"));
            }
            diag(&msg);
            ExitCode::from(code)
        }
    }
}
