//! Document execution and the CLI command surface.

use crate::ast::{Document, Expectation, Expr, Span, Stmt};
use crate::error::DslError;
use crate::eval::{Env, Value};
use crate::parse::{parse_document, parse_expr};
use crate::report;
use gbx_core::compat::{
    check_structure, Bivector, CompositeKind, Endo11, StructureData, TwoForm,
};
use gbx_core::graded::ChartSign;
use gbx_core::ma::{
    analyze_2d, analyze_3d, build_ma, cotangent_context, jacobi_analyze, jacobi_context,
    jacobi_operator_apply, ma_operator_apply, JacobiSystem, SamplePoint,
};
use gbx_core::scalar::Rat;
use serde_json::{json, Value as Json};

/// Outcome of one `check` statement, for the text renderer and exit status.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub kind: String,
    pub expected: Expectation,
    pub verdict: bool,
    pub matched: bool,
}

#[derive(Debug, Default)]
pub struct RunResult {
    pub reports: Vec<Json>,
    pub checks: Vec<CheckOutcome>,
}

impl RunResult {
    /// Exit-status criterion: every `check` verdict matched its expectation.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.matched)
    }
}

/// Tensor role a `check` argument plays.
#[derive(Clone, Copy)]
enum Role {
    Pi,
    Pi1,
    Omega,
    Endo,
}

fn check_signature(kind: &str) -> Option<(CompositeKind, &'static [Role])> {
    Some(match kind {
        "Poisson" => (CompositeKind::Poisson, &[Role::Pi]),
        "Complementary" => (CompositeKind::Complementary, &[Role::Pi, Role::Omega]),
        "PN" => (CompositeKind::PN, &[Role::Pi, Role::Endo]),
        "POmega" => (CompositeKind::POmega, &[Role::Pi, Role::Omega]),
        "OmegaN" => (CompositeKind::OmegaN, &[Role::Omega, Role::Endo]),
        "HitchinPair" => (CompositeKind::HitchinPair, &[Role::Omega, Role::Endo]),
        "CompatiblePair" => (CompositeKind::CompatiblePair, &[Role::Pi, Role::Pi1]),
        _ => return None,
    })
}

fn type_err(span: Span, message: String) -> DslError {
    DslError::Type {
        line: span.line,
        col: span.col,
        message,
    }
}

fn run_check(
    env: &Env,
    kind: &str,
    args: &[Expr],
    expect: Expectation,
    span: Span,
) -> Result<(Json, CheckOutcome), DslError> {
    let (verdict, body) = if kind == "Zero" {
        if args.len() != 1 {
            return Err(type_err(span, "`Zero` takes one argument".into()));
        }
        let e = env.eval(&args[0])?.into_elem(&env.ctx);
        let verdict = e.is_zero();
        (verdict, json!({ "residual": e.display() }))
    } else {
        let Some((ckind, roles)) = check_signature(kind) else {
            return Err(type_err(span, format!("unknown check kind `{kind}`")));
        };
        if args.len() != roles.len() {
            return Err(type_err(
                span,
                format!("`{kind}` takes {} argument(s), got {}", roles.len(), args.len()),
            ));
        }
        let mut data = StructureData::default();
        for (arg, role) in args.iter().zip(roles) {
            let e = env.eval(arg)?.into_elem(&env.ctx);
            let aspan = arg.span();
            match role {
                Role::Pi => {
                    data.pi = Some(
                        Bivector::new(e).map_err(|er| type_err(aspan, er.to_string()))?,
                    )
                }
                Role::Pi1 => {
                    data.pi1 = Some(
                        Bivector::new(e).map_err(|er| type_err(aspan, er.to_string()))?,
                    )
                }
                Role::Omega => {
                    data.omega = Some(
                        TwoForm::new(e).map_err(|er| type_err(aspan, er.to_string()))?,
                    )
                }
                Role::Endo => {
                    data.endo = Some(
                        Endo11::new(e).map_err(|er| type_err(aspan, er.to_string()))?,
                    )
                }
            }
        }
        match check_structure(&env.structure, ckind, &data) {
            Ok(r) => (r.verdict(), r.to_json()),
            // Module errors (failed side conditions etc.) are data, not a
            // crash: the check counts as failed and the error is recorded.
            Err(e) => (false, json!({ "error": e.to_string() })),
        }
    };
    let expected_pass = expect == Expectation::Pass;
    let outcome = CheckOutcome {
        kind: kind.to_string(),
        expected: expect,
        verdict,
        matched: verdict == expected_pass,
    };
    let j = json!({
        "command": "check",
        "expect": if expected_pass { "pass" } else { "fail" },
        "kind": kind,
        "matched": outcome.matched,
        "report": body,
        "verdict": if verdict { "pass" } else { "fail" },
    });
    Ok((j, outcome))
}

fn run_analyze(
    env: &Env,
    form: &Expr,
    sample: &[(String, Rat, Span)],
) -> Result<Json, DslError> {
    let e = env.eval(form)?.into_elem(&env.ctx);
    let mut point: SamplePoint = SamplePoint::new();
    for (name, value, span) in sample {
        let idx = env.ctx.base_index(name).ok_or_else(|| DslError::Unbound {
            line: span.line,
            col: span.col,
            name: name.clone(),
        })?;
        point.insert(idx, value.clone());
    }
    let sample_opt = if point.is_empty() { None } else { Some(&point) };
    let dim = env.ctx.n() / 2;
    let body = (|| -> Result<Json, gbx_core::ma::MaError> {
        let s = build_ma(&env.ctx, e)?;
        let inner = match dim {
            2 => {
                let r = analyze_2d(&s, sample_opt)?;
                report::ma2_json(&r, &env.ctx)
            }
            _ => {
                let r = analyze_3d(&s, sample_opt)?;
                report::ma3_json(&r, &env.ctx)
            }
        };
        Ok(json!({ "effective": s.is_effective(), "report": inner }))
    })();
    Ok(match body {
        Ok(mut b) => {
            let obj = b.as_object_mut().expect("object");
            obj.insert("command".into(), json!("analyze"));
            obj.insert("dim".into(), json!(dim));
            b
        }
        Err(e) => json!({ "command": "analyze", "dim": dim, "error": e.to_string() }),
    })
}

/// Execute a parsed document against a fresh environment.
pub fn run_document(doc: &Document) -> Result<RunResult, DslError> {
    let mut env = Env::from_decl(&doc.context)?;
    let mut result = RunResult::default();
    for stmt in &doc.statements {
        match stmt {
            Stmt::Let {
                name,
                kind,
                value,
                span,
            } => {
                let v = env.eval(value)?;
                let v = env.typecheck(v, kind, *span)?;
                env.bindings.insert(name.clone(), v);
            }
            Stmt::Check {
                kind,
                args,
                expect,
                span,
            } => {
                let (j, outcome) = run_check(&env, kind, args, *expect, *span)?;
                result.reports.push(j);
                result.checks.push(outcome);
            }
            Stmt::Print { value, .. } => {
                let v = env.eval(value)?;
                let rendered = match v {
                    Value::Scalar(s) => s.display(env.ctx.base_names()),
                    Value::Elem(e) => e.display(),
                };
                result
                    .reports
                    .push(json!({ "command": "print", "value": rendered }));
            }
            Stmt::Analyze { form, sample, .. } => {
                result.reports.push(run_analyze(&env, form, sample)?);
            }
        }
    }
    Ok(result)
}

// ---------------------------------------------------------------------------
// CLI helpers shared by `run`/`check`/`ma`/`jacobi`.
// ---------------------------------------------------------------------------

fn parse_chart_spec(text: &str) -> Result<Vec<(String, ChartSign)>, String> {
    let mut out = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let part = part.trim();
        let (name, sign) = if let Some(name) = part.strip_suffix(">0") {
            (name, ChartSign::Positive)
        } else if let Some(name) = part.strip_suffix("<0") {
            (name, ChartSign::Negative)
        } else {
            return Err(format!(
                "chart constraint `{part}` must end in `>0` or `<0`"
            ));
        };
        out.push((name.trim().to_string(), sign));
    }
    Ok(out)
}

fn parse_sample_spec(text: &str, env: &Env) -> Result<SamplePoint, String> {
    let mut point = SamplePoint::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("sample entry `{part}` must be `name=value`"))?;
        let idx = env
            .ctx
            .base_index(name.trim())
            .ok_or_else(|| format!("unknown coordinate `{}`", name.trim()))?;
        let value = value.trim();
        let rat = if let Some((n, d)) = value.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| format!("bad number `{value}`"))?;
            let d: i64 = d.trim().parse().map_err(|_| format!("bad number `{value}`"))?;
            Rat::new(n.into(), d.into())
        } else {
            let n: i64 = value.parse().map_err(|_| format!("bad number `{value}`"))?;
            Rat::from_integer(n.into())
        };
        point.insert(idx, rat);
    }
    Ok(point)
}

fn env_for_cotangent(dim: usize, chart: &str) -> Result<Env, String> {
    let chart = parse_chart_spec(chart)?;
    let chart_refs: Vec<(&str, ChartSign)> =
        chart.iter().map(|(n, s)| (n.as_str(), *s)).collect();
    let ctx = cotangent_context(dim, &chart_refs).map_err(|e| e.to_string())?;
    let structure =
        gbx_core::algebroid::AlgebroidStructure::standard(&ctx).map_err(|e| e.to_string())?;
    Ok(Env {
        ctx,
        structure,
        bindings: Default::default(),
    })
}

fn eval_form(env: &Env, text: &str) -> Result<gbx_core::graded::GradedElement, String> {
    let expr = parse_expr(text).map_err(|e| e.to_string())?;
    Ok(env.eval(&expr).map_err(|e| e.to_string())?.into_elem(&env.ctx))
}

/// `ma analyze`: build the structure from an inline form expression and emit
/// the dimension-matched report.
pub fn cmd_ma_analyze(
    dim: usize,
    form: &str,
    chart: &str,
    sample: Option<&str>,
) -> Result<Json, String> {
    if dim != 2 && dim != 3 {
        return Err("--dim must be 2 or 3".into());
    }
    let env = env_for_cotangent(dim, chart)?;
    let omega = eval_form(&env, form)?;
    let point = match sample {
        Some(s) => Some(parse_sample_spec(s, &env)?),
        None => None,
    };
    let s = build_ma(&env.ctx, omega).map_err(|e| e.to_string())?;
    let inner = match dim {
        2 => report::ma2_json(
            &analyze_2d(&s, point.as_ref()).map_err(|e| e.to_string())?,
            &env.ctx,
        ),
        _ => report::ma3_json(
            &analyze_3d(&s, point.as_ref()).map_err(|e| e.to_string())?,
            &env.ctx,
        ),
    };
    Ok(json!({
        "command": "ma_analyze",
        "dim": dim,
        "effective": s.is_effective(),
        "report": inner,
    }))
}

/// `ma apply`: pull the form back along the 1-jet section of a base function.
pub fn cmd_ma_apply(dim: usize, form: &str, function: &str, chart: &str) -> Result<Json, String> {
    if dim != 2 && dim != 3 {
        return Err("--dim must be 2 or 3".into());
    }
    let env = env_for_cotangent(dim, chart)?;
    let omega = eval_form(&env, form)?;
    let fexpr = parse_expr(function).map_err(|e| e.to_string())?;
    let f = match env.eval(&fexpr).map_err(|e| e.to_string())? {
        Value::Scalar(s) => s,
        Value::Elem(_) => return Err("--function must be a scalar expression".into()),
    };
    let s = build_ma(&env.ctx, omega).map_err(|e| e.to_string())?;
    let result = ma_operator_apply(&s, &f).map_err(|e| e.to_string())?;
    Ok(json!({
        "command": "ma_apply",
        "dim": dim,
        "result": result.display(),
        "zero": result.is_zero(),
    }))
}

/// `jacobi analyze`: two 2-forms on the four-dimensional ambient space with
/// coordinates `(x, y, w1, w2)`, plus an optional candidate solution
/// `(u(x,y), v(x,y))` tested by restriction to its graph.
pub fn cmd_jacobi_analyze(
    omega1: &str,
    omega2: &str,
    candidate_u: Option<&str>,
    candidate_v: Option<&str>,
) -> Result<Json, String> {
    let ctx = jacobi_context().map_err(|e| e.to_string())?;
    let structure =
        gbx_core::algebroid::AlgebroidStructure::standard(&ctx).map_err(|e| e.to_string())?;
    let env = Env {
        ctx,
        structure,
        bindings: Default::default(),
    };
    let w1 = eval_form(&env, omega1)?;
    let w2 = eval_form(&env, omega2)?;
    let system = JacobiSystem::new(w1, w2).map_err(|e| e.to_string())?;
    let rep = jacobi_analyze(&system).map_err(|e| e.to_string())?;
    let mut body = report::jacobi_json(&rep, system.context());
    if let (Some(u), Some(v)) = (candidate_u, candidate_v) {
        let eval_scalar = |text: &str| -> Result<gbx_core::scalar::ScalarExpr, String> {
            let e = parse_expr(text).map_err(|e| e.to_string())?;
            match env.eval(&e).map_err(|e| e.to_string())? {
                Value::Scalar(s) => Ok(s),
                Value::Elem(_) => Err("candidate components must be scalars".into()),
            }
        };
        let (r1, r2) = jacobi_operator_apply(&system, &eval_scalar(u)?, &eval_scalar(v)?)
            .map_err(|e| e.to_string())?;
        let obj = body.as_object_mut().expect("object");
        obj.insert(
            "candidate".into(),
            json!({
                "residual1": r1.display(),
                "residual2": r2.display(),
                "solves": r1.is_zero() && r2.is_zero(),
            }),
        );
    }
    let obj = body.as_object_mut().expect("object");
    obj.insert("command".into(), json!("jacobi_analyze"));
    Ok(body)
}

/// Parse and execute a `.gbx` source text.
pub fn run_source(text: &str) -> Result<RunResult, DslError> {
    let doc = parse_document(text)?;
    run_document(&doc)
}
