//! Deterministic JSON rendering of analysis reports.
//!
//! `serde_json`'s default map is ordered, so building values through
//! `serde_json::json!` yields sorted keys and byte-stable output; every
//! tensor is rendered through the same canonical pretty-printer used in
//! error messages ([`GradedElement::display`] / [`ScalarExpr::display`]).

use gbx_core::frame::ScalarMatrix;
use gbx_core::graded::GradedContext;
use gbx_core::ma::{JacobiReport, MA2Report, MA3Report};
use gbx_core::scalar::ScalarExpr;
use serde_json::{json, Value as Json};
use std::sync::Arc;

pub const SCHEMA: &str = "gbx-report/1";

pub fn scalar_json(s: &ScalarExpr, ctx: &Arc<GradedContext>) -> Json {
    Json::String(s.display(ctx.base_names()))
}

pub fn matrix_json(m: &ScalarMatrix, ctx: &Arc<GradedContext>) -> Json {
    let rows: Vec<Json> = (0..m.size())
        .map(|i| {
            Json::Array(
                (0..m.size())
                    .map(|j| scalar_json(m.at(i, j), ctx))
                    .collect(),
            )
        })
        .collect();
    Json::Array(rows)
}

pub fn ma2_json(r: &MA2Report, ctx: &Arc<GradedContext>) -> Json {
    let nondegenerate = r.nondegenerate.as_ref().map(|n| {
        let generalized: Vec<Json> = n
            .generalized
            .iter()
            .map(|(label, outcome)| match outcome {
                Ok(v) => json!({
                    "integrable": v.integrable,
                    "kind": v.kind,
                    "label": label,
                    "residual": v.residual.display(),
                }),
                Err(e) => json!({
                    "error": e.to_string(),
                    "label": label,
                }),
            })
            .collect();
        json!({
            "d_omega_tilde": n.d_omega_tilde.display(),
            "generalized": generalized,
            "integrable": n.integrable,
            "j": matrix_json(n.j.matrix(), ctx),
            "omega_tilde": n.omega_tilde.element().display(),
            "pi_tilde": n.pi_tilde.element().display(),
        })
    });
    json!({
        "a": matrix_json(r.a.matrix(), ctx),
        "d_omega": r.d_omega.display(),
        "nondegenerate": nondegenerate,
        "pfaffian": scalar_json(&r.pfaffian, ctx),
        "square_residual_zero": r.square_residual.is_zero(),
        "trace_a": scalar_json(&r.trace_a, ctx),
        "type": r.kind,
        "unimodular": r.unimodular,
    })
}

pub fn ma3_json(r: &MA3Report, ctx: &Arc<GradedContext>) -> Json {
    json!({
        "h": matrix_json(r.h.matrix(), ctx),
        "h_square_residual_zero": r.h_square_residual.is_zero(),
        "lambda": scalar_json(&r.lambda, ctx),
        "orbit": r.orbit,
        "q": matrix_json(&r.q, ctx),
        "vol": r.vol.display(),
    })
}

pub fn jacobi_json(r: &JacobiReport, ctx: &Arc<GradedContext>) -> Json {
    let recursion = r.recursion.as_ref().map(|rec| {
        json!({
            "compat_pi1_zero": rec.compat_pi1.is_zero(),
            "compat_pi_zero": rec.compat_pi.is_zero(),
            "eq_c0_zero": rec.eq_c0.is_zero(),
            "eq_c1_zero": rec.eq_c1.is_zero(),
            "eq_c_zero": rec.eq_c.is_zero(),
            "torsion_zero": rec.torsion.is_zero(),
        })
    });
    json!({
        "a": matrix_json(r.a.matrix(), ctx),
        "a_square_residual_zero": r.a_square_residual.as_ref().map(|m| m.is_zero()),
        "bihamiltonian": {
            "cross": r.bihamiltonian.cross.display(),
            "holds": r.bihamiltonian.holds,
            "squares": r.bihamiltonian.squares.display(),
        },
        "cross": r.cross.display(),
        "epsilon": r.epsilon.as_ref().map(|e| scalar_json(e, ctx)),
        "nondegenerate": r.nondegenerate,
        "recursion": recursion,
    })
}

/// Wrap per-command reports into the top-level document.
pub fn document_json(reports: Vec<Json>, ok: bool) -> Json {
    json!({
        "ok": ok,
        "reports": reports,
        "schema": SCHEMA,
    })
}

/// Serialize with a trailing newline; the single serialization point for
/// golden files and stdout.
pub fn to_bytes(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON serialization cannot fail");
    s.push('\n');
    s
}
