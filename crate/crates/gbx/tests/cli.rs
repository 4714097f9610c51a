//! End-to-end tests of the `gbx` binary and the parse/print round trip.

use gbx::ast::Expectation;
use gbx::eval::Env;
use gbx::parse::parse_expr;
use gbx::run::run_source;
use gbx_core::algebroid::AlgebroidStructure;
use gbx_core::graded::GradedContext;
use gbx_core::ma::cotangent_context;
use gbx_core::sampling::random_homogeneous;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gbx"))
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn golden(name: &str) -> Vec<u8> {
    std::fs::read(fixture(&format!("golden/{name}"))).expect("golden file exists")
}

#[test]
fn golden_von_karman_byte_identical() {
    let out = bin()
        .args(["run", "--json", &fixture("von_karman.gbx")])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(out.stdout, golden("von_karman.json"));
}

#[test]
fn golden_special_lagrangian_byte_identical() {
    let out = bin()
        .args(["run", "--json", &fixture("special_lagrangian.gbx")])
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(out.stdout, golden("special_lagrangian.json"));
}

#[test]
fn output_is_deterministic() {
    let run = || {
        bin()
            .args(["run", "--json", &fixture("special_lagrangian.gbx")])
            .output()
            .expect("binary runs")
            .stdout
    };
    assert_eq!(run(), run());
}

/// `expect fail` is satisfied by a failing check: exit status 0, the failing
/// residual recorded in the report.
#[test]
fn expect_fail_semantics() {
    let out = bin()
        .args(["check", &fixture("von_karman.gbx")])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("check OmegaN: fail (expected fail) -> ok"), "{text}");

    // The same check without `expect fail` flips the exit status.
    let mut f = tempfile::NamedTempFile::new().expect("temp file");
    let source = std::fs::read_to_string(fixture("von_karman.gbx"))
        .expect("fixture readable")
        .replace("check OmegaN(tilde, J) expect fail;", "check OmegaN(tilde, J);");
    f.write_all(source.as_bytes()).expect("write");
    let out = bin()
        .args(["check", f.path().to_str().expect("utf8 path")])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn syntax_error_has_location() {
    let err = run_source("context base(q1) fiber(xi1);\nlet x = 3;\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("syntax error at 2:7"), "{msg}");
}

#[test]
fn type_error_on_degree_mismatch() {
    let err = run_source(
        "context base(q1, q2, p1, p2) fiber(dq1, dq2, dp1, dp2);\nlet x : form2 = dp1;\n",
    )
    .unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("type error"), "{msg}");
    assert!(msg.contains("expected form2"), "{msg}");
}

#[test]
fn unbound_name_is_reported() {
    let err = run_source("context base(q1) fiber(xi1);\nprint nope;\n").unwrap_err();
    assert!(err.to_string().contains("unbound name `nope`"), "{err}");
}

#[test]
fn big_bracket_of_mu_with_itself_is_zero() {
    let result = run_source(
        "context base(x, y) fiber(xi1, xi2);\ncheck Zero(bb(mu, mu));\n",
    )
    .expect("runs");
    assert!(result.ok());
    assert_eq!(result.checks.len(), 1);
    assert_eq!(result.checks[0].expected, Expectation::Pass);
    assert!(result.checks[0].verdict);
}

fn roundtrip_env(ctx: std::sync::Arc<GradedContext>) -> Env {
    let structure = AlgebroidStructure::standard(&ctx).expect("standard structure");
    Env {
        ctx,
        structure,
        bindings: Default::default(),
    }
}

/// parse ∘ print = identity on canonical forms: the pretty-printed rendering
/// of a random element evaluates back to the same element.
#[test]
fn parse_print_round_trip() {
    let contexts = vec![
        cotangent_context(2, &[]).expect("context"),
        GradedContext::new(&["x", "y", "z"], &["xi1", "xi2", "xi3"]).expect("context"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for ctx in contexts {
        let env = roundtrip_env(ctx.clone());
        for t in 0..=2usize {
            for s in 0..=2usize {
                for pdeg in 0..=1u16 {
                    for _ in 0..10 {
                        let elem = random_homogeneous(&mut rng, &ctx, t, s, pdeg, 2);
                        let printed = elem.display();
                        let parsed = parse_expr(&printed)
                            .unwrap_or_else(|e| panic!("parse `{printed}`: {e}"));
                        let back = env
                            .eval(&parsed)
                            .unwrap_or_else(|e| panic!("eval `{printed}`: {e}"))
                            .into_elem(&ctx);
                        assert_eq!(back, elem, "round trip failed on `{printed}`");
                    }
                }
            }
        }
    }
}
