//! Evaluation of DSL expressions into exact scalars and graded elements.

use crate::ast::{ContextDecl, Expr, Kind, Span};
use crate::error::DslError;
use gbx_core::algebroid::AlgebroidStructure;
use gbx_core::graded::{ChartSign, GradedContext, GradedElement};
use gbx_core::ma::cotangent_context;
use gbx_core::scalar::{rat_pow, Rat, ScalarExpr};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A DSL value: an exact scalar or a graded element.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(ScalarExpr),
    Elem(GradedElement),
}

impl Value {
    pub fn into_elem(self, ctx: &Arc<GradedContext>) -> GradedElement {
        match self {
            Value::Scalar(s) => GradedElement::scalar(ctx, s),
            Value::Elem(e) => e,
        }
    }
}

/// Evaluation environment: the coordinate context, the standard Lie algebroid
/// structure on it (used by `d`, `sch`, and the structure checks), and the
/// `let` bindings accumulated so far.
pub struct Env {
    pub ctx: Arc<GradedContext>,
    pub structure: AlgebroidStructure,
    pub bindings: BTreeMap<String, Value>,
}

/// True when the declared coordinates are exactly those of `T*M` for an
/// `n`-dimensional base: base `q1..qn, p1..pn`, fiber `dq1..dqn, dp1..dpn`.
fn cotangent_dim(decl: &ContextDecl) -> Option<usize> {
    let n2 = decl.base.len();
    if n2 == 0 || n2 % 2 != 0 || decl.fiber.len() != n2 {
        return None;
    }
    let n = n2 / 2;
    for i in 0..n {
        if decl.base[i] != format!("q{}", i + 1)
            || decl.base[n + i] != format!("p{}", i + 1)
            || decl.fiber[i] != format!("dq{}", i + 1)
            || decl.fiber[n + i] != format!("dp{}", i + 1)
        {
            return None;
        }
    }
    Some(n)
}

impl Env {
    /// Build the environment from a context declaration.  Cotangent-shaped
    /// declarations get the `T*M` naming (`@q1` vectors, `dq1` forms);
    /// anything else becomes a general context with `@fiber` θ names.
    pub fn from_decl(decl: &ContextDecl) -> Result<Env, DslError> {
        let chart: Vec<(&str, ChartSign)> = decl
            .chart
            .iter()
            .map(|(name, positive, _)| {
                (
                    name.as_str(),
                    if *positive {
                        ChartSign::Positive
                    } else {
                        ChartSign::Negative
                    },
                )
            })
            .collect();
        let ctx = if let Some(n) = cotangent_dim(decl) {
            cotangent_context(n, &chart).map_err(|e| DslError::Eval {
                line: decl.span.line,
                col: decl.span.col,
                message: e.to_string(),
            })?
        } else {
            let base: Vec<&str> = decl.base.iter().map(|s| s.as_str()).collect();
            let fiber: Vec<&str> = decl.fiber.iter().map(|s| s.as_str()).collect();
            GradedContext::with_chart(&base, &fiber, &chart).map_err(|e| DslError::Eval {
                line: decl.span.line,
                col: decl.span.col,
                message: e.to_string(),
            })?
        };
        let structure = AlgebroidStructure::standard(&ctx).map_err(|e| DslError::Eval {
            line: decl.span.line,
            col: decl.span.col,
            message: e.to_string(),
        })?;
        Ok(Env {
            ctx,
            structure,
            bindings: BTreeMap::new(),
        })
    }

    fn eval_err(&self, span: Span, message: impl Into<String>) -> DslError {
        DslError::Eval {
            line: span.line,
            col: span.col,
            message: message.into(),
        }
    }

    fn lookup(&self, name: &str, span: Span) -> Result<Value, DslError> {
        if let Some(v) = self.bindings.get(name) {
            return Ok(v.clone());
        }
        if name == "mu" {
            return Ok(Value::Elem(self.structure.mu().clone()));
        }
        if let Some(i) = self.ctx.base_index(name) {
            return Ok(Value::Scalar(ScalarExpr::var(i)));
        }
        if let Some(a) = self.ctx.fiber_index(name) {
            return Ok(Value::Elem(GradedElement::xi(&self.ctx, a)));
        }
        if let Some(a) = self.ctx.theta_index(name) {
            return Ok(Value::Elem(GradedElement::theta(&self.ctx, a)));
        }
        if let Some(i) = self
            .ctx
            .momentum_names()
            .iter()
            .position(|m| m == name)
        {
            return Ok(Value::Elem(GradedElement::momentum(&self.ctx, i)));
        }
        Err(DslError::Unbound {
            line: span.line,
            col: span.col,
            name: name.to_string(),
        })
    }

    pub fn eval(&self, expr: &Expr) -> Result<Value, DslError> {
        match expr {
            Expr::Int(n, _) => Ok(Value::Scalar(ScalarExpr::from_int(*n))),
            Expr::Name(name, span) => self.lookup(name, *span),
            Expr::Neg(inner, _) => Ok(match self.eval(inner)? {
                Value::Scalar(s) => Value::Scalar(s.neg()),
                Value::Elem(e) => Value::Elem(e.neg()),
            }),
            Expr::Add(a, b, span) => self.combine(a, b, *span, false),
            Expr::Sub(a, b, span) => self.combine(a, b, *span, true),
            Expr::Mul(a, b, span) => {
                let (va, vb) = (self.eval(a)?, self.eval(b)?);
                self.multiply(va, vb, *span)
            }
            Expr::Div(a, b, span) => {
                let va = self.eval(a)?;
                let vb = self.eval(b)?;
                let Value::Scalar(s) = vb else {
                    return Err(self.eval_err(*span, "division by a non-scalar"));
                };
                let inv = s
                    .recip()
                    .map_err(|e| self.eval_err(*span, e.to_string()))?;
                self.multiply(va, Value::Scalar(inv), *span)
            }
            Expr::Caret(a, b, span) => {
                let va = self.eval(a)?;
                let vb = self.eval(b)?;
                if let Value::Scalar(ref s) = vb {
                    if let Some(r) = s.as_rat() {
                        return self.pow(va, &r, *span);
                    }
                }
                self.multiply(va, vb, *span)
            }
            Expr::Call(name, args, span) => self.call(name, args, *span),
        }
    }

    fn combine(&self, a: &Expr, b: &Expr, span: Span, sub: bool) -> Result<Value, DslError> {
        let va = self.eval(a)?;
        let vb = self.eval(b)?;
        Ok(match (va, vb) {
            (Value::Scalar(x), Value::Scalar(y)) => {
                Value::Scalar(if sub { x.sub(&y) } else { x.add(&y) })
            }
            (x, y) => {
                let xe = x.into_elem(&self.ctx);
                let ye = y.into_elem(&self.ctx);
                let _ = span;
                Value::Elem(if sub { xe.sub(&ye) } else { xe.add(&ye) })
            }
        })
    }

    fn multiply(&self, a: Value, b: Value, span: Span) -> Result<Value, DslError> {
        Ok(match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x.mul(&y)),
            (Value::Scalar(s), Value::Elem(e)) | (Value::Elem(e), Value::Scalar(s)) => {
                Value::Elem(e.scale(&s))
            }
            (Value::Elem(x), Value::Elem(y)) => Value::Elem(
                x.wedge(&y)
                    .map_err(|e| self.eval_err(span, e.to_string()))?,
            ),
        })
    }

    fn pow(&self, base: Value, exp: &Rat, span: Span) -> Result<Value, DslError> {
        match base {
            Value::Scalar(s) => Ok(Value::Scalar(self.scalar_pow(&s, exp, span)?)),
            Value::Elem(e) => {
                if !exp.denom().is_one() || exp.is_negative() {
                    return Err(self.eval_err(
                        span,
                        "a graded element can only be raised to a non-negative integer power",
                    ));
                }
                let k = exp
                    .numer()
                    .to_u32()
                    .ok_or_else(|| self.eval_err(span, "exponent out of range"))?;
                let mut acc = GradedElement::from_int(&self.ctx, 1);
                for _ in 0..k {
                    acc = acc
                        .wedge(&e)
                        .map_err(|err| self.eval_err(span, err.to_string()))?;
                }
                Ok(Value::Elem(acc))
            }
        }
    }

    fn scalar_pow(&self, s: &ScalarExpr, exp: &Rat, span: Span) -> Result<ScalarExpr, DslError> {
        if exp.is_zero() {
            return Ok(ScalarExpr::one());
        }
        if exp.denom().is_one() {
            let k = exp
                .numer()
                .to_i64()
                .ok_or_else(|| self.eval_err(span, "exponent out of range"))?;
            let mut acc = ScalarExpr::one();
            for _ in 0..k.unsigned_abs() {
                acc = acc.mul(s);
            }
            if k < 0 {
                acc = acc
                    .recip()
                    .map_err(|e| self.eval_err(span, e.to_string()))?;
            }
            return Ok(acc);
        }
        // Fractional power: the base must be a single monomial with a
        // rational coefficient that is an exact power.
        if *s.denominator() != gbx_core::scalar::Poly::one() {
            return Err(self.eval_err(span, "fractional power of a non-monomial scalar"));
        }
        let terms = s.numerator().terms();
        let [(mono, coeff)] = terms else {
            return Err(self.eval_err(span, "fractional power of a non-monomial scalar"));
        };
        let c = rat_pow(coeff, exp).map_err(|e| self.eval_err(span, e.to_string()))?;
        let mut out = ScalarExpr::from_rat(c);
        for (v, e) in mono.exps() {
            out = out.mul(&ScalarExpr::var_pow(*v, e * exp));
        }
        Ok(out)
    }

    fn call(&self, name: &str, args: &[Expr], span: Span) -> Result<Value, DslError> {
        let arity = match name {
            "d" => 1,
            "bb" | "sch" => 2,
            _ => {
                return Err(self.eval_err(span, format!("unknown function `{name}`")));
            }
        };
        if args.len() != arity {
            return Err(self.eval_err(
                span,
                format!("`{name}` takes {arity} argument(s), got {}", args.len()),
            ));
        }
        let elems: Vec<GradedElement> = args
            .iter()
            .map(|a| Ok(self.eval(a)?.into_elem(&self.ctx)))
            .collect::<Result<_, DslError>>()?;
        let out = match name {
            "d" => self
                .structure
                .differential_apply(&elems[0])
                .map_err(|e| self.eval_err(span, e.to_string()))?,
            "bb" => elems[0]
                .big_bracket(&elems[1])
                .map_err(|e| self.eval_err(span, e.to_string()))?,
            _ => self
                .structure
                .schouten_bracket(&elems[0], &elems[1])
                .map_err(|e| self.eval_err(span, e.to_string()))?,
        };
        Ok(Value::Elem(out))
    }

    /// Check a value against a declared kind; returns the value unchanged.
    pub fn typecheck(&self, value: Value, kind: &Kind, span: Span) -> Result<Value, DslError> {
        let type_err = |found: String| DslError::Type {
            line: span.line,
            col: span.col,
            message: format!("expected {kind}, found {found}"),
        };
        match kind {
            Kind::Element => Ok(value),
            Kind::Scalar => match &value {
                Value::Scalar(_) => Ok(value),
                Value::Elem(e) if e.is_zero() => Ok(value),
                Value::Elem(e) => match e.shifted_bidegree() {
                    Ok(Some((-1, -1))) => Ok(value),
                    Ok(Some((p, q))) => {
                        Err(type_err(format!("bidegree ({}, {})", p + 1, q + 1)))
                    }
                    _ => Err(type_err("an inhomogeneous element".into())),
                },
            },
            Kind::Form(k) => {
                let e = value.clone().into_elem(&self.ctx);
                if e.is_zero() {
                    return Ok(value);
                }
                if !e.is_form() {
                    return Err(type_err("an element with vector legs".into()));
                }
                match e.shifted_bidegree() {
                    Ok(Some((-1, q))) if q == *k as i64 - 1 => Ok(value),
                    Ok(Some((p, q))) => {
                        Err(type_err(format!("a form of bidegree ({}, {})", p + 1, q + 1)))
                    }
                    _ => Err(type_err("an inhomogeneous element".into())),
                }
            }
            Kind::Multivector(k) => {
                let e = value.clone().into_elem(&self.ctx);
                if e.is_zero() {
                    return Ok(value);
                }
                if !e.is_multivector() {
                    return Err(type_err("an element with form legs".into()));
                }
                match e.shifted_bidegree() {
                    Ok(Some((p, -1))) if p == *k as i64 - 1 => Ok(value),
                    Ok(Some((p, q))) => Err(type_err(format!(
                        "a multivector of bidegree ({}, {})",
                        p + 1,
                        q + 1
                    ))),
                    _ => Err(type_err("an inhomogeneous element".into())),
                }
            }
            Kind::Endo => {
                let e = value.clone().into_elem(&self.ctx);
                gbx_core::compat::Endo11::new(e).map_err(|err| type_err(err.to_string()))?;
                Ok(value)
            }
            Kind::Structure => {
                let e = value.clone().into_elem(&self.ctx);
                AlgebroidStructure::validate(e).map_err(|err| type_err(err.to_string()))?;
                Ok(value)
            }
        }
    }
}
