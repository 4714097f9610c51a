//! Symplectic Monge-Ampère structures on cotangent bundles in dimensions 2
//! and 3, the associated operators and invariants, and Jacobi systems.
//!
//! The cotangent bundle `T*M` is modelled as a graded context whose base
//! coordinates are `(q_1..q_n, p_1..p_n)` and whose fiber generators are the
//! differentials `(dq_1..dq_n, dp_1..dp_n)` with partner vector fields
//! `@q_i, @p_i`.  The canonical symplectic form is `Ω = Σ dq_i∧dp_i` and the
//! Lie algebroid structure is the standard one on `T(T*M)`.
//!
//! Dimension 2: the tensor `A_ω = {π_Ω,ω}` with `A_ω² + Pf(ω)·Id = 0`, the
//! normalized form `ω̃ = ω/√|Pf|` and tensor `J_ω`, ellipticity from the sign
//! of the Pfaffian on the declared chart, and the three double endomorphisms
//! attached to a nondegenerate structure.
//!
//! Dimension 3: the Hitchin endomorphism `H_ω(X) = i_Xω∧ω` (through the
//! Liouville volume identification), the Hitchin Pfaffian
//! `λ_ω = Tr(H_ω²)/6`, the quadratic form `q_ω`, orbit classification, and
//! the generalized structure `π_Ω + H_ω` on the double.
//!
//! Signs that the symbolic engine cannot decide (ellipticity, orbit type,
//! quadratic-form signatures) are resolved exactly on a declared chart or at
//! a declared rational sample point, which the reports record implicitly by
//! requiring them as input.

use crate::algebroid::{AlgebroidError, AlgebroidStructure};
use crate::compat::{
    endo_from, invert_two_form, Bivector, CompatError, Endo11, TwoForm,
};
use crate::frame::{endo_compose, symmetric_signature, two_form_from_matrix, FrameError, ScalarMatrix};
use crate::gcs::{classify_generalized, DoubleEndo, GcsError, GeneralizedVerdict};
use crate::graded::{ChartSign, GradedContext, GradedElement, GradedError, OddGen, Word};
use crate::scalar::{rat, rat_i, rat_pow, Rat, ScalarError, ScalarExpr};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaError {
    #[error("form degree does not match the base dimension")]
    WrongDegree,
    #[error("operation requires an effective form")]
    EffectivityRequired,
    #[error("function must depend only on the base coordinates of M")]
    NotABaseFunction,
    #[error("form must be closed")]
    NotClosed,
    #[error("Pfaffian is not a unit on the declared chart")]
    PfaffianNotUnit,
    #[error("square root is not representable on the declared chart")]
    SqrtUnsupported,
    #[error("2-form is degenerate")]
    DegenerateForm,
    #[error("could not orient a frame block against the bracket convention")]
    BlockOrientation,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error(transparent)]
    Compat(#[from] CompatError),
    #[error(transparent)]
    Gcs(#[from] GcsError),
}

/// A rational evaluation point for sign decisions, keyed by base-variable
/// index.
pub type SamplePoint = BTreeMap<u32, Rat>;

/// Build the graded context of `T*M` for an `n`-dimensional base, with base
/// coordinates `q1..qn, p1..pn`, differentials `dq1.., dp1..`, and the given
/// sign chart.
pub fn cotangent_context(
    n: usize,
    chart: &[(&str, ChartSign)],
) -> Result<Arc<GradedContext>, MaError> {
    let mut base: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    base.extend((1..=n).map(|i| format!("p{i}")));
    let mut fiber: Vec<String> = (1..=n).map(|i| format!("dq{i}")).collect();
    fiber.extend((1..=n).map(|i| format!("dp{i}")));
    let thetas: Vec<String> = base.iter().map(|b| format!("@{b}")).collect();
    let momenta: Vec<String> = base.iter().map(|b| format!("P_{b}")).collect();
    let base_refs: Vec<&str> = base.iter().map(|s| s.as_str()).collect();
    let fiber_refs: Vec<&str> = fiber.iter().map(|s| s.as_str()).collect();
    Ok(GradedContext::with_names(
        &base_refs,
        &fiber_refs,
        &thetas,
        &momenta,
        chart,
    )?)
}

/// The canonical symplectic form `Ω = Σ dq_i∧dp_i` on a cotangent context.
pub fn canonical_two_form(ctx: &Arc<GradedContext>) -> Result<TwoForm, MaError> {
    let n = ctx.n() / 2;
    let mut omega = GradedElement::zero(ctx);
    for i in 0..n {
        omega = omega.add(&GradedElement::xi(ctx, i).wedge(&GradedElement::xi(ctx, n + i))?);
    }
    Ok(TwoForm::new(omega)?)
}

/// A Monge-Ampère structure `(Ω, ω)` on `T*M`.
#[derive(Debug, Clone)]
pub struct MAStructure {
    ctx: Arc<GradedContext>,
    dim: usize,
    omega: GradedElement,
    canonical: TwoForm,
    canonical_inverse: Bivector,
    structure: AlgebroidStructure,
    effectivity_residual: GradedElement,
}

impl MAStructure {
    pub fn context(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    /// Base dimension `n` of `M`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn omega(&self) -> &GradedElement {
        &self.omega
    }

    pub fn canonical_form(&self) -> &TwoForm {
        &self.canonical
    }

    pub fn canonical_bivector(&self) -> &Bivector {
        &self.canonical_inverse
    }

    pub fn structure(&self) -> &AlgebroidStructure {
        &self.structure
    }

    /// `ω∧Ω`; zero exactly when the structure is effective.
    pub fn effectivity_residual(&self) -> &GradedElement {
        &self.effectivity_residual
    }

    pub fn is_effective(&self) -> bool {
        self.effectivity_residual.is_zero()
    }

    /// The other characterization of effectivity: the interior product
    /// `i_{π_Ω}ω` (double contraction of the canonical bivector into `ω`),
    /// an `(n−2)`-form that vanishes exactly for effective `ω`.
    pub fn effectivity_contraction(&self) -> Result<GradedElement, MaError> {
        contract_bivector(self.canonical_inverse.element(), &self.omega)
    }

    /// `dω` for the standard differential on `T*M`.
    pub fn d_omega(&self) -> Result<GradedElement, MaError> {
        Ok(self.structure.differential_apply(&self.omega)?)
    }
}

/// Assemble a Monge-Ampère structure from an `n`-form on a cotangent context.
pub fn build_ma(ctx: &Arc<GradedContext>, omega: GradedElement) -> Result<MAStructure, MaError> {
    let n = ctx.n() / 2;
    if ctx.n() != 2 * n || ctx.r() != 2 * n {
        return Err(MaError::WrongDegree);
    }
    if !omega.is_zero() {
        omega
            .expect_shifted((-1, n as i64 - 1))
            .map_err(|_| MaError::WrongDegree)?;
        if !omega.is_form() {
            return Err(MaError::WrongDegree);
        }
    }
    let canonical = canonical_two_form(ctx)?;
    let canonical_inverse = invert_two_form(&canonical)?;
    let structure = AlgebroidStructure::standard(ctx)?;
    let effectivity_residual = omega.wedge(canonical.element())?;
    Ok(MAStructure {
        ctx: ctx.clone(),
        dim: n,
        omega,
        canonical,
        canonical_inverse,
        structure,
        effectivity_residual,
    })
}

/// Interior product of a momentum-free bivector into a form: for each stored
/// term `c·θ_a∧θ_b` of `π` (with `a < b`) the double contraction
/// `c·{θ_a, {θ_b, u}}`.
pub fn contract_bivector(
    pi: &GradedElement,
    u: &GradedElement,
) -> Result<GradedElement, MaError> {
    let ctx = pi.context();
    let r = ctx.r();
    let mut out = GradedElement::zero(ctx);
    for (pexp, word, coeff) in pi.terms() {
        if pexp.iter().any(|&k| k != 0) {
            return Err(MaError::WrongDegree);
        }
        let mut legs = Vec::new();
        for a in 0..r {
            if word & (1 << OddGen::Xi(a).bit(r)) != 0 {
                return Err(MaError::WrongDegree);
            }
            if word & (1 << OddGen::Theta(a).bit(r)) != 0 {
                legs.push(a);
            }
        }
        if legs.len() != 2 {
            return Err(MaError::WrongDegree);
        }
        let inner = GradedElement::theta(ctx, legs[0])
            .big_bracket(&GradedElement::theta(ctx, legs[1]).big_bracket(u)?)?;
        out = out.add(&inner.scale(coeff));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Substitution along sections (the operator Δ_ω and graph restrictions)
// ---------------------------------------------------------------------------

/// Pull a momentum-free form back along a substitution: base variables are
/// replaced by scalar expressions and fiber differentials by 1-forms.
fn pullback(
    elem: &GradedElement,
    var_subs: &BTreeMap<u32, ScalarExpr>,
    xi_subs: &BTreeMap<usize, GradedElement>,
) -> Result<GradedElement, MaError> {
    let ctx = elem.context();
    let r = ctx.r();
    let mut out = GradedElement::zero(ctx);
    for (pexp, word, coeff) in elem.terms() {
        if pexp.iter().any(|&k| k != 0) {
            return Err(MaError::NotABaseFunction);
        }
        let mut acc = GradedElement::scalar(ctx, coeff.substitute(var_subs)?);
        for a in 0..r {
            if word & (1 << OddGen::Theta(a).bit(r)) != 0 {
                return Err(MaError::WrongDegree);
            }
            if word & (1 << OddGen::Xi(a).bit(r)) != 0 {
                let factor = match xi_subs.get(&a) {
                    Some(f) => f.clone(),
                    None => GradedElement::xi(ctx, a),
                };
                acc = acc.wedge(&factor)?;
            }
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// The Monge-Ampère operator: pull `ω` back along the section `q ↦ (q, df)`,
/// substituting `p_i → ∂f/∂q_i` and `dp_i → Σ_j f_{q_iq_j} dq_j`.
pub fn ma_operator_apply(s: &MAStructure, f: &ScalarExpr) -> Result<GradedElement, MaError> {
    let n = s.dim;
    for v in n..2 * n {
        if !f.diff(v as u32).is_zero() {
            return Err(MaError::NotABaseFunction);
        }
    }
    let mut var_subs = BTreeMap::new();
    let mut xi_subs = BTreeMap::new();
    for i in 0..n {
        let fi = f.diff(i as u32);
        var_subs.insert((n + i) as u32, fi.clone());
        let mut dpi = GradedElement::zero(&s.ctx);
        for j in 0..n {
            dpi = dpi.add(&GradedElement::xi(&s.ctx, j).scale(&fi.diff(j as u32)));
        }
        xi_subs.insert(n + i, dpi);
    }
    pullback(&s.omega, &var_subs, &xi_subs)
}

// ---------------------------------------------------------------------------
// Sign decisions on charts and sample points
// ---------------------------------------------------------------------------

/// Exact sign of an expression: constants directly, single monomials through
/// the chart, anything else at the sample point.  `None` when undecidable.
pub fn sign_of(
    ctx: &Arc<GradedContext>,
    expr: &ScalarExpr,
    sample: Option<&SamplePoint>,
) -> Option<i8> {
    if let Some(c) = expr.as_rat() {
        return Some(rat_sign(&c));
    }
    if let Some(s) = monomial_chart_sign(ctx, expr) {
        return Some(s);
    }
    if let Some(point) = sample {
        if let Ok(v) = expr.eval(point) {
            return Some(rat_sign(&v));
        }
    }
    None
}

fn rat_sign(c: &Rat) -> i8 {
    if c.is_zero() {
        0
    } else if c.is_negative() {
        -1
    } else {
        1
    }
}

fn single_monomial(expr: &ScalarExpr) -> Option<(crate::scalar::Monomial, Rat)> {
    if expr.numerator().terms().len() != 1 || expr.denominator().terms().len() != 1 {
        return None;
    }
    let (nm, nc) = &expr.numerator().terms()[0];
    let (dm, dc) = &expr.denominator().terms()[0];
    Some((nm.div(dm), nc / dc))
}

fn monomial_chart_sign(ctx: &Arc<GradedContext>, expr: &ScalarExpr) -> Option<i8> {
    let (m, c) = single_monomial(expr)?;
    let mut sign = rat_sign(&c);
    for (v, e) in m.exps() {
        match ctx.chart_sign(*v)? {
            ChartSign::Positive => {}
            ChartSign::Negative => {
                if e.denom() == &num_bigint::BigInt::from(1) {
                    if (e.numer() % 2u8) != num_bigint::BigInt::from(0) {
                        sign = -sign;
                    }
                } else {
                    return None;
                }
            }
        }
    }
    Some(sign)
}

/// `√|expr|` for a single monomial whose sign is decided on the chart.
/// Requires every charted variable with a nonzero exponent to be positive
/// and the rational coefficient to have an exact square root.
pub fn sqrt_abs_on_chart(
    ctx: &Arc<GradedContext>,
    expr: &ScalarExpr,
) -> Result<ScalarExpr, MaError> {
    let (m, c) = single_monomial(expr).ok_or(MaError::SqrtUnsupported)?;
    let abs_c = if c.is_negative() { -c } else { c };
    let root_c = rat_pow(&abs_c, &rat(1, 2)).map_err(|_| MaError::SqrtUnsupported)?;
    let mut out = ScalarExpr::from_rat(root_c);
    for (v, e) in m.exps() {
        if !e.is_zero() && ctx.chart_sign(*v) != Some(ChartSign::Positive) {
            return Err(MaError::SqrtUnsupported);
        }
        out = out.mul(&ScalarExpr::var_pow(*v, e / Rat::from_integer(2.into())));
    }
    Ok(out)
}

/// Coefficient of the full fiber top word.
fn top_coefficient(elem: &GradedElement) -> ScalarExpr {
    let ctx = elem.context();
    let r = ctx.r();
    let mut word: Word = 0;
    for a in 0..r {
        word |= 1 << OddGen::Xi(a).bit(r);
    }
    elem.coefficient(&vec![0u16; ctx.n()], word)
}

// ---------------------------------------------------------------------------
// Dimension 2
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorType {
    Elliptic,
    Hyperbolic,
    DegenerateLocus,
}

/// The part of the 2-D analysis that exists only for a nondegenerate
/// (unit-Pfaffian) structure.
#[derive(Debug, Clone)]
pub struct MA2Nondegenerate {
    pub omega_tilde: TwoForm,
    pub pi_tilde: Bivector,
    pub j: Endo11,
    pub d_omega_tilde: GradedElement,
    pub integrable: bool,
    /// Classification of the three double endomorphisms attached to the
    /// structure, keyed by a short label.
    pub generalized: Vec<(String, Result<GeneralizedVerdict, GcsError>)>,
}

#[derive(Debug, Clone)]
pub struct MA2Report {
    pub a: Endo11,
    pub pfaffian: ScalarExpr,
    /// `A_ω² + Pf(ω)·Id` as a matrix; zero for effective forms.
    pub square_residual: ScalarMatrix,
    pub trace_a: ScalarExpr,
    pub unimodular: bool,
    pub d_omega: GradedElement,
    pub kind: OperatorType,
    pub nondegenerate: Option<MA2Nondegenerate>,
}

/// Orientation `ε` with `B(π_Ω)·C(Ω) = ε·Id` in the block convention of
/// [`DoubleEndo`]; fixes the frame presentation of `Ω♭`-based blocks.
fn pairing_orientation(s: &MAStructure) -> Result<i8, MaError> {
    let r = s.ctx.r();
    let b = DoubleEndo::new(&s.ctx, Some(&s.canonical_inverse), None, None).block_matrix()?;
    let c = DoubleEndo::new(&s.ctx, None, None, Some(&s.canonical)).block_matrix()?;
    let mut bw = ScalarMatrix::zeros(r);
    for i in 0..r {
        for j in 0..r {
            let mut acc = ScalarExpr::zero();
            for k in 0..r {
                acc = acc.add(&b.at(i, r + k).mul(c.at(r + k, j)));
            }
            bw.set(i, j, acc);
        }
    }
    for cand in [1i8, -1] {
        let target = ScalarMatrix::identity(r).scale(&ScalarExpr::from_int(cand as i64));
        if bw.sub(&target).is_zero() {
            return Ok(cand);
        }
    }
    Err(MaError::BlockOrientation)
}

/// The 2-form whose lower-left block (in the [`DoubleEndo`] convention) is
/// the given skew matrix.
fn two_form_with_c_block(
    ctx: &Arc<GradedContext>,
    m: &ScalarMatrix,
) -> Result<TwoForm, MaError> {
    let r = ctx.r();
    let candidate = two_form_from_matrix(ctx, m)?;
    for elem in [candidate.clone(), candidate.neg()] {
        let block = DoubleEndo::from_element(elem.clone())?.block_matrix()?;
        let mut ok = true;
        'outer: for i in 0..r {
            for j in 0..r {
                if &block.at(r + i, j).sub(m.at(i, j)) != &ScalarExpr::zero() {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return Ok(TwoForm::new(elem)?);
        }
    }
    Err(MaError::BlockOrientation)
}

pub fn analyze_2d(
    s: &MAStructure,
    sample: Option<&SamplePoint>,
) -> Result<MA2Report, MaError> {
    if s.dim != 2 {
        return Err(MaError::WrongDegree);
    }
    let omega_form = TwoForm::new(s.omega.clone())?;
    let a = endo_from(&s.canonical_inverse, &omega_form)?;
    let pfaffian = top_coefficient(&s.omega.wedge(&s.omega)?)
        .div(&top_coefficient(&s.canonical.element().wedge(s.canonical.element())?))?;
    let square_residual = a
        .matrix()
        .mul(a.matrix())
        .add(&ScalarMatrix::identity(s.ctx.r()).scale(&pfaffian));
    let trace_a = a.matrix().trace();
    let d_omega = s.d_omega()?;

    let sign = sign_of(&s.ctx, &pfaffian, sample);
    let unit = pfaffian
        .as_rat()
        .map(|c| !c.is_zero())
        .unwrap_or_else(|| monomial_chart_sign(&s.ctx, &pfaffian).is_some());
    let kind = match (unit, sign) {
        (true, Some(1)) => OperatorType::Elliptic,
        (true, Some(-1)) => OperatorType::Hyperbolic,
        _ => OperatorType::DegenerateLocus,
    };

    let nondegenerate = if kind == OperatorType::DegenerateLocus {
        None
    } else {
        let sqrt = sqrt_abs_on_chart(&s.ctx, &pfaffian)?;
        let omega_tilde = TwoForm::new(s.omega.scale(&sqrt.recip()?))?;
        let pi_tilde = invert_two_form(&omega_tilde)?;
        let j = endo_from(&s.canonical_inverse, &omega_tilde)?;
        let d_omega_tilde = s.structure.differential_apply(omega_tilde.element())?;
        let integrable = d_omega_tilde.is_zero();

        let eps = pairing_orientation(s)?;
        let mut generalized = Vec::new();
        let j_double = DoubleEndo::new(&s.ctx, Some(&s.canonical_inverse), Some(&j), None);
        generalized.push((
            "pi+J".to_string(),
            classify_generalized(&s.structure, &j_double),
        ));
        let lambda_prime = TwoForm::new(s.canonical.element().scale_int(-2 * eps as i64))?;
        let jp_double = DoubleEndo::new(
            &s.ctx,
            Some(&s.canonical_inverse),
            Some(&j),
            Some(&lambda_prime),
        );
        generalized.push((
            "pi+J-2Omega".to_string(),
            classify_generalized(&s.structure, &jp_double),
        ));
        // Divergence-type endomorphism: lower-left block −Ω♭(Id + A²).
        let w = {
            let block =
                DoubleEndo::new(&s.ctx, None, None, Some(&s.canonical)).block_matrix()?;
            let r = s.ctx.r();
            let mut m = ScalarMatrix::zeros(r);
            for i in 0..r {
                for jx in 0..r {
                    m.set(i, jx, block.at(r + i, jx).clone());
                }
            }
            m
        };
        let target = w
            .mul(&ScalarMatrix::identity(s.ctx.r()).add(&a.matrix().mul(a.matrix())))
            .scale(&ScalarExpr::from_int(-(eps as i64)));
        let lambda_div = two_form_with_c_block(&s.ctx, &target)?;
        let div_double = DoubleEndo::new(
            &s.ctx,
            Some(&s.canonical_inverse),
            Some(&a),
            Some(&lambda_div),
        );
        generalized.push((
            "pi+A+lambda".to_string(),
            classify_generalized(&s.structure, &div_double),
        ));
        Some(MA2Nondegenerate {
            omega_tilde,
            pi_tilde,
            j,
            d_omega_tilde,
            integrable,
            generalized,
        })
    };

    Ok(MA2Report {
        a,
        pfaffian,
        square_residual,
        unimodular: trace_a.is_zero(),
        trace_a,
        d_omega,
        kind,
        nondegenerate,
    })
}

// ---------------------------------------------------------------------------
// Dimension 3
// ---------------------------------------------------------------------------

/// Symplectic orbit type of a nondegenerate effective 3-form, decided by the
/// sign of the Hitchin coefficient `λ` and the signature of the metric `q`.
///
/// The exact frame computation shows that `λ < 0` comes with definite `q`
/// (the special-Lagrangian / Calabi–Yau orbit, underlying a generalized
/// complex structure) while `λ > 0` comes with split signature `(3,3)` (the
/// real-polarized orbit, underlying a generalized product structure).  Both
/// the Hessian-determinant normal form and the split special-Lagrangian
/// normal form have `λ > 0` with signature `(3,3)`: every invariant computed
/// here coincides for the two, so they are reported as the same orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orbit3 {
    /// `λ < 0`, `q` definite: elliptic / generalized complex orbit.
    Elliptic,
    /// `λ > 0`, `q` split `(3,3)`: hyperbolic / generalized product orbit.
    Hyperbolic,
    /// `λ = 0`, sign undecidable, or an unexpected `q` signature.
    Degenerate,
}

#[derive(Debug, Clone)]
pub struct MA3Report {
    pub vol: GradedElement,
    pub h: Endo11,
    pub lambda: ScalarExpr,
    /// `H² − λ·Id` as a matrix; zero by the Hitchin identity.
    pub h_square_residual: ScalarMatrix,
    pub q: ScalarMatrix,
    pub orbit: Orbit3,
}

/// Signature `(pos, neg, zero)` of `q` on the elliptic (`λ < 0`) orbit;
/// frozen from the exact frame computation on the Laplacian-type normal form.
pub const ELLIPTIC_SIGNATURE: (usize, usize, usize) = (6, 0, 0);
/// Signature of `q` on the hyperbolic (`λ > 0`) orbit; frozen from the exact
/// frame computation on the Hessian and D'Alembertian-type normal forms.
pub const HYPERBOLIC_SIGNATURE: (usize, usize, usize) = (3, 3, 0);

/// Scalar pairing `⟨i_X i_Y Ω⟩` used to evaluate 2-forms on frame vectors.
fn eval_two_form(
    omega: &GradedElement,
    x: &GradedElement,
    y: &GradedElement,
) -> Result<ScalarExpr, MaError> {
    let inner = x.big_bracket(&y.big_bracket(omega)?)?;
    Ok(inner.coefficient(&vec![0u16; omega.context().n()], 0))
}

/// The Hitchin endomorphism of an effective 3-form, through the Liouville
/// volume identification of 5-forms with vector fields.
fn hitchin_endo(s: &MAStructure, vol: &GradedElement) -> Result<Endo11, MaError> {
    let ctx = &s.ctx;
    let r = ctx.r();
    let n = ctx.n();
    let full: Word = (0..r).fold(0, |w, a| w | 1 << OddGen::Xi(a).bit(r));
    // i_{θ_a} vol is a single-word 5-form; record its word and coefficient.
    let mut keys = Vec::with_capacity(r);
    for a in 0..r {
        let contracted = GradedElement::theta(ctx, a).big_bracket(vol)?;
        let word = full & !(1 << OddGen::Xi(a).bit(r));
        let coeff = contracted.coefficient(&vec![0u16; n], word);
        if coeff.is_zero() {
            return Err(MaError::BlockOrientation);
        }
        keys.push((word, coeff));
    }
    let mut m = ScalarMatrix::zeros(r);
    for b in 0..r {
        let phi = GradedElement::theta(ctx, b)
            .big_bracket(&s.omega)?
            .wedge(&s.omega)?;
        for a in 0..r {
            let (word, base_coeff) = &keys[a];
            m.set(a, b, phi.coefficient(&vec![0u16; n], *word).div(base_coeff)?);
        }
    }
    Ok(Endo11::new(crate::frame::endo_from_matrix(ctx, &m))?)
}

/// The modified Pfaffian of a 2-form: `τ∧τ∧Ω = −⅓·𝒫f(τ)·Ω∧Ω∧Ω`.
pub fn modified_pfaffian(s: &MAStructure, tau: &GradedElement) -> Result<ScalarExpr, MaError> {
    let omega3 = s
        .canonical
        .element()
        .wedge(s.canonical.element())?
        .wedge(s.canonical.element())?;
    let lhs = tau.wedge(tau)?.wedge(s.canonical.element())?;
    Ok(top_coefficient(&lhs)
        .div(&top_coefficient(&omega3))?
        .scale(&rat_i(-3)))
}

/// Exact residuals of the modified-Pfaffian relations for a momentum-free
/// vector field `X`:
/// `(𝒫f(i_Xω) + ½·q(X,X), 𝒫f(i_Xω) + ¼·i_π i_π(i_Xω ∧ i_Xω))`,
/// both of which vanish for every effective 3-form.
pub fn pfaffian_invariant_residuals(
    s: &MAStructure,
    report: &MA3Report,
    x: &GradedElement,
) -> Result<(ScalarExpr, ScalarExpr), MaError> {
    let ctx = &s.ctx;
    let r = ctx.r();
    let zeros = vec![0u16; ctx.n()];
    let tau = x.big_bracket(&s.omega)?;
    let pf = modified_pfaffian(s, &tau)?;
    // H(X) computed pointwise from the frame matrix.
    let m = report.h.matrix();
    let mut hx = GradedElement::zero(ctx);
    for b in 0..r {
        let f = x.coefficient(&zeros, 1 << OddGen::Theta(b).bit(r));
        if f.is_zero() {
            continue;
        }
        for a in 0..r {
            let entry = m.at(a, b).mul(&f);
            if !entry.is_zero() {
                hx = hx.add(&GradedElement::theta(ctx, a).scale(&entry));
            }
        }
    }
    let qxx = eval_two_form(s.canonical.element(), &hx, x)?;
    let tau2 = tau.wedge(&tau)?;
    let quad = contract_bivector(
        s.canonical_inverse.element(),
        &contract_bivector(s.canonical_inverse.element(), &tau2)?,
    )?
    .coefficient(&zeros, 0);
    Ok((
        pf.add(&qxx.scale(&rat(1, 2))),
        pf.add(&quad.scale(&rat(1, 4))),
    ))
}

pub fn analyze_3d(
    s: &MAStructure,
    sample: Option<&SamplePoint>,
) -> Result<MA3Report, MaError> {
    if s.dim != 3 {
        return Err(MaError::WrongDegree);
    }
    if !s.is_effective() {
        return Err(MaError::EffectivityRequired);
    }
    let vol = s
        .canonical
        .element()
        .wedge(s.canonical.element())?
        .wedge(s.canonical.element())?
        .scale_rat(&rat(-1, 6));
    let h = hitchin_endo(s, &vol)?;
    let h2 = h.matrix().mul(h.matrix());
    let lambda = h2.trace().scale(&rat(1, 6));
    let h_square_residual = h2.sub(&ScalarMatrix::identity(s.ctx.r()).scale(&lambda));
    let r = s.ctx.r();
    let mut q = ScalarMatrix::zeros(r);
    for a in 0..r {
        let hx = GradedElement::theta(&s.ctx, a).big_bracket(h.element())?;
        for b in 0..r {
            q.set(
                a,
                b,
                eval_two_form(
                    s.canonical.element(),
                    &hx,
                    &GradedElement::theta(&s.ctx, b),
                )?,
            );
        }
    }
    let lambda_sign = sign_of(&s.ctx, &lambda, sample);
    let point = sample.cloned().unwrap_or_default();
    let signature = q.eval(&point).ok().map(symmetric_signature);
    let orbit = match (lambda_sign, signature) {
        (Some(-1), Some(sig)) if sig == ELLIPTIC_SIGNATURE => Orbit3::Elliptic,
        (Some(1), Some(sig)) if sig == HYPERBOLIC_SIGNATURE => Orbit3::Hyperbolic,
        _ => Orbit3::Degenerate,
    };
    Ok(MA3Report {
        vol,
        h,
        lambda,
        h_square_residual,
        q,
        orbit,
    })
}

/// The generalized structure attached to a closed effective nondegenerate
/// 3-form.
///
/// The normalized Hitchin endomorphism `Ĥ = H/√|λ|` squares to `±Id` and its
/// block-diagonal lift to the double is a generalized almost complex (or
/// product) structure.  To make it integrable over the twisted Courant
/// structure `S = μ + ω` the lift is gauge-transformed by a potential `B`
/// with `{B,μ} = ω`, which adds the 2-form block `{B,Ĥ}`; gauge transforms
/// preserve both the scalar square and integrability, so the verdict is
/// exact.  The three residuals are the compatibility identities of the
/// triple `(π_Ω, Ĥ, ω)` that the engine verifies to hold:
/// `{ad_π μ, Ĥ} + ad_π{Ĥ,μ}`,
/// `{{Ĥ,μ},Ĥ} + {ad_π ω, Ĥ} + ad_π{Ĥ,ω} + {Ĥ²,μ}`, and
/// `{{Ĥ,ω},Ĥ} + 3{Ĥ²,ω}`.
#[derive(Debug, Clone)]
pub struct MA3Generalized {
    pub endo: DoubleEndo,
    pub courant: AlgebroidStructure,
    /// Gauge potential `B` with `{B,μ} = ω`.
    pub twist_potential: GradedElement,
    pub verdict: GeneralizedVerdict,
    pub residuals: [GradedElement; 3],
}

/// A Poincaré primitive of a closed momentum-free `k`-form with polynomial
/// coefficients: the homotopy `Σ c_α/(|α|+k)·x^α·i_E(dx^I)` against the
/// Euler vector `E = Σ x_j e_j`, which satisfies `dB = ω` for closed `ω`.
pub fn poincare_primitive(elem: &GradedElement, k: i64) -> Result<GradedElement, MaError> {
    let ctx = elem.context();
    let r = ctx.r();
    let mut out = GradedElement::zero(ctx);
    for (pexp, word, coeff) in elem.terms() {
        if pexp.iter().any(|&e| e != 0) {
            return Err(MaError::NotABaseFunction);
        }
        let mut factor = GradedElement::scalar(ctx, ScalarExpr::one());
        for a in 0..r {
            if word & (1 << OddGen::Theta(a).bit(r)) != 0 {
                return Err(MaError::WrongDegree);
            }
            if word & (1 << OddGen::Xi(a).bit(r)) != 0 {
                factor = factor.wedge(&GradedElement::xi(ctx, a))?;
            }
        }
        let mut contracted = GradedElement::zero(ctx);
        for j in 0..ctx.n() {
            contracted = contracted.add(
                &GradedElement::theta(ctx, j)
                    .big_bracket(&factor)?
                    .scale(&ScalarExpr::var(j as u32)),
            );
        }
        let den = coeff.denominator();
        let den_c = match den.terms() {
            [(m, c)] if m.is_one() => c.clone(),
            _ => return Err(MaError::NotABaseFunction),
        };
        for (mono, c) in coeff.numerator().terms() {
            let degree: Rat = mono.exps().iter().map(|(_, e)| e.clone()).sum();
            let weight = degree + rat_i(k);
            if weight.is_zero() {
                return Err(MaError::NotClosed);
            }
            let mut scalar = ScalarExpr::from_rat(c / &den_c / weight);
            for (v, e) in mono.exps() {
                scalar = scalar.mul(&ScalarExpr::var_pow(*v, e.clone()));
            }
            out = out.add(&contracted.scale(&scalar));
        }
    }
    Ok(out)
}

pub fn generalized_structure_3d(
    s: &MAStructure,
    sample: Option<&SamplePoint>,
) -> Result<MA3Generalized, MaError> {
    let report = analyze_3d(s, sample)?;
    if !s.d_omega()?.is_zero() {
        return Err(MaError::NotClosed);
    }
    let lambda_c = report.lambda.as_rat().ok_or(MaError::PfaffianNotUnit)?;
    if lambda_c.is_zero() {
        return Err(MaError::PfaffianNotUnit);
    }
    let abs = if lambda_c.is_negative() {
        -lambda_c.clone()
    } else {
        lambda_c.clone()
    };
    let root = rat_pow(&abs, &rat(1, 2)).map_err(|_| MaError::PfaffianNotUnit)?;
    let h = Endo11::new(report.h.element().scale(&ScalarExpr::from_rat(root).recip()?))?;

    let mu = s.structure.mu();
    let omega = &s.omega;
    let courant = AlgebroidStructure::validate(mu.add(omega))?;

    // Gauge potential B with {B,μ} = ω, from the Poincaré homotopy.
    let b0 = poincare_primitive(omega, s.dim as i64)?;
    let b = if b0.big_bracket(mu)?.sub(omega).is_zero() {
        b0
    } else {
        let flipped = b0.neg();
        if !flipped.big_bracket(mu)?.sub(omega).is_zero() {
            return Err(MaError::NotClosed);
        }
        flipped
    };
    let h_elem = h.element().clone();
    let twisted = h_elem.add(&b.big_bracket(&h_elem)?);
    let endo = DoubleEndo::from_element(twisted)?;
    let verdict = classify_generalized(&courant, &endo)?;

    let pi = s.canonical_inverse.element();
    let h2 = endo_compose(&h_elem, &h_elem)?;
    let adp = |u: &GradedElement| -> Result<GradedElement, MaError> {
        Ok(pi.big_bracket(u)?)
    };
    // First compatibility: {ad_π μ, Ĥ} + ad_π{Ĥ,μ} = 0.
    let r1 = adp(mu)?
        .big_bracket(&h_elem)?
        .add(&adp(&h_elem.big_bracket(mu)?)?);
    // Second: {{Ĥ,μ},Ĥ} + {ad_π ω, Ĥ} + ad_π{Ĥ,ω} + {Ĥ²,μ} = 0.
    let r2 = h_elem
        .big_bracket(mu)?
        .big_bracket(&h_elem)?
        .add(&adp(omega)?.big_bracket(&h_elem)?)
        .add(&adp(&h_elem.big_bracket(omega)?)?)
        .add(&h2.big_bracket(mu)?);
    // Third: {{Ĥ,ω},Ĥ} + 3{Ĥ²,ω} = 0.
    let r3 = h_elem
        .big_bracket(omega)?
        .big_bracket(&h_elem)?
        .add(&h2.big_bracket(omega)?.scale_int(3));
    Ok(MA3Generalized {
        endo,
        courant,
        twist_potential: b,
        verdict,
        residuals: [r1, r2, r3],
    })
}

// ---------------------------------------------------------------------------
// Jacobi systems
// ---------------------------------------------------------------------------

/// Context for a Jacobi system: the 4-manifold `𝓜 = M × R²` with coordinates
/// `(x, y, w1, w2)` where `(w1, w2)` are the dependent variables.
pub fn jacobi_context() -> Result<Arc<GradedContext>, MaError> {
    let base = ["x", "y", "w1", "w2"];
    let fiber = ["dx", "dy", "dw1", "dw2"];
    let thetas: Vec<String> = base.iter().map(|b| format!("@{b}")).collect();
    let momenta: Vec<String> = base.iter().map(|b| format!("P_{b}")).collect();
    Ok(GradedContext::with_names(&base, &fiber, &thetas, &momenta, &[])?)
}

#[derive(Debug, Clone)]
pub struct JacobiSystem {
    ctx: Arc<GradedContext>,
    omega1: TwoForm,
    omega2: TwoForm,
    structure: AlgebroidStructure,
}

impl JacobiSystem {
    pub fn new(omega1: GradedElement, omega2: GradedElement) -> Result<Self, MaError> {
        let ctx = omega1.context().clone();
        let omega1 = TwoForm::new(omega1)?;
        let omega2 = TwoForm::new(omega2)?;
        for w in [&omega1, &omega2] {
            if invert_two_form(w).is_err() {
                return Err(MaError::DegenerateForm);
            }
        }
        let structure = AlgebroidStructure::standard(&ctx)?;
        Ok(JacobiSystem {
            ctx,
            omega1,
            omega2,
            structure,
        })
    }

    pub fn context(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    pub fn omega1(&self) -> &TwoForm {
        &self.omega1
    }

    pub fn omega2(&self) -> &TwoForm {
        &self.omega2
    }
}

#[derive(Debug, Clone)]
pub struct BihamiltonianReport {
    /// `[π₁,π₁] − [π₂,π₂]`.
    pub squares: GradedElement,
    /// `[π₁,π₂]`.
    pub cross: GradedElement,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct JacobiReport {
    /// `ω₁∧ω₂`; zero for a nondegenerate system.
    pub cross: GradedElement,
    /// `ε` with `ω₁∧ω₁ = ε·ω₂∧ω₂`, when the ratio is a scalar expression.
    pub epsilon: Option<ScalarExpr>,
    pub a: Endo11,
    /// `A² + ε·Id` when `ε` exists; zero for every nondegenerate system.
    pub a_square_residual: Option<ScalarMatrix>,
    pub nondegenerate: bool,
    pub bihamiltonian: BihamiltonianReport,
    /// Recursion-operator analysis when both inverse bivectors are Poisson.
    pub recursion: Option<crate::compat::RecursionReport>,
}

pub fn jacobi_analyze(j: &JacobiSystem) -> Result<JacobiReport, MaError> {
    let cross = j.omega1.element().wedge(j.omega2.element())?;
    let top1 = top_coefficient(&j.omega1.element().wedge(j.omega1.element())?);
    let top2 = top_coefficient(&j.omega2.element().wedge(j.omega2.element())?);
    let epsilon = top1.div(&top2).ok();
    let pi1 = invert_two_form(&j.omega1)?;
    let a = endo_from(&pi1, &j.omega2)?;
    let a_square_residual = epsilon.as_ref().map(|e| {
        a.matrix()
            .mul(a.matrix())
            .add(&ScalarMatrix::identity(j.ctx.r()).scale(e))
    });
    let nondegenerate = cross.is_zero()
        && epsilon
            .as_ref()
            .map(|e| !e.is_zero())
            .unwrap_or(false);
    let pi2 = invert_two_form(&j.omega2)?;
    let sq1 = j
        .structure
        .schouten_bracket(pi1.element(), pi1.element())?;
    let sq2 = j
        .structure
        .schouten_bracket(pi2.element(), pi2.element())?;
    let mixed = j
        .structure
        .schouten_bracket(pi1.element(), pi2.element())?;
    let squares = sq1.sub(&sq2);
    let bihamiltonian = BihamiltonianReport {
        holds: squares.is_zero() && mixed.is_zero(),
        squares,
        cross: mixed,
    };
    let recursion = crate::compat::recursion_operator(&j.structure, &pi1, &pi2)
        .ok()
        .map(|(_, r)| r);
    Ok(JacobiReport {
        cross,
        epsilon,
        a,
        a_square_residual,
        nondegenerate,
        bihamiltonian,
        recursion,
    })
}

/// Restrict both 2-forms to the graph surface of `f = (u, v)`: substitute
/// `w1 → u`, `w2 → v`, `dw1 → u_x dx + u_y dy`, `dw2 → v_x dx + v_y dy`.
pub fn jacobi_operator_apply(
    j: &JacobiSystem,
    u: &ScalarExpr,
    v: &ScalarExpr,
) -> Result<(GradedElement, GradedElement), MaError> {
    for f in [u, v] {
        if !f.diff(2).is_zero() || !f.diff(3).is_zero() {
            return Err(MaError::NotABaseFunction);
        }
    }
    let mut var_subs = BTreeMap::new();
    var_subs.insert(2u32, u.clone());
    var_subs.insert(3u32, v.clone());
    let mut xi_subs = BTreeMap::new();
    for (idx, f) in [(2usize, u), (3usize, v)] {
        let df = GradedElement::xi(&j.ctx, 0)
            .scale(&f.diff(0))
            .add(&GradedElement::xi(&j.ctx, 1).scale(&f.diff(1)));
        xi_subs.insert(idx, df);
    }
    Ok((
        pullback(j.omega1.element(), &var_subs, &xi_subs)?,
        pullback(j.omega2.element(), &var_subs, &xi_subs)?,
    ))
}

// ---------------------------------------------------------------------------
// Named instances
// ---------------------------------------------------------------------------

fn xi(ctx: &Arc<GradedContext>, a: usize) -> GradedElement {
    GradedElement::xi(ctx, a)
}

fn wedge3(
    a: &GradedElement,
    b: &GradedElement,
    c: &GradedElement,
) -> Result<GradedElement, MaError> {
    Ok(a.wedge(b)?.wedge(c)?)
}

/// Laplace-type structure: `ω = dp1∧dq2 − dp2∧dq1` (elliptic, `Pf = 1`).
pub fn laplace_2d() -> Result<MAStructure, MaError> {
    let ctx = cotangent_context(2, &[])?;
    let omega = xi(&ctx, 2).wedge(&xi(&ctx, 1))?.sub(&xi(&ctx, 3).wedge(&xi(&ctx, 0))?);
    build_ma(&ctx, omega)
}

/// Wave-type structure: `ω = dp1∧dq2 + dp2∧dq1` (hyperbolic, `Pf = −1`).
pub fn wave_2d() -> Result<MAStructure, MaError> {
    let ctx = cotangent_context(2, &[])?;
    let omega = xi(&ctx, 2).wedge(&xi(&ctx, 1))?.add(&xi(&ctx, 3).wedge(&xi(&ctx, 0))?);
    build_ma(&ctx, omega)
}

/// The von Karman structure `ω = p1·dp1∧dq2 − dp2∧dq1` on the chart `p1 > 0`
/// (`Pf = p1`; closed but with non-closed normalization).
pub fn von_karman() -> Result<MAStructure, MaError> {
    let ctx = cotangent_context(2, &[("p1", ChartSign::Positive)])?;
    let p1 = ScalarExpr::var(2);
    let omega = xi(&ctx, 2)
        .wedge(&xi(&ctx, 1))?
        .scale(&p1)
        .sub(&xi(&ctx, 3).wedge(&xi(&ctx, 0))?);
    build_ma(&ctx, omega)
}

/// Hessian-type normal form: `ω = dp1∧dp2∧dp3 − dq1∧dq2∧dq3`
/// (operator `hess(f) − 1`).
pub fn hess_3d() -> Result<MAStructure, MaError> {
    let ctx = cotangent_context(3, &[])?;
    let omega = wedge3(&xi(&ctx, 3), &xi(&ctx, 4), &xi(&ctx, 5))?
        .sub(&wedge3(&xi(&ctx, 0), &xi(&ctx, 1), &xi(&ctx, 2))?);
    build_ma(&ctx, omega)
}

/// Special-Lagrangian normal form:
/// `ω = dp1∧dp2∧dp3 − dp1∧dq2∧dq3 − dq1∧dp2∧dq3 − dq1∧dq2∧dp3`
/// (operator `hess(f) − Δ(f)`).
pub fn special_lagrangian_3d() -> Result<MAStructure, MaError> {
    let ctx = cotangent_context(3, &[])?;
    let omega = wedge3(&xi(&ctx, 3), &xi(&ctx, 4), &xi(&ctx, 5))?
        .sub(&wedge3(&xi(&ctx, 3), &xi(&ctx, 1), &xi(&ctx, 2))?)
        .sub(&wedge3(&xi(&ctx, 0), &xi(&ctx, 4), &xi(&ctx, 2))?)
        .sub(&wedge3(&xi(&ctx, 0), &xi(&ctx, 1), &xi(&ctx, 5))?);
    build_ma(&ctx, omega)
}

/// Pseudo-special-Lagrangian normal form:
/// `ω = dp1∧dp2∧dp3 − dp1∧dq2∧dq3 − dp2∧dq1∧dq3 − dp3∧dq1∧dq2`.
pub fn pseudo_special_lagrangian_3d() -> Result<MAStructure, MaError> {
    let ctx = cotangent_context(3, &[])?;
    let omega = wedge3(&xi(&ctx, 3), &xi(&ctx, 4), &xi(&ctx, 5))?
        .sub(&wedge3(&xi(&ctx, 3), &xi(&ctx, 1), &xi(&ctx, 2))?)
        .sub(&wedge3(&xi(&ctx, 4), &xi(&ctx, 0), &xi(&ctx, 2))?)
        .sub(&wedge3(&xi(&ctx, 5), &xi(&ctx, 0), &xi(&ctx, 1))?);
    build_ma(&ctx, omega)
}

/// The Cauchy–Riemann system `u_x − v_y = 0`, `u_y + v_x = 0` as a Jacobi
/// system on `𝓜 = R² × R²`.
pub fn cauchy_riemann() -> Result<JacobiSystem, MaError> {
    let ctx = jacobi_context()?;
    // dx=0, dy=1, dw1=2, dw2=3.
    let omega1 = xi(&ctx, 2).wedge(&xi(&ctx, 1))?.sub(&xi(&ctx, 0).wedge(&xi(&ctx, 3))?);
    let omega2 = xi(&ctx, 3).wedge(&xi(&ctx, 1))?.sub(&xi(&ctx, 2).wedge(&xi(&ctx, 0))?);
    JacobiSystem::new(omega1, omega2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcs::GeneralizedKind;
    use crate::scalar::rat_i;

    fn sp(entries: &[(u32, i64)]) -> SamplePoint {
        entries.iter().map(|&(v, c)| (v, rat_i(c))).collect()
    }

    #[test]
    fn pullback_identity_substitution() {
        let s = von_karman().unwrap();
        let out = pullback(&s.omega, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert_eq!(out, s.omega);
    }

    #[test]
    fn instances_are_effective() {
        for s in [
            laplace_2d().unwrap(),
            wave_2d().unwrap(),
            von_karman().unwrap(),
            hess_3d().unwrap(),
            special_lagrangian_3d().unwrap(),
            pseudo_special_lagrangian_3d().unwrap(),
        ] {
            assert!(s.is_effective(), "{}", s.effectivity_residual.display());
            assert!(s.effectivity_contraction().unwrap().is_zero());
        }
        let ctx = cotangent_context(2, &[]).unwrap();
        let omega = canonical_two_form(&ctx).unwrap().element().clone();
        assert!(!build_ma(&ctx, omega).unwrap().is_effective());
    }

    #[test]
    fn laplace_analysis() {
        let s = laplace_2d().unwrap();
        let r = analyze_2d(&s, None).unwrap();
        assert_eq!(r.pfaffian, ScalarExpr::one());
        assert_eq!(r.kind, OperatorType::Elliptic);
        assert!(r.square_residual.is_zero());
        assert!(r.trace_a.is_zero() && r.unimodular);
        assert!(r.d_omega.is_zero());
        let nd = r.nondegenerate.unwrap();
        assert!(nd.integrable);
        // J² = −Id for the elliptic case.
        let j2 = nd.j.matrix().mul(nd.j.matrix());
        assert!(j2
            .add(&ScalarMatrix::identity(4))
            .is_zero());
    }

    #[test]
    fn wave_analysis() {
        let s = wave_2d().unwrap();
        let r = analyze_2d(&s, None).unwrap();
        assert_eq!(r.pfaffian, ScalarExpr::from_int(-1));
        assert_eq!(r.kind, OperatorType::Hyperbolic);
        let nd = r.nondegenerate.unwrap();
        let j2 = nd.j.matrix().mul(nd.j.matrix());
        assert!(j2.sub(&ScalarMatrix::identity(4)).is_zero());
    }

    #[test]
    fn von_karman_pfaffian_and_chart() {
        let s = von_karman().unwrap();
        let r = analyze_2d(&s, Some(&sp(&[(2, 1)]))).unwrap();
        assert_eq!(r.pfaffian, ScalarExpr::var(2));
        assert_eq!(r.kind, OperatorType::Elliptic);
        assert!(r.d_omega.is_zero());
        let nd = r.nondegenerate.unwrap();
        assert!(!nd.integrable);
    }

    #[test]
    fn ma_operator_reproduces_hessian_minus_one() {
        let s = hess_3d().unwrap();
        // f = ½(q1²+q2²+q3²) has hess(f) = 1.
        let f = ScalarExpr::var_pow(0, rat_i(2))
            .add(&ScalarExpr::var_pow(1, rat_i(2)))
            .add(&ScalarExpr::var_pow(2, rat_i(2)))
            .scale(&rat(1, 2));
        let out = ma_operator_apply(&s, &f).unwrap();
        assert!(out.is_zero(), "{}", out.display());
    }

    #[test]
    fn jacobi_cauchy_riemann() {
        let j = cauchy_riemann().unwrap();
        let r = jacobi_analyze(&j).unwrap();
        assert!(r.nondegenerate, "cross = {}", r.cross.display());
        assert_eq!(r.epsilon, Some(ScalarExpr::one()));
        assert!(r.a_square_residual.unwrap().is_zero());
        assert!(r.bihamiltonian.holds);
        // Holomorphic z² solves the system; z̄ does not.
        let u = ScalarExpr::var_pow(0, rat_i(2)).sub(&ScalarExpr::var_pow(1, rat_i(2)));
        let v = ScalarExpr::var(0).mul(&ScalarExpr::var(1)).scale(&rat_i(2));
        let (d1, d2) = jacobi_operator_apply(&j, &u, &v).unwrap();
        assert!(d1.is_zero(), "{}", d1.display());
        assert!(d2.is_zero(), "{}", d2.display());
        let (e1, e2) =
            jacobi_operator_apply(&j, &ScalarExpr::var(0), &ScalarExpr::var(1).neg()).unwrap();
        assert!(!e1.is_zero() || !e2.is_zero());
    }

    #[test]
    fn three_d_invariants_are_frozen() {
        // Golden values from the exact frame computation: the Hitchin
        // coefficient λ, the signature of q, and the resulting orbit for each
        // of the three constant-coefficient normal forms.
        let cases = [
            ("hess", hess_3d().unwrap(), 1, HYPERBOLIC_SIGNATURE, Orbit3::Hyperbolic),
            (
                "sl",
                special_lagrangian_3d().unwrap(),
                -4,
                ELLIPTIC_SIGNATURE,
                Orbit3::Elliptic,
            ),
            (
                "pssl",
                pseudo_special_lagrangian_3d().unwrap(),
                4,
                HYPERBOLIC_SIGNATURE,
                Orbit3::Hyperbolic,
            ),
        ];
        for (name, s, lambda, signature, orbit) in cases {
            let r = analyze_3d(&s, None).unwrap();
            assert!(r.h_square_residual.is_zero(), "{name}");
            assert_eq!(r.lambda, ScalarExpr::from_int(lambda), "{name}");
            let sig = symmetric_signature(r.q.eval(&SamplePoint::new()).unwrap());
            assert_eq!(sig, signature, "{name}");
            assert_eq!(r.orbit, orbit, "{name}");
        }
    }

    #[test]
    fn generalized_structure_3d_classifies_and_integrates() {
        let cases = [
            ("hess", hess_3d().unwrap(), GeneralizedKind::Product),
            ("sl", special_lagrangian_3d().unwrap(), GeneralizedKind::Complex),
            (
                "pssl",
                pseudo_special_lagrangian_3d().unwrap(),
                GeneralizedKind::Product,
            ),
        ];
        for (name, s, kind) in cases {
            let g = generalized_structure_3d(&s, None).unwrap();
            // The twisted Courant structure S = μ + ω satisfies {S,S} = 0.
            assert!(
                g.courant
                    .element()
                    .big_bracket(g.courant.element())
                    .unwrap()
                    .is_zero(),
                "{name}"
            );
            assert_eq!(g.verdict.kind, kind, "{name}");
            assert!(g.verdict.integrable, "{name}");
            for (i, r) in g.residuals.iter().enumerate() {
                assert!(r.is_zero(), "{name} residual {i}: {}", r.display());
            }
            // The gauge potential reproduces the 3-form.
            assert!(g
                .twist_potential
                .big_bracket(s.structure().mu())
                .unwrap()
                .sub(s.omega())
                .is_zero());
        }
    }

    #[test]
    fn pfaffian_invariants_hold() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for s in [
            hess_3d().unwrap(),
            special_lagrangian_3d().unwrap(),
            pseudo_special_lagrangian_3d().unwrap(),
        ] {
            let report = analyze_3d(&s, None).unwrap();
            let ctx = s.context().clone();
            for a in 0..ctx.r() {
                let x = GradedElement::theta(&ctx, a);
                let (r1, r2) = pfaffian_invariant_residuals(&s, &report, &x).unwrap();
                assert!(r1.is_zero(), "frame {a}: {}", r1.display(&[]));
                assert!(r2.is_zero(), "frame {a}: {}", r2.display(&[]));
            }
            for _ in 0..7 {
                let x = crate::sampling::random_vector(&mut rng, &ctx, 2);
                let (r1, r2) = pfaffian_invariant_residuals(&s, &report, &x).unwrap();
                assert!(r1.is_zero(), "{}", r1.display(&[]));
                assert!(r2.is_zero(), "{}", r2.display(&[]));
            }
        }
    }

    /// Generic degree-3 polynomial in the three base coordinates with
    /// distinct small coefficients, so that all second derivatives are
    /// distinct non-constant polynomials.
    fn generic_cubic() -> ScalarExpr {
        let mut f = ScalarExpr::zero();
        let mut c = 1i64;
        for i in 0..3u32 {
            for j in i..3u32 {
                for k in j..3u32 {
                    let term = ScalarExpr::var(i)
                        .mul(&ScalarExpr::var(j))
                        .mul(&ScalarExpr::var(k))
                        .scale(&rat_i(c));
                    f = f.add(&term);
                    c += 1;
                }
            }
        }
        f
    }

    fn hessian_det(f: &ScalarExpr) -> ScalarExpr {
        let h = |i: u32, j: u32| f.diff(i).diff(j);
        let minor = |a: u32, b: u32, c: u32, d: u32| {
            h(a, b).mul(&h(c, d)).sub(&h(a, d).mul(&h(c, b)))
        };
        h(0, 0)
            .mul(&minor(1, 1, 2, 2))
            .sub(&h(0, 1).mul(&minor(1, 0, 2, 2)))
            .add(&h(0, 2).mul(&minor(1, 0, 2, 1)))
    }

    fn dq_volume(ctx: &Arc<GradedContext>, n: usize) -> GradedElement {
        let mut out = GradedElement::scalar(ctx, ScalarExpr::one());
        for i in 0..n {
            out = out.wedge(&GradedElement::xi(ctx, i)).unwrap();
        }
        out
    }

    #[test]
    fn ma_operator_oracle_3d() {
        let f = generic_cubic();
        let hess = hessian_det(&f);
        let lap = f.diff(0).diff(0).add(&f.diff(1).diff(1)).add(&f.diff(2).diff(2));
        let dal = f.diff(0).diff(0).sub(&f.diff(1).diff(1)).add(&f.diff(2).diff(2));
        let cases = [
            (hess_3d().unwrap(), hess.sub(&ScalarExpr::one())),
            (special_lagrangian_3d().unwrap(), hess.sub(&lap)),
            (pseudo_special_lagrangian_3d().unwrap(), hess.sub(&dal)),
        ];
        for (s, expected) in cases {
            let out = ma_operator_apply(&s, &f).unwrap();
            let target = dq_volume(s.context(), 3).scale(&expected);
            assert!(out.sub(&target).is_zero(), "{}", out.display());
        }
    }

    #[test]
    fn ma_operator_von_karman_scalar() {
        // The operator of the form p1·dp1∧dq2 + dp2∧dq1 is
        // f_{q1}·f_{q1q1} − f_{q2q2}.
        let ctx = cotangent_context(2, &[]).unwrap();
        let p1 = ScalarExpr::var(2);
        let omega = xi(&ctx, 2)
            .wedge(&xi(&ctx, 1))
            .unwrap()
            .scale(&p1)
            .add(&xi(&ctx, 3).wedge(&xi(&ctx, 0)).unwrap());
        let s = build_ma(&ctx, omega).unwrap();
        let mut f = ScalarExpr::zero();
        let mut c = 1i64;
        for i in 0..2u32 {
            for j in i..2u32 {
                for k in j..2u32 {
                    f = f.add(
                        &ScalarExpr::var(i)
                            .mul(&ScalarExpr::var(j))
                            .mul(&ScalarExpr::var(k))
                            .scale(&rat_i(c)),
                    );
                    c += 1;
                }
            }
        }
        let expected = f
            .diff(0)
            .mul(&f.diff(0).diff(0))
            .sub(&f.diff(1).diff(1));
        let out = ma_operator_apply(&s, &f).unwrap();
        let target = dq_volume(s.context(), 2).scale(&expected);
        assert!(out.sub(&target).is_zero(), "{}", out.display());
    }

    #[test]
    fn von_karman_regression() {
        use crate::compat::{check_structure, CompositeKind, StructureData};
        let s = von_karman().unwrap();
        let ctx = s.context().clone();
        let r = analyze_2d(&s, Some(&sp(&[(2, 1)]))).unwrap();
        assert_eq!(r.pfaffian, ScalarExpr::var(2));
        assert!(r.d_omega.is_zero());
        let nd = r.nondegenerate.as_ref().unwrap();

        // dω̃ = ½·p1^(−3/2)·dq1∧dp1∧dp2 on the chart p1 > 0.
        let coeff = ScalarExpr::var_pow(2, rat(-3, 2)).scale(&rat(1, 2));
        let expected_d = xi(&ctx, 0)
            .wedge(&xi(&ctx, 2))
            .unwrap()
            .wedge(&xi(&ctx, 3))
            .unwrap()
            .scale(&coeff);
        assert_eq!(nd.d_omega_tilde, expected_d);
        assert!(!nd.integrable);

        // π_ω = −(1/p1)·@q2∧@p1 + @q1∧@p2.
        let pi_omega = invert_two_form(&TwoForm::new(s.omega().clone()).unwrap()).unwrap();
        let inv_p1 = ScalarExpr::var_pow(2, rat_i(-1));
        let expected_pi = GradedElement::theta(&ctx, 1)
            .wedge(&GradedElement::theta(&ctx, 2))
            .unwrap()
            .scale(&inv_p1.neg())
            .add(
                &GradedElement::theta(&ctx, 0)
                    .wedge(&GradedElement::theta(&ctx, 3))
                    .unwrap(),
            );
        assert_eq!(pi_omega.element(), &expected_pi);

        // [π_Ω, π_ω]_μ = (1/p1²)·@q1∧@q2∧@p1.
        let sch = s
            .structure()
            .schouten_bracket(s.canonical_bivector().element(), pi_omega.element())
            .unwrap();
        let expected_sch = GradedElement::theta(&ctx, 0)
            .wedge(&GradedElement::theta(&ctx, 1))
            .unwrap()
            .wedge(&GradedElement::theta(&ctx, 2))
            .unwrap()
            .scale(&ScalarExpr::var_pow(2, rat_i(-2)));
        assert_eq!(sch, expected_sch);

        // Non-integrability through every lens: torsion of J_ω, the PN and
        // ΩN checks, and the Courant function of 𝕁_ω.
        let torsion = s.structure().nijenhuis_torsion(nd.j.element()).unwrap();
        assert!(!torsion.is_zero());
        let data = StructureData {
            pi: Some(s.canonical_bivector().clone()),
            omega: Some(nd.omega_tilde.clone()),
            endo: Some(nd.j.clone()),
            ..Default::default()
        };
        for kind in [CompositeKind::PN, CompositeKind::OmegaN] {
            let rep = check_structure(s.structure(), kind, &data).unwrap();
            assert!(!rep.verdict(), "{kind:?} unexpectedly holds");
        }
        let jj = s.canonical_bivector().element().add(nd.j.element());
        let s_j = jj.big_bracket(s.structure().mu()).unwrap();
        assert!(!s_j.big_bracket(&s_j).unwrap().is_zero());
        let (name, verdict) = &nd.generalized[0];
        assert_eq!(name, "pi+J");
        let verdict = verdict.as_ref().unwrap();
        assert_eq!(verdict.kind, GeneralizedKind::Complex);
        assert!(!verdict.integrable);
    }

    #[test]
    fn two_d_generalized_structures_and_deformation() {
        let cases = [
            (
                "laplace",
                laplace_2d().unwrap(),
                GeneralizedKind::Complex,
                None,
            ),
            (
                "wave",
                wave_2d().unwrap(),
                GeneralizedKind::Product,
                Some(GeneralizedKind::Complex),
            ),
        ];
        for (name, s, j_kind, j_prime_kind) in cases {
            let r = analyze_2d(&s, None).unwrap();
            let nd = r.nondegenerate.as_ref().unwrap();
            assert!(nd.integrable, "{name}");
            // dω̃ = 0 comes with vanishing torsion of J_ω.
            let torsion = s.structure().nijenhuis_torsion(nd.j.element()).unwrap();
            assert!(torsion.is_zero(), "{name}");
            let find = |key: &str| {
                nd.generalized
                    .iter()
                    .find(|(n, _)| n == key)
                    .map(|(_, v)| v.clone())
                    .unwrap()
            };
            let j = find("pi+J").unwrap();
            assert_eq!(j.kind, j_kind, "{name}");
            assert!(j.integrable, "{name}");
            let script_j = find("pi+A+lambda").unwrap();
            assert_eq!(script_j.kind, GeneralizedKind::Complex, "{name}");
            assert!(script_j.integrable, "{name}");
            match j_prime_kind {
                Some(kind) => {
                    let jp = find("pi+J-2Omega").unwrap();
                    assert_eq!(jp.kind, kind, "{name}");
                    assert!(jp.integrable, "{name}");
                }
                None => assert!(find("pi+J-2Omega").is_err(), "{name}"),
            }
            // μ_{J_ω} = {J_ω, μ} = {{π_Ω, μ}, ω̃}, and μ + μ_{J_ω} is again
            // a valid structure.
            let mu = s.structure().mu();
            let mu_j = nd.j.element().big_bracket(mu).unwrap();
            let chain = s
                .canonical_bivector()
                .element()
                .big_bracket(mu)
                .unwrap()
                .big_bracket(nd.omega_tilde.element())
                .unwrap();
            assert_eq!(mu_j, chain, "{name}");
            let deformed = mu.add(&mu_j);
            assert!(
                deformed.big_bracket(&deformed).unwrap().is_zero(),
                "{name}"
            );
        }
    }
}
