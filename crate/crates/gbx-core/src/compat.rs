//! Bivector / 2-form / (1,1)-tensor calculus on a Lie algebroid and the
//! composite-structure checkers built from it.
//!
//! The tensors live inside the graded algebra: a bivector `π` has shifted
//! bidegree (1,−1), a 2-form `ω` has (−1,1), a (1,1)-tensor `N` has (0,0).
//! Their interplay is entirely bracket-driven:
//!
//! * `π♯α = {α,π}`, `ω♭X = {ω,X}`, `N = {π,ω}` realizes `π♯∘ω♭`;
//! * the Koszul bracket of forms is `[α,β]_π = {{α,{π,μ}},β}`;
//! * `d_N = {{N,μ},·}`, `i_N = {N,·}`, `ω_N = ½{N,ω}`, `π_N = ½{π,N}`.
//!
//! Every checker returns a [`StructureReport`] holding one residual element
//! per defining condition — never a bare boolean — so that negative tests can
//! assert the exact value of a failing residual.

use crate::algebroid::{AlgebroidError, AlgebroidStructure};
use crate::frame::{
    bivector_from_matrix, bivector_matrix, endo_compose, endo_matrix, two_form_from_matrix,
    two_form_matrix, FrameError, ScalarMatrix,
};
use crate::graded::{GradedElement, GradedError};
use crate::scalar::rat;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompatError {
    #[error("tensor is degenerate on the frame")]
    Degenerate,
    #[error("compatibility requires N∘π♯ = π♯∘N*; residual {}", residual.display())]
    SkewConditionFails { residual: GradedElement },
    #[error("side condition {condition} fails; residual {}", residual.display())]
    SideConditionFails {
        condition: String,
        residual: GradedElement,
    },
    #[error("structure kind requires the tensor `{name}`")]
    MissingTensor { name: &'static str },
    #[error("operation requires vanishing Nijenhuis torsion; residual {}", residual.display())]
    TorsionNonzero { residual: GradedElement },
    #[error("bivector is not Poisson; residual {}", residual.display())]
    NotPoisson { residual: GradedElement },
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
}

/// A bivector: element of shifted bidegree (1,−1) with no momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivector(GradedElement);

/// A 2-form: element of shifted bidegree (−1,1) with no momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm(GradedElement);

/// A (1,1)-tensor: element of shifted bidegree (0,0) acting by `X ↦ {X,N}`;
/// the matrix over the frame `{θ_a}` is cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Endo11 {
    element: GradedElement,
    matrix: ScalarMatrix,
}

impl Bivector {
    pub fn new(e: GradedElement) -> Result<Self, CompatError> {
        if !e.is_zero() {
            e.expect_shifted((1, -1))?;
        }
        if !e.is_multivector() {
            return Err(CompatError::Graded(GradedError::NotHomogeneous));
        }
        Ok(Bivector(e))
    }

    pub fn element(&self) -> &GradedElement {
        &self.0
    }
}

impl TwoForm {
    pub fn new(e: GradedElement) -> Result<Self, CompatError> {
        if !e.is_zero() {
            e.expect_shifted((-1, 1))?;
        }
        if !e.is_form() {
            return Err(CompatError::Graded(GradedError::NotHomogeneous));
        }
        Ok(TwoForm(e))
    }

    pub fn element(&self) -> &GradedElement {
        &self.0
    }
}

impl Endo11 {
    pub fn new(e: GradedElement) -> Result<Self, CompatError> {
        let matrix = endo_matrix(&e)?;
        Ok(Endo11 { element: e, matrix })
    }

    pub fn element(&self) -> &GradedElement {
        &self.element
    }

    pub fn matrix(&self) -> &ScalarMatrix {
        &self.matrix
    }
}

/// `π♯α = {α,π}` for a 1-form `α` (and, by the same bracket, the extension
/// of the contraction to higher forms).
pub fn sharp_apply(pi: &Bivector, alpha: &GradedElement) -> Result<GradedElement, CompatError> {
    Ok(alpha.big_bracket(pi.element())?)
}

/// `ω♭X = {ω,X}` for a vector `X`.
pub fn flat_apply(omega: &TwoForm, x: &GradedElement) -> Result<GradedElement, CompatError> {
    Ok(omega.element().big_bracket(x)?)
}

/// `N = {π,ω}`, the (1,1)-tensor realizing `π♯∘ω♭`.
pub fn endo_from(pi: &Bivector, omega: &TwoForm) -> Result<Endo11, CompatError> {
    Endo11::new(pi.element().big_bracket(omega.element())?)
}

/// The deformed bivector `π_N = ½{π,N}` (defined when Eq. N∘π♯ = π♯∘N*
/// holds; callers check that separately).
pub fn deformed_bivector(pi: &Bivector, n: &Endo11) -> Result<Bivector, CompatError> {
    Bivector::new(pi.element().big_bracket(n.element())?.scale_rat(&rat(1, 2)))
}

/// The deformed 2-form `ω_N = ½{N,ω}` (i.e. `ω_N♭ = ω♭∘N`).
pub fn deformed_two_form(omega: &TwoForm, n: &Endo11) -> Result<TwoForm, CompatError> {
    TwoForm::new(n.element().big_bracket(omega.element())?.scale_rat(&rat(1, 2)))
}

/// Invert a non-degenerate 2-form: the unique bivector with `{π,ω} = Id`.
pub fn invert_two_form(omega: &TwoForm) -> Result<Bivector, CompatError> {
    let ctx = omega.element().context();
    let w = two_form_matrix(omega.element())?;
    let inv = w.inverse().map_err(|_| CompatError::Degenerate)?;
    let id = crate::sl2::identity_tensor(ctx);
    // The matrix convention relating {π,ω} to the product of the two frame
    // matrices depends on the frozen bracket orientation; rather than carry
    // that bookkeeping here, certify the candidate (or its negative) against
    // the defining equation directly.
    for candidate in [
        bivector_from_matrix(ctx, &inv)?,
        bivector_from_matrix(ctx, &inv)?.neg(),
        bivector_from_matrix(ctx, &inv.transpose())?,
        bivector_from_matrix(ctx, &inv.transpose())?.neg(),
    ] {
        if candidate.big_bracket(omega.element())? == id {
            return Ok(Bivector(candidate));
        }
    }
    unreachable!("an invertible 2-form always has a bracket inverse")
}

/// Invert a non-degenerate bivector: the unique 2-form with `{π,ω} = Id`.
pub fn invert_bivector(pi: &Bivector) -> Result<TwoForm, CompatError> {
    let ctx = pi.element().context();
    let p = bivector_matrix(pi.element())?;
    let inv = p.inverse().map_err(|_| CompatError::Degenerate)?;
    let id = crate::sl2::identity_tensor(ctx);
    for candidate in [
        two_form_from_matrix(ctx, &inv)?,
        two_form_from_matrix(ctx, &inv)?.neg(),
        two_form_from_matrix(ctx, &inv.transpose())?,
        two_form_from_matrix(ctx, &inv.transpose())?.neg(),
    ] {
        if pi.element().big_bracket(&candidate)? == id {
            return Ok(TwoForm(candidate));
        }
    }
    unreachable!("an invertible bivector always has a bracket inverse")
}

/// Residual of `N∘π♯ = π♯∘N*`, packed as `Σ_b (N(π♯ξ^b) − π♯(N*ξ^b)) ∧ ξ^b`;
/// zero iff the condition holds on every frame covector.
pub fn skew_residual(pi: &Bivector, n: &Endo11) -> Result<GradedElement, CompatError> {
    let ctx = pi.element().context();
    let mut out = GradedElement::zero(ctx);
    for b in 0..ctx.r() {
        let xi = GradedElement::xi(ctx, b);
        // N acts on vectors by {X,N}; the transpose acts on forms by {N,α}
        // (the orientation that makes Id self-transpose).
        let lhs = xi.big_bracket(pi.element())?.big_bracket(n.element())?;
        let rhs = n.element().big_bracket(&xi)?.big_bracket(pi.element())?;
        out = out.add(&lhs.sub(&rhs).wedge(&xi)?);
    }
    Ok(out)
}

/// Residual of `ω♭∘N = N*∘ω♭`, packed as `Σ_b (ω♭(Nθ_b) − N*(ω♭θ_b)) ∧ θ_b`.
pub fn symmetry_residual(omega: &TwoForm, n: &Endo11) -> Result<GradedElement, CompatError> {
    let ctx = omega.element().context();
    let mut out = GradedElement::zero(ctx);
    for b in 0..ctx.r() {
        let th = GradedElement::theta(ctx, b);
        let lhs = omega
            .element()
            .big_bracket(&th.big_bracket(n.element())?)?;
        let rhs = n
            .element()
            .big_bracket(&omega.element().big_bracket(&th)?)?;
        out = out.add(&lhs.sub(&rhs).wedge(&th)?);
    }
    Ok(out)
}

/// The compatibility tensor `C_μ(π,N) = {π,{N,μ}} + {N,{π,μ}}`, a section of
/// `∧²A⊗A*`; requires `N∘π♯ = π♯∘N*` first.
pub fn compatibility_tensor(
    a: &AlgebroidStructure,
    pi: &Bivector,
    n: &Endo11,
) -> Result<GradedElement, CompatError> {
    let residual = skew_residual(pi, n)?;
    if !residual.is_zero() {
        return Err(CompatError::SkewConditionFails { residual });
    }
    compatibility_tensor_raw(a, pi, n)
}

fn compatibility_tensor_raw(
    a: &AlgebroidStructure,
    pi: &Bivector,
    n: &Endo11,
) -> Result<GradedElement, CompatError> {
    let mu = a.mu();
    let lhs = pi.element().big_bracket(&n.element().big_bracket(mu)?)?;
    let rhs = n.element().big_bracket(&pi.element().big_bracket(mu)?)?;
    Ok(lhs.add(&rhs))
}

/// `[π,π]_μ = {{π,μ},π}`, the Schouten square; zero iff `π` is Poisson.
pub fn poisson_residual(
    a: &AlgebroidStructure,
    pi: &Bivector,
) -> Result<GradedElement, CompatError> {
    Ok(pi
        .element()
        .big_bracket(a.mu())?
        .big_bracket(pi.element())?)
}

/// `[ω,ω]_π = {{ω,{π,μ}},ω}`, the Koszul square; zero iff `ω` is a
/// complementary 2-form for `π`.
pub fn koszul_square(
    a: &AlgebroidStructure,
    pi: &Bivector,
    omega: &TwoForm,
) -> Result<GradedElement, CompatError> {
    let gamma = pi.element().big_bracket(a.mu())?;
    Ok(omega
        .element()
        .big_bracket(&gamma)?
        .big_bracket(omega.element())?)
}

/// Twice the Nijenhuis torsion, `{N,{N,μ}} − {N²,μ}`, as the residual used
/// in the definition boxes.
pub fn torsion_residual(
    a: &AlgebroidStructure,
    n: &Endo11,
) -> Result<GradedElement, CompatError> {
    Ok(a.nijenhuis_torsion(n.element())?.scale_int(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeKind {
    Poisson,
    Complementary,
    PN,
    POmega,
    OmegaN,
    HitchinPair,
    CompatiblePair,
}

/// One defining condition of a composite structure, with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub residual: GradedElement,
    pub holds: bool,
}

impl Condition {
    fn from_residual(name: &'static str, residual: GradedElement) -> Self {
        let holds = residual.is_zero();
        Condition {
            name,
            residual,
            holds,
        }
    }
}

/// The full per-condition report of a composite-structure check.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub kind: CompositeKind,
    pub conditions: Vec<Condition>,
}

impl StructureReport {
    pub fn verdict(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    /// One JSON entry per condition, carrying the pretty-printed residual.
    pub fn to_json(&self) -> serde_json::Value {
        let conditions: Vec<serde_json::Value> = self
            .conditions
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "holds": c.holds,
                    "residual": c.residual.display(),
                })
            })
            .collect();
        serde_json::json!({
            "kind": serde_json::to_value(self.kind).expect("kind serializes"),
            "verdict": self.verdict(),
            "conditions": conditions,
        })
    }
}

/// Input tensors for [`check_structure`]; each kind requires its own subset.
#[derive(Debug, Clone, Default)]
pub struct StructureData {
    pub pi: Option<Bivector>,
    pub pi1: Option<Bivector>,
    pub omega: Option<TwoForm>,
    pub endo: Option<Endo11>,
}

fn need<'a, T>(slot: &'a Option<T>, name: &'static str) -> Result<&'a T, CompatError> {
    slot.as_ref().ok_or(CompatError::MissingTensor { name })
}

/// Check the defining conditions of a composite structure and report every
/// residual.  Algebraic side conditions (`N∘π♯ = π♯∘N*` for PN,
/// `ω♭∘N = N*∘ω♭` for ΩN / Hitchin pairs) are verified first and reported as
/// errors, since the remaining conditions are not meaningful without them.
pub fn check_structure(
    a: &AlgebroidStructure,
    kind: CompositeKind,
    data: &StructureData,
) -> Result<StructureReport, CompatError> {
    let mut conditions = Vec::new();
    match kind {
        CompositeKind::Poisson => {
            let pi = need(&data.pi, "pi")?;
            conditions.push(Condition::from_residual(
                "schouten_square",
                poisson_residual(a, pi)?,
            ));
        }
        CompositeKind::Complementary => {
            let pi = need(&data.pi, "pi")?;
            let omega = need(&data.omega, "omega")?;
            conditions.push(Condition::from_residual(
                "schouten_square",
                poisson_residual(a, pi)?,
            ));
            conditions.push(Condition::from_residual(
                "koszul_square",
                koszul_square(a, pi, omega)?,
            ));
        }
        CompositeKind::PN => {
            let pi = need(&data.pi, "pi")?;
            let n = need(&data.endo, "endo")?;
            let residual = skew_residual(pi, n)?;
            if !residual.is_zero() {
                return Err(CompatError::SideConditionFails {
                    condition: "N∘π♯ = π♯∘N*".into(),
                    residual,
                });
            }
            conditions.push(Condition::from_residual(
                "schouten_square",
                poisson_residual(a, pi)?,
            ));
            conditions.push(Condition::from_residual(
                "nijenhuis_torsion",
                torsion_residual(a, n)?,
            ));
            conditions.push(Condition::from_residual(
                "compatibility",
                compatibility_tensor_raw(a, pi, n)?,
            ));
        }
        CompositeKind::POmega => {
            let pi = need(&data.pi, "pi")?;
            let omega = need(&data.omega, "omega")?;
            let n = endo_from(pi, omega)?;
            conditions.push(Condition::from_residual(
                "schouten_square",
                poisson_residual(a, pi)?,
            ));
            conditions.push(Condition::from_residual(
                "omega_closed",
                a.mu().big_bracket(omega.element())?,
            ));
            conditions.push(Condition::from_residual(
                "omega_n_closed",
                a.mu()
                    .big_bracket(&n.element().big_bracket(omega.element())?)?,
            ));
        }
        CompositeKind::OmegaN => {
            let omega = need(&data.omega, "omega")?;
            let n = need(&data.endo, "endo")?;
            let residual = symmetry_residual(omega, n)?;
            if !residual.is_zero() {
                return Err(CompatError::SideConditionFails {
                    condition: "ω♭∘N = N*∘ω♭".into(),
                    residual,
                });
            }
            conditions.push(Condition::from_residual(
                "omega_closed",
                a.mu().big_bracket(omega.element())?,
            ));
            conditions.push(Condition::from_residual(
                "nijenhuis_torsion",
                torsion_residual(a, n)?,
            ));
            conditions.push(Condition::from_residual(
                "omega_n_closed",
                a.mu()
                    .big_bracket(&n.element().big_bracket(omega.element())?)?,
            ));
        }
        CompositeKind::HitchinPair => {
            let omega = need(&data.omega, "omega")?;
            let n = need(&data.endo, "endo")?;
            let residual = symmetry_residual(omega, n)?;
            if !residual.is_zero() {
                return Err(CompatError::SideConditionFails {
                    condition: "ω♭∘N = N*∘ω♭".into(),
                    residual,
                });
            }
            let nondegenerate = two_form_matrix(omega.element())?.inverse().is_ok();
            conditions.push(Condition {
                name: "omega_nondegenerate",
                residual: if nondegenerate {
                    GradedElement::zero(omega.element().context())
                } else {
                    omega.element().clone()
                },
                holds: nondegenerate,
            });
            conditions.push(Condition::from_residual(
                "omega_closed",
                a.mu().big_bracket(omega.element())?,
            ));
            conditions.push(Condition::from_residual(
                "omega_n_closed",
                a.mu()
                    .big_bracket(&n.element().big_bracket(omega.element())?)?,
            ));
        }
        CompositeKind::CompatiblePair => {
            let pi = need(&data.pi, "pi")?;
            let pi1 = need(&data.pi1, "pi1")?;
            conditions.push(Condition::from_residual(
                "schouten_square",
                poisson_residual(a, pi)?,
            ));
            conditions.push(Condition::from_residual(
                "schouten_square_second",
                poisson_residual(a, pi1)?,
            ));
            conditions.push(Condition::from_residual(
                "mixed_bracket",
                pi.element()
                    .big_bracket(a.mu())?
                    .big_bracket(pi1.element())?,
            ));
        }
    }
    Ok(StructureReport { kind, conditions })
}

/// The re-dualized structure `μ̃ = {{π,μ},ω}` together with its components,
/// its self-bracket, and the frame cross-check of the bracket formula
/// `[X,Y]_μ̃ = [X,Y]^μ_N − π♯(i_{X∧Y} d_μω)` with `N = {π,ω}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeReport {
    pub mu_tilde: GradedElement,
    /// `μ_1 = {{π,ω},μ} = {N,μ}`.
    pub mu1: GradedElement,
    /// `μ_2 = {π,{μ,ω}}`.
    pub mu2: GradedElement,
    /// `{μ̃,μ̃}` — zero iff `μ̃` is a Lie algebroid structure.
    pub self_bracket: GradedElement,
    /// Whether the frame table of the bracket formula matches `μ̃` exactly.
    pub table_matches: bool,
}

pub fn tilde_structure(
    a: &AlgebroidStructure,
    pi: &Bivector,
    omega: &TwoForm,
) -> Result<TildeReport, CompatError> {
    let ctx = a.context();
    let mu = a.mu();
    let gamma = pi.element().big_bracket(mu)?;
    let mu_tilde = gamma.big_bracket(omega.element())?;
    let n = pi.element().big_bracket(omega.element())?;
    let mu1 = n.big_bracket(mu)?;
    let mu2 = pi.element().big_bracket(&mu.big_bracket(omega.element())?)?;
    let self_bracket = mu_tilde.big_bracket(&mu_tilde)?;
    let d_omega = mu.big_bracket(omega.element())?;
    let mut table_matches = true;
    for b1 in 0..ctx.r() {
        for b2 in 0..ctx.r() {
            let x = GradedElement::theta(ctx, b1);
            let y = GradedElement::theta(ctx, b2);
            let lhs = x.big_bracket(&mu_tilde)?.big_bracket(&y)?;
            let deformed = x.big_bracket(&n.big_bracket(mu)?)?.big_bracket(&y)?;
            let contracted = x.big_bracket(&y.big_bracket(&d_omega)?)?;
            let corr = sharp_apply(pi, &contracted)?;
            if lhs != deformed.sub(&corr) {
                table_matches = false;
            }
        }
    }
    Ok(TildeReport {
        mu_tilde,
        mu1,
        mu2,
        self_bracket,
        table_matches,
    })
}

/// The twist `λ = −(ω + ¼{N,{N,ω}})` of a Hitchin pair, and the residual of
/// the identity `𝒯_μN = {σ, d_μλ}` with `σ = ω⁻¹`.
pub fn twist_form(
    a: &AlgebroidStructure,
    omega: &TwoForm,
    n: &Endo11,
) -> Result<(TwoForm, GradedElement), CompatError> {
    let sigma = invert_two_form(omega)?;
    let inner = n
        .element()
        .big_bracket(&n.element().big_bracket(omega.element())?)?
        .scale_rat(&rat(1, 4));
    let lambda = TwoForm::new(omega.element().add(&inner).neg())?;
    let d_lambda = a.mu().big_bracket(lambda.element())?;
    let torsion = a.nijenhuis_torsion(n.element())?;
    let residual = torsion.sub(&sigma.element().big_bracket(&d_lambda)?);
    Ok((lambda, residual))
}

/// Residuals attached to a recursion operator `N = π₁♯∘(π♯)⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionReport {
    pub torsion: GradedElement,
    pub compat_pi: GradedElement,
    pub compat_pi1: GradedElement,
    /// `{{μ,π},N} + {{μ,N},π}`.
    pub eq_c: GradedElement,
    /// `{{N,μ},ω}` with `ω = π⁻¹`.
    pub eq_c0: GradedElement,
    /// `{{μ,π_N},N} + {{μ,N},π_N}` with `π_N = ½{π,N}`.
    pub eq_c1: GradedElement,
}

/// Build the recursion operator of a pair of Poisson bivectors with `π`
/// non-degenerate, along with all the compatibility residuals.
pub fn recursion_operator(
    a: &AlgebroidStructure,
    pi: &Bivector,
    pi1: &Bivector,
) -> Result<(Endo11, RecursionReport), CompatError> {
    for p in [pi, pi1] {
        let residual = poisson_residual(a, p)?;
        if !residual.is_zero() {
            return Err(CompatError::NotPoisson { residual });
        }
    }
    let omega = invert_bivector(pi)?;
    let n = endo_from(pi1, &omega)?;
    let mu = a.mu();
    let torsion = a.nijenhuis_torsion(n.element())?;
    let compat_pi = compatibility_tensor_raw(a, pi, &n)?;
    let compat_pi1 = compatibility_tensor_raw(a, pi1, &n)?;
    let eq_c = mu
        .big_bracket(pi.element())?
        .big_bracket(n.element())?
        .add(&mu.big_bracket(n.element())?.big_bracket(pi.element())?);
    let eq_c0 = n.element().big_bracket(mu)?.big_bracket(omega.element())?;
    let pi_n = deformed_bivector(pi, &n)?;
    let eq_c1 = mu
        .big_bracket(pi_n.element())?
        .big_bracket(n.element())?
        .add(&mu.big_bracket(n.element())?.big_bracket(pi_n.element())?);
    Ok((
        n,
        RecursionReport {
            torsion,
            compat_pi,
            compat_pi1,
            eq_c,
            eq_c0,
            eq_c1,
        },
    ))
}

/// The trace cocycle `d_μ(Tr N)` of a torsion-free (1,1)-tensor; its class
/// is the modular class of the deformed structure, and its vanishing is the
/// unimodularity criterion used for Monge-Ampère tensors.
pub fn modular_cocycle(
    a: &AlgebroidStructure,
    n: &Endo11,
) -> Result<GradedElement, CompatError> {
    let torsion = a.nijenhuis_torsion(n.element())?;
    if !torsion.is_zero() {
        return Err(CompatError::TorsionNonzero { residual: torsion });
    }
    let trace = GradedElement::scalar(a.context(), n.matrix().trace());
    Ok(a.mu().big_bracket(&trace)?)
}

// ---------------------------------------------------------------------------
// Identity-lemma residuals.  Each returns an element that is exactly zero
// whenever the corresponding identity holds; they exist so that property
// tests can fuzz them over random tensors.
// ---------------------------------------------------------------------------

/// `½[ω,ω]_π + d_Nω + d_μ(ω_N)` with `N = {π,ω}` — identically zero under
/// the frozen bracket orientation.
pub fn identity_d_n(
    a: &AlgebroidStructure,
    pi: &Bivector,
    omega: &TwoForm,
) -> Result<GradedElement, CompatError> {
    let mu = a.mu();
    let n = pi.element().big_bracket(omega.element())?;
    let koszul = koszul_square(a, pi, omega)?.scale_rat(&rat(1, 2));
    let d_n_omega = n.big_bracket(mu)?.big_bracket(omega.element())?;
    let omega_n = n.big_bracket(omega.element())?.scale_rat(&rat(1, 2));
    let d_omega_n = mu.big_bracket(&omega_n)?;
    Ok(koszul.add(&d_n_omega).add(&d_omega_n))
}

/// `{[π,π]_μ,ω} − {{π,d_μω},π} + C_μ(π,N)` with `N = {π,ω}` — identically
/// zero.
pub fn identity_c_zero(
    a: &AlgebroidStructure,
    pi: &Bivector,
    omega: &TwoForm,
) -> Result<GradedElement, CompatError> {
    let mu = a.mu();
    let n = Endo11::new(pi.element().big_bracket(omega.element())?)?;
    let lhs = poisson_residual(a, pi)?.big_bracket(omega.element())?;
    let d_omega = mu.big_bracket(omega.element())?;
    let mid = pi
        .element()
        .big_bracket(&d_omega)?
        .big_bracket(pi.element())?;
    let c = compatibility_tensor_raw(a, pi, &n)?;
    Ok(lhs.sub(&mid).add(&c))
}

/// `{{[π,π]_μ,ω},ω} − {{{π,d_μω},π},ω} − {{π,N},d_μω} + 2{π,d_Nω} + 4𝒯_μN`
/// with `N = {π,ω}` — identically zero.
pub fn identity_t_zero(
    a: &AlgebroidStructure,
    pi: &Bivector,
    omega: &TwoForm,
) -> Result<GradedElement, CompatError> {
    let mu = a.mu();
    let n = pi.element().big_bracket(omega.element())?;
    let d_omega = mu.big_bracket(omega.element())?;
    let lhs = poisson_residual(a, pi)?
        .big_bracket(omega.element())?
        .big_bracket(omega.element())?;
    let t1 = pi
        .element()
        .big_bracket(&d_omega)?
        .big_bracket(pi.element())?
        .big_bracket(omega.element())?;
    let t2 = pi.element().big_bracket(&n)?.big_bracket(&d_omega)?;
    let d_n_omega = n.big_bracket(mu)?.big_bracket(omega.element())?;
    let t3 = pi.element().big_bracket(&d_n_omega)?.scale_int(2);
    let t4 = a.nijenhuis_torsion(&n)?.scale_int(4);
    Ok(lhs.sub(&t1).sub(&t2).add(&t3).add(&t4))
}

/// `N² + ½{{N,σ},τ}` for `N = {σ,τ}` — identically zero (the square is the
/// frame-matrix composition).
pub fn identity_nsquare(
    sigma: &Bivector,
    tau: &TwoForm,
) -> Result<GradedElement, CompatError> {
    let n = sigma.element().big_bracket(tau.element())?;
    let n2 = endo_compose(&n, &n)?;
    let rhs = n
        .big_bracket(sigma.element())?
        .big_bracket(tau.element())?
        .scale_rat(&rat(1, 2));
    Ok(n2.add(&rhs))
}

/// `{{X,{ψ,π}},Y} − π♯(i_X i_Y ψ)` for a 3-form `ψ` — identically zero
/// (with the convention `i_{X∧Y} = i_X∘i_Y`).
pub fn identity_three_form(
    x: &GradedElement,
    y: &GradedElement,
    psi: &GradedElement,
    pi: &Bivector,
) -> Result<GradedElement, CompatError> {
    let lhs = x
        .big_bracket(&psi.big_bracket(pi.element())?)?
        .big_bracket(y)?;
    let contracted = x.big_bracket(&y.big_bracket(psi)?)?;
    Ok(lhs.sub(&sharp_apply(pi, &contracted)?))
}

/// `[i_N, d_μ]α − {{N,μ},α}` — identically zero (the two presentations of
/// `d_N` agree on every form).
pub fn identity_d_n_operator(
    a: &AlgebroidStructure,
    n: &Endo11,
    alpha: &GradedElement,
) -> Result<GradedElement, CompatError> {
    let mu = a.mu();
    let commutator = n
        .element()
        .big_bracket(&mu.big_bracket(alpha)?)?
        .sub(&mu.big_bracket(&n.element().big_bracket(alpha)?)?);
    let direct = n.element().big_bracket(mu)?.big_bracket(alpha)?;
    Ok(commutator.sub(&direct))
}
