//! Endomorphisms of the double `A ⊕ A*`, Courant/Dorfman torsion, and the
//! classification of generalized complex / product / subtangent structures.
//!
//! An endomorphism is carried by an element `𝒩 = π + N + λ` (bivector,
//! (1,1)-tensor, 2-form parts) acting on sections of the double by
//! `u ↦ {u,𝒩}`; in block form over the frame `(θ_a; ξ^a)` this is the
//! matrix `(N σ; λ −N*)`.  Elements of this shape are orthogonal for the
//! canonical pairing exactly when the blocks satisfy the usual symmetry
//! conditions, which are checked on the block matrix directly.
//!
//! Torsion comes in two flavors that must agree: the big-bracket element
//! `𝒯_S𝒩 = ½({𝒩,{𝒩,S}} − c{S}) ` for endomorphisms with scalar square
//! `𝒩² = c·Id`, and the direct frame table of
//! `[𝒩u,𝒩v]_S − 𝒩([𝒩u,v]_S + [u,𝒩v]_S) + 𝒩²[u,v]_S`.
//! Classification is by exact comparison of `{{𝒩,S},𝒩}` against `S`, `−S`
//! and `0`.

use crate::algebroid::{AlgebroidError, AlgebroidStructure};
use crate::compat::{Bivector, CompatError, Endo11, TwoForm};
use crate::frame::{FrameError, ScalarMatrix};
use crate::graded::{GradedElement, GradedError, OddGen};
use crate::scalar::{rat, ScalarExpr};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GcsError {
    #[error("endomorphism is not orthogonal for the canonical pairing")]
    NotOrthogonal,
    #[error("endomorphism square is not the scalar required by the classification")]
    SquareMismatch,
    #[error("big-bracket torsion requires a scalar square 𝒩² = c·Id")]
    NonScalarSquare,
    #[error("element has components outside bidegrees (1,-1), (0,0), (-1,1)")]
    UnsupportedComponents,
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Algebroid(#[from] AlgebroidError),
    #[error(transparent)]
    Compat(#[from] CompatError),
}

/// An endomorphism of the double `A ⊕ A*` carried by a graded element with
/// bivector, (1,1)-tensor and 2-form components.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleEndo {
    element: GradedElement,
}

impl DoubleEndo {
    /// Assemble from the three optional parts.
    pub fn new(
        ctx: &Arc<crate::graded::GradedContext>,
        pi: Option<&Bivector>,
        endo: Option<&Endo11>,
        lambda: Option<&TwoForm>,
    ) -> Self {
        let mut element = GradedElement::zero(ctx);
        if let Some(p) = pi {
            element = element.add(p.element());
        }
        if let Some(n) = endo {
            element = element.add(n.element());
        }
        if let Some(l) = lambda {
            element = element.add(l.element());
        }
        DoubleEndo { element }
    }

    /// Wrap a raw element, rejecting components outside the three admissible
    /// bidegrees (and any momentum dependence).
    pub fn from_element(element: GradedElement) -> Result<Self, GcsError> {
        for (shifted, part) in element.bidegree_components() {
            if !matches!(shifted, (1, -1) | (0, 0) | (-1, 1)) {
                return Err(GcsError::UnsupportedComponents);
            }
            for (pexp, _, _) in part.terms() {
                if pexp.iter().any(|&k| k != 0) {
                    return Err(GcsError::UnsupportedComponents);
                }
            }
        }
        Ok(DoubleEndo { element })
    }

    pub fn element(&self) -> &GradedElement {
        &self.element
    }

    pub fn bivector_part(&self) -> GradedElement {
        self.element.component((1, -1))
    }

    pub fn endo_part(&self) -> GradedElement {
        self.element.component((0, 0))
    }

    pub fn two_form_part(&self) -> GradedElement {
        self.element.component((-1, 1))
    }

    /// Apply to a section of the double: `𝒩u = {u,𝒩}`.
    pub fn apply(&self, u: &GradedElement) -> Result<GradedElement, GcsError> {
        Ok(u.big_bracket(&self.element)?)
    }

    /// The `2r×2r` block matrix over the frame `(θ_1..θ_r, ξ^1..ξ^r)`:
    /// column `j` holds the coordinates of the image of the `j`-th frame
    /// section.
    pub fn block_matrix(&self) -> Result<ScalarMatrix, GcsError> {
        let ctx = self.element.context();
        let r = ctx.r();
        let zero_p = vec![0u16; ctx.n()];
        let mut m = ScalarMatrix::zeros(2 * r);
        for j in 0..2 * r {
            let basis = if j < r {
                GradedElement::theta(ctx, j)
            } else {
                GradedElement::xi(ctx, j - r)
            };
            let image = self.apply(&basis)?;
            for i in 0..2 * r {
                let word = if i < r {
                    1u32 << OddGen::Theta(i).bit(r)
                } else {
                    1u32 << OddGen::Xi(i - r).bit(r)
                };
                m.set(i, j, image.coefficient(&zero_p, word));
            }
        }
        Ok(m)
    }

    /// Orthogonality `𝒩 + 𝒩* = 0` for the canonical pairing, checked
    /// blockwise: with blocks `(A B; C D)`, `B` and `C` must be skew and
    /// `D = −Aᵀ`.
    pub fn is_orthogonal(&self) -> Result<bool, GcsError> {
        let m = self.block_matrix()?;
        let r = m.size() / 2;
        for i in 0..r {
            for j in 0..r {
                let b_skew = m.at(i, r + j).add(m.at(j, r + i));
                let c_skew = m.at(r + i, j).add(m.at(r + j, i));
                let d_transpose = m.at(r + i, r + j).add(m.at(j, i));
                if !b_skew.is_zero() || !c_skew.is_zero() || !d_transpose.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// `Some(c)` when `𝒩² = c·Id` on the double, `None` otherwise.
    pub fn scalar_square(&self) -> Result<Option<ScalarExpr>, GcsError> {
        let m = self.block_matrix()?;
        let sq = m.mul(&m);
        let c = sq.at(0, 0).clone();
        for i in 0..sq.size() {
            for j in 0..sq.size() {
                let expect = if i == j { c.clone() } else { ScalarExpr::zero() };
                if sq.at(i, j) != &expect {
                    return Ok(None);
                }
            }
        }
        Ok(Some(c))
    }
}

/// The Dorfman bracket on the double, `[u,v]_S = {{u,S},v}`.
pub fn dorfman(
    s: &AlgebroidStructure,
    u: &GradedElement,
    v: &GradedElement,
) -> Result<GradedElement, GcsError> {
    Ok(u.big_bracket(s.element())?.big_bracket(v)?)
}

/// Big-bracket torsion `𝒯_S𝒩 = ½({𝒩,{𝒩,S}} − c·S)` for an endomorphism
/// with scalar square `𝒩² = c·Id`.
pub fn courant_torsion(
    s: &AlgebroidStructure,
    n: &DoubleEndo,
) -> Result<GradedElement, GcsError> {
    let Some(c) = n.scalar_square()? else {
        return Err(GcsError::NonScalarSquare);
    };
    let inner = n.element().big_bracket(&n.element().big_bracket(s.element())?)?;
    Ok(inner.sub(&s.element().scale(&c)).scale_rat(&rat(1, 2)))
}

/// The direct torsion table over the frame of `A ⊕ A*`:
/// `T(u,v) = [𝒩u,𝒩v] − 𝒩([𝒩u,v] + [u,𝒩v]) + 𝒩²[u,v]` with the Dorfman
/// bracket (`skew = false`) or its skew-symmetrization, the Courant bracket
/// (`skew = true`).
pub fn courant_torsion_direct(
    s: &AlgebroidStructure,
    n: &DoubleEndo,
    skew: bool,
) -> Result<Vec<Vec<GradedElement>>, GcsError> {
    let ctx = s.context();
    let r = ctx.r();
    let basis: Vec<GradedElement> = (0..2 * r)
        .map(|i| {
            if i < r {
                GradedElement::theta(ctx, i)
            } else {
                GradedElement::xi(ctx, i - r)
            }
        })
        .collect();
    let bracket = |u: &GradedElement, v: &GradedElement| -> Result<GradedElement, GcsError> {
        if skew {
            Ok(dorfman(s, u, v)?
                .sub(&dorfman(s, v, u)?)
                .scale_rat(&rat(1, 2)))
        } else {
            dorfman(s, u, v)
        }
    };
    let mut table = Vec::with_capacity(2 * r);
    for u in &basis {
        let nu = n.apply(u)?;
        let mut row = Vec::with_capacity(2 * r);
        for v in &basis {
            let nv = n.apply(v)?;
            let lead = bracket(&nu, &nv)?;
            let cross = n.apply(&bracket(&nu, v)?.add(&bracket(u, &nv)?))?;
            let square = n.apply(&n.apply(&bracket(u, v)?)?)?;
            row.push(lead.sub(&cross).add(&square));
        }
        table.push(row);
    }
    Ok(table)
}

/// Check that the big-bracket torsion element evaluates to the direct
/// Dorfman table via the pairing `{{u,𝒯},v}` on every frame pair.
pub fn torsion_tables_agree(
    s: &AlgebroidStructure,
    n: &DoubleEndo,
) -> Result<bool, GcsError> {
    let element = courant_torsion(s, n)?;
    let table = courant_torsion_direct(s, n, false)?;
    let ctx = s.context();
    let r = ctx.r();
    let basis: Vec<GradedElement> = (0..2 * r)
        .map(|i| {
            if i < r {
                GradedElement::theta(ctx, i)
            } else {
                GradedElement::xi(ctx, i - r)
            }
        })
        .collect();
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let eval = u.big_bracket(&element)?.big_bracket(v)?;
            if eval != table[i][j] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralizedKind {
    Complex,
    Product,
    Subtangent,
}

/// Outcome of Grabowski's criterion: the candidate kind read off the scalar
/// square, the exact residual of `{{𝒩,S},𝒩}` against the matching target,
/// and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedVerdict {
    pub kind: GeneralizedKind,
    pub residual: GradedElement,
    pub integrable: bool,
}

/// Classify an orthogonal endomorphism with `𝒩² ∈ {−Id, +Id, 0}` by exact
/// comparison of `{{𝒩,S},𝒩}` with `S`, `−S`, `0` respectively.
pub fn classify_generalized(
    s: &AlgebroidStructure,
    n: &DoubleEndo,
) -> Result<GeneralizedVerdict, GcsError> {
    if !n.is_orthogonal()? {
        return Err(GcsError::NotOrthogonal);
    }
    let Some(c) = n.scalar_square()? else {
        return Err(GcsError::SquareMismatch);
    };
    let kind = if c == ScalarExpr::from_rat(rat(-1, 1)) {
        GeneralizedKind::Complex
    } else if c == ScalarExpr::one() {
        GeneralizedKind::Product
    } else if c.is_zero() {
        GeneralizedKind::Subtangent
    } else {
        return Err(GcsError::SquareMismatch);
    };
    let bracket = n
        .element()
        .big_bracket(s.element())?
        .big_bracket(n.element())?;
    let target = match kind {
        GeneralizedKind::Complex => s.element().clone(),
        GeneralizedKind::Product => s.element().neg(),
        GeneralizedKind::Subtangent => GradedElement::zero(s.context()),
    };
    let residual = bracket.sub(&target);
    let integrable = residual.is_zero();
    Ok(GeneralizedVerdict {
        kind,
        residual,
        integrable,
    })
}

/// The deformation `S_𝒩 = {𝒩,S}`, its self-bracket, and (for scalar-square
/// endomorphisms) the residual of `½{S_𝒩,S_𝒩} + {S,𝒯_S𝒩}`, which vanishes
/// identically.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationReport {
    pub deformed: GradedElement,
    pub self_bracket: GradedElement,
    pub identity_residual: Option<GradedElement>,
}

pub fn deform_courant(
    s: &AlgebroidStructure,
    n: &DoubleEndo,
) -> Result<DeformationReport, GcsError> {
    let deformed = n.element().big_bracket(s.element())?;
    let self_bracket = deformed.big_bracket(&deformed)?;
    let identity_residual = match courant_torsion(s, n) {
        Ok(torsion) => Some(
            self_bracket
                .scale_rat(&rat(1, 2))
                .add(&s.element().big_bracket(&torsion)?),
        ),
        Err(GcsError::NonScalarSquare) => None,
        Err(e) => return Err(e),
    };
    Ok(DeformationReport {
        deformed,
        self_bracket,
        identity_residual,
    })
}
