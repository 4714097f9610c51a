//! The sl(2) triple attached to an inverse bivector/2-form pair, primitivity
//! testing, and the Hodge–Lepage decomposition into primitive components.
//!
//! For a non-degenerate bivector `π` and 2-form `ω` with `{π,ω} = Id`
//! (`Id = ξ^a θ_a`), the operators
//!
//! * `ad_ω : u ↦ {ω, u}`  (raises the weight by 2),
//! * `ad'_π : u ↦ {u, π}` (lowers the weight by 2),
//! * `I : u ↦ w(u)·u` with weight `w(u) = q − p` on shifted bidegree `(p,q)`,
//!
//! satisfy `[I, ad_ω] = 2 ad_ω`, `[I, ad'_π] = −2 ad'_π` and
//! `[ad_ω, ad'_π] = I`, an sl(2) action on the graded algebra.  An element is
//! *primitive* when `ad'_π u = 0`.
//!
//! Every homogeneous `u` decomposes uniquely as
//! `u = u_0 + ad_ω u_1 + ad_ω² u_2 + …` with `u_k` primitive; the
//! coefficients of the stripping recursion come from
//! `ad'_π(ad_ω^k u) = −k(w(u)+k−1) ad_ω^{k−1} u` for primitive `u`.  The
//! recursion divides by `k(w+k−1)` at each step; a vanishing divisor is
//! reported as [`Sl2Error::SingularWeight`] rather than guessed around.

use crate::graded::{GradedElement, GradedError};
use crate::scalar::{rat_i, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Sl2Error {
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("pair is not inverse: {{π,ω}} − Id = {}", residual.display())]
    NotInverse { residual: GradedElement },
    #[error("singular weight: the Lepage recursion divisor k(w+k-1) vanishes for k = {k}, w = {weight}")]
    SingularWeight { k: u32, weight: i64 },
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// An inverse pair `(π, ω)` with the verified certificate `{π,ω} = Id`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Frame {
    pi: GradedElement,
    omega: GradedElement,
}

/// The identity (1,1)-tensor `Id = Σ_a ξ^a θ_a`.
pub fn identity_tensor(ctx: &std::sync::Arc<crate::graded::GradedContext>) -> GradedElement {
    let mut id = GradedElement::zero(ctx);
    for a in 0..ctx.r() {
        id = id.add(
            &GradedElement::xi(ctx, a)
                .wedge(&GradedElement::theta(ctx, a))
                .expect("same context"),
        );
    }
    id
}

impl Sl2Frame {
    /// Validate bidegrees and the inverse certificate `{π,ω} = Id`.
    pub fn new(pi: GradedElement, omega: GradedElement) -> Result<Self, Sl2Error> {
        pi.expect_shifted((1, -1))?;
        omega.expect_shifted((-1, 1))?;
        let id = identity_tensor(pi.context());
        let residual = pi.big_bracket(&omega)?.sub(&id);
        if !residual.is_zero() {
            return Err(Sl2Error::NotInverse { residual });
        }
        Ok(Sl2Frame { pi, omega })
    }

    pub fn pi(&self) -> &GradedElement {
        &self.pi
    }

    pub fn omega(&self) -> &GradedElement {
        &self.omega
    }

    /// The raising operator `ad_ω(u) = {ω, u}`.
    pub fn ad_omega(&self, u: &GradedElement) -> Result<GradedElement, Sl2Error> {
        Ok(self.omega.big_bracket(u)?)
    }

    /// The lowering operator `ad'_π(u) = {u, π}`.
    pub fn ad_pi(&self, u: &GradedElement) -> Result<GradedElement, Sl2Error> {
        Ok(u.big_bracket(&self.pi)?)
    }

    /// `is_primitive` with the residual `{u,π}` attached.
    pub fn primitivity_residual(&self, u: &GradedElement) -> Result<GradedElement, Sl2Error> {
        self.ad_pi(u)
    }

    pub fn is_primitive(&self, u: &GradedElement) -> Result<bool, Sl2Error> {
        Ok(self.primitivity_residual(u)?.is_zero())
    }

    /// Decompose a homogeneous element into its Lepage components:
    /// `u = Σ_k ad_ω^k u_k` with every `u_k` primitive.  Returns
    /// `[u_0, u_1, …]`.
    pub fn lepage_decompose(&self, u: &GradedElement) -> Result<Vec<GradedElement>, Sl2Error> {
        let ctx = u.context();
        if u.is_zero() {
            return Ok(Vec::new());
        }
        let w = weight_of(u)?;
        // Powers of the lowering operator until exhaustion; the q-degree is
        // finite so this terminates.
        let mut powers: Vec<GradedElement> = vec![u.clone()];
        while !powers.last().expect("nonempty").is_zero() {
            let next = self.ad_pi(powers.last().expect("nonempty"))?;
            powers.push(next);
        }
        let top = powers.len() as i64 - 2; // largest k with ad'^k u ≠ 0
        let mut components: Vec<GradedElement> = vec![GradedElement::zero(ctx); (top + 1) as usize];
        let mut rest = u.clone();
        let mut k = top;
        while !rest.is_zero() {
            debug_assert!(k >= 0, "stripping terminates at the primitive part");
            // ad'^k kills every ad_ω^j u_j with j < k and maps ad_ω^k u_k to
            // c_k u_k with c_k = Π_{j=1..k} (−j(w_k + j − 1)), w_k = w − 2k.
            let wk = w - 2 * k;
            let mut c = Rat::from_integer(1.into());
            for j in 1..=k {
                let factor = -j * (wk + j - 1);
                if factor == 0 {
                    return Err(Sl2Error::SingularWeight { k: j as u32, weight: wk });
                }
                c *= rat_i(factor);
            }
            let mut dk = rest.clone();
            for _ in 0..k {
                dk = self.ad_pi(&dk)?;
            }
            if !dk.is_zero() {
                debug_assert!(!c.is_zero());
                let uk = dk.scale_rat(&c.recip());
                // Subtract ad_ω^k u_k from the remainder.
                let mut lifted = uk.clone();
                for _ in 0..k {
                    lifted = self.ad_omega(&lifted)?;
                }
                rest = rest.sub(&lifted);
                components[k as usize] = uk;
            }
            if k == 0 {
                break;
            }
            k -= 1;
        }
        // Trim trailing zero components for a canonical result length.
        while components.last().is_some_and(|c| c.is_zero()) {
            components.pop();
        }
        Ok(components)
    }

    /// Reassemble `Σ_k ad_ω^k u_k` (the inverse of [`Self::lepage_decompose`]).
    pub fn lepage_reassemble(
        &self,
        components: &[GradedElement],
    ) -> Result<GradedElement, Sl2Error> {
        let Some(first) = components.first() else {
            return Err(Sl2Error::NotHomogeneous);
        };
        let mut acc = GradedElement::zero(first.context());
        for (k, uk) in components.iter().enumerate() {
            let mut lifted = uk.clone();
            for _ in 0..k {
                lifted = self.ad_omega(&lifted)?;
            }
            acc = acc.add(&lifted);
        }
        Ok(acc)
    }
}

/// The weight `w(u) = q − p` of a homogeneous element.
pub fn weight_of(u: &GradedElement) -> Result<i64, Sl2Error> {
    match u.shifted_bidegree() {
        Ok(Some((p, q))) => Ok(q - p),
        Ok(None) => Ok(0),
        Err(_) => Err(Sl2Error::NotHomogeneous),
    }
}

/// The weight operator `I(u) = w(u)·u`.
pub fn weight_operator(u: &GradedElement) -> Result<GradedElement, Sl2Error> {
    Ok(u.scale_int(weight_of(u)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{GradedContext, GradedElement, OddGen};
    use crate::scalar::ScalarExpr;
    use std::sync::Arc;

    /// Constant symplectic frame of rank 2: ω = ξ¹ξ², π chosen so that
    /// {π,ω} = Id.
    fn frame2() -> (Arc<GradedContext>, Sl2Frame) {
        let ctx = GradedContext::new(&["x1", "x2"], &["e1", "e2"]).unwrap();
        let omega = GradedElement::term(
            &ctx,
            ScalarExpr::one(),
            &[0, 0],
            &[OddGen::Xi(0), OddGen::Xi(1)],
        );
        let pi_candidate = GradedElement::term(
            &ctx,
            ScalarExpr::one(),
            &[0, 0],
            &[OddGen::Theta(0), OddGen::Theta(1)],
        );
        let frame = match Sl2Frame::new(pi_candidate.clone(), omega.clone()) {
            Ok(f) => f,
            Err(_) => Sl2Frame::new(pi_candidate.neg(), omega).unwrap(),
        };
        (ctx, frame)
    }

    #[test]
    fn weights_of_generators() {
        let ctx = GradedContext::new(&["x"], &["e"]).unwrap();
        assert_eq!(weight_of(&GradedElement::xi(&ctx, 0)).unwrap(), 1);
        assert_eq!(weight_of(&GradedElement::theta(&ctx, 0)).unwrap(), -1);
        let mu_like = GradedElement::momentum(&ctx, 0)
            .wedge(&GradedElement::xi(&ctx, 0))
            .unwrap();
        assert_eq!(weight_of(&mu_like).unwrap(), 1);
    }

    #[test]
    fn sl2_commutators_on_sample() {
        let (ctx, f) = frame2();
        // A mixed-degree homogeneous sample.
        let u = GradedElement::term(
            &ctx,
            ScalarExpr::var(0),
            &[1, 0],
            &[OddGen::Xi(1)],
        );
        let w = weight_of(&u).unwrap();
        // [I, ad_ω]u = 2 ad_ω u.
        let ad = f.ad_omega(&u).unwrap();
        let lhs = weight_operator(&ad).unwrap().sub(&f.ad_omega(&u.scale_int(w)).unwrap());
        assert_eq!(lhs, ad.scale_int(2));
        // [I, ad'_π]u = −2 ad'_π u.
        let adp = f.ad_pi(&u).unwrap();
        let lhs = weight_operator(&adp).unwrap().sub(&f.ad_pi(&u.scale_int(w)).unwrap());
        assert_eq!(lhs, adp.scale_int(-2));
        // [ad_ω, ad'_π]u = w(u)·u.
        let lhs = f.ad_omega(&f.ad_pi(&u).unwrap()).unwrap()
            .sub(&f.ad_pi(&f.ad_omega(&u).unwrap()).unwrap());
        assert_eq!(lhs, u.scale_int(w));
    }

    #[test]
    fn identity_tensor_is_not_primitive() {
        let (ctx, f) = frame2();
        let id = identity_tensor(&ctx);
        // {Id, π} = −2π by the weight formula (π has weight −2).
        let res = f.primitivity_residual(&id).unwrap();
        assert_eq!(res, f.pi().scale_int(-2));
        assert!(!f.is_primitive(&id).unwrap());
    }

    #[test]
    fn pi_is_primitive() {
        let (_, f) = frame2();
        assert!(f.is_primitive(f.pi()).unwrap());
    }

    #[test]
    fn lepage_round_trip_on_identity() {
        let (ctx, f) = frame2();
        let id = identity_tensor(&ctx);
        let comps = f.lepage_decompose(&id).unwrap();
        for c in &comps {
            assert!(f.is_primitive(c).unwrap());
        }
        assert_eq!(f.lepage_reassemble(&comps).unwrap(), id);
        // Id is not primitive, so it must have an ad_ω-lifted component.
        assert!(comps.len() > 1);
    }

    #[test]
    fn primitive_elements_decompose_trivially() {
        let (_, f) = frame2();
        let comps = f.lepage_decompose(f.pi()).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(&comps[0], f.pi());
    }

    #[test]
    fn lifted_primitive_decomposes_as_expected() {
        let (ctx, f) = frame2();
        // v = θ_1 is primitive of weight −1; u = ad_ω v has components [0, v].
        let v = GradedElement::theta(&ctx, 0);
        assert!(f.is_primitive(&v).unwrap());
        let u = f.ad_omega(&v).unwrap();
        let comps = f.lepage_decompose(&u).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(comps[0].is_zero());
        assert_eq!(comps[1], v);
    }

    #[test]
    fn weight_lemma_on_primitives() {
        let (ctx, f) = frame2();
        let v = GradedElement::theta(&ctx, 0).scale(&ScalarExpr::var(1));
        assert!(f.is_primitive(&v).unwrap());
        let w = weight_of(&v).unwrap();
        for k in 1..=2i64 {
            let mut lifted = v.clone();
            for _ in 0..k {
                lifted = f.ad_omega(&lifted).unwrap();
            }
            let lhs = f.ad_pi(&lifted).unwrap();
            let mut expect = v.clone();
            for _ in 0..(k - 1) {
                expect = f.ad_omega(&expect).unwrap();
            }
            assert_eq!(lhs, expect.scale_int(-k * (w + k - 1)));
        }
    }
}
