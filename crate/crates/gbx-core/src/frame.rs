//! Exact matrices over the scalar field, and the dictionary between
//! (1,1)-tensor elements of the graded algebra and their matrices on the
//! coordinate frame `{θ_a}`.
//!
//! A (1,1)-tensor is carried by an element `N` of shifted bidegree (0,0)
//! whose action on a section `X` is the bracket `{X, N}`.  On the frame this
//! gives `N(θ_b) = Σ_a M[a][b] θ_a`, and the matrix `M` determines `N` as the
//! element `-Σ M[a][b] θ_a ξ^b` (the sign comes from the canonical generator
//! order).  All conversions here are exact and round-trip.

use crate::graded::{GradedContext, GradedElement, GradedError, OddGen};
use crate::scalar::{Rat, ScalarExpr};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("matrix is degenerate (determinant is the zero scalar)")]
    Degenerate,
    #[error("element is not a pure (1,1)-tensor on the frame")]
    NotAnEndomorphism,
    #[error("matrix is not skew-symmetric")]
    NotSkewSymmetric,
    #[error(transparent)]
    Graded(#[from] GradedError),
}

/// A square matrix with exact scalar entries, indexed `[row][col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMatrix {
    n: usize,
    entries: Vec<Vec<ScalarExpr>>,
}

impl ScalarMatrix {
    pub fn zeros(n: usize) -> Self {
        ScalarMatrix {
            n,
            entries: vec![vec![ScalarExpr::zero(); n]; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i][i] = ScalarExpr::one();
        }
        m
    }

    pub fn from_rows(entries: Vec<Vec<ScalarExpr>>) -> Self {
        let n = entries.len();
        assert!(entries.iter().all(|r| r.len() == n));
        ScalarMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ScalarExpr) {
        self.entries[i][j] = v;
    }

    pub fn mul(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.n, other.n);
        let mut out = ScalarMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = ScalarExpr::zero();
                for k in 0..self.n {
                    acc = acc.add(&self.entries[i][k].mul(&other.entries[k][j]));
                }
                out.entries[i][j] = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.n, other.n);
        let mut out = ScalarMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i][j] = self.entries[i][j].add(&other.entries[i][j]);
            }
        }
        out
    }

    pub fn sub(&self, other: &ScalarMatrix) -> ScalarMatrix {
        self.add(&other.scale(&ScalarExpr::from_int(-1)))
    }

    pub fn scale(&self, s: &ScalarExpr) -> ScalarMatrix {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                *e = e.mul(s);
            }
        }
        out
    }

    pub fn transpose(&self) -> ScalarMatrix {
        let mut out = ScalarMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.entries[i][j] = self.entries[j][i].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> ScalarExpr {
        let mut acc = ScalarExpr::zero();
        for i in 0..self.n {
            acc = acc.add(&self.entries[i][i]);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|e| e.is_zero()))
    }

    /// Exact inverse by Gauss–Jordan elimination over the rational-function
    /// field.  Fails with [`FrameError::Degenerate`] when the matrix is
    /// singular as a matrix of scalar expressions.
    pub fn inverse(&self) -> Result<ScalarMatrix, FrameError> {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut inv = ScalarMatrix::identity(n).entries;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&row| !a[row][col].is_zero())
                .ok_or(FrameError::Degenerate)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let p = a[col][col].clone();
            let pinv = p.recip().expect("pivot is nonzero");
            for j in 0..n {
                a[col][j] = a[col][j].mul(&pinv);
                inv[col][j] = inv[col][j].mul(&pinv);
            }
            for row in 0..n {
                if row == col || a[row][col].is_zero() {
                    continue;
                }
                let f = a[row][col].clone();
                for j in 0..n {
                    a[row][j] = a[row][j].sub(&f.mul(&a[col][j]));
                    inv[row][j] = inv[row][j].sub(&f.mul(&inv[col][j]));
                }
            }
        }
        Ok(ScalarMatrix { n, entries: inv })
    }

    /// Exact determinant by fraction-free expansion through elimination.
    pub fn det(&self) -> ScalarExpr {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut det = ScalarExpr::one();
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&row| !a[row][col].is_zero()) else {
                return ScalarExpr::zero();
            };
            if pivot != col {
                a.swap(col, pivot);
                det = det.neg();
            }
            let p = a[col][col].clone();
            det = det.mul(&p);
            let pinv = p.recip().expect("pivot is nonzero");
            for row in (col + 1)..n {
                if a[row][col].is_zero() {
                    continue;
                }
                let f = a[row][col].mul(&pinv);
                for j in col..n {
                    a[row][j] = a[row][j].sub(&f.mul(&a[col][j]));
                }
            }
        }
        det
    }

    /// Evaluate every entry at a rational point.
    pub fn eval(&self, point: &BTreeMap<u32, Rat>) -> Result<Vec<Vec<Rat>>, crate::scalar::ScalarError> {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(point)).collect())
            .collect()
    }
}

/// Signature `(positive, negative, zero)` of a symmetric rational matrix,
/// computed by exact symmetric Gaussian elimination (Sylvester's law of
/// inertia: congruence preserves the signs of the pivots).
pub fn symmetric_signature(mut a: Vec<Vec<Rat>>) -> (usize, usize, usize) {
    let n = a.len();
    let mut pos = 0;
    let mut neg = 0;
    let mut zero = 0;
    let mut k = 0;
    while k < n {
        // Find a nonzero diagonal pivot at or after k, swapping symmetrically.
        let diag = (k..n).find(|&i| !a[i][i].is_zero());
        match diag {
            Some(i) => {
                if i != k {
                    a.swap(i, k);
                    for row in a.iter_mut() {
                        row.swap(i, k);
                    }
                }
            }
            None => {
                // Look for an off-diagonal nonzero to combine rows: replace
                // row/col k by (k + j) which has diagonal 2*a[k][j] ≠ 0.
                let off = (k..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[i][j].is_zero());
                match off {
                    Some((i, j)) => {
                        // Congruence: row_i += row_j, col_i += col_j.
                        for c in 0..n {
                            let t = a[j][c].clone();
                            a[i][c] += t;
                        }
                        for r in 0..n {
                            let t = a[r][j].clone();
                            a[r][i] += t;
                        }
                        if i != k {
                            a.swap(i, k);
                            for row in a.iter_mut() {
                                row.swap(i, k);
                            }
                        }
                    }
                    None => {
                        zero += n - k;
                        break;
                    }
                }
            }
        }
        let pivot = a[k][k].clone();
        if pivot.is_zero() {
            zero += 1;
            k += 1;
            continue;
        }
        if pivot > Rat::zero() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in (k + 1)..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &pivot;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
        for j in (k + 1)..n {
            a[k][j] = Rat::zero();
        }
        k += 1;
    }
    (pos, neg, zero)
}

/// Matrix of a (1,1)-tensor element on the frame: `{θ_b, N} = Σ_a M[a][b] θ_a`.
pub fn endo_matrix(n_elem: &GradedElement) -> Result<ScalarMatrix, FrameError> {
    let ctx = n_elem.context();
    let r = ctx.r();
    // Every term must be a pure θξ word of length 2 with no momenta.
    for (pexp, word, _) in n_elem.terms() {
        if pexp.iter().any(|&k| k != 0) {
            return Err(FrameError::NotAnEndomorphism);
        }
        let thetas = (word & ((1u32 << r) - 1)).count_ones();
        let xis = (word >> r).count_ones();
        if thetas != 1 || xis != 1 {
            return Err(FrameError::NotAnEndomorphism);
        }
    }
    let mut m = ScalarMatrix::zeros(r);
    for b in 0..r {
        let image = GradedElement::theta(ctx, b).big_bracket(n_elem)?;
        for a in 0..r {
            let word = 1u32 << OddGen::Theta(a).bit(r);
            m.set(a, b, image.coefficient(&vec![0u16; ctx.n()], word));
        }
    }
    Ok(m)
}

/// The (1,1)-tensor element whose frame matrix is `m` (inverse of
/// [`endo_matrix`]).
pub fn endo_from_matrix(ctx: &Arc<GradedContext>, m: &ScalarMatrix) -> GradedElement {
    let r = ctx.r();
    assert_eq!(m.size(), r);
    let mut out = GradedElement::zero(ctx);
    for a in 0..r {
        for b in 0..r {
            if m.at(a, b).is_zero() {
                continue;
            }
            let term = GradedElement::term(
                ctx,
                m.at(a, b).neg(),
                &vec![0u16; ctx.n()],
                &[OddGen::Theta(a), OddGen::Xi(b)],
            );
            out = out.add(&term);
        }
    }
    out
}

/// Composition `N₁∘N₂` of two (1,1)-tensors, as a graded element.
pub fn endo_compose(n1: &GradedElement, n2: &GradedElement) -> Result<GradedElement, FrameError> {
    let m1 = endo_matrix(n1)?;
    let m2 = endo_matrix(n2)?;
    Ok(endo_from_matrix(n1.context(), &m1.mul(&m2)))
}

/// Matrix of a 2-form on the frame: `ω(θ_a, θ_b)` read off from `{ω, θ_b}`
/// written in the ξ-frame, i.e. `{ω, θ_b} = Σ_a W[a][b] ξ^a`.
pub fn two_form_matrix(omega: &GradedElement) -> Result<ScalarMatrix, FrameError> {
    let ctx = omega.context();
    let r = ctx.r();
    let mut m = ScalarMatrix::zeros(r);
    for b in 0..r {
        let image = omega.big_bracket(&GradedElement::theta(ctx, b))?;
        for a in 0..r {
            let word = 1u32 << OddGen::Xi(a).bit(r);
            m.set(a, b, image.coefficient(&vec![0u16; ctx.n()], word));
        }
    }
    Ok(m)
}

/// Matrix of a bivector on the frame: `{ξ^b, π} = Σ_a P[a][b] θ_a`.
pub fn bivector_matrix(pi: &GradedElement) -> Result<ScalarMatrix, FrameError> {
    let ctx = pi.context();
    let r = ctx.r();
    let mut m = ScalarMatrix::zeros(r);
    for b in 0..r {
        let image = GradedElement::xi(ctx, b).big_bracket(pi)?;
        for a in 0..r {
            let word = 1u32 << OddGen::Theta(a).bit(r);
            m.set(a, b, image.coefficient(&vec![0u16; ctx.n()], word));
        }
    }
    Ok(m)
}

/// The bivector element whose frame matrix is the skew matrix `m` (inverse
/// of [`bivector_matrix`]).  The per-pair scaling probes the sign that the
/// bracket assigns to each basis monomial `θ_aθ_b`, so the construction is
/// independent of the sign bookkeeping inside the bracket itself.
pub fn bivector_from_matrix(
    ctx: &Arc<GradedContext>,
    m: &ScalarMatrix,
) -> Result<GradedElement, FrameError> {
    let r = ctx.r();
    assert_eq!(m.size(), r);
    let mut out = GradedElement::zero(ctx);
    for a in 0..r {
        if !m.at(a, a).is_zero() {
            return Err(FrameError::NotSkewSymmetric);
        }
        for b in (a + 1)..r {
            if !m.at(a, b).add(m.at(b, a)).is_zero() {
                return Err(FrameError::NotSkewSymmetric);
            }
            if m.at(a, b).is_zero() {
                continue;
            }
            let basis = GradedElement::term(
                ctx,
                ScalarExpr::one(),
                &vec![0u16; ctx.n()],
                &[OddGen::Theta(a), OddGen::Theta(b)],
            );
            let probe = bivector_matrix(&basis)?;
            let coeff = m.at(a, b).div(probe.at(a, b)).expect("probe entry is ±1");
            out = out.add(&basis.scale(&coeff));
        }
    }
    Ok(out)
}

/// The 2-form element whose frame matrix is the skew matrix `m` (inverse of
/// [`two_form_matrix`]); same probing strategy as [`bivector_from_matrix`].
pub fn two_form_from_matrix(
    ctx: &Arc<GradedContext>,
    m: &ScalarMatrix,
) -> Result<GradedElement, FrameError> {
    let r = ctx.r();
    assert_eq!(m.size(), r);
    let mut out = GradedElement::zero(ctx);
    for a in 0..r {
        if !m.at(a, a).is_zero() {
            return Err(FrameError::NotSkewSymmetric);
        }
        for b in (a + 1)..r {
            if !m.at(a, b).add(m.at(b, a)).is_zero() {
                return Err(FrameError::NotSkewSymmetric);
            }
            if m.at(a, b).is_zero() {
                continue;
            }
            let basis = GradedElement::term(
                ctx,
                ScalarExpr::one(),
                &vec![0u16; ctx.n()],
                &[OddGen::Xi(a), OddGen::Xi(b)],
            );
            let probe = two_form_matrix(&basis)?;
            let coeff = m.at(a, b).div(probe.at(a, b)).expect("probe entry is ±1");
            out = out.add(&basis.scale(&coeff));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat_i;

    fn ctx() -> Arc<GradedContext> {
        GradedContext::new(&["x"], &["e1", "e2"]).unwrap()
    }

    #[test]
    fn endo_round_trip() {
        let ctx = ctx();
        let mut m = ScalarMatrix::zeros(2);
        m.set(0, 0, ScalarExpr::from_int(2));
        m.set(0, 1, ScalarExpr::var(0));
        m.set(1, 0, ScalarExpr::from_int(-1));
        let elem = endo_from_matrix(&ctx, &m);
        assert_eq!(endo_matrix(&elem).unwrap(), m);
    }

    #[test]
    fn compose_matches_matrix_product() {
        let ctx = ctx();
        let mut m1 = ScalarMatrix::zeros(2);
        m1.set(0, 1, ScalarExpr::one());
        m1.set(1, 0, ScalarExpr::from_int(-1));
        let mut m2 = ScalarMatrix::zeros(2);
        m2.set(0, 0, ScalarExpr::from_int(3));
        m2.set(1, 1, ScalarExpr::var(0));
        let e1 = endo_from_matrix(&ctx, &m1);
        let e2 = endo_from_matrix(&ctx, &m2);
        let comp = endo_compose(&e1, &e2).unwrap();
        assert_eq!(endo_matrix(&comp).unwrap(), m1.mul(&m2));
    }

    #[test]
    fn inverse_round_trip() {
        let mut m = ScalarMatrix::zeros(2);
        m.set(0, 0, ScalarExpr::var(0));
        m.set(0, 1, ScalarExpr::one());
        m.set(1, 1, ScalarExpr::from_int(1));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), ScalarMatrix::identity(2));
    }

    #[test]
    fn singular_matrix_reported() {
        let mut m = ScalarMatrix::zeros(2);
        m.set(0, 0, ScalarExpr::one());
        m.set(1, 0, ScalarExpr::one());
        assert_eq!(m.inverse().unwrap_err(), FrameError::Degenerate);
    }

    #[test]
    fn signature_of_diag() {
        let a = vec![
            vec![rat_i(2), rat_i(0), rat_i(0)],
            vec![rat_i(0), rat_i(-3), rat_i(0)],
            vec![rat_i(0), rat_i(0), rat_i(0)],
        ];
        assert_eq!(symmetric_signature(a), (1, 1, 1));
    }

    #[test]
    fn signature_of_hyperbolic_pair() {
        // x·y quadratic form: eigenvalues ±1/2.
        let a = vec![
            vec![rat_i(0), rat_i(1)],
            vec![rat_i(1), rat_i(0)],
        ];
        assert_eq!(symmetric_signature(a), (1, 1, 0));
    }
}
