//! The bigraded algebra of functions on the shifted cotangent bundle of a
//! shifted vector bundle, together with its even graded Poisson bracket.
//!
//! # Coordinates and degrees
//!
//! A [`GradedContext`] fixes base coordinates `x^1..x^n`, odd fiber
//! coordinates `ξ^1..ξ^r`, and their conjugates: even momenta `p_1..p_n`
//! (one per base coordinate) and odd generators `θ_1..θ_r` (one per fiber
//! coordinate).  Bidegrees are
//!
//! | generator | bidegree |
//! |-----------|----------|
//! | `x^i`     | (0,0)    |
//! | `ξ^a`     | (0,1)    |
//! | `p_i`     | (1,1)    |
//! | `θ_a`     | (1,0)    |
//!
//! An element of bidegree `(p,q)` has *shifted* bidegree `(p-1, q-1)`; the
//! shifted grading is the one used by all structure-theoretic checks (a
//! bivector π is shifted `(1,-1)`, a 2-form ω is shifted `(-1,1)`, an
//! endomorphism N is shifted `(0,0)`, a Lie algebroid element μ is shifted
//! `(0,1)`).
//!
//! # The bracket
//!
//! [`GradedElement::big_bracket`] is the unique biderivation of bidegree
//! `(-1,-1)` with the generator pairings `{p_j, x^i} = δ` (equivalently
//! `{p_j, f} = ∂_j f` on base functions) and `{ξ^a, θ_b} = δ`.  In
//! coordinates it is computed as
//!
//! ```text
//! {u,v} = Σ_i ( ∂u/∂p_i · ∂v/∂x^i − ∂u/∂x^i · ∂v/∂p_i )
//!       + Σ_a ( ∂ru/∂ξ^a ∧ ∂lv/∂θ_a + ∂ru/∂θ_a ∧ ∂lv/∂ξ^a )
//! ```
//!
//! where `∂r`/`∂l` are graded right/left derivatives with respect to the odd
//! generators.  The sign convention — in particular the orientation of the
//! even sector, `{p_j, x^i} = +δ` — is frozen by regression tests that pin
//! the classical Lie-derivative and contraction formulas for the Dorfman
//! bracket of a vector field and a 1-form (see the `algebroid` module); it
//! is the unique orientation under which the derived anchor satisfies
//! `ρ(X)f = X(f)` on the tangent algebroid.
//!
//! # Canonical form
//!
//! Each element is a sorted map from `(p-exponent vector, odd word)` to an
//! exact scalar coefficient.  Odd words are bitmasks over the frozen
//! generator order `θ_1 < … < θ_r < ξ^1 < … < ξ^r`; reordering an input word
//! into this order multiplies the coefficient by the permutation sign, and
//! repeated odd generators vanish.

use crate::scalar::{rat_i, Rat, ScalarExpr};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Errors produced by graded-algebra operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradedError {
    #[error("elements belong to different coordinate contexts")]
    ContextMismatch,
    #[error("element is not homogeneous")]
    NotHomogeneous,
    #[error("element has shifted bidegree {found:?}, expected {expected:?}")]
    WrongBidegree {
        expected: (i64, i64),
        found: Vec<(i64, i64)>,
    },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("context must have at least one base and one fiber coordinate and at most 16 fiber coordinates")]
    BadContextShape,
    #[error("coordinate names must be pairwise distinct")]
    DuplicateName,
}

/// Declared sign of a base coordinate on the working chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartSign {
    Positive,
    Negative,
}

/// The coordinate system: base and fiber coordinates, their conjugates, and
/// the sign chart on which absolute values are resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedContext {
    base: Vec<String>,
    fiber: Vec<String>,
    theta_names: Vec<String>,
    momentum_names: Vec<String>,
    chart: BTreeMap<u32, ChartSign>,
}

impl GradedContext {
    /// Create a context with default conjugate names (`@f` for the θ paired
    /// with fiber coordinate `f`, `P_x` for the momentum of base `x`).
    pub fn new(base: &[&str], fiber: &[&str]) -> Result<Arc<Self>, GradedError> {
        Self::with_chart(base, fiber, &[])
    }

    /// Create a context and declare signs for selected base coordinates.
    pub fn with_chart(
        base: &[&str],
        fiber: &[&str],
        chart: &[(&str, ChartSign)],
    ) -> Result<Arc<Self>, GradedError> {
        let theta_names: Vec<String> = fiber.iter().map(|f| format!("@{f}")).collect();
        let momentum_names: Vec<String> = base.iter().map(|b| format!("P_{b}")).collect();
        Self::with_names(base, fiber, &theta_names, &momentum_names, chart)
    }

    /// Fully explicit constructor (used by the cotangent-bundle contexts where
    /// fiber coordinates are named `dq1` and their θ partners `@q1`).
    pub fn with_names(
        base: &[&str],
        fiber: &[&str],
        theta_names: &[String],
        momentum_names: &[String],
        chart: &[(&str, ChartSign)],
    ) -> Result<Arc<Self>, GradedError> {
        if base.is_empty() || fiber.is_empty() || fiber.len() > 16 {
            return Err(GradedError::BadContextShape);
        }
        if theta_names.len() != fiber.len() || momentum_names.len() != base.len() {
            return Err(GradedError::BadContextShape);
        }
        let mut all: Vec<&str> = base.to_vec();
        all.extend(fiber);
        all.extend(theta_names.iter().map(|s| s.as_str()));
        all.extend(momentum_names.iter().map(|s| s.as_str()));
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(GradedError::DuplicateName);
        }
        let mut ctx = GradedContext {
            base: base.iter().map(|s| s.to_string()).collect(),
            fiber: fiber.iter().map(|s| s.to_string()).collect(),
            theta_names: theta_names.to_vec(),
            momentum_names: momentum_names.to_vec(),
            chart: BTreeMap::new(),
        };
        for (name, sign) in chart {
            let i = ctx
                .base_index(name)
                .ok_or_else(|| GradedError::UnknownCoordinate(name.to_string()))?;
            ctx.chart.insert(i, *sign);
        }
        Ok(Arc::new(ctx))
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn r(&self) -> usize {
        self.fiber.len()
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber
    }

    pub fn theta_names(&self) -> &[String] {
        &self.theta_names
    }

    pub fn momentum_names(&self) -> &[String] {
        &self.momentum_names
    }

    pub fn chart(&self) -> &BTreeMap<u32, ChartSign> {
        &self.chart
    }

    pub fn chart_sign(&self, base_idx: u32) -> Option<ChartSign> {
        self.chart.get(&base_idx).copied()
    }

    pub fn base_index(&self, name: &str) -> Option<u32> {
        self.base.iter().position(|b| b == name).map(|i| i as u32)
    }

    pub fn fiber_index(&self, name: &str) -> Option<usize> {
        self.fiber.iter().position(|f| f == name)
    }

    pub fn theta_index(&self, name: &str) -> Option<usize> {
        self.theta_names.iter().position(|f| f == name)
    }
}

/// Odd word: bitmask over generators, bit `a` = `θ_{a+1}` for `a < r`,
/// bit `r+a` = `ξ^{a+1}`.
pub type Word = u32;

/// Generator index within a context: θ's first, then ξ's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OddGen {
    Theta(usize),
    Xi(usize),
}

impl OddGen {
    pub fn bit(self, r: usize) -> u32 {
        match self {
            OddGen::Theta(a) => a as u32,
            OddGen::Xi(a) => (r + a) as u32,
        }
    }
}

/// Sign of merging word `w2` after `w1` into canonical ascending order.
/// Returns `None` when the words share a generator (the product vanishes).
fn merge_sign(w1: Word, w2: Word) -> Option<i32> {
    if w1 & w2 != 0 {
        return None;
    }
    let mut inversions = 0u32;
    let mut rest = w2;
    while rest != 0 {
        let b = rest.trailing_zeros();
        inversions += (w1 >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// Sign of pulling generator `g` out of word `w` to the *left*.
fn left_sign(w: Word, g: u32) -> i32 {
    let below = (w & ((1u32 << g) - 1)).count_ones();
    if below % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of pulling generator `g` out of word `w` to the *right*.
fn right_sign(w: Word, g: u32) -> i32 {
    let above = (w >> (g + 1)).count_ones();
    if above % 2 == 0 {
        1
    } else {
        -1
    }
}

type TermKey = (Vec<u16>, Word);

/// An element of the bigraded algebra: a canonical sum of terms
/// `scalar · p^K · (odd word)`.
#[derive(Debug, Clone)]
pub struct GradedElement {
    ctx: Arc<GradedContext>,
    terms: BTreeMap<TermKey, ScalarExpr>,
}

impl PartialEq for GradedElement {
    fn eq(&self, other: &Self) -> bool {
        *self.ctx == *other.ctx && self.terms == other.terms
    }
}

impl GradedElement {
    pub fn zero(ctx: &Arc<GradedContext>) -> Self {
        GradedElement { ctx: Arc::clone(ctx), terms: BTreeMap::new() }
    }

    pub fn scalar(ctx: &Arc<GradedContext>, s: ScalarExpr) -> Self {
        let mut e = Self::zero(ctx);
        e.push_term(vec![0; ctx.n()], 0, s);
        e
    }

    pub fn from_int(ctx: &Arc<GradedContext>, n: i64) -> Self {
        Self::scalar(ctx, ScalarExpr::from_int(n))
    }

    /// The base coordinate `x^i` as a degree-(0,0) element.
    pub fn base_var(ctx: &Arc<GradedContext>, i: usize) -> Self {
        Self::scalar(ctx, ScalarExpr::var(i as u32))
    }

    /// The momentum `p_i` (bidegree (1,1)).
    pub fn momentum(ctx: &Arc<GradedContext>, i: usize) -> Self {
        let mut e = Self::zero(ctx);
        let mut pexp = vec![0u16; ctx.n()];
        pexp[i] = 1;
        e.push_term(pexp, 0, ScalarExpr::one());
        e
    }

    /// The odd fiber coordinate `ξ^a` (bidegree (0,1)), zero-based index.
    pub fn xi(ctx: &Arc<GradedContext>, a: usize) -> Self {
        let mut e = Self::zero(ctx);
        let bit = OddGen::Xi(a).bit(ctx.r());
        e.push_term(vec![0; ctx.n()], 1 << bit, ScalarExpr::one());
        e
    }

    /// The odd conjugate `θ_a` (bidegree (1,0)), zero-based index.
    pub fn theta(ctx: &Arc<GradedContext>, a: usize) -> Self {
        let mut e = Self::zero(ctx);
        let bit = OddGen::Theta(a).bit(ctx.r());
        e.push_term(vec![0; ctx.n()], 1 << bit, ScalarExpr::one());
        e
    }

    pub fn context(&self) -> &Arc<GradedContext> {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u16>, Word, &ScalarExpr)> {
        self.terms.iter().map(|((p, w), c)| (p, *w, c))
    }

    fn push_term(&mut self, pexp: Vec<u16>, word: Word, coeff: ScalarExpr) {
        if coeff.is_zero() {
            return;
        }
        let key = (pexp, word);
        match self.terms.get_mut(&key) {
            Some(c) => {
                let sum = c.add(&coeff);
                if sum.is_zero() {
                    self.terms.remove(&key);
                } else {
                    *c = sum;
                }
            }
            None => {
                self.terms.insert(key, coeff);
            }
        }
    }

    fn check_ctx(&self, other: &GradedElement) -> Result<(), GradedError> {
        if *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(GradedError::ContextMismatch)
        }
    }

    pub fn add(&self, other: &GradedElement) -> GradedElement {
        debug_assert!(*self.ctx == *other.ctx);
        let mut out = self.clone();
        for ((p, w), c) in &other.terms {
            out.push_term(p.clone(), *w, c.clone());
        }
        out
    }

    pub fn neg(&self) -> GradedElement {
        GradedElement {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &GradedElement) -> GradedElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &ScalarExpr) -> GradedElement {
        if s.is_zero() {
            return GradedElement::zero(&self.ctx);
        }
        let mut out = GradedElement::zero(&self.ctx);
        for ((p, w), c) in &self.terms {
            out.push_term(p.clone(), *w, c.mul(s));
        }
        out
    }

    pub fn scale_rat(&self, c: &Rat) -> GradedElement {
        self.scale(&ScalarExpr::from_rat(c.clone()))
    }

    pub fn scale_int(&self, k: i64) -> GradedElement {
        self.scale_rat(&rat_i(k))
    }

    /// Supercommutative wedge product.
    pub fn wedge(&self, other: &GradedElement) -> Result<GradedElement, GradedError> {
        self.check_ctx(other)?;
        let mut out = GradedElement::zero(&self.ctx);
        for ((p1, w1), c1) in &self.terms {
            for ((p2, w2), c2) in &other.terms {
                let Some(sign) = merge_sign(*w1, *w2) else { continue };
                let pexp: Vec<u16> = p1.iter().zip(p2.iter()).map(|(a, b)| a + b).collect();
                let mut coeff = c1.mul(c2);
                if sign < 0 {
                    coeff = coeff.neg();
                }
                out.push_term(pexp, w1 | w2, coeff);
            }
        }
        Ok(out)
    }

    /// Graded left derivative with respect to an odd generator, the operator
    /// also used as the interior product with a frame vector/covector.
    pub fn odd_left_derivative(&self, g: OddGen) -> GradedElement {
        let bit = g.bit(self.ctx.r());
        let mask = 1u32 << bit;
        let mut out = GradedElement::zero(&self.ctx);
        for ((p, w), c) in &self.terms {
            if w & mask == 0 {
                continue;
            }
            let sign = left_sign(*w, bit);
            let coeff = if sign < 0 { c.neg() } else { c.clone() };
            out.push_term(p.clone(), w & !mask, coeff);
        }
        out
    }

    /// Graded right derivative with respect to an odd generator.
    pub fn odd_right_derivative(&self, g: OddGen) -> GradedElement {
        let bit = g.bit(self.ctx.r());
        let mask = 1u32 << bit;
        let mut out = GradedElement::zero(&self.ctx);
        for ((p, w), c) in &self.terms {
            if w & mask == 0 {
                continue;
            }
            let sign = right_sign(*w, bit);
            let coeff = if sign < 0 { c.neg() } else { c.clone() };
            out.push_term(p.clone(), w & !mask, coeff);
        }
        out
    }

    /// Derivative with respect to the base coordinate `x^i` (acts on scalar
    /// coefficients only).
    pub fn base_derivative(&self, i: usize) -> GradedElement {
        let mut out = GradedElement::zero(&self.ctx);
        for ((p, w), c) in &self.terms {
            out.push_term(p.clone(), *w, c.diff(i as u32));
        }
        out
    }

    /// Derivative with respect to the momentum `p_i`.
    pub fn momentum_derivative(&self, i: usize) -> GradedElement {
        let mut out = GradedElement::zero(&self.ctx);
        for ((p, w), c) in &self.terms {
            if p[i] == 0 {
                continue;
            }
            let mut pe = p.clone();
            pe[i] -= 1;
            out.push_term(pe, *w, c.scale(&rat_i(p[i] as i64)));
        }
        out
    }

    /// The big bracket: the even graded Poisson bracket of bidegree (-1,-1)
    /// with `{x^i, p_j} = δ` and `{ξ^a, θ_b} = δ`.
    pub fn big_bracket(&self, other: &GradedElement) -> Result<GradedElement, GradedError> {
        self.check_ctx(other)?;
        let mut out = GradedElement::zero(&self.ctx);
        for i in 0..self.ctx.n() {
            let a = self.momentum_derivative(i).wedge(&other.base_derivative(i))?;
            let b = self.base_derivative(i).wedge(&other.momentum_derivative(i))?;
            out = out.add(&a).sub(&b);
        }
        for a in 0..self.ctx.r() {
            let s = self
                .odd_right_derivative(OddGen::Xi(a))
                .wedge(&other.odd_left_derivative(OddGen::Theta(a)))?;
            let t = self
                .odd_right_derivative(OddGen::Theta(a))
                .wedge(&other.odd_left_derivative(OddGen::Xi(a)))?;
            out = out.add(&s).add(&t);
        }
        Ok(out)
    }

    /// Actual bidegree `(p,q)` of a term.
    fn term_bidegree(&self, pexp: &[u16], word: Word) -> (i64, i64) {
        let r = self.ctx.r();
        let psum: i64 = pexp.iter().map(|&k| k as i64).sum();
        let thetas = (word & ((1u32 << r) - 1)).count_ones() as i64;
        let xis = (word >> r).count_ones() as i64;
        (psum + thetas, psum + xis)
    }

    /// Split into homogeneous components keyed by *shifted* bidegree.
    pub fn bidegree_components(&self) -> BTreeMap<(i64, i64), GradedElement> {
        let mut map: BTreeMap<(i64, i64), GradedElement> = BTreeMap::new();
        for ((p, w), c) in &self.terms {
            let (dp, dq) = self.term_bidegree(p, *w);
            let key = (dp - 1, dq - 1);
            map.entry(key)
                .or_insert_with(|| GradedElement::zero(&self.ctx))
                .push_term(p.clone(), *w, c.clone());
        }
        map
    }

    /// Shifted bidegree of a homogeneous element (`None` for zero).
    pub fn shifted_bidegree(&self) -> Result<Option<(i64, i64)>, GradedError> {
        let comps = self.bidegree_components();
        match comps.len() {
            0 => Ok(None),
            1 => Ok(comps.keys().next().copied()),
            _ => Err(GradedError::NotHomogeneous),
        }
    }

    /// Check that every term has the given shifted bidegree.
    pub fn expect_shifted(&self, expected: (i64, i64)) -> Result<(), GradedError> {
        let comps = self.bidegree_components();
        if comps.keys().all(|k| *k == expected) {
            Ok(())
        } else {
            Err(GradedError::WrongBidegree {
                expected,
                found: comps.keys().copied().collect(),
            })
        }
    }

    /// Extract the component of the given shifted bidegree.
    pub fn component(&self, shifted: (i64, i64)) -> GradedElement {
        self.bidegree_components()
            .remove(&shifted)
            .unwrap_or_else(|| GradedElement::zero(&self.ctx))
    }

    /// Parity (mod-2 total degree) if the element is parity-homogeneous.
    pub fn parity(&self) -> Result<Option<u8>, GradedError> {
        let mut parity: Option<u8> = None;
        for ((_, w), _) in &self.terms {
            let p = (w.count_ones() % 2) as u8;
            match parity {
                None => parity = Some(p),
                Some(q) if q == p => {}
                _ => return Err(GradedError::NotHomogeneous),
            }
        }
        Ok(parity)
    }

    /// True when every term's odd word uses only θ generators (a multivector).
    pub fn is_multivector(&self) -> bool {
        let r = self.ctx.r();
        self.terms
            .keys()
            .all(|(p, w)| p.iter().all(|&k| k == 0) && (w >> r) == 0)
    }

    /// True when every term's odd word uses only ξ generators (a form).
    pub fn is_form(&self) -> bool {
        let r = self.ctx.r();
        self.terms
            .keys()
            .all(|(p, w)| p.iter().all(|&k| k == 0) && (w & ((1u32 << r) - 1)) == 0)
    }

    /// The coefficient of the term `p^K · word` (zero when absent).
    pub fn coefficient(&self, pexp: &[u16], word: Word) -> ScalarExpr {
        self.terms
            .get(&(pexp.to_vec(), word))
            .cloned()
            .unwrap_or_else(ScalarExpr::zero)
    }

    /// Build a term in canonical order directly; `gens` need not be sorted
    /// (the permutation sign is applied), duplicate generators give zero.
    pub fn term(
        ctx: &Arc<GradedContext>,
        coeff: ScalarExpr,
        pexp: &[u16],
        gens: &[OddGen],
    ) -> GradedElement {
        let r = ctx.r();
        let mut word: Word = 0;
        let mut sign = 1i32;
        for g in gens {
            let bit = 1u32 << g.bit(r);
            if word & bit != 0 {
                return GradedElement::zero(ctx);
            }
            match merge_sign(word, bit) {
                Some(s) => sign *= s,
                None => return GradedElement::zero(ctx),
            }
            word |= bit;
        }
        let mut e = GradedElement::zero(ctx);
        let coeff = if sign < 0 { coeff.neg() } else { coeff };
        e.push_term(pexp.to_vec(), word, coeff);
        e
    }

    /// Build a single term from an already canonical word bitmask.
    pub fn term_raw(
        ctx: &Arc<GradedContext>,
        coeff: ScalarExpr,
        pexp: &[u16],
        word: Word,
    ) -> GradedElement {
        let mut e = GradedElement::zero(ctx);
        e.push_term(pexp.to_vec(), word, coeff);
        e
    }

    /// Canonical rendering shared by reports, errors, and golden files.
    pub fn display(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let names = self.ctx.base_names();
        let r = self.ctx.r();
        let mut parts: Vec<String> = Vec::new();
        for ((p, w), c) in &self.terms {
            let mut factors: Vec<String> = vec![format!("({})", c.display(names))];
            for (i, &k) in p.iter().enumerate() {
                if k == 1 {
                    factors.push(self.ctx.momentum_names()[i].clone());
                } else if k > 1 {
                    factors.push(format!("{}^{}", self.ctx.momentum_names()[i], k));
                }
            }
            for bit in 0..(2 * r as u32) {
                if w & (1 << bit) != 0 {
                    if (bit as usize) < r {
                        factors.push(self.ctx.theta_names()[bit as usize].clone());
                    } else {
                        factors.push(self.ctx.fiber_names()[bit as usize - r].clone());
                    }
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display())
    }
}

/// Sign `(-1)^{|u||v|}` for parity-homogeneous `u`, `v`; zero elements count
/// as even.
pub fn koszul_sign(u: &GradedElement, v: &GradedElement) -> Result<i32, GradedError> {
    let pu = u.parity()?.unwrap_or(0);
    let pv = v.parity()?.unwrap_or(0);
    Ok(if pu == 1 && pv == 1 { -1 } else { 1 })
}
