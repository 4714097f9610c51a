//! Exact scalar coefficient field.
//!
//! A [`ScalarExpr`] is a rational function whose numerator and denominator are
//! sparse sums of monomials in the base coordinates, with *rational* exponents
//! (so `p1^(-3/2)` is a single monomial).  This field is closed under `+`, `×`,
//! `÷` and partial differentiation, which is exactly what the coefficient
//! arithmetic of the graded algebra requires.
//!
//! # Canonical form
//!
//! * numerator and denominator terms are sorted by a fixed total order on
//!   monomials, carry no zero coefficients and no duplicate exponent vectors;
//! * a single-term (monomial) denominator is always folded into the numerator
//!   via exponent subtraction, so `1/p1` is stored as the monomial `p1^-1`;
//! * a multi-term denominator has its monomial content extracted (every
//!   variable attains exponent ≥ 0 in some term — the componentwise minimum of
//!   the exponent vectors is zero) and its leading coefficient normalized to 1;
//! * the zero test is "numerator has no terms".
//!
//! There is no polynomial GCD beyond this: canonical form is syntactic.
//! Value equality is still decidable — [`ScalarExpr::eq`] cross-multiplies —
//! and all identity checking in the crate goes through subtraction plus the
//! zero test, which is exact.
//!
//! Variables are small integer ids; the surrounding context owns the id →
//! name table used for display and parsing.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Exact rational number used for coefficients and exponents.
pub type Rat = BigRational;

/// Convenience constructor for an integer rational.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Convenience constructor for the fraction `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Errors produced by scalar arithmetic and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("denominator vanishes at the evaluation point")]
    PoleAtPoint,
    #[error("fractional power of a negative base at the evaluation point")]
    NegativeBaseFractionalPower,
    #[error("fractional power does not evaluate to a rational number")]
    NonRationalValue,
}

/// A sparse exponent vector: sorted `(variable id, nonzero rational exponent)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(u32, Rat)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(v: u32) -> Self {
        Monomial { exps: vec![(v, Rat::one())] }
    }

    pub fn var_pow(v: u32, e: Rat) -> Self {
        if e.is_zero() {
            Monomial::one()
        } else {
            Monomial { exps: vec![(v, e)] }
        }
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponent(&self, v: u32) -> Rat {
        self.exps
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| e.clone())
            .unwrap_or_else(Rat::zero)
    }

    pub fn exps(&self) -> &[(u32, Rat)] {
        &self.exps
    }

    /// Product of two monomials (exponent addition).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out: BTreeMap<u32, Rat> = BTreeMap::new();
        for (v, e) in self.exps.iter().chain(other.exps.iter()) {
            *out.entry(*v).or_insert_with(Rat::zero) += e;
        }
        Monomial {
            exps: out.into_iter().filter(|(_, e)| !e.is_zero()).collect(),
        }
    }

    /// Quotient of two monomials (exponent subtraction).
    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.inv())
    }

    pub fn inv(&self) -> Monomial {
        Monomial {
            exps: self.exps.iter().map(|(v, e)| (*v, -e.clone())).collect(),
        }
    }
}

/// Total order on monomials: graded by total exponent, ties broken
/// lexicographically on the sparse exponent vectors.  Arbitrary but frozen;
/// all canonical forms are relative to it.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let deg_s: Rat = self.exps.iter().map(|(_, e)| e.clone()).sum();
        let deg_o: Rat = other.exps.iter().map(|(_, e)| e.clone()).sum();
        deg_s
            .cmp(&deg_o)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A canonical sparse polynomial-like sum of monomials with rational
/// coefficients (and possibly rational/negative exponents).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    /// Sorted descending by the monomial order, no zero coefficients.
    terms: Vec<(Monomial, Rat)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Monomial::one(), c)] }
        }
    }

    pub fn monomial(m: Monomial, c: Rat) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    pub fn from_map(map: BTreeMap<Monomial, Rat>) -> Self {
        let mut terms: Vec<(Monomial, Rat)> =
            map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Monomial, Rat)] {
        &self.terms
    }

    /// Leading (greatest-monomial) coefficient; `None` for the zero poly.
    pub fn leading_coeff(&self) -> Option<&Rat> {
        self.terms.first().map(|(_, c)| c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut map: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            *map.entry(m.clone()).or_insert_with(Rat::zero) += c;
        }
        Poly::from_map(map)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut map: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *map.entry(m1.mul(m2)).or_insert_with(Rat::zero) += c1 * c2;
            }
        }
        Poly::from_map(map)
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Divide every term by the monomial `m` (exact; exponent subtraction).
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        let mut terms: Vec<(Monomial, Rat)> = self
            .terms
            .iter()
            .map(|(t, c)| (t.div(m), c.clone()))
            .collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    /// Componentwise minimum of the exponent vectors over all terms (a
    /// variable missing from some term contributes 0 there).  Returns the
    /// identity monomial for the zero polynomial.
    pub fn content(&self) -> Monomial {
        if self.terms.is_empty() {
            return Monomial::one();
        }
        let mut mins: BTreeMap<u32, Rat> = BTreeMap::new();
        let mut seen_count: BTreeMap<u32, usize> = BTreeMap::new();
        for (m, _) in &self.terms {
            for (v, e) in m.exps() {
                let entry = mins.entry(*v).or_insert_with(|| e.clone());
                if e < entry {
                    *entry = e.clone();
                }
                *seen_count.entry(*v).or_insert(0) += 1;
            }
        }
        let n = self.terms.len();
        Monomial {
            exps: mins
                .into_iter()
                .filter_map(|(v, e)| {
                    // A variable absent from some term has implicit exponent 0.
                    let e = if seen_count[&v] < n { e.min(Rat::zero()) } else { e };
                    if e.is_zero() {
                        None
                    } else {
                        Some((v, e))
                    }
                })
                .collect(),
        }
    }

    /// Partial derivative with respect to variable `v` (power rule termwise).
    pub fn diff(&self, v: u32) -> Poly {
        let mut map: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e.is_zero() {
                continue;
            }
            let dm = m.mul(&Monomial::var_pow(v, -Rat::one()));
            *map.entry(dm).or_insert_with(Rat::zero) += c * &e;
        }
        Poly::from_map(map)
    }

    pub fn eval(&self, point: &BTreeMap<u32, Rat>) -> Result<Rat, ScalarError> {
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, e) in m.exps() {
                let base = point.get(v).cloned().unwrap_or_else(Rat::zero);
                term *= rat_pow(&base, e)?;
            }
            acc += term;
        }
        Ok(acc)
    }
}

/// `base^e` for rational `e`, exact or erroring.
pub fn rat_pow(base: &Rat, e: &Rat) -> Result<Rat, ScalarError> {
    if e.is_zero() {
        return Ok(Rat::one());
    }
    if base.is_zero() {
        if e.is_negative() {
            return Err(ScalarError::PoleAtPoint);
        }
        return Ok(Rat::zero());
    }
    let num: BigInt = e.numer().clone();
    let den: BigInt = e.denom().clone();
    // Integer part first: base^num.
    let mut val = if num.is_negative() {
        let p = (-&num).try_into().map_err(|_| ScalarError::NonRationalValue)?;
        let powed = pow_u32(base, p);
        powed.recip()
    } else {
        let p: u32 = num.clone().try_into().map_err(|_| ScalarError::NonRationalValue)?;
        pow_u32(base, p)
    };
    if !den.is_one() {
        if val.is_negative() {
            return Err(ScalarError::NegativeBaseFractionalPower);
        }
        let d: u32 = den.try_into().map_err(|_| ScalarError::NonRationalValue)?;
        val = rational_nth_root(&val, d)?;
    }
    Ok(val)
}

fn pow_u32(base: &Rat, p: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..p {
        acc *= base;
    }
    acc
}

fn rational_nth_root(v: &Rat, d: u32) -> Result<Rat, ScalarError> {
    let rn = v.numer().nth_root(d);
    let rd = v.denom().nth_root(d);
    let mut pn = BigInt::one();
    let mut pd = BigInt::one();
    for _ in 0..d {
        pn *= &rn;
        pd *= &rd;
    }
    if &pn == v.numer() && &pd == v.denom() {
        Ok(Rat::new(rn, rd))
    } else {
        Err(ScalarError::NonRationalValue)
    }
}

/// An exact rational function of the base coordinates.
///
/// Invariants (after the private `normalize`):
/// * zero is represented as `0/1`;
/// * a monomial denominator is folded into the numerator;
/// * otherwise the denominator has zero monomial content and leading
///   coefficient 1.
#[derive(Debug, Clone, Eq, Hash)]
pub struct ScalarExpr {
    num: Poly,
    den: Poly,
}

impl ScalarExpr {
    pub fn zero() -> Self {
        ScalarExpr { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        ScalarExpr { num: Poly::one(), den: Poly::one() }
    }

    pub fn from_int(n: i64) -> Self {
        ScalarExpr::from_rat(rat_i(n))
    }

    pub fn from_rat(c: Rat) -> Self {
        ScalarExpr { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn var(v: u32) -> Self {
        ScalarExpr { num: Poly::monomial(Monomial::var(v), Rat::one()), den: Poly::one() }
    }

    pub fn var_pow(v: u32, e: Rat) -> Self {
        ScalarExpr {
            num: Poly::monomial(Monomial::var_pow(v, e), Rat::one()),
            den: Poly::one(),
        }
    }

    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let mut s = ScalarExpr { num, den };
        s.normalize();
        Ok(s)
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self == &ScalarExpr::one()
    }

    /// Exact rational value if the expression is a constant.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.den == Poly::one() {
            match self.num.terms() {
                [] => Some(Rat::zero()),
                [(m, c)] if m.is_one() => Some(c.clone()),
                _ => None,
            }
        } else {
            None
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly::one();
            return;
        }
        // Fold a monomial denominator into the numerator.
        if self.den.terms().len() == 1 {
            let (m, c) = self.den.terms()[0].clone();
            self.num = self.num.div_monomial(&m).scale(&c.recip());
            self.den = Poly::one();
            return;
        }
        // Extract the denominator's monomial content.
        let content = self.den.content();
        if !content.is_one() {
            self.den = self.den.div_monomial(&content);
            self.num = self.num.div_monomial(&content);
        }
        // Leading coefficient 1 in the denominator.
        let lc = self.den.leading_coeff().expect("nonzero denominator").clone();
        if !lc.is_one() {
            let inv = lc.recip();
            self.den = self.den.scale(&inv);
            self.num = self.num.scale(&inv);
        }
    }

    pub fn add(&self, other: &ScalarExpr) -> ScalarExpr {
        let (num, den) = if self.den == other.den {
            (self.num.add(&other.num), self.den.clone())
        } else {
            (
                self.num.mul(&other.den).add(&other.num.mul(&self.den)),
                self.den.mul(&other.den),
            )
        };
        let mut s = ScalarExpr { num, den };
        s.normalize();
        s
    }

    pub fn neg(&self) -> ScalarExpr {
        ScalarExpr { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &ScalarExpr) -> ScalarExpr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ScalarExpr) -> ScalarExpr {
        let mut s = ScalarExpr {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        };
        s.normalize();
        s
    }

    pub fn scale(&self, c: &Rat) -> ScalarExpr {
        let mut s = ScalarExpr { num: self.num.scale(c), den: self.den.clone() };
        s.normalize();
        s
    }

    pub fn div(&self, other: &ScalarExpr) -> Result<ScalarExpr, ScalarError> {
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let mut s = ScalarExpr {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        };
        s.normalize();
        Ok(s)
    }

    pub fn recip(&self) -> Result<ScalarExpr, ScalarError> {
        ScalarExpr::one().div(self)
    }

    /// Exact partial derivative (quotient rule, then canonicalize).
    pub fn diff(&self, v: u32) -> ScalarExpr {
        if self.den == Poly::one() {
            return ScalarExpr { num: self.num.diff(v), den: Poly::one() };
        }
        let num = self
            .num
            .diff(v)
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.diff(v)));
        let den = self.den.mul(&self.den);
        let mut s = ScalarExpr { num, den };
        s.normalize();
        s
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &BTreeMap<u32, Rat>) -> Result<Rat, ScalarError> {
        let d = self.den.eval(point)?;
        if d.is_zero() {
            return Err(ScalarError::PoleAtPoint);
        }
        let n = self.num.eval(point)?;
        Ok(n / d)
    }

    /// Substitute the variable assignments `subs` (variables not listed are
    /// kept).  Substituted values may themselves be rational functions.
    pub fn substitute(&self, subs: &BTreeMap<u32, ScalarExpr>) -> Result<ScalarExpr, ScalarError> {
        let n = subst_poly(&self.num, subs)?;
        let d = subst_poly(&self.den, subs)?;
        if d.is_zero() {
            return Err(ScalarError::PoleAtPoint);
        }
        n.div(&d)
    }

    /// Render with a name table; the canonical printing used everywhere
    /// (reports, errors, golden files).
    pub fn display(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let num = poly_display(&self.num, names);
        if self.den == Poly::one() {
            num
        } else {
            format!("({}) / ({})", num, poly_display(&self.den, names))
        }
    }
}

fn subst_poly(
    p: &Poly,
    subs: &BTreeMap<u32, ScalarExpr>,
) -> Result<ScalarExpr, ScalarError> {
    let mut acc = ScalarExpr::zero();
    for (m, c) in p.terms() {
        let mut term = ScalarExpr::from_rat(c.clone());
        for (v, e) in m.exps() {
            match subs.get(v) {
                None => term = term.mul(&ScalarExpr::var_pow(*v, e.clone())),
                Some(s) => {
                    // Only integer exponents can be applied to a general
                    // replacement expression exactly.
                    if !e.denom().is_one() {
                        return Err(ScalarError::NonRationalValue);
                    }
                    let k: i64 = e
                        .numer()
                        .try_into()
                        .map_err(|_| ScalarError::NonRationalValue)?;
                    let powed = int_pow(s, k)?;
                    term = term.mul(&powed);
                }
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

fn int_pow(s: &ScalarExpr, k: i64) -> Result<ScalarExpr, ScalarError> {
    let mut acc = ScalarExpr::one();
    for _ in 0..k.unsigned_abs() {
        acc = acc.mul(s);
    }
    if k < 0 {
        acc = acc.recip()?;
    }
    Ok(acc)
}

/// Value equality by cross multiplication — complete for rational functions.
impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        if self.num == other.num && self.den == other.den {
            return true;
        }
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

fn rat_display(c: &Rat) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn poly_display(p: &Poly, names: &[String]) -> String {
    let mut out = String::new();
    for (i, (m, c)) in p.terms().iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else if neg {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        let mut factors: Vec<String> = Vec::new();
        if !mag.is_one() || m.is_one() {
            factors.push(rat_display(&mag));
        }
        for (v, e) in m.exps() {
            let name = names
                .get(*v as usize)
                .map(|s| s.as_str())
                .unwrap_or("?");
            if e.is_one() {
                factors.push(name.to_string());
            } else if e.denom().is_one() {
                factors.push(format!("{}^{}", name, e.numer()));
            } else {
                factors.push(format!("{}^({}/{})", name, e.numer(), e.denom()));
            }
        }
        let _ = write!(out, "{}", factors.join("*"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ScalarExpr {
        ScalarExpr::var(0)
    }
    fn y() -> ScalarExpr {
        ScalarExpr::var(1)
    }

    #[test]
    fn add_is_exact() {
        assert_eq!(x().add(&x()), x().scale(&rat_i(2)));
    }

    #[test]
    fn fractional_exponents_multiply() {
        let h = ScalarExpr::var_pow(0, rat(1, 2));
        assert_eq!(h.mul(&h), x());
    }

    #[test]
    fn division_round_trips() {
        let inv = ScalarExpr::one().div(&x().mul(&x())).unwrap();
        assert_eq!(inv.mul(&x().mul(&x())), ScalarExpr::one());
        assert_eq!(inv, ScalarExpr::var_pow(0, rat_i(-2)));
    }

    #[test]
    fn division_by_zero_is_reported() {
        assert_eq!(
            x().div(&ScalarExpr::zero()).unwrap_err(),
            ScalarError::DivisionByZero
        );
    }

    #[test]
    fn power_rule() {
        let h = ScalarExpr::var_pow(0, rat(-1, 2));
        let expect = ScalarExpr::var_pow(0, rat(-3, 2)).scale(&rat(-1, 2));
        assert_eq!(h.diff(0), expect);
    }

    #[test]
    fn product_derivative() {
        assert_eq!(x().mul(&y()).diff(0), y());
    }

    #[test]
    fn quotient_derivative_checks_back() {
        // d/dx 1/(x+1) = -1/(x+1)^2; confirm by multiplying by (x+1)^2.
        let xp1 = x().add(&ScalarExpr::one());
        let f = ScalarExpr::one().div(&xp1).unwrap();
        let d = f.diff(0);
        assert_eq!(d.mul(&xp1).mul(&xp1), ScalarExpr::from_int(-1));
    }

    #[test]
    fn eval_exact() {
        let p = BTreeMap::from([(0u32, rat_i(3))]);
        assert_eq!(x().mul(&x()).eval(&p).unwrap(), rat_i(9));
        let pole = BTreeMap::from([(0u32, rat_i(0))]);
        assert_eq!(
            ScalarExpr::one().div(&x()).unwrap().eval(&pole).unwrap_err(),
            ScalarError::PoleAtPoint
        );
        let four = BTreeMap::from([(0u32, rat_i(4))]);
        assert_eq!(
            ScalarExpr::var_pow(0, rat(1, 2)).eval(&four).unwrap(),
            rat_i(2)
        );
    }

    #[test]
    fn sqrt_of_three_is_not_rational() {
        let p = BTreeMap::from([(0u32, rat_i(3))]);
        assert_eq!(
            ScalarExpr::var_pow(0, rat(1, 2)).eval(&p).unwrap_err(),
            ScalarError::NonRationalValue
        );
    }
}
