//! Sparse exact Puiseux polynomials in `(v, theta)`: rational `v`-exponents
//! over a lazily growing common denominator, natural `theta`-exponents, and
//! coefficients that are rationals, elements of a real algebraic extension
//! `Q(alpha)`, or certified rational intervals (the fallback representation
//! once a computation branch leaves a single extension).

use crate::algebraic::{AlgebraicError, FieldElem, NumberField};
use crate::rat::{rat_i, rat_to_f64, Rat, RatInterval};
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PuiseuxError {
    #[error("coefficient fields are incompatible")]
    IncompatibleFields,
    #[error("negative base {0} with fractional exponent {1}")]
    NegativeFractionalPower(f64, Rat),
    #[error("substitution exponent must be positive, got {0}")]
    NonPositiveShiftExponent(Rat),
}

impl From<AlgebraicError> for PuiseuxError {
    fn from(_: AlgebraicError) -> Self {
        PuiseuxError::IncompatibleFields
    }
}

/// Interval width used when a coefficient is demoted to a certified interval.
pub fn approx_precision() -> Rat {
    Rat::new(1.into(), num::BigInt::from(2).pow(192u32))
}

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum Coefficient {
    Rat(Rat),
    Alg(FieldElem),
    Approx(RatInterval),
}

impl Coefficient {
    pub fn zero() -> Self {
        Coefficient::Rat(Rat::zero())
    }

    pub fn one() -> Self {
        Coefficient::Rat(Rat::one())
    }

    pub fn from_i64(n: i64) -> Self {
        Coefficient::Rat(rat_i(n))
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Coefficient::Approx(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Rat(r) => r.is_zero(),
            Coefficient::Alg(e) => e.is_zero(),
            // A certified interval of negligible width straddling zero is
            // treated as zero; the enclosing branch carries an Approximate
            // certification either way.
            Coefficient::Approx(iv) => iv.contains_zero(),
        }
    }

    pub fn sign(&self) -> Option<i8> {
        match self {
            Coefficient::Rat(r) => Some(if r.is_zero() {
                0
            } else if r.is_positive() {
                1
            } else {
                -1
            }),
            Coefficient::Alg(e) => Some(e.sign()),
            Coefficient::Approx(iv) => iv.sign(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Rat(r) => rat_to_f64(r),
            Coefficient::Alg(e) => e.to_f64(),
            Coefficient::Approx(iv) => iv.to_f64(),
        }
    }

    pub fn as_rational(&self) -> Option<Rat> {
        match self {
            Coefficient::Rat(r) => Some(r.clone()),
            Coefficient::Alg(e) => e.as_rational(),
            Coefficient::Approx(_) => None,
        }
    }

    /// Certified enclosure of the value.
    pub fn enclosure(&self, width: &Rat) -> RatInterval {
        match self {
            Coefficient::Rat(r) => RatInterval::point(r.clone()),
            Coefficient::Alg(e) => e.enclosure_below(width),
            Coefficient::Approx(iv) => iv.clone(),
        }
    }

    pub fn to_approx(&self) -> Coefficient {
        Coefficient::Approx(self.enclosure(&approx_precision()))
    }

    fn field(&self) -> Option<&Arc<NumberField>> {
        match self {
            Coefficient::Alg(e) => Some(&e.field),
            _ => None,
        }
    }

    fn binop(
        &self,
        other: &Self,
        rr: impl Fn(&Rat, &Rat) -> Rat,
        aa: impl Fn(&FieldElem, &FieldElem) -> FieldElem,
        ii: impl Fn(&RatInterval, &RatInterval) -> RatInterval,
    ) -> Result<Self, PuiseuxError> {
        use Coefficient::*;
        Ok(match (self, other) {
            (Rat(a), Rat(b)) => Rat(rr(a, b)),
            (Alg(a), Alg(b)) => {
                if !a.same_field(b) {
                    return Err(PuiseuxError::IncompatibleFields);
                }
                Alg(aa(a, b))
            }
            (Alg(a), Rat(b)) => Alg(aa(a, &FieldElem::from_rat(a.field.clone(), b.clone()))),
            (Rat(a), Alg(b)) => Alg(aa(&FieldElem::from_rat(b.field.clone(), a.clone()), b)),
            (Approx(a), other) => Approx(ii(a, &other.enclosure(&approx_precision()))),
            (a, Approx(b)) => Approx(ii(&a.enclosure(&approx_precision()), b)),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, PuiseuxError> {
        self.binop(other, |a, b| a + b, |a, b| a.add(b), |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PuiseuxError> {
        self.binop(other, |a, b| a - b, |a, b| a.sub(b), |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PuiseuxError> {
        self.binop(other, |a, b| a * b, |a, b| a.mul(b), |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        match self {
            Coefficient::Rat(r) => Coefficient::Rat(-r.clone()),
            Coefficient::Alg(e) => Coefficient::Alg(e.neg()),
            Coefficient::Approx(iv) => Coefficient::Approx(iv.neg()),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        match self {
            Coefficient::Rat(r) => Coefficient::Rat(r * c),
            Coefficient::Alg(e) => Coefficient::Alg(e.scale(c)),
            Coefficient::Approx(iv) => Coefficient::Approx(iv.scale(c)),
        }
    }

    pub fn pow(&self, n: u32) -> Result<Self, PuiseuxError> {
        let mut out = Coefficient::one();
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Division; exact for rational and algebraic values, interval division
    /// otherwise (failing when the divisor's enclosure straddles zero).
    pub fn div(&self, other: &Self) -> Result<Self, PuiseuxError> {
        use Coefficient::*;
        Ok(match (self, other) {
            (Rat(a), Rat(b)) => Rat(a / b),
            (Alg(a), Alg(b)) => {
                if !a.same_field(b) {
                    return Err(PuiseuxError::IncompatibleFields);
                }
                Alg(a.div(b))
            }
            (Alg(a), Rat(b)) => Alg(a.scale(&(crate::rat::Rat::one() / b))),
            (Rat(a), Alg(b)) => {
                Alg(FieldElem::from_rat(b.field.clone(), a.clone()).mul(&b.inverse()))
            }
            (a, b) => {
                let ia = a.enclosure(&approx_precision());
                let ib = b.enclosure(&approx_precision());
                Approx(ia.div(&ib).ok_or(PuiseuxError::IncompatibleFields)?)
            }
        })
    }

    /// Same exact value (always decidable for exact variants; interval
    /// variants compare by enclosure overlap).
    pub fn equals(&self, other: &Self) -> bool {
        match self.sub(other) {
            Ok(d) => d.is_zero(),
            Err(_) => false,
        }
    }

    pub fn display_string(&self) -> String {
        match self {
            Coefficient::Rat(r) => crate::rat::rat_string(r),
            Coefficient::Alg(e) => format!("{:.6}~", e.to_f64()),
            Coefficient::Approx(iv) => format!("{:.6}~~", iv.to_f64()),
        }
    }
}

// ---------------------------------------------------------------------------
// Exponent pairs
// ---------------------------------------------------------------------------

/// `(p, q)` for a monomial `v^p * theta^q`; `p` is a nonnegative rational,
/// `q` a nonnegative integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpPair {
    pub p: Rat,
    pub q: u32,
}

impl ExpPair {
    pub fn new(p: Rat, q: u32) -> Self {
        debug_assert!(!p.is_negative());
        ExpPair { p, q }
    }

    pub fn int(p: i64, q: u32) -> Self {
        ExpPair::new(rat_i(p), q)
    }

    pub fn total_degree(&self) -> Rat {
        &self.p + rat_i(self.q as i64)
    }
}

impl fmt::Display for ExpPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", crate::rat::rat_string(&self.p), self.q)
    }
}

// ---------------------------------------------------------------------------
// Puiseux polynomials
// ---------------------------------------------------------------------------

/// Canonical sparse Puiseux polynomial: no zero coefficients, one entry per
/// exponent pair, deterministic `(p, q)` iteration order.
#[derive(Clone, Debug, Default)]
pub struct PuiseuxPoly {
    terms: BTreeMap<ExpPair, Coefficient>,
}

impl PuiseuxPoly {
    pub fn zero() -> Self {
        PuiseuxPoly { terms: BTreeMap::new() }
    }

    pub fn monomial(c: Coefficient, e: ExpPair) -> Self {
        let mut p = PuiseuxPoly::zero();
        p.add_term(e, c).expect("monomial");
        p
    }

    /// Build from integer data `(coeff, p, q)`.
    pub fn from_int_terms(terms: &[(i64, i64, u32)]) -> Self {
        let mut out = PuiseuxPoly::zero();
        for &(c, p, q) in terms {
            out.add_term(ExpPair::int(p, q), Coefficient::from_i64(c)).unwrap();
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpPair, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExpPair) -> Coefficient {
        self.terms.get(e).cloned().unwrap_or_else(Coefficient::zero)
    }

    pub fn support(&self) -> Vec<ExpPair> {
        self.terms.keys().cloned().collect()
    }

    pub fn add_term(&mut self, e: ExpPair, c: Coefficient) -> Result<(), PuiseuxError> {
        if c.is_zero() {
            return Ok(());
        }
        match self.terms.remove(&e) {
            None => {
                self.terms.insert(e, c);
            }
            Some(old) => {
                let sum = old.add(&c)?;
                if !sum.is_zero() {
                    self.terms.insert(e, sum);
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PuiseuxError> {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PuiseuxError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PuiseuxPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return PuiseuxPoly::zero();
        }
        PuiseuxPoly {
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k.scale(c))).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PuiseuxError> {
        let mut out = PuiseuxPoly::zero();
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                let e = ExpPair::new(&ea.p + &eb.p, ea.q + eb.q);
                out.add_term(e, ca.mul(cb)?)?;
            }
        }
        Ok(out)
    }

    pub fn mul_coeff(&self, c: &Coefficient) -> Result<Self, PuiseuxError> {
        let mut out = PuiseuxPoly::zero();
        for (e, k) in self.terms() {
            out.add_term(e.clone(), k.mul(c)?)?;
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self, PuiseuxError> {
        let mut out = PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(0, 0));
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Formal derivative in `theta`.
    pub fn d_theta(&self) -> Self {
        let mut out = PuiseuxPoly::zero();
        for (e, c) in self.terms() {
            if e.q >= 1 {
                let k = c.scale(&rat_i(e.q as i64));
                out.add_term(ExpPair::new(e.p.clone(), e.q - 1), k).unwrap();
            }
        }
        out
    }

    /// Formal derivative in `v`; fractional exponents produce rational
    /// multiplier coefficients.
    pub fn d_v(&self) -> Self {
        let mut out = PuiseuxPoly::zero();
        for (e, c) in self.terms() {
            if !e.p.is_zero() {
                let k = c.scale(&e.p);
                out.add_term(ExpPair::new(&e.p - rat_i(1), e.q), k).unwrap();
            }
        }
        out
    }

    pub fn nth_d_theta(&self, n: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..n {
            out = out.d_theta();
        }
        out
    }

    /// `g(v, theta + r * v^w)`, exact. Extends the coefficient field when `r`
    /// is irrational. Requires `w > 0`.
    pub fn substitute_theta_shift(
        &self,
        r: &Coefficient,
        w: &Rat,
    ) -> Result<Self, PuiseuxError> {
        if !w.is_positive() {
            return Err(PuiseuxError::NonPositiveShiftExponent(w.clone()));
        }
        if r.is_zero() {
            return Ok(self.clone());
        }
        let max_q = self.terms.keys().map(|e| e.q).max().unwrap_or(0);
        let mut r_pows = Vec::with_capacity(max_q as usize + 1);
        r_pows.push(Coefficient::one());
        for k in 1..=max_q {
            r_pows.push(r_pows[k as usize - 1].mul(r)?);
        }
        let mut out = PuiseuxPoly::zero();
        for (e, c) in self.terms() {
            // (theta + r v^w)^q = sum_k C(q,k) r^k v^{kw} theta^{q-k}
            let mut binom = Rat::one();
            for k in 0..=e.q {
                if k > 0 {
                    binom = binom * rat_i((e.q - k + 1) as i64) / rat_i(k as i64);
                }
                let coeff = c.mul(&r_pows[k as usize])?.scale(&binom);
                let p = &e.p + w * rat_i(k as i64);
                out.add_term(ExpPair::new(p, e.q - k), coeff)?;
            }
        }
        Ok(out)
    }

    /// `g(v, theta + h(v))` for a theta-free shift `h`.
    pub fn substitute_theta_series(&self, h: &PuiseuxPoly) -> Result<Self, PuiseuxError> {
        debug_assert!(h.terms.keys().all(|e| e.q == 0));
        let max_q = self.terms.keys().map(|e| e.q).max().unwrap_or(0);
        // powers of (theta + h)
        let theta_plus_h = {
            let mut t = h.clone();
            t.add_term(ExpPair::int(0, 1), Coefficient::one())?;
            t
        };
        let mut pows: Vec<PuiseuxPoly> =
            vec![PuiseuxPoly::monomial(Coefficient::one(), ExpPair::int(0, 0))];
        for k in 1..=max_q {
            pows.push(pows[k as usize - 1].mul(&theta_plus_h)?);
        }
        let mut out = PuiseuxPoly::zero();
        for (e, c) in self.terms() {
            let part = pows[e.q as usize]
                .mul(&PuiseuxPoly::monomial(c.clone(), ExpPair::new(e.p.clone(), 0)))?;
            out = out.add(&part)?;
        }
        Ok(out)
    }

    /// Multiply every `v`-exponent by `m` (renaming `v -> v^m`).
    pub fn rescale_v(&self, m: u32) -> Self {
        assert!(m >= 1);
        PuiseuxPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    (ExpPair::new(&e.p * rat_i(m as i64), e.q), c.clone())
                })
                .collect(),
        }
    }

    /// Least common denominator of the `v`-exponents.
    pub fn common_denominator(&self) -> num::BigInt {
        let mut m = num::BigInt::from(1);
        for e in self.terms.keys() {
            m = num::integer::lcm(m, e.p.denom().clone());
        }
        m
    }

    /// Smallest `p` with a pure-`v` term `(p, 0)`, if any.
    pub fn pure_v_order(&self) -> Option<Rat> {
        self.terms.keys().filter(|e| e.q == 0).map(|e| e.p.clone()).min()
    }

    /// Coefficients of the column `p = p0` indexed by `q`.
    pub fn column(&self, p0: &Rat) -> BTreeMap<u32, Coefficient> {
        self.terms
            .iter()
            .filter(|(e, _)| &e.p == p0)
            .map(|(e, c)| (e.q, c.clone()))
            .collect()
    }

    pub fn min_total_degree(&self) -> Option<Rat> {
        self.terms.keys().map(|e| e.total_degree()).min()
    }

    pub fn max_theta_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.q).max().unwrap_or(0)
    }

    /// Drop every monomial of total degree above `t`.
    pub fn truncate_total_degree(&self, t: &Rat) -> Self {
        PuiseuxPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| &e.total_degree() <= &(t.clone()))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// The `v`-series multiplying `theta^q`, returned with `theta`-degree 0.
    pub fn theta_slice(&self, q: u32) -> Self {
        PuiseuxPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.q == q)
                .map(|(e, c)| (ExpPair::new(e.p.clone(), 0), c.clone()))
                .collect(),
        }
    }

    /// Keep only terms with `q = 0` (the pure-`v` part).
    pub fn pure_v_part(&self) -> Self {
        PuiseuxPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.q == 0)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// True when every coefficient is exact (no interval fallback).
    pub fn coefficients_exact(&self) -> bool {
        self.terms.values().all(|c| c.is_exact())
    }

    /// The single extension field referenced by the coefficients, if any.
    pub fn coefficient_field(&self) -> Option<Arc<NumberField>> {
        self.terms.values().find_map(|c| c.field().cloned())
    }

    pub fn to_approx(&self) -> Self {
        PuiseuxPoly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.to_approx())).collect(),
        }
    }

    pub fn map_theta_negated(&self) -> Self {
        // theta -> -theta
        PuiseuxPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let c = if e.q % 2 == 1 { c.neg() } else { c.clone() };
                    (e.clone(), c)
                })
                .collect(),
        }
    }

    pub fn evaluate_f64(&self, v: f64, theta: f64) -> Result<f64, PuiseuxError> {
        let mut acc = 0.0;
        for (e, c) in self.terms() {
            let vp = pow_f64(v, &e.p)?;
            acc += c.to_f64() * vp * theta.powi(e.q as i32);
        }
        Ok(acc)
    }

    /// Exact rational evaluation; requires integer `v`-exponents and exact
    /// rational coefficients.
    pub fn evaluate_exact(&self, v: &Rat, theta: &Rat) -> Option<Rat> {
        let mut acc = Rat::zero();
        for (e, c) in self.terms() {
            if !e.p.is_integer() {
                return None;
            }
            let c = match c {
                Coefficient::Rat(r) => r.clone(),
                _ => return None,
            };
            let n = e.p.to_integer().to_i64()?;
            let mut term = c;
            for _ in 0..n {
                term = term * v;
            }
            for _ in 0..e.q {
                term = term * theta;
            }
            acc += term;
        }
        Some(acc)
    }

    /// Certified interval evaluation at rational inputs (`v >= 0` when any
    /// exponent is fractional).
    pub fn evaluate_interval(
        &self,
        v: &Rat,
        theta: &Rat,
        width: &Rat,
    ) -> Result<RatInterval, PuiseuxError> {
        let mut acc = RatInterval::point(Rat::zero());
        for (e, c) in self.terms() {
            let vp = rat_pow_interval(v, &e.p, width)?;
            let tq = RatInterval::point(theta.clone()).pow(e.q);
            acc = acc.add(&c.enclosure(width).mul(&vp).mul(&tq));
        }
        Ok(acc)
    }

    pub fn display_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let mut s = c.display_string();
            if !e.p.is_zero() {
                if e.p.is_integer() && e.p == rat_i(1) {
                    s.push_str("*v");
                } else if e.p.is_integer() {
                    s.push_str(&format!("*v^{}", e.p.numer()));
                } else {
                    s.push_str(&format!("*v^({})", crate::rat::rat_string(&e.p)));
                }
            }
            if e.q == 1 {
                s.push_str("*theta");
            } else if e.q > 1 {
                s.push_str(&format!("*theta^{}", e.q));
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

fn pow_f64(base: f64, exp: &Rat) -> Result<f64, PuiseuxError> {
    if exp.is_zero() {
        return Ok(1.0);
    }
    if exp.is_integer() {
        let n = exp.to_integer().to_i64().unwrap_or(i64::MAX);
        return Ok(base.powi(n as i32));
    }
    if base < 0.0 {
        return Err(PuiseuxError::NegativeFractionalPower(base, exp.clone()));
    }
    Ok(base.powf(rat_to_f64(exp)))
}

/// Certified enclosure of `v^(n/d)` for rational `v`.
pub fn rat_pow_interval(v: &Rat, exp: &Rat, width: &Rat) -> Result<RatInterval, PuiseuxError> {
    if exp.is_integer() {
        let n = exp.to_integer();
        let n = n.to_i64().expect("exponent fits i64");
        debug_assert!(n >= 0);
        let mut acc = Rat::one();
        for _ in 0..n {
            acc = acc * v;
        }
        return Ok(RatInterval::point(acc));
    }
    if v.is_negative() {
        return Err(PuiseuxError::NegativeFractionalPower(rat_to_f64(v), exp.clone()));
    }
    if v.is_zero() {
        return Ok(RatInterval::point(Rat::zero()));
    }
    // v^(n/d) = d-th root of v^n, by bisection on x^d = v^n.
    let n = exp.numer().to_i64().expect("small numerator");
    let d = exp.denom().to_i64().expect("small denominator");
    debug_assert!(n > 0 && d > 1);
    let mut target = Rat::one();
    for _ in 0..n {
        target = target * v;
    }
    let mut lo = Rat::zero();
    let mut hi = target.clone().max(Rat::one());
    let pow_d = |x: &Rat| {
        let mut a = Rat::one();
        for _ in 0..d {
            a = a * x;
        }
        a
    };
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / rat_i(2);
        if pow_d(&mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RatInterval::new(lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn theta_minus_v() -> PuiseuxPoly {
        PuiseuxPoly::from_int_terms(&[(1, 0, 1), (-1, 1, 0)])
    }

    #[test]
    fn ring_ops() {
        // (theta - v)(theta + v) = theta^2 - v^2
        let a = theta_minus_v();
        let b = PuiseuxPoly::from_int_terms(&[(1, 0, 1), (1, 1, 0)]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert!(p.coeff(&ExpPair::int(0, 2)).equals(&Coefficient::from_i64(1)));
        assert!(p.coeff(&ExpPair::int(2, 0)).equals(&Coefficient::from_i64(-1)));

        // (theta + v)^3 binomial
        let c = b.pow(3).unwrap();
        assert!(c.coeff(&ExpPair::int(1, 2)).equals(&Coefficient::from_i64(3)));
        assert!(c.coeff(&ExpPair::int(2, 1)).equals(&Coefficient::from_i64(3)));

        // mul by zero
        assert!(a.mul(&PuiseuxPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn derivatives() {
        let g = PuiseuxPoly::from_int_terms(&[(1, 1, 3)]); // v theta^3
        let dt = g.d_theta();
        assert!(dt.coeff(&ExpPair::int(1, 2)).equals(&Coefficient::from_i64(3)));

        // d_v(v^{3/2} theta) = 3/2 v^{1/2} theta
        let mut h = PuiseuxPoly::zero();
        h.add_term(ExpPair::new(rat(3, 2), 1), Coefficient::one()).unwrap();
        let dv = h.d_v();
        let e = ExpPair::new(rat(1, 2), 1);
        assert!(dv.coeff(&e).equals(&Coefficient::Rat(rat(3, 2))));

        // d_theta(v^3) = 0
        assert!(PuiseuxPoly::from_int_terms(&[(1, 3, 0)]).d_theta().is_zero());
    }

    #[test]
    fn substitution_golden() {
        // gamma = (theta - v)^3 v + v^3, shift theta -> theta + v
        let g = theta_minus_v()
            .pow(3)
            .unwrap()
            .mul(&PuiseuxPoly::from_int_terms(&[(1, 1, 0)]))
            .unwrap()
            .add(&PuiseuxPoly::from_int_terms(&[(1, 3, 0)]))
            .unwrap();
        let shifted = g.substitute_theta_shift(&Coefficient::one(), &rat_i(1)).unwrap();
        // theta^3 v + v^3
        assert_eq!(shifted.num_terms(), 2);
        assert!(shifted.coeff(&ExpPair::int(1, 3)).equals(&Coefficient::from_i64(1)));
        assert!(shifted.coeff(&ExpPair::int(3, 0)).equals(&Coefficient::from_i64(1)));
    }

    #[test]
    fn substitution_simple() {
        // theta^2 - v^2 with theta -> theta + v gives theta^2 + 2 v theta
        let g = PuiseuxPoly::from_int_terms(&[(1, 0, 2), (-1, 2, 0)]);
        let s = g.substitute_theta_shift(&Coefficient::one(), &rat_i(1)).unwrap();
        assert_eq!(s.num_terms(), 2);
        assert!(s.coeff(&ExpPair::int(1, 1)).equals(&Coefficient::from_i64(2)));
        // identity shift
        let id = g.substitute_theta_shift(&Coefficient::zero(), &rat_i(1)).unwrap();
        assert_eq!(id.num_terms(), g.num_terms());
    }

    #[test]
    fn rescale() {
        let mut g = PuiseuxPoly::zero();
        g.add_term(ExpPair::new(rat(1, 2), 1), Coefficient::one()).unwrap();
        let r = g.rescale_v(2);
        assert!(r.coeff(&ExpPair::int(1, 1)).equals(&Coefficient::one()));

        let mut h = PuiseuxPoly::zero();
        h.add_term(ExpPair::new(rat(3, 2), 0), Coefficient::one()).unwrap();
        h.add_term(ExpPair::new(rat(1, 2), 2), Coefficient::one()).unwrap();
        let r = h.rescale_v(2);
        assert!(r.coeff(&ExpPair::int(3, 0)).equals(&Coefficient::one()));
        assert!(r.coeff(&ExpPair::int(1, 2)).equals(&Coefficient::one()));
    }

    #[test]
    fn evaluation() {
        let g = PuiseuxPoly::from_int_terms(&[(1, 0, 2), (-1, 2, 0)]);
        assert_eq!(g.evaluate_f64(1.0, 2.0).unwrap(), 3.0);

        let h = PuiseuxPoly::from_int_terms(&[(1, 1, 3), (1, 3, 0)]);
        assert!((h.evaluate_f64(0.5, 1.0).unwrap() - 0.625).abs() < 1e-15);

        let mut frac = PuiseuxPoly::zero();
        frac.add_term(ExpPair::new(rat(1, 2), 0), Coefficient::one()).unwrap();
        assert!(frac.evaluate_f64(-1.0, 0.0).is_err());

        // interval mode encloses sqrt(2)
        let iv = frac
            .evaluate_interval(&rat_i(2), &rat_i(0), &Rat::new(1.into(), 1_000_000.into()))
            .unwrap();
        assert!(iv.lo < rat(1_414_214, 1_000_000));
        assert!(iv.hi > rat(1_414_213, 1_000_000));
    }
}
