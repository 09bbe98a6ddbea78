//! Exact rational scalars: `Rat` (arbitrary precision), the one-point
//! extension `ExtRat` with `+inf`, and closed rational intervals used for
//! sign certification of algebraic numbers.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

pub type Rat = BigRational;

/// `Rat` from an integer.
pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `Rat` from a fraction `n/d`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Render `x` as `"n"` or `"n/d"`.
pub fn rat_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A rational extended with `+inf`, totally ordered with `inf` maximal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRat {
    Finite(Rat),
    Infinity,
}

impl ExtRat {
    pub fn finite(x: Rat) -> Self {
        ExtRat::Finite(x)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Rat> {
        match self {
            ExtRat::Finite(x) => Some(x),
            ExtRat::Infinity => None,
        }
    }

    pub fn max(self, other: ExtRat) -> ExtRat {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRat::Infinity, ExtRat::Infinity) => Ordering::Equal,
            (ExtRat::Infinity, ExtRat::Finite(_)) => Ordering::Greater,
            (ExtRat::Finite(_), ExtRat::Infinity) => Ordering::Less,
            (ExtRat::Finite(a), ExtRat::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Finite(x) => write!(f, "{}", rat_string(x)),
            ExtRat::Infinity => write!(f, "inf"),
        }
    }
}

impl From<Rat> for ExtRat {
    fn from(x: Rat) -> Self {
        ExtRat::Finite(x)
    }
}

/// Closed interval `[lo, hi]` with rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RatInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn point(x: Rat) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) / rat_i(2)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Sign if it is certain: `Some(1)`, `Some(-1)`, or `None` when the
    /// interval straddles zero.
    pub fn sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn neg(&self) -> Self {
        RatInterval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        RatInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_negative() {
            RatInterval { lo: &self.hi * c, hi: &self.lo * c }
        } else {
            RatInterval { lo: &self.lo * c, hi: &self.hi * c }
        }
    }

    /// Interval division; `None` when the divisor straddles zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        if other.contains_zero() {
            return None;
        }
        let inv = RatInterval {
            lo: Rat::one() / &other.hi,
            hi: Rat::one() / &other.lo,
        };
        Some(self.mul(&inv))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = RatInterval::point(rat_i(1));
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.midpoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_rat_order() {
        assert!(ExtRat::Infinity > ExtRat::finite(rat_i(1_000_000)));
        assert_eq!(ExtRat::finite(rat(5, 2)).to_string(), "5/2");
        assert_eq!(ExtRat::Infinity.to_string(), "inf");
    }

    #[test]
    fn interval_mul_signs() {
        let a = RatInterval::new(rat_i(-2), rat_i(3));
        let b = RatInterval::new(rat_i(-1), rat_i(4));
        let p = a.mul(&b);
        assert_eq!(p.lo, rat_i(-8));
        assert_eq!(p.hi, rat_i(12));
        assert!(p.contains_zero());
        assert_eq!(p.sign(), None);
    }

    #[test]
    fn interval_pow() {
        let a = RatInterval::new(rat_i(-2), rat_i(1));
        let sq = a.pow(2);
        assert_eq!(sq.lo, rat_i(-2)); // interval square, not range square
        assert_eq!(sq.hi, rat_i(4));
    }
}
