use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact non-negative rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Rat {
        Rat(BigRational::zero())
    }

    pub fn one() -> Rat {
        Rat(BigRational::one())
    }

    pub fn from_int(n: u64) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_biguint(n: BigUint) -> Rat {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// `p/q`, or `None` when `q = 0`.
    pub fn ratio(p: u64, q: u64) -> Option<Rat> {
        Rat::from_parts(BigUint::from(p), BigUint::from(q))
    }

    pub fn from_parts(p: BigUint, q: BigUint) -> Option<Rat> {
        if q.is_zero() {
            return None;
        }
        Some(Rat(BigRational::new(BigInt::from(p), BigInt::from(q))))
    }

    /// Accepts any rational; negative values are rejected.
    pub fn from_big(r: BigRational) -> Option<Rat> {
        if r.is_negative() {
            None
        } else {
            Some(Rat(r))
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Numerator of the reduced fraction.
    pub fn numer(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    /// Denominator of the reduced fraction.
    pub fn denom(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The value as a natural number, if it is one.
    pub fn to_natural(&self) -> Option<BigUint> {
        if self.is_integer() {
            Some(self.numer())
        } else {
            None
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.to_natural().and_then(|n| n.to_u64())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Truncated subtraction `max(self - other, 0)`.
    pub fn monus(&self, other: &Rat) -> Rat {
        if self <= other {
            Rat::zero()
        } else {
            Rat(&self.0 - &other.0)
        }
    }

    /// `other - self` when `self <= other`.
    pub fn checked_sub(&self, other: &Rat) -> Option<Rat> {
        if other > self {
            None
        } else {
            Some(Rat(&self.0 - &other.0))
        }
    }

    pub fn recip(&self) -> Option<Rat> {
        if self.is_zero() {
            None
        } else {
            Some(Rat(self.0.recip()))
        }
    }

    pub fn div(&self, other: &Rat) -> Option<Rat> {
        other.recip().map(|r| self * &r)
    }

    /// Largest integer not above the value.
    pub fn floor(&self) -> BigUint {
        self.0.floor().numer().magnitude().clone()
    }

    /// Always `p/q`, including `q = 1`.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    pub fn pow(&self, e: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat, Error> {
        let bad = || Error::Decode(format!("not a non-negative rational: `{s}`"));
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (s, "1"),
        };
        let p: BigUint = p.parse().map_err(|_| bad())?;
        let q: BigUint = q.parse().map_err(|_| bad())?;
        Rat::from_parts(p, q).ok_or_else(bad)
    }
}

impl From<u64> for Rat {
    fn from(n: u64) -> Rat {
        Rat::from_int(n)
    }
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        Rat(&self.0 + &rhs.0)
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        Rat(&self.0 * &rhs.0)
    }
}

impl Add for Rat {
    type Output = Rat;
    fn add(self, rhs: Rat) -> Rat {
        Rat(self.0 + rhs.0)
    }
}

impl Mul for Rat {
    type Output = Rat;
    fn mul(self, rhs: Rat) -> Rat {
        Rat(self.0 * rhs.0)
    }
}

/// Extended non-negative reals restricted to rationals plus infinity.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum XReal {
    Fin(Rat),
    Inf,
}

impl XReal {
    pub fn zero() -> XReal {
        XReal::Fin(Rat::zero())
    }

    pub fn one() -> XReal {
        XReal::Fin(Rat::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, XReal::Fin(r) if r.is_zero())
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, XReal::Inf)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            XReal::Fin(r) => Some(r),
            XReal::Inf => None,
        }
    }

    /// Scaling by a finite factor; `0 * inf = 0`.
    pub fn scale(&self, r: &Rat) -> XReal {
        match self {
            XReal::Fin(x) => XReal::Fin(x * r),
            XReal::Inf if r.is_zero() => XReal::zero(),
            XReal::Inf => XReal::Inf,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            XReal::Fin(r) => r.to_f64(),
            XReal::Inf => f64::INFINITY,
        }
    }

    /// `"p/q"` or `"inf"`.
    pub fn to_fraction_string(&self) -> String {
        match self {
            XReal::Fin(r) => r.to_fraction_string(),
            XReal::Inf => "inf".to_string(),
        }
    }
}

impl From<Rat> for XReal {
    fn from(r: Rat) -> XReal {
        XReal::Fin(r)
    }
}

impl Ord for XReal {
    fn cmp(&self, other: &XReal) -> Ordering {
        match (self, other) {
            (XReal::Fin(a), XReal::Fin(b)) => a.cmp(b),
            (XReal::Fin(_), XReal::Inf) => Ordering::Less,
            (XReal::Inf, XReal::Fin(_)) => Ordering::Greater,
            (XReal::Inf, XReal::Inf) => Ordering::Equal,
        }
    }
}

impl PartialOrd for XReal {
    fn partial_cmp(&self, other: &XReal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &XReal {
    type Output = XReal;
    fn add(self, rhs: &XReal) -> XReal {
        match (self, rhs) {
            (XReal::Fin(a), XReal::Fin(b)) => XReal::Fin(a + b),
            _ => XReal::Inf,
        }
    }
}

impl Mul for &XReal {
    type Output = XReal;
    fn mul(self, rhs: &XReal) -> XReal {
        match (self, rhs) {
            (XReal::Fin(a), XReal::Fin(b)) => XReal::Fin(a * b),
            (XReal::Fin(a), XReal::Inf) | (XReal::Inf, XReal::Fin(a)) => XReal::Inf.scale(a),
            (XReal::Inf, XReal::Inf) => XReal::Inf,
        }
    }
}

impl Add for XReal {
    type Output = XReal;
    fn add(self, rhs: XReal) -> XReal {
        &self + &rhs
    }
}

impl Mul for XReal {
    type Output = XReal;
    fn mul(self, rhs: XReal) -> XReal {
        &self * &rhs
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XReal::Fin(r) => write!(f, "{r}"),
            XReal::Inf => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for XReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<XReal, Error> {
        if s.trim() == "inf" {
            Ok(XReal::Inf)
        } else {
            s.parse().map(XReal::Fin)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(r("6/4").to_string(), "3/2");
        assert_eq!(r("4/2").to_string(), "2");
        assert_eq!(r("4/2").to_fraction_string(), "2/1");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("-1".parse::<Rat>().is_err());
    }

    #[test]
    fn monus_truncates() {
        assert_eq!(r("1").monus(&r("3")), Rat::zero());
        assert_eq!(r("7/2").monus(&r("1/2")), r("3"));
    }

    #[test]
    fn infinity_arithmetic() {
        let inf = XReal::Inf;
        assert_eq!(&inf + &XReal::one(), XReal::Inf);
        assert_eq!(&inf * &XReal::zero(), XReal::zero());
        assert_eq!(&XReal::Fin(r("1/2")) * &inf, XReal::Inf);
        assert!(XReal::Fin(r("1000")) < inf);
        assert_eq!("inf".parse::<XReal>().unwrap(), XReal::Inf);
    }
}
