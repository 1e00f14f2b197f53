//! Exact scalars: rationals and the cyclotomic field Q(ζ) with ζ³ = 1.
//!
//! After the weight specialization w_i = ζ^i every equivariant quantity lives
//! in Q(ζ), stored as a + bζ with the reduction ζ² = −1 − ζ.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// "num/den" in lowest terms, denominator always present.
pub fn rational_to_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Element a + bζ of Q(ζ).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct CycScalar {
    pub a: Rational,
    pub b: Rational,
}

impl CycScalar {
    pub fn new(a: Rational, b: Rational) -> Self {
        CycScalar { a, b }
    }

    pub fn zero() -> Self {
        CycScalar { a: Rational::zero(), b: Rational::zero() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn zeta() -> Self {
        CycScalar { a: Rational::zero(), b: Rational::one() }
    }

    pub fn from_int(n: i64) -> Self {
        CycScalar { a: int(n), b: Rational::zero() }
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        CycScalar { a: rat(n, d), b: Rational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Rational part, provided the element is rational.
    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.a.clone())
    }

    /// Galois conjugate ζ ↦ ζ².
    pub fn conj(&self) -> Self {
        CycScalar { a: &self.a - &self.b, b: -&self.b }
    }

    /// Field norm a² − ab + b².
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.a * &self.b + &self.b * &self.b
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.b.is_zero() {
            return Ok(CycScalar { a: self.a.recip(), b: Rational::zero() });
        }
        let n = self.norm();
        let c = self.conj();
        Ok(CycScalar { a: c.a / &n, b: c.b / n })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        CycScalar { a: &self.a * r, b: &self.b * r }
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = CycScalar::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Ok(acc)
    }
}

/// The torus weight w_i = ζ^i at fixed point i.
pub fn weight(i: usize) -> Result<CycScalar> {
    match i {
        0 => Ok(CycScalar::one()),
        1 => Ok(CycScalar::zeta()),
        2 => Ok(CycScalar::from_int(-1) - CycScalar::zeta()),
        _ => Err(Error::FixedPoint(i)),
    }
}

/// ζ^k for any integer k.
pub fn zeta_pow(k: i64) -> CycScalar {
    weight(k.rem_euclid(3) as usize).expect("reduced index")
}

impl From<Rational> for CycScalar {
    fn from(a: Rational) -> Self {
        CycScalar { a, b: Rational::zero() }
    }
}

impl From<i64> for CycScalar {
    fn from(n: i64) -> Self {
        CycScalar::from_int(n)
    }
}

impl<'a> Add<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn add(self, o: &CycScalar) -> CycScalar {
        CycScalar { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl<'a> Sub<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn sub(self, o: &CycScalar) -> CycScalar {
        CycScalar { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl<'a> Mul<&'a CycScalar> for &'a CycScalar {
    type Output = CycScalar;
    fn mul(self, o: &CycScalar) -> CycScalar {
        if self.b.is_zero() {
            if o.b.is_zero() {
                return CycScalar { a: &self.a * &o.a, b: Rational::zero() };
            }
            return CycScalar { a: &self.a * &o.a, b: &self.a * &o.b };
        }
        if o.b.is_zero() {
            return CycScalar { a: &self.a * &o.a, b: &self.b * &o.a };
        }
        // (a + bζ)(c + dζ) = ac − bd + (ad + bc − bd)ζ
        let bd = &self.b * &o.b;
        CycScalar {
            a: &self.a * &o.a - &bd,
            b: &self.a * &o.b + &self.b * &o.a - bd,
        }
    }
}

impl Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        CycScalar { a: -&self.a, b: -&self.b }
    }
}

impl Neg for CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        -&self
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, o: CycScalar) -> CycScalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a CycScalar> for CycScalar {
            type Output = CycScalar;
            fn $m(self, o: &CycScalar) -> CycScalar {
                (&self).$m(o)
            }
        }
        impl<'a> $tr<CycScalar> for &'a CycScalar {
            type Output = CycScalar;
            fn $m(self, o: CycScalar) -> CycScalar {
                self.$m(&o)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Div<&CycScalar> for &CycScalar {
    type Output = CycScalar;
    /// Panics on a zero divisor; use `checked_div` where zero is possible.
    fn div(self, o: &CycScalar) -> CycScalar {
        self.checked_div(o).expect("division by zero in Q(zeta)")
    }
}

impl AddAssign<&CycScalar> for CycScalar {
    fn add_assign(&mut self, o: &CycScalar) {
        self.a += &o.a;
        if !o.b.is_zero() {
            self.b += &o.b;
        }
    }
}

impl SubAssign<&CycScalar> for CycScalar {
    fn sub_assign(&mut self, o: &CycScalar) {
        self.a -= &o.a;
        if !o.b.is_zero() {
            self.b -= &o.b;
        }
    }
}

impl MulAssign<&CycScalar> for CycScalar {
    fn mul_assign(&mut self, o: &CycScalar) {
        *self = &*self * o;
    }
}

impl std::iter::Sum for CycScalar {
    fn sum<I: Iterator<Item = CycScalar>>(iter: I) -> CycScalar {
        iter.fold(CycScalar::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", self.a),
            (true, false) => write!(f, "{}*z", self.b),
            (false, false) => {
                let sign = if self.b.is_negative() { "-" } else { "+" };
                write!(f, "{} {} {}*z", self.a, sign, self.b.abs())
            }
        }
    }
}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

#[derive(Serialize, Deserialize)]
struct CycRepr {
    a: String,
    b: String,
}

impl Serialize for CycScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycRepr { a: rational_to_string(&self.a), b: rational_to_string(&self.b) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CycRepr::deserialize(d)?;
        let a = parse_rational(&r.a).ok_or_else(|| D::Error::custom("bad rational in a"))?;
        let b = parse_rational(&r.b).ok_or_else(|| D::Error::custom("bad rational in b"))?;
        Ok(CycScalar { a, b })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(a: i64, b: i64) -> CycScalar {
        CycScalar::new(int(a), int(b))
    }

    #[test]
    fn zeta_squared() {
        assert_eq!(CycScalar::zeta() * CycScalar::zeta(), c(-1, -1));
    }

    #[test]
    fn one_minus_zeta_times_conjugate() {
        let z = CycScalar::zeta();
        let z2 = &z * &z;
        assert_eq!((CycScalar::one() - z) * (CycScalar::one() - z2), c(3, 0));
    }

    #[test]
    fn weights_sum_to_zero() {
        let w: Vec<_> = (0..3).map(|i| weight(i).unwrap()).collect();
        assert!((&w[0] + &w[1] + &w[2]).is_zero());
        let e2 = &w[0] * &w[1] + &w[0] * &w[2] + &w[1] * &w[2];
        assert!(e2.is_zero());
        assert_eq!(weight(1).unwrap(), CycScalar::zeta());
        assert!(weight(3).is_err());
    }

    #[test]
    fn inverse_and_zero() {
        let x = c(2, -5);
        assert!((&x * &x.inv().unwrap()).is_one());
        assert_eq!(CycScalar::zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn pow_negative() {
        let z = CycScalar::zeta();
        assert!(z.pow(3).unwrap().is_one());
        assert_eq!(z.pow(-1).unwrap(), zeta_pow(2));
    }

    #[test]
    fn json_round_trip() {
        let x = CycScalar::new(rat(-3, 4), rat(5, 1));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"a":"-3/4","b":"5/1"}"#);
        let y: CycScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
