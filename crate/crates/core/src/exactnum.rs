//! Exact rational and Gaussian-rational arithmetic.
//!
//! [`Scalar`] is an element of Q(i) stored as a pair of reduced rationals.
//! The [`Ring`] and [`Field`] traits are the interface the polynomial,
//! rational-function and matrix code is generic over.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("division by zero")]
pub struct DivisionByZero;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse scalar from {input:?}")]
pub struct ParseScalarError {
    pub input: String,
}

/// Commutative ring with exact equality.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Embeds a constant of Q(i).
    fn from_scalar(s: &Scalar) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn from_i64(n: i64) -> Self {
        Self::from_scalar(&Scalar::from(n))
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

pub trait Field: Ring {
    fn inv(&self) -> Result<Self, DivisionByZero>;

    fn div(&self, other: &Self) -> Result<Self, DivisionByZero> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power; negative exponents invert.
    fn powi(&self, e: i64) -> Result<Self, DivisionByZero> {
        let p = self.pow(e.unsigned_abs() as u32);
        if e < 0 {
            p.inv()
        } else {
            Ok(p)
        }
    }
}

/// Arbitrary-precision rational in lowest terms with positive denominator.
///
/// Values whose numerator and denominator fit in an `i64` are kept inline.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Reduced, `d > 0`, neither component is `i64::MIN`.
    Small(i64, i64),
    /// Only values that do not fit `Small`.
    Big(Box<BigRational>),
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn small(n: i128) -> Option<i64> {
    i64::try_from(n).ok().filter(|&v| v != i64::MIN)
}

impl Rational {
    fn from_big(r: BigRational) -> Self {
        let fit = |b: &BigInt| i64::try_from(b).ok().filter(|&v| v != i64::MIN);
        match (fit(r.numer()), fit(r.denom())) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(r))),
        }
    }

    /// Reduces `n/d` with `d != 0`.
    fn from_i128(n: i128, d: i128) -> Self {
        let g = gcd_u128(n.unsigned_abs(), d.unsigned_abs()) as i128;
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            (n, d) = (-n, -d);
        }
        match (small(n), small(d)) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(BigRational::new_raw(n.into(), d.into())))),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw((*n).into(), (*d).into()),
            Repr::Big(r) => (**r).clone(),
        }
    }

    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, DivisionByZero> {
        let d = denom.into();
        if d.is_zero() {
            return Err(DivisionByZero);
        }
        Ok(Rational::from_big(BigRational::new(numer.into(), d)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational::from_big(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => (*n).into(),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => (*d).into(),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn abs(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(n.abs(), *d)),
            Repr::Big(r) => Rational(Repr::Big(Box::new(r.abs()))),
        }
    }

    pub fn inv(&self) -> Result<Self, DivisionByZero> {
        match &self.0 {
            Repr::Small(0, _) => Err(DivisionByZero),
            Repr::Small(n, d) => Ok(Rational(Repr::Small(d * n.signum(), n.abs()))),
            Repr::Big(r) => Ok(Rational::from_big(r.recip())),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    /// Exact square root when `self` is the square of a rational.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let (num, den) = (self.numer(), self.denom());
        let n = num.sqrt();
        let d = den.sqrt();
        if &n * &n == num && &d * &d == den {
            Some(Rational::from_big(BigRational::new(n, d)))
        } else {
            None
        }
    }

    fn add_ref(&self, o: &Self) -> Self {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    Rational::from_i128(a + c, b)
                } else {
                    Rational::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Rational::from_big(self.to_big() + o.to_big()),
        }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        match (&self.0, &o.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                if *a == 0 || *c == 0 {
                    return Rational::zero();
                }
                let g1 = gcd_u128(a.unsigned_abs() as u128, d.unsigned_abs() as u128) as i128;
                let g2 = gcd_u128(c.unsigned_abs() as u128, b.unsigned_abs() as u128) as i128;
                let n = (*a as i128 / g1) * (*c as i128 / g2);
                let m = (*b as i128 / g2) * (*d as i128 / g1);
                match (small(n), small(m)) {
                    (Some(n), Some(m)) => Rational(Repr::Small(n, m)),
                    _ => Rational(Repr::Big(Box::new(BigRational::new_raw(n.into(), m.into())))),
                }
            }
            _ => Rational::from_big(self.to_big() * o.to_big()),
        }
    }

    fn neg_ref(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(r) => Rational::from_big(-&**r),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError { input: s.to_string() };
        let t = s.trim();
        let (n, d) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (t, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        Rational::new(n, d).map_err(|_| err())
    }
}

macro_rules! rational_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                $body(self, rhs)
            }
        }
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                $body(&self, &rhs)
            }
        }
    };
}
rational_binop!(Add, add, |a: &Rational, b: &Rational| a.add_ref(b));
rational_binop!(Sub, sub, |a: &Rational, b: &Rational| a.add_ref(&b.neg_ref()));
rational_binop!(Mul, mul, |a: &Rational, b: &Rational| a.mul_ref(b));
rational_binop!(Div, div, |a: &Rational, b: &Rational| a
    .mul_ref(&b.inv().expect("attempt to divide a Rational by zero")));

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

/// Gaussian rational `re + im*i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    re: Rational,
    im: Rational,
}

impl Scalar {
    pub fn new(re: Rational, im: Rational) -> Self {
        Scalar { re, im }
    }

    pub fn i() -> Self {
        Scalar::new(Rational::zero(), Rational::one())
    }

    pub fn ratio(n: i64, d: i64) -> Result<Self, DivisionByZero> {
        Ok(Scalar::from(Rational::new(n, d)?))
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Scalar::new(self.re.clone(), -&self.im)
    }

    /// `re^2 + im^2`.
    pub fn norm(&self) -> Rational {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    /// Square root in Q(i), when one exists.
    pub fn sqrt(&self) -> Option<Scalar> {
        if self.im.is_zero() {
            if let Some(r) = self.re.sqrt() {
                return Some(Scalar::from(r));
            }
            return (-&self.re).sqrt().map(|r| Scalar::new(Rational::zero(), r));
        }
        let modulus = self.norm().sqrt()?;
        let two = Rational::from(2);
        let a = (&(&modulus + &self.re) / &two).sqrt()?;
        if a.is_zero() {
            return None;
        }
        let b = &self.im / &(&two * &a);
        Some(Scalar::new(a, b))
    }
}

impl From<Rational> for Scalar {
    fn from(re: Rational) -> Self {
        Scalar::new(re, Rational::zero())
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from(Rational::from(n))
    }
}

impl Ring for Scalar {
    fn zero() -> Self {
        Scalar::from(Rational::zero())
    }
    fn one() -> Self {
        Scalar::from(Rational::one())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Scalar::new(&self.re + &o.re, &self.im + &o.im)
    }
    fn sub(&self, o: &Self) -> Self {
        Scalar::new(&self.re - &o.re, &self.im - &o.im)
    }
    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Scalar::from(&self.re * &o.re);
        }
        Scalar::new(
            &(&self.re * &o.re) - &(&self.im * &o.im),
            &(&self.re * &o.im) + &(&self.im * &o.re),
        )
    }
    fn neg(&self) -> Self {
        Scalar::new(-&self.re, -&self.im)
    }
    fn from_scalar(s: &Scalar) -> Self {
        s.clone()
    }
}

impl Field for Scalar {
    fn inv(&self) -> Result<Self, DivisionByZero> {
        if self.im.is_zero() {
            return Ok(Scalar::from(self.re.inv()?));
        }
        let n = self.norm().inv()?;
        Ok(Scalar::new(&self.re * &n, -&(&self.im * &n)))
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                $body(self, rhs)
            }
        }
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                $body(&self, &rhs)
            }
        }
    };
}
scalar_binop!(Add, add, |a: &Scalar, b: &Scalar| Ring::add(a, b));
scalar_binop!(Sub, sub, |a: &Scalar, b: &Scalar| Ring::sub(a, b));
scalar_binop!(Mul, mul, |a: &Scalar, b: &Scalar| Ring::mul(a, b));
scalar_binop!(Div, div, |a: &Scalar, b: &Scalar| Field::div(a, b)
    .expect("attempt to divide a Scalar by zero"));

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Ring::neg(self)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Ring::neg(&self)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on `(re, im)`; only used to make output ordering deterministic.
impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let imag = |im: &Rational| -> String {
            if *im == Rational::one() {
                "i".to_string()
            } else {
                format!("{im}*i")
            }
        };
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            if self.im.is_negative() {
                return write!(f, "-{}", imag(&self.im.abs()));
            }
            return write!(f, "{}", imag(&self.im));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}", self.re, sign, imag(&self.im.abs()))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    /// Accepts the canonical text forms `p/q`, `i`, `p/q*i` and `a+b*i`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseScalarError { input: s.to_string() };
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(err());
        }
        if !t.ends_with('i') {
            return t.parse::<Rational>().map(Scalar::from).map_err(|_| err());
        }
        let split = t[1..].rfind(['+', '-']).map(|p| p + 1);
        let (re, im) = match split {
            Some(p) => (&t[..p], &t[p..]),
            None => ("0", t.as_str()),
        };
        let im = im.strip_suffix('i').ok_or_else(err)?;
        let im = im.strip_suffix('*').unwrap_or(im);
        let im = match im {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => other.strip_prefix('+').unwrap_or(other).parse().map_err(|_| err())?,
        };
        let re: Rational = re.parse().map_err(|_| err())?;
        Ok(Scalar::new(re, im))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(s: &str) -> Scalar {
        s.parse().unwrap()
    }

    #[test]
    fn inverse_of_i() {
        assert_eq!(Scalar::i().inv().unwrap(), sc("-i"));
    }

    #[test]
    fn distributes() {
        assert_eq!(sc("1/2+i") * Scalar::from(2), sc("1+2*i"));
    }

    #[test]
    fn lowest_terms() {
        assert_eq!(Rational::new(2, 4).unwrap(), Rational::new(1, 2).unwrap());
        assert_eq!(Rational::new(0, -7).unwrap().to_string(), "0");
        assert_eq!(Rational::new(3, -6).unwrap().to_string(), "-1/2");
    }

    #[test]
    fn zero_has_no_inverse() {
        assert_eq!(Scalar::zero().inv(), Err(DivisionByZero));
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn text_forms() {
        for s in ["0", "3/2", "-7", "i", "-i", "1/2*i", "-2/3*i", "1+2*i", "1/2-3*i", "-1-i"] {
            assert_eq!(sc(s).to_string(), s);
        }
        assert_eq!(sc("4/6"), sc("2/3"));
        assert!("1+".parse::<Scalar>().is_err());
        assert!("x".parse::<Scalar>().is_err());
    }

    #[test]
    fn square_roots() {
        assert_eq!(sc("9/4").sqrt(), Some(sc("3/2")));
        assert_eq!(sc("-1/4").sqrt(), Some(sc("1/2*i")));
        assert_eq!(sc("2*i").sqrt(), Some(sc("1+i")));
        assert_eq!(sc("2").sqrt(), None);
        let z = sc("-5+12*i");
        let r = z.sqrt().unwrap();
        assert_eq!(&r * &r, z);
    }

    pub(crate) fn arb_scalar() -> impl Strategy<Value = Scalar> {
        (-20i64..20, 1i64..9, -20i64..20, 1i64..9).prop_map(|(a, b, c, d)| {
            Scalar::new(Rational::new(a, b).unwrap(), Rational::new(c, d).unwrap())
        })
    }

    fn arb_rational() -> impl Strategy<Value = (BigInt, BigInt)> {
        let edge = prop_oneof![
            -50i64..50,
            Just(i64::MAX),
            Just(i64::MIN),
            Just(i64::MAX - 1),
            Just(1i64 << 40),
            Just(3i64 << 61),
        ];
        (edge.clone(), edge.prop_filter("nonzero", |d| *d != 0))
            .prop_map(|(n, d)| (BigInt::from(n), BigInt::from(d)))
    }

    proptest! {
        #[test]
        fn matches_big_rational((a, b) in arb_rational(), (c, d) in arb_rational()) {
            let (x, y) = (Rational::new(a.clone(), b.clone()).unwrap(), Rational::new(c.clone(), d.clone()).unwrap());
            let (p, q) = (BigRational::new(a, b), BigRational::new(c, d));
            let same = |r: Rational, s: BigRational| r == Rational::from_big(s.clone()) && r.numer() == *s.numer() && r.denom() == *s.denom();
            prop_assert!(same(&x + &y, &p + &q));
            prop_assert!(same(&x - &y, &p - &q));
            prop_assert!(same(&x * &y, &p * &q));
            prop_assert!(same(-&x, -&p));
            prop_assert_eq!(x.cmp(&y), p.cmp(&q));
            if !q.is_zero() {
                prop_assert!(same(&x / &y, &p / &q));
            }
        }
    }

    proptest! {
        #[test]
        fn addition_associates(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        }

        #[test]
        fn multiplication_associates(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn inverse_law(a in arb_scalar()) {
            prop_assume!(!a.is_zero());
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }

        #[test]
        fn display_round_trips(a in arb_scalar()) {
            prop_assert_eq!(a.to_string().parse::<Scalar>().unwrap(), a);
        }
    }
}
