use std::fmt;

use crate::exactnum::{DivisionByZero, Field, Ring, Scalar};

use super::upoly::UPoly;
use super::SymError;

/// Univariate rational function `num/den` in lowest terms with monic denominator.
#[derive(Clone, PartialEq, Debug)]
pub struct RatFun<F> {
    num: UPoly<F>,
    den: UPoly<F>,
}

impl<F: Field> RatFun<F> {
    pub fn new(num: UPoly<F>, den: UPoly<F>) -> Result<Self, DivisionByZero> {
        if den.is_zero() {
            return Err(DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        let (num, _) = num.div_rem(&g)?;
        let (den, _) = den.div_rem(&g)?;
        let lead = den.lead().unwrap().inv()?;
        Ok(RatFun { num: num.scale(&lead), den: den.scale(&lead) })
    }

    pub fn from_poly(p: UPoly<F>) -> Self {
        RatFun { num: p, den: UPoly::one() }
    }

    pub fn constant(c: F) -> Self {
        Self::from_poly(UPoly::constant(c))
    }

    /// The contraction parameter `t`.
    pub fn t() -> Self {
        Self::from_poly(UPoly::x())
    }

    pub fn num(&self) -> &UPoly<F> {
        &self.num
    }

    pub fn den(&self) -> &UPoly<F> {
        &self.den
    }

    /// Valuation at `t = 0`; `None` for the zero function.
    pub fn ord_at_zero(&self) -> Option<i64> {
        let n = self.num.ord_at_zero()? as i64;
        let d = self.den.ord_at_zero().expect("denominator is nonzero") as i64;
        Some(n - d)
    }

    /// Exact value of `lim_{t -> 0}`.
    pub fn limit_at_zero(&self) -> Result<F, SymError> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return Err(SymError::PoleAtZero);
        }
        Ok(self.num.coeff(0).div(&d0)?)
    }

    pub fn as_constant(&self) -> Option<F> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(F::zero()),
            (Some(0), Some(0)) => Some(self.num.coeff(0)),
            _ => None,
        }
    }

    pub fn eval(&self, x: &F) -> Result<F, DivisionByZero> {
        self.num.eval(x).div(&self.den.eval(x))
    }

    fn from_parts(num: UPoly<F>, den: UPoly<F>) -> Self {
        Self::new(num, den).expect("denominator is a product of nonzero polynomials")
    }
}

impl<F: Field> Ring for RatFun<F> {
    fn zero() -> Self {
        RatFun { num: UPoly::zero(), den: UPoly::one() }
    }
    fn one() -> Self {
        RatFun { num: UPoly::one(), den: UPoly::one() }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return Self::from_parts(self.num.add(&o.num), self.den.clone());
        }
        Self::from_parts(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        Self::from_parts(self.num.mul(&o.num), self.den.mul(&o.den))
    }
    fn neg(&self) -> Self {
        RatFun { num: self.num.neg(), den: self.den.clone() }
    }
    fn from_scalar(s: &Scalar) -> Self {
        Self::constant(F::from_scalar(s))
    }
}

impl<F: Field> Field for RatFun<F> {
    fn inv(&self) -> Result<Self, DivisionByZero> {
        Self::new(self.den.clone(), self.num.clone())
    }
}

impl<F: Field + fmt::Display> fmt::Display for RatFun<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}
