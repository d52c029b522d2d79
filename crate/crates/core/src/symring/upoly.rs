use std::fmt;

use crate::exactnum::{DivisionByZero, Field, Ring, Scalar};

/// Dense univariate polynomial, coefficients from degree 0 upward.
#[derive(Clone, PartialEq, Debug)]
pub struct UPoly<F> {
    coeffs: Vec<F>,
}

impl<F: Field> UPoly<F> {
    pub fn from_coeffs(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn constant(c: F) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The variable itself.
    pub fn x() -> Self {
        UPoly { coeffs: vec![F::zero(), F::one()] }
    }

    pub fn monomial(c: F, k: usize) -> Self {
        let mut v = vec![F::zero(); k];
        v.push(c);
        Self::from_coeffs(v)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&F> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> F {
        self.coeffs.get(k).cloned().unwrap_or_else(F::zero)
    }

    /// Multiplicity of the root 0; `None` for the zero polynomial.
    pub fn ord_at_zero(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn eval(&self, x: &F) -> F {
        self.coeffs.iter().rev().fold(F::zero(), |acc, c| acc.mul(x).add(c))
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    /// Drops `k` factors of the variable; the low coefficients must vanish.
    pub fn shift_down(&self, k: usize) -> Self {
        UPoly { coeffs: self.coeffs.iter().skip(k).cloned().collect() }
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some(l) => {
                let inv = l.inv().expect("leading coefficient is nonzero");
                self.scale(&inv)
            }
        }
    }

    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self), DivisionByZero> {
        let dd = d.degree().ok_or(DivisionByZero)?;
        let lead_inv = d.lead().unwrap().inv()?;
        let mut rem = self.coeffs.clone();
        let Some(n) = self.degree() else {
            return Ok((Self::zero(), Self::zero()));
        };
        if n < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![F::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let c = rem[k + dd].mul(&lead_inv);
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].sub(&c.mul(dc));
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("divisor is nonzero");
            a = b;
            b = r;
        }
        a.monic()
    }
}

impl<F: Field> Ring for UPoly<F> {
    fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }
    fn one() -> Self {
        UPoly { coeffs: vec![F::one()] }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|k| self.coeff(k).add(&o.coeff(k))).collect())
    }
    fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|k| self.coeff(k).sub(&o.coeff(k))).collect())
    }
    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![F::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b));
                }
            }
        }
        Self::from_coeffs(out)
    }
    fn neg(&self) -> Self {
        UPoly { coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }
    fn from_scalar(s: &Scalar) -> Self {
        Self::constant(F::from_scalar(s))
    }
}

/// Writes `c` as a coefficient, parenthesised unless it is a plain signed rational.
pub(crate) fn write_coeff(c: &str) -> String {
    let body = c.strip_prefix('-').unwrap_or(c);
    if body.contains(['+', '-', '*', '(']) || body.contains("i") {
        format!("({c})")
    } else {
        c.to_string()
    }
}

/// Joins signed terms as `a - b + c`.
pub(crate) fn join_terms(terms: Vec<String>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (n, t) in terms.into_iter().enumerate() {
        match (n, t.strip_prefix('-')) {
            (0, _) => out.push_str(&t),
            (_, Some(rest)) => {
                out.push_str(" - ");
                out.push_str(rest);
            }
            (_, None) => {
                out.push_str(" + ");
                out.push_str(&t);
            }
        }
    }
    out
}

impl<F: Field + fmt::Display> UPoly<F> {
    pub fn display_in(&self, var: &str) -> String {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            let cs = c.to_string();
            let term = if k == 0 {
                write_coeff(&cs)
            } else if cs == "1" {
                mono
            } else if cs == "-1" {
                format!("-{mono}")
            } else {
                format!("{}*{mono}", write_coeff(&cs))
            };
            terms.push(term);
        }
        join_terms(terms)
    }
}

impl<F: Field + fmt::Display> fmt::Display for UPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in("t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> UPoly<Scalar> {
        UPoly::from_coeffs(c.iter().map(|&k| Scalar::from(k)).collect())
    }

    #[test]
    fn division_with_remainder() {
        let (q, r) = p(&[5, 3, 1]).div_rem(&p(&[1, 1])).unwrap();
        assert_eq!(q, p(&[2, 1]));
        assert_eq!(r, p(&[3]));
    }

    #[test]
    fn gcd_is_monic() {
        let a = p(&[-1, 0, 1]).mul(&p(&[2]));
        let b = p(&[1, 2, 1]);
        assert_eq!(a.gcd(&b), p(&[1, 1]));
    }

    #[test]
    fn substitute_zero() {
        assert_eq!(p(&[5, 3, 1]).eval(&Scalar::zero()), Scalar::from(5));
    }

    #[test]
    fn display() {
        assert_eq!(p(&[5, -3, 1]).to_string(), "t^2 - 3*t + 5");
        assert_eq!(p(&[]).to_string(), "0");
    }
}
