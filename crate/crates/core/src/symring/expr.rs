use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::exactnum::{DivisionByZero, Field, Rational, Scalar};

use super::ratfun::RatFun;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown symbol {name:?} at byte {pos}")]
    UnknownSymbol { name: String, pos: usize },
    #[error("symbol {0:?} has no value")]
    Unbound(String),
    #[error("division by zero")]
    DivisionByZero,
}

impl From<DivisionByZero> for ExprError {
    fn from(_: DivisionByZero) -> Self {
        ExprError::DivisionByZero
    }
}

/// Expression tree over Q(i) constants and named symbols.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Scalar),
    Sym(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

/// Parses `s`, accepting only the listed symbols (`i` is always the imaginary unit).
pub fn parse_expr(s: &str, symbols: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0, symbols };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    symbols: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> ExprError {
        ExprError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let k = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, ExprError> {
        let close = if self.eat(b'{') {
            Some(b'}')
        } else if self.eat(b'(') {
            Some(b')')
        } else {
            None
        };
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected integer exponent"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let k: i64 = digits.parse().map_err(|_| self.error("exponent out of range"))?;
        if let Some(c) = close {
            if !self.eat(c) {
                return Err(self.error("unclosed exponent"));
            }
        }
        Ok(if neg { -k } else { k })
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: BigInt = digits.parse().expect("digits");
                Ok(Expr::Num(Scalar::from(Rational::from_integer(n))))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "i" {
                    return Ok(Expr::Num(Scalar::i()));
                }
                if !self.symbols.contains(&name) {
                    return Err(ExprError::UnknownSymbol { name: name.to_string(), pos: start });
                }
                Ok(Expr::Sym(name.to_string()))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

impl Expr {
    /// Evaluates in any field, looking symbols up through `env`.
    pub fn eval<K: Field>(&self, env: &dyn Fn(&str) -> Option<K>) -> Result<K, ExprError> {
        Ok(match self {
            Expr::Num(c) => K::from_scalar(c),
            Expr::Sym(s) => env(s).ok_or_else(|| ExprError::Unbound(s.clone()))?,
            Expr::Neg(a) => a.eval(env)?.neg(),
            Expr::Add(a, b) => a.eval(env)?.add(&b.eval(env)?),
            Expr::Sub(a, b) => a.eval(env)?.sub(&b.eval(env)?),
            Expr::Mul(a, b) => a.eval(env)?.mul(&b.eval(env)?),
            Expr::Div(a, b) => a.eval(env)?.div(&b.eval(env)?)?,
            Expr::Pow(a, k) => a.eval(env)?.powi(*k)?,
        })
    }

    pub fn eval_map<K: Field>(&self, env: &BTreeMap<String, K>) -> Result<K, ExprError> {
        self.eval(&|s: &str| env.get(s).cloned())
    }

    /// Instantiates the parameters, then reads the result as a function of `t`.
    pub fn to_ratfun<F: Field>(&self, params: &BTreeMap<String, F>) -> Result<RatFun<F>, ExprError> {
        self.eval(&|s: &str| {
            if s == "t" {
                Some(RatFun::t())
            } else {
                params.get(s).cloned().map(RatFun::constant)
            }
        })
    }

    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Sym(s) => out.push(s.clone()),
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_symbols(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "({c})"),
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "{a}*{b}"),
            Expr::Div(a, b) => write!(f, "{a}/({b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::Ring;

    fn rf(s: &str, params: &[(&str, i64)]) -> RatFun<Scalar> {
        let mut syms = vec!["t"];
        syms.extend(params.iter().map(|(k, _)| *k));
        let env = params.iter().map(|(k, v)| (k.to_string(), Scalar::from(*v))).collect();
        parse_expr(s, &syms).unwrap().to_ratfun(&env).unwrap()
    }

    fn t() -> RatFun<Scalar> {
        RatFun::t()
    }

    #[test]
    fn negative_exponents() {
        assert_eq!(rf("t^{-1}", &[]), t().inv().unwrap());
        assert_eq!(rf("t^-1", &[]), rf("1/t", &[]));
    }

    #[test]
    fn parameter_then_t() {
        let expected = t().mul(&t()).mul(&RatFun::from_i64(-3));
        assert_eq!(rf("-(a+1)*t^2", &[("a", 2)]), expected);
        let expected = t().mul(&RatFun::from_i64(-2)).inv().unwrap();
        assert_eq!(rf("1/((1-l)*t)", &[("l", 3)]), expected);
    }

    #[test]
    fn imaginary_unit() {
        let e = parse_expr("i*t", &["t"]).unwrap();
        let v = e.to_ratfun::<Scalar>(&BTreeMap::new()).unwrap();
        assert_eq!(v.mul(&v), t().mul(&t()).neg());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_expr("t +", &["t"]), Err(ExprError::Parse { pos: 3, .. })));
        assert_eq!(
            parse_expr("2*q", &["t"]),
            Err(ExprError::UnknownSymbol { name: "q".into(), pos: 2 })
        );
        assert!(matches!(parse_expr("(t", &["t"]), Err(ExprError::Parse { .. })));
        let e = parse_expr("1/(a-1)", &["a"]).unwrap();
        let env = BTreeMap::from([("a".to_string(), Scalar::one())]);
        assert_eq!(e.eval_map(&env), Err(ExprError::DivisionByZero));
    }

    #[test]
    fn display_reparses() {
        let syms = ["t", "a"];
        for s in ["-(a+1)*t^2", "1/((1-a)*t)", "a - -2*t^-3", "(1/2+i)*a"] {
            let e = parse_expr(s, &syms).unwrap();
            let again = parse_expr(&e.to_string(), &syms).unwrap();
            let env = BTreeMap::from([("a".to_string(), Scalar::from(5))]);
            assert_eq!(e.to_ratfun(&env).unwrap(), again.to_ratfun(&env).unwrap());
        }
    }
}
