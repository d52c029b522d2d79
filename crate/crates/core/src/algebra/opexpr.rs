use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::exactnum::{Ring, Scalar};
use crate::linalg::Matrix;
use crate::symring::{parse_expr, ExprError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Op {
    L,
    R,
}

/// Key of one monomial `tr(L)^p * tr(R)^q * word`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpMonomial {
    pub tr_l: u32,
    pub tr_r: u32,
    pub word: Vec<Op>,
}

/// Formal sum of operator words in `L(x)`, `R(x)` with trace-power prefactors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OpExpr {
    terms: BTreeMap<OpMonomial, Scalar>,
}

impl OpExpr {
    pub fn terms(&self) -> impl Iterator<Item = (&OpMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mono: OpMonomial, coeff: Scalar) {
        let v = self.terms.get(&mono).cloned().unwrap_or_else(Scalar::zero).add(&coeff);
        if v.is_zero() {
            self.terms.remove(&mono);
        } else {
            self.terms.insert(mono, v);
        }
    }

    /// Parses `coef * trL^p * trR^q * WORD` sums; coefficients may use `params`.
    pub fn parse(s: &str, params: &BTreeMap<String, Scalar>) -> Result<Self, ExprError> {
        let symbols: Vec<&str> = params.keys().map(String::as_str).collect();
        let mut out = OpExpr::default();
        for (sign, offset, term) in split_top(s, &['+', '-'])? {
            let mut mono = OpMonomial { tr_l: 0, tr_r: 0, word: Vec::new() };
            let mut coeff_parts = Vec::new();
            let mut has_word = false;
            for (_, _, factor) in split_top(term, &['*'])? {
                let f = factor.trim();
                if let Some(p) = trace_power(f, "trL") {
                    mono.tr_l += p.map_err(|msg| ExprError::Parse { pos: offset, msg })?;
                } else if let Some(p) = trace_power(f, "trR") {
                    mono.tr_r += p.map_err(|msg| ExprError::Parse { pos: offset, msg })?;
                } else if f == "I" {
                    has_word = true;
                } else if !f.is_empty() && f.chars().all(|c| c == 'L' || c == 'R') {
                    has_word = true;
                    mono.word.extend(f.chars().map(|c| if c == 'L' { Op::L } else { Op::R }));
                } else {
                    coeff_parts.push(f.to_string());
                }
            }
            if !has_word {
                return Err(ExprError::Parse {
                    pos: offset,
                    msg: format!("term {:?} has no operator word", term.trim()),
                });
            }
            let coeff = if coeff_parts.is_empty() {
                Scalar::one()
            } else {
                let e = parse_expr(&coeff_parts.join("*"), &symbols).map_err(|e| shift(e, offset))?;
                e.eval_map(params)?
            };
            out.add_term(mono, if sign { coeff.neg() } else { coeff });
        }
        Ok(out)
    }

    /// Evaluates on concrete operator matrices.
    pub fn evaluate<R: Ring>(&self, l: &Matrix<R>, r: &Matrix<R>) -> Matrix<R> {
        self.evaluate_in(&mut WordCache::new(l.clone(), r.clone()))
    }

    /// Evaluates reusing the word products already stored in `cache`.
    pub fn evaluate_in<R: Ring>(&self, cache: &mut WordCache<R>) -> Matrix<R> {
        let n = cache.l.rows();
        let mut acc = Matrix::zeros(n, n);
        for (mono, c) in &self.terms {
            let factor = cache.tr_l.pow(mono.tr_l).mul(&cache.tr_r.pow(mono.tr_r)).mul(&R::from_scalar(c));
            let w = cache.word(&mono.word).scale(&factor);
            acc = acc.add(&w).expect("same shape");
        }
        acc
    }
}

/// `L(x)`, `R(x)`, their traces, and memoized products of words in them.
#[derive(Debug, Clone)]
pub struct WordCache<R: Ring> {
    l: Matrix<R>,
    r: Matrix<R>,
    tr_l: R,
    tr_r: R,
    words: HashMap<Vec<Op>, Matrix<R>>,
}

impl<R: Ring> WordCache<R> {
    pub fn new(l: Matrix<R>, r: Matrix<R>) -> Self {
        let (tr_l, tr_r) = (l.trace(), r.trace());
        WordCache { l, r, tr_l, tr_r, words: HashMap::new() }
    }

    pub fn word(&mut self, w: &[Op]) -> &Matrix<R> {
        if !self.words.contains_key(w) {
            let m = match w.split_last() {
                None => Matrix::identity(self.l.rows()),
                Some((last, init)) => {
                    let f = if *last == Op::L { self.l.clone() } else { self.r.clone() };
                    self.word(init).clone().mul(&f).expect("square operators")
                }
            };
            self.words.insert(w.to_vec(), m);
        }
        &self.words[w]
    }
}

fn shift(e: ExprError, offset: usize) -> ExprError {
    match e {
        ExprError::Parse { pos, msg } => ExprError::Parse { pos: pos + offset, msg },
        ExprError::UnknownSymbol { name, pos } => ExprError::UnknownSymbol { name, pos: pos + offset },
        other => other,
    }
}

fn trace_power(f: &str, head: &str) -> Option<Result<u32, String>> {
    let rest = f.strip_prefix(head)?;
    if rest.is_empty() {
        return Some(Ok(1));
    }
    let p = rest.strip_prefix('^')?;
    Some(p.trim().parse().map_err(|_| format!("bad exponent in {f:?}")))
}

/// Splits at top-level separators, reporting `(negated, byte offset, piece)`.
fn split_top<'a>(s: &'a str, seps: &[char]) -> Result<Vec<(bool, usize, &'a str)>, ExprError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut neg = false;
    let mut prev_significant: Option<char> = None;
    for (k, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(ExprError::Parse { pos: k, msg: "unbalanced ')'".into() });
                }
            }
            c if depth == 0 && seps.contains(&c) => {
                let unary = matches!(prev_significant, None | Some('*') | Some('/') | Some('^'));
                if c == '-' && unary {
                    if prev_significant.is_none() {
                        neg = !neg;
                        start = k + 1;
                    }
                } else {
                    if !s[start..k].trim().is_empty() {
                        out.push((neg, start, &s[start..k]));
                    }
                    neg = c == '-';
                    start = k + 1;
                    prev_significant = None;
                    continue;
                }
            }
            _ => {}
        }
        if !ch.is_whitespace() {
            prev_significant = Some(ch);
        }
    }
    if depth != 0 {
        return Err(ExprError::Parse { pos: s.len(), msg: "unbalanced '('".into() });
    }
    if s[start..].trim().is_empty() {
        return Err(ExprError::Parse { pos: s.len(), msg: "empty term".into() });
    }
    out.push((neg, start, &s[start..]));
    Ok(out)
}

impl fmt::Display for OpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0*I");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut fs = vec![format!("({c})")];
                if m.tr_l > 0 {
                    fs.push(format!("trL^{}", m.tr_l));
                }
                if m.tr_r > 0 {
                    fs.push(format!("trR^{}", m.tr_r));
                }
                if m.word.is_empty() {
                    fs.push("I".into());
                } else {
                    fs.push(m.word.iter().map(|o| if *o == Op::L { 'L' } else { 'R' }).collect());
                }
                fs.join("*")
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
