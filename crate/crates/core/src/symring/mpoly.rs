use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::exactnum::{Ring, Scalar};

use super::upoly::{join_terms, write_coeff};
use super::SymError;

/// Ordered variable list shared by the polynomials of one ring.
#[derive(Debug, PartialEq, Eq)]
pub struct PolyRing {
    vars: Vec<String>,
}

impl PolyRing {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = S>) -> Arc<Self> {
        Arc::new(PolyRing { vars: vars.into_iter().map(Into::into).collect() })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }
}

type Monomial = Vec<u32>;

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

/// Sparse multivariate polynomial over Q(i).
///
/// Exponent vectors carry no trailing zeros, so constants are ring-agnostic;
/// a polynomial built from variables remembers its ring and refuses to mix.
#[derive(Clone, Debug)]
pub struct MPoly {
    ring: Option<Arc<PolyRing>>,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for MPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl MPoly {
    pub fn var(ring: &Arc<PolyRing>, idx: usize) -> Self {
        assert!(idx < ring.nvars(), "variable index out of range");
        let mut m = vec![0; idx + 1];
        m[idx] = 1;
        MPoly { ring: Some(ring.clone()), terms: BTreeMap::from([(m, Scalar::one())]) }
    }

    pub fn constant(c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        MPoly { ring: None, terms }
    }

    pub fn ring(&self) -> Option<&Arc<PolyRing>> {
        self.ring.as_ref()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Scalar)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    /// Largest monomial with its coefficient.
    pub fn leading(&self) -> Option<(&[u32], &Scalar)> {
        self.terms.iter().next_back().map(|(m, c)| (m.as_slice(), c))
    }

    fn joint_ring(&self, o: &Self) -> Result<Option<Arc<PolyRing>>, SymError> {
        match (&self.ring, &o.ring) {
            (Some(a), Some(b)) if !Arc::ptr_eq(a, b) && a != b => Err(SymError::VariableMismatch),
            (Some(a), _) => Ok(Some(a.clone())),
            (None, b) => Ok(b.clone()),
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, SymError> {
        let ring = self.joint_ring(o)?;
        let mut terms = self.terms.clone();
        for (m, c) in &o.terms {
            accumulate(&mut terms, m.clone(), c);
        }
        Ok(MPoly { ring, terms })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, SymError> {
        let ring = self.joint_ring(o)?;
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let n = ma.len().max(mb.len());
                let m: Monomial = (0..n)
                    .map(|k| ma.get(k).copied().unwrap_or(0) + mb.get(k).copied().unwrap_or(0))
                    .collect();
                accumulate(&mut terms, m, &(ca * cb));
            }
        }
        Ok(MPoly { ring, terms })
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return MPoly { ring: self.ring.clone(), terms: BTreeMap::new() };
        }
        MPoly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Evaluates at a point given in ring variable order.
    pub fn evaluate(&self, point: &[Scalar]) -> Result<Scalar, SymError> {
        let mut acc = Scalar::zero();
        for (m, c) in &self.terms {
            if m.len() > point.len() {
                return Err(SymError::VariableMismatch);
            }
            let mut t = c.clone();
            for (k, &e) in m.iter().enumerate() {
                t = &t * &point[k].pow(e);
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Replaces variable `idx` by `value`.
    pub fn substitute(&self, idx: usize, value: &MPoly) -> Result<Self, SymError> {
        let mut out = MPoly { ring: self.joint_ring(value)?, terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            let e = m.get(idx).copied().unwrap_or(0);
            let mut rest = m.clone();
            if idx < rest.len() {
                rest[idx] = 0;
            }
            let mono = MPoly { ring: None, terms: BTreeMap::from([(trim(rest), c.clone())]) };
            out = out.try_add(&mono.try_mul(&value.pow(e))?)?;
        }
        Ok(out)
    }

    /// Constant `q` with `self = q * other`, if one exists; `other` must be nonzero.
    pub fn proportionality(&self, other: &MPoly) -> Option<Scalar> {
        let (m, c) = other.leading()?;
        let q = match self.terms.get(m) {
            Some(a) => a / c,
            None => Scalar::zero(),
        };
        (other.scale(&q) == *self).then_some(q)
    }
}

fn accumulate(terms: &mut BTreeMap<Monomial, Scalar>, m: Monomial, c: &Scalar) {
    let m = trim(m);
    let entry = terms.entry(m);
    match entry {
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let v = o.get() + c;
            if v.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = v;
            }
        }
        std::collections::btree_map::Entry::Vacant(v) => {
            if !c.is_zero() {
                v.insert(c.clone());
            }
        }
    }
}

impl Ring for MPoly {
    fn zero() -> Self {
        MPoly { ring: None, terms: BTreeMap::new() }
    }
    fn one() -> Self {
        MPoly::constant(Scalar::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("polynomials from different rings")
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("polynomials from different rings")
    }
    fn neg(&self) -> Self {
        self.scale(&Scalar::from(-1))
    }
    fn from_scalar(s: &Scalar) -> Self {
        MPoly::constant(s.clone())
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |k: usize| match &self.ring {
            Some(r) => r.vars[k].clone(),
            None => format!("v{}", k + 1),
        };
        let mut terms = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mono: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| if e == 1 { name(k) } else { format!("{}^{e}", name(k)) })
                .collect();
            let cs = c.to_string();
            let term = match (mono.is_empty(), cs.as_str()) {
                (true, _) => write_coeff(&cs),
                (false, "1") => mono.join("*"),
                (false, "-1") => format!("-{}", mono.join("*")),
                (false, _) => format!("{}*{}", write_coeff(&cs), mono.join("*")),
            };
            terms.push(term);
        }
        f.write_str(&join_terms(terms))
    }
}
