use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::exactnum::{DivisionByZero, Field, Ring, Scalar};
use crate::linalg::Matrix;

use super::{AlgebraError, StructureConstants};

/// Unordered pair `{λ, 1/λ}`, stored through `κ = λ + 1/λ`.
///
/// The eigenvalue ratio of a Lie algebra given over Q(i) need not itself lie in
/// Q(i) after an arbitrary basis change, while `κ` always does.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LambdaPair {
    kappa: Scalar,
}

impl LambdaPair {
    pub fn from_lambda(lambda: &Scalar) -> Result<Self, DivisionByZero> {
        Ok(LambdaPair { kappa: lambda.add(&lambda.inv()?) })
    }

    pub fn from_kappa(kappa: Scalar) -> Self {
        LambdaPair { kappa }
    }

    pub fn kappa(&self) -> &Scalar {
        &self.kappa
    }

    /// Both members when they lie in Q(i), smaller one first.
    pub fn members(&self) -> Option<(Scalar, Scalar)> {
        let disc = self.kappa.mul(&self.kappa).sub(&Scalar::from(4));
        let root = disc.sqrt()?;
        let half = Scalar::ratio(1, 2).expect("nonzero");
        let a = self.kappa.add(&root).mul(&half);
        let b = self.kappa.sub(&root).mul(&half);
        Some(if a <= b { (a, b) } else { (b, a) })
    }

    pub fn contains(&self, lambda: &Scalar) -> bool {
        LambdaPair::from_lambda(lambda).is_ok_and(|p| p == *self)
    }
}

impl fmt::Display for LambdaPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.members() {
            Some((a, b)) if a == b => write!(f, "{{{a}}}"),
            Some((a, b)) => write!(f, "{{{a}, {b}}}"),
            None => write!(f, "{{l : l + 1/l = {}}}", self.kappa),
        }
    }
}

impl Serialize for LambdaPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LambdaPair", 2)?;
        st.serialize_field("kappa", &self.kappa)?;
        st.serialize_field("pair", &self.members().map(|(a, b)| [a, b]))?;
        st.end()
    }
}

/// Isomorphism class of a solvable three-dimensional complex Lie algebra.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "tag")]
pub enum LieClass {
    #[serde(rename = "abelian")]
    Abelian,
    #[serde(rename = "heisenberg_n3")]
    HeisenbergN3,
    #[serde(rename = "r2_plus_C")]
    R2PlusC,
    #[serde(rename = "r3")]
    R3,
    #[serde(rename = "r3_lambda")]
    R3Lambda { lambda: LambdaPair },
}

impl LieClass {
    pub fn tag(&self) -> &'static str {
        match self {
            LieClass::Abelian => "abelian",
            LieClass::HeisenbergN3 => "heisenberg_n3",
            LieClass::R2PlusC => "r2_plus_C",
            LieClass::R3 => "r3",
            LieClass::R3Lambda { .. } => "r3_lambda",
        }
    }

    pub fn from_tag(tag: &str, lambda: Option<&Scalar>) -> Option<Self> {
        Some(match (tag, lambda) {
            ("abelian", None) => LieClass::Abelian,
            ("heisenberg_n3", None) => LieClass::HeisenbergN3,
            ("r2_plus_C", None) => LieClass::R2PlusC,
            ("r3", None) => LieClass::R3,
            ("r3_lambda", Some(l)) => LieClass::R3Lambda { lambda: LambdaPair::from_lambda(l).ok()? },
            _ => return None,
        })
    }

    fn is_r3_one(&self) -> bool {
        matches!(self, LieClass::R3Lambda { lambda } if lambda.kappa == Scalar::from(2))
    }

    /// Whether `self` degenerates to `other` (including `self == other`).
    pub fn degenerates_to(&self, other: &LieClass) -> bool {
        use LieClass::*;
        if self == other || *other == Abelian {
            return true;
        }
        match self {
            Abelian | HeisenbergN3 => false,
            R2PlusC => *other == HeisenbergN3,
            R3 => *other == HeisenbergN3 || other.is_r3_one(),
            R3Lambda { .. } => !self.is_r3_one() && *other == HeisenbergN3,
        }
    }
}

impl fmt::Display for LieClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieClass::Abelian => f.write_str("C^3"),
            LieClass::HeisenbergN3 => f.write_str("n3"),
            LieClass::R2PlusC => f.write_str("r2+C"),
            LieClass::R3 => f.write_str("r3"),
            LieClass::R3Lambda { lambda } => write!(f, "r3,{lambda}"),
        }
    }
}

fn bracket(s: &StructureConstants<Scalar>, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    s.product(x, y)
}

fn basis(n: usize, i: usize) -> Vec<Scalar> {
    (0..n).map(|k| if k == i { Scalar::one() } else { Scalar::zero() }).collect()
}

/// Coordinates of `v` in the independent family `cols`.
fn coords(cols: &[Vec<Scalar>], v: &[Scalar]) -> Option<Vec<Scalar>> {
    let n = v.len();
    let m = cols.len();
    let aug = Matrix::from_fn(n, m + 1, |r, c| if c < m { cols[c][r].clone() } else { v[r].clone() });
    let (red, pivots) = aug.rref();
    if pivots.contains(&m) {
        return None;
    }
    let mut out = vec![Scalar::zero(); m];
    for (row, &p) in pivots.iter().enumerate() {
        out[p] = red.get(row, m).clone();
    }
    Some(out)
}

/// Places a three-dimensional solvable Lie algebra in Jacobson's list.
pub fn classify_lie(s: &StructureConstants<Scalar>) -> Result<LieClass, AlgebraError> {
    let n = s.dim();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if s.get(i, j, k).add(s.get(j, i, k)).is_zero() {
                    continue;
                }
                return Err(AlgebraError::NotLie(format!("bracket not antisymmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    let e: Vec<Vec<Scalar>> = (0..n).map(|i| basis(n, i)).collect();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = bracket(s, &e[i], &bracket(s, &e[j], &e[k]));
                let b = bracket(s, &e[j], &bracket(s, &e[k], &e[i]));
                let c = bracket(s, &e[k], &bracket(s, &e[i], &e[j]));
                if a.iter().zip(&b).zip(&c).any(|((a, b), c)| !a.add(b).add(c).is_zero()) {
                    return Err(AlgebraError::NotLie(format!(
                        "Jacobi fails on ({}, {}, {})",
                        i + 1,
                        j + 1,
                        k + 1
                    )));
                }
            }
        }
    }
    if n != 3 {
        return Err(AlgebraError::Unsupported(format!("Lie classification needs dimension 3, got {n}")));
    }
    if s.entries().iter().all(Ring::is_zero) {
        return Ok(LieClass::Abelian);
    }
    let products: Vec<Vec<Scalar>> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| bracket(s, &e[i], &e[j])).collect();
    let span = Matrix::from_fn(n, products.len(), |r, c| products[c][r].clone());
    let (red, pivots) = span.rref();
    let derived: Vec<Vec<Scalar>> = pivots.iter().map(|&c| products[c].clone()).collect();
    drop(red);
    match derived.len() {
        1 => {
            let z = &derived[0];
            let central = e.iter().all(|x| bracket(s, z, x).iter().all(Ring::is_zero));
            Ok(if central { LieClass::HeisenbergN3 } else { LieClass::R2PlusC })
        }
        2 => {
            if bracket(s, &derived[0], &derived[1]).iter().any(|v| !v.is_zero()) {
                return Err(AlgebraError::Unsupported("derived algebra is not abelian".into()));
            }
            let x = e
                .iter()
                .find(|v| coords(&derived, v).is_none())
                .expect("a basis vector lies outside a plane");
            let cols: Vec<Vec<Scalar>> = derived
                .iter()
                .map(|w| coords(&derived, &bracket(s, x, w)).expect("derived algebra is an ideal"))
                .collect();
            let m = Matrix::from_fn(2, 2, |r, c| cols[c][r].clone());
            let tau = m.trace();
            let delta = m.det().expect("square");
            if delta.is_zero() {
                return Err(AlgebraError::Unsupported("degenerate adjoint action".into()));
            }
            let disc = tau.mul(&tau).sub(&delta.mul(&Scalar::from(4)));
            let scalar_action = m.get(0, 1).is_zero() && m.get(1, 0).is_zero() && m.get(0, 0) == m.get(1, 1);
            if disc.is_zero() && !scalar_action {
                return Ok(LieClass::R3);
            }
            let kappa = tau.mul(&tau).div(&delta).expect("nonzero").sub(&Scalar::from(2));
            Ok(LieClass::R3Lambda { lambda: LambdaPair::from_kappa(kappa) })
        }
        d => Err(AlgebraError::Unsupported(format!("derived algebra of dimension {d} is not solvable"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lie(n: usize, brackets: &[(usize, usize, usize, i64)]) -> StructureConstants<Scalar> {
        let mut s = StructureConstants::zero(n);
        for &(i, j, k, v) in brackets {
            s.set(i - 1, j - 1, k - 1, Scalar::from(v));
            s.set(j - 1, i - 1, k - 1, Scalar::from(-v));
        }
        s
    }

    #[test]
    fn jacobson_list() {
        assert_eq!(classify_lie(&lie(3, &[])).unwrap(), LieClass::Abelian);
        assert_eq!(classify_lie(&lie(3, &[(1, 2, 3, 1)])).unwrap(), LieClass::HeisenbergN3);
        assert_eq!(classify_lie(&lie(3, &[(1, 2, 2, 1)])).unwrap(), LieClass::R2PlusC);
        assert_eq!(classify_lie(&lie(3, &[(1, 2, 2, 1), (1, 3, 3, 1), (1, 3, 2, 1)])).unwrap(), LieClass::R3);
        let r = classify_lie(&lie(3, &[(1, 2, 2, 1), (1, 3, 3, 2)])).unwrap();
        let half = LieClass::R3Lambda { lambda: LambdaPair::from_lambda(&Scalar::ratio(1, 2).unwrap()).unwrap() };
        assert_eq!(r, half);
        assert_eq!(r.to_string(), "r3,{1/2, 2}");
    }

    #[test]
    fn non_lie_inputs() {
        let mut s = StructureConstants::zero(3);
        s.set(0, 0, 1, Scalar::one());
        assert!(matches!(classify_lie(&s), Err(AlgebraError::NotLie(_))));
        let sl2 = lie(3, &[(1, 2, 3, 1), (3, 1, 1, 2), (3, 2, 2, -2)]);
        assert!(matches!(classify_lie(&sl2), Err(AlgebraError::Unsupported(_))));
    }

    #[test]
    fn degeneration_order() {
        use LieClass::*;
        let one = R3Lambda { lambda: LambdaPair::from_lambda(&Scalar::one()).unwrap() };
        let two = R3Lambda { lambda: LambdaPair::from_lambda(&Scalar::from(2)).unwrap() };
        assert!(R3.degenerates_to(&one));
        assert!(!two.degenerates_to(&one));
        assert!(two.degenerates_to(&HeisenbergN3));
        assert!(!one.degenerates_to(&HeisenbergN3));
        assert!(R2PlusC.degenerates_to(&HeisenbergN3));
        assert!(!HeisenbergN3.degenerates_to(&R2PlusC));
        assert!(one.degenerates_to(&Abelian));
    }

    #[test]
    fn pair_members() {
        let p = LambdaPair::from_lambda(&Scalar::i()).unwrap();
        assert!(p.contains(&Scalar::i().neg()));
        assert_eq!(p.kappa(), &Scalar::zero());
        let q = LambdaPair::from_kappa(Scalar::from(3));
        assert_eq!(q.members(), None);
    }
}
