//! Polynomials, rational functions in the contraction parameter `t`, and the
//! expression language used by the catalog.

mod expr;
mod mpoly;
mod ratfun;
mod upoly;

use thiserror::Error;

use crate::exactnum::DivisionByZero;

pub use expr::{parse_expr, Expr, ExprError};
pub use mpoly::{MPoly, PolyRing};
pub use ratfun::RatFun;
pub use upoly::UPoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SymError {
    #[error("polynomials belong to different rings")]
    VariableMismatch,
    #[error("pole at t = 0")]
    PoleAtZero,
    #[error("division by zero")]
    DivisionByZero,
}

impl From<DivisionByZero> for SymError {
    fn from(_: DivisionByZero) -> Self {
        SymError::DivisionByZero
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use proptest::prelude::*;

    use super::*;
    use crate::exactnum::{Field, Rational, Ring, Scalar};

    type R = RatFun<Scalar>;

    fn poly(c: &[i64]) -> UPoly<Scalar> {
        UPoly::from_coeffs(c.iter().map(|&k| Scalar::from(k)).collect())
    }

    fn rat(n: &[i64], d: &[i64]) -> R {
        RatFun::new(poly(n), poly(d)).unwrap()
    }

    #[test]
    fn limits() {
        assert_eq!(rat(&[0, 3, 1], &[0, 1]).limit_at_zero().unwrap(), Scalar::from(3));
        assert_eq!(rat(&[0, 1], &[0, 1]).limit_at_zero().unwrap(), Scalar::one());
        assert_eq!(rat(&[1], &[0, 1]).limit_at_zero(), Err(SymError::PoleAtZero));
    }

    #[test]
    fn canonical_denominator() {
        let f = rat(&[2, 2], &[4, 0, -4]);
        assert_eq!(f.den().lead(), Some(&Scalar::one()));
        assert_eq!(f, rat(&[-1], &[-2, 2]));
        assert_eq!(f.ord_at_zero(), Some(0));
        assert_eq!(rat(&[0, 0, 1], &[0, 0, 0, 0, 1]).ord_at_zero(), Some(-2));
    }

    fn arb_poly() -> impl Strategy<Value = UPoly<Scalar>> {
        prop::collection::vec((-6i64..6, 1i64..4), 0..4).prop_map(|v| {
            UPoly::from_coeffs(
                v.into_iter().map(|(a, b)| Scalar::from(Rational::new(a, b).unwrap())).collect(),
            )
        })
    }

    fn arb_nonzero() -> impl Strategy<Value = UPoly<Scalar>> {
        arb_poly().prop_filter("nonzero", |p| !p.is_zero())
    }

    proptest! {
        #[test]
        fn common_factor_cancels(p in arb_poly(), q in arb_nonzero(), r in arb_nonzero()) {
            let a = RatFun::new(p.mul(&r), q.mul(&r)).unwrap();
            let b = RatFun::new(p, q).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn limit_is_additive(p in arb_poly(), q in arb_nonzero(), r in arb_poly(), s in arb_nonzero()) {
            let f = RatFun::new(p, q).unwrap();
            let g = RatFun::new(r, s).unwrap();
            if let (Ok(a), Ok(b)) = (f.limit_at_zero(), g.limit_at_zero()) {
                prop_assert_eq!(f.add(&g).limit_at_zero().unwrap(), a.add(&b));
            }
        }

        #[test]
        fn print_then_parse(p in arb_poly(), q in arb_nonzero()) {
            let f = RatFun::new(p, q).unwrap();
            let e = parse_expr(&f.to_string(), &["t"]).unwrap();
            prop_assert_eq!(e.to_ratfun::<Scalar>(&BTreeMap::new()).unwrap(), f);
        }

        #[test]
        fn inverse_law(p in arb_nonzero(), q in arb_nonzero()) {
            let f = RatFun::new(p, q).unwrap();
            prop_assert!(f.mul(&f.inv().unwrap()).is_one());
        }
    }
}
