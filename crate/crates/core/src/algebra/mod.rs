//! Algebras given by structure constants and the invariants used to separate them.

mod lie;
mod opexpr;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{Field, Ring, Scalar};
use crate::linalg::{LinalgError, Matrix};
use crate::symring::{MPoly, PolyRing};

pub use lie::{classify_lie, LambdaPair, LieClass};
pub use opexpr::{Op, OpExpr, OpMonomial, WordCache};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("algebra is not Novikov")]
    NotNovikov,
    #[error("not a Lie algebra: {0}")]
    NotLie(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("tensor has {got} entries, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Multiplication table `e_i * e_j = sum_k c[i][j][k] e_k`, indices from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants<F = Scalar> {
    dim: usize,
    c: Vec<F>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NovikovIdentity {
    /// `(xy)z - x(yz) = (yx)z - y(xz)`
    LeftSymmetric,
    /// `(xy)z = (xz)y`
    RightCommutative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub identity: NovikovIdentity,
    /// One-based basis indices.
    pub triple: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    /// Built from left multiplications.
    C,
    /// Built from right multiplications.
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Associated<F = Scalar> {
    pub lie: StructureConstants<F>,
    pub jordan: StructureConstants<F>,
    pub jordan_associative: bool,
}

impl<F: Ring> StructureConstants<F> {
    pub fn zero(dim: usize) -> Self {
        StructureConstants { dim, c: vec![F::zero(); dim * dim * dim] }
    }

    pub fn new(dim: usize, c: Vec<F>) -> Result<Self, AlgebraError> {
        let expected = dim * dim * dim;
        if c.len() != expected {
            return Err(AlgebraError::Shape { expected, got: c.len() });
        }
        Ok(StructureConstants { dim, c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &F {
        &self.c[self.idx(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: F) {
        let at = self.idx(i, j, k);
        self.c[at] = v;
    }

    /// Flat tensor in `(i*dim + j)*dim + k` order.
    pub fn entries(&self) -> &[F] {
        &self.c
    }

    pub fn map<G: Ring>(&self, f: impl Fn(&F) -> G) -> StructureConstants<G> {
        StructureConstants { dim: self.dim, c: self.c.iter().map(f).collect() }
    }

    pub fn try_map<G: Ring, E>(&self, f: impl Fn(&F) -> Result<G, E>) -> Result<StructureConstants<G>, E> {
        Ok(StructureConstants { dim: self.dim, c: self.c.iter().map(f).collect::<Result<_, _>>()? })
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Ring::is_zero)
    }

    /// Product of two coordinate vectors.
    pub fn product(&self, x: &[F], y: &[F]) -> Vec<F> {
        let n = self.dim;
        let mut out = vec![F::zero(); n];
        for (i, xi) in x.iter().enumerate().take(n) {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate().take(n) {
                if yj.is_zero() {
                    continue;
                }
                let xy = xi.mul(yj);
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.get(i, j, k);
                    if !c.is_zero() {
                        *o = o.add(&xy.mul(c));
                    }
                }
            }
        }
        out
    }

    fn basis_vec(&self, i: usize) -> Vec<F> {
        (0..self.dim).map(|k| if k == i { F::one() } else { F::zero() }).collect()
    }

    /// Basis triples on which either defining identity fails.
    pub fn check_novikov(&self) -> Vec<Violation> {
        let n = self.dim;
        let e: Vec<Vec<F>> = (0..n).map(|i| self.basis_vec(i)).collect();
        let prods: Vec<Vec<Vec<F>>> =
            (0..n).map(|i| (0..n).map(|j| self.product(&e[i], &e[j])).collect()).collect();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let xy_z = self.product(&prods[x][y], &e[z]);
                    let x_yz = self.product(&e[x], &prods[y][z]);
                    let yx_z = self.product(&prods[y][x], &e[z]);
                    let y_xz = self.product(&e[y], &prods[x][z]);
                    let lhs = sub_vec(&xy_z, &x_yz);
                    let rhs = sub_vec(&yx_z, &y_xz);
                    if lhs != rhs {
                        out.push(Violation { identity: NovikovIdentity::LeftSymmetric, triple: [x + 1, y + 1, z + 1] });
                    }
                    let xz_y = self.product(&prods[x][z], &e[y]);
                    if xy_z != xz_y {
                        out.push(Violation {
                            identity: NovikovIdentity::RightCommutative,
                            triple: [x + 1, y + 1, z + 1],
                        });
                    }
                }
            }
        }
        out
    }

    pub fn is_novikov(&self) -> bool {
        self.check_novikov().is_empty()
    }

    /// Commutator and anticommutator algebras.
    pub fn associated_algebras(&self) -> Associated<F> {
        let n = self.dim;
        let mut lie = Self::zero(n);
        let mut jordan = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b) = (self.get(i, j, k), self.get(j, i, k));
                    lie.set(i, j, k, a.sub(b));
                    jordan.set(i, j, k, a.add(b));
                }
            }
        }
        let jordan_associative = jordan.is_associative();
        Associated { lie, jordan, jordan_associative }
    }

    pub fn is_associative(&self) -> bool {
        let n = self.dim;
        let e: Vec<Vec<F>> = (0..n).map(|i| self.basis_vec(i)).collect();
        (0..n).all(|x| {
            (0..n).all(|y| {
                (0..n).all(|z| {
                    let xy = self.product(&e[x], &e[y]);
                    let yz = self.product(&e[y], &e[z]);
                    self.product(&xy, &e[z]) == self.product(&e[x], &yz)
                })
            })
        })
    }

    /// Left and right multiplication by a concrete vector.
    pub fn multiplication_operators(&self, x: &[F]) -> (Matrix<F>, Matrix<F>) {
        let n = self.dim;
        let l = Matrix::from_fn(n, n, |k, j| {
            (0..n).fold(F::zero(), |acc, i| acc.add(&x[i].mul(self.get(i, j, k))))
        });
        let r = Matrix::from_fn(n, n, |k, i| {
            (0..n).fold(F::zero(), |acc, j| acc.add(&x[j].mul(self.get(i, j, k))))
        });
        (l, r)
    }

    /// `h . mu`, i.e. `(x, y) -> h mu(h^-1 x, h^-1 y)`, given `h` together with its inverse.
    pub fn transport_with_inverse(&self, h: &Matrix<F>, h_inv: &Matrix<F>) -> Result<Self, AlgebraError> {
        let n = self.dim;
        for m in [h, h_inv] {
            if m.rows() != n || m.cols() != n {
                return Err(LinalgError::Shape(format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols())).into());
            }
        }
        let at = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        let mut first = vec![F::zero(); n * n * n];
        for i in 0..n {
            for q in 0..n {
                for m in 0..n {
                    let mut acc = F::zero();
                    for p in 0..n {
                        let g = h_inv.get(p, i);
                        let c = self.get(p, q, m);
                        if !g.is_zero() && !c.is_zero() {
                            acc = acc.add(&g.mul(c));
                        }
                    }
                    first[at(i, q, m)] = acc;
                }
            }
        }
        let mut second = vec![F::zero(); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    let mut acc = F::zero();
                    for q in 0..n {
                        let g = h_inv.get(q, j);
                        let c = &first[at(i, q, m)];
                        if !g.is_zero() && !c.is_zero() {
                            acc = acc.add(&g.mul(c));
                        }
                    }
                    second[at(i, j, m)] = acc;
                }
            }
        }
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = F::zero();
                    for m in 0..n {
                        let g = h.get(k, m);
                        let c = &second[at(i, j, m)];
                        if !g.is_zero() && !c.is_zero() {
                            acc = acc.add(&g.mul(c));
                        }
                    }
                    out.set(i, j, k, acc);
                }
            }
        }
        Ok(out)
    }
}

impl<F: Ring + std::fmt::Display> std::fmt::Display for StructureConstants<F> {
    /// Nonzero products, e.g. `e1*e2 = 1/2*e3, e2*e1 = -1/2*e3`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let n = self.dim;
        let mut parts = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let terms: Vec<String> = (0..n)
                    .filter(|&k| !self.get(i, j, k).is_zero())
                    .map(|k| {
                        let c = self.get(i, j, k);
                        if c.is_one() {
                            format!("e{}", k + 1)
                        } else {
                            format!("({c})*e{}", k + 1)
                        }
                    })
                    .collect();
                if !terms.is_empty() {
                    parts.push(format!("e{}*e{} = {}", i + 1, j + 1, terms.join(" + ")));
                }
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(", "))
        }
    }
}

fn sub_vec<F: Ring>(a: &[F], b: &[F]) -> Vec<F> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

impl<F: Field> StructureConstants<F> {
    pub fn transport(&self, h: &Matrix<F>) -> Result<Self, AlgebraError> {
        let inv = h.invert()?;
        self.transport_with_inverse(h, &inv)
    }

    /// Dimension of the space of `(alpha, beta, gamma)`-derivations.
    pub fn derivation_dim(&self, alpha: &F, beta: &F, gamma: &F) -> usize {
        let n = self.dim;
        let var = |row: usize, col: usize| row * n + col;
        let mut rows = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut eq = vec![F::zero(); n * n];
                    for p in 0..n {
                        let c = self.get(i, j, p);
                        if !c.is_zero() {
                            let v = var(k, p);
                            eq[v] = eq[v].add(&alpha.mul(c));
                        }
                    }
                    for m in 0..n {
                        let c = self.get(m, j, k);
                        if !c.is_zero() {
                            let v = var(m, i);
                            eq[v] = eq[v].sub(&beta.mul(c));
                        }
                        let c = self.get(i, m, k);
                        if !c.is_zero() {
                            let v = var(m, j);
                            eq[v] = eq[v].sub(&gamma.mul(c));
                        }
                    }
                    rows.push(eq);
                }
            }
        }
        n * n - Matrix::from_rows(rows).expect("rectangular").rank()
    }

    /// `(dim L, dim R)` for the left and right annihilators.
    pub fn annihilator_dims(&self) -> (usize, usize) {
        (self.annihilator_dim(Side::Left), self.annihilator_dim(Side::Right))
    }

    pub fn annihilator_dim(&self, side: Side) -> usize {
        let n = self.dim;
        let m = Matrix::from_fn(n * n, n, |row, col| {
            let (other, k) = (row / n, row % n);
            match side {
                Side::Left => self.get(col, other, k).clone(),
                Side::Right => self.get(other, col, k).clone(),
            }
        });
        n - m.rank()
    }

    pub fn square_dim(&self) -> usize {
        let n = self.dim;
        Matrix::from_fn(n * n, n, |row, k| self.get(row / n, row % n, k).clone()).rank()
    }
}

impl StructureConstants<Scalar> {
    /// One-based sparse table, mostly for tests and hand-built examples.
    pub fn from_table(dim: usize, entries: &[(usize, usize, usize, Scalar)]) -> Self {
        let mut s = Self::zero(dim);
        for (i, j, k, v) in entries {
            let cur = s.get(i - 1, j - 1, k - 1).add(v);
            s.set(i - 1, j - 1, k - 1, cur);
        }
        s
    }

    /// `L(x)` and `R(x)` with `x` given by variables `offset..offset+dim` of `ring`.
    pub fn operators_in(&self, ring: &Arc<PolyRing>, offset: usize) -> (Matrix<MPoly>, Matrix<MPoly>) {
        let x: Vec<MPoly> = (0..self.dim).map(|i| MPoly::var(ring, offset + i)).collect();
        self.map(|c| MPoly::constant(c.clone())).multiplication_operators(&x)
    }

    /// Symbolic `L(x)`, `R(x)` in variables `x1..x_dim`.
    pub fn left_right_operators(&self) -> (Matrix<MPoly>, Matrix<MPoly>) {
        let ring = PolyRing::new((1..=self.dim).map(|i| format!("x{i}")));
        self.operators_in(&ring, 0)
    }

    /// Whether every right multiplication is nilpotent, by expanding `R(x)^dim`.
    pub fn is_complete(&self) -> bool {
        let (_, r) = self.left_right_operators();
        r.pow(self.dim as u32).expect("square").is_zero()
    }

    /// Completeness via nilpotency of each `R(e_i)`, valid because right multiplications commute.
    pub fn is_complete_commuting(&self) -> Result<bool, AlgebraError> {
        if !self.is_novikov() {
            return Err(AlgebraError::NotNovikov);
        }
        Ok((0..self.dim).all(|i| {
            let (_, r) = self.multiplication_operators(&self.basis_vec(i));
            r.pow(self.dim as u32).expect("square").is_zero()
        }))
    }

    /// `c_{i,j}` or `d_{i,j}`; `None` when the defining proportionality fails.
    pub fn trace_invariant(&self, kind: TraceKind, i: u32, j: u32) -> Option<Scalar> {
        let n = self.dim;
        let ring = PolyRing::new((1..=n).map(|k| format!("x{k}")).chain((1..=n).map(|k| format!("y{k}"))));
        let pick = |(l, r): (Matrix<MPoly>, Matrix<MPoly>)| if kind == TraceKind::C { l } else { r };
        let mx = pick(self.operators_in(&ring, 0));
        let my = pick(self.operators_in(&ring, n));
        let (px, tx) = mx.power_trace(i).expect("square");
        let (py, ty) = my.power_trace(j).expect("square");
        let p = px.mul(&py).expect("square").trace();
        if p.is_zero() {
            return None;
        }
        tx.mul(&ty).proportionality(&p)
    }

    pub fn operator_matrix(&self, t: &OpExpr) -> Matrix<MPoly> {
        let (l, r) = self.left_right_operators();
        t.evaluate(&l, &r)
    }

    /// Whether `T(x) = 0` identically in `x`.
    pub fn check_operator_identity(&self, t: &OpExpr) -> bool {
        self.operator_matrix(t).is_zero()
    }

    /// Whether `det T(x) = 0` identically in `x`.
    pub fn check_determinant_identity(&self, t: &OpExpr) -> bool {
        self.operator_matrix(t).det_expand().expect("square").is_zero()
    }

    pub fn lie_class(&self) -> Result<LieClass, AlgebraError> {
        classify_lie(&self.associated_algebras().lie)
    }
}

/// Whether `h` carries `a` onto `b` exactly.
pub fn verify_isomorphism(
    a: &StructureConstants<Scalar>,
    b: &StructureConstants<Scalar>,
    h: &Matrix<Scalar>,
) -> Result<bool, AlgebraError> {
    Ok(a.transport(h)? == *b)
}
