//! Dense matrices over an exact field.

use alloc::vec;
use alloc::vec::Vec;

use crate::coeff::{RatFun, Q};

pub type Matrix<F> = Vec<Vec<F>>;

/// The handful of field operations the matrix routines need.
pub trait FieldElem: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    /// Caller guarantees `rhs` is nonzero.
    fn div(&self, rhs: &Self) -> Self;
}

impl FieldElem for RatFun {
    fn zero() -> Self {
        RatFun::zero()
    }
    fn one() -> Self {
        RatFun::one()
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self.checked_div(rhs).expect("nonzero divisor")
    }
}

impl FieldElem for Q {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }
}

pub fn identity<F: FieldElem>(n: usize) -> Matrix<F> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { F::one() } else { F::zero() }).collect())
        .collect()
}

pub fn transpose<F: FieldElem>(m: &[Vec<F>]) -> Matrix<F> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| (0..rows).map(|i| m[i][j].clone()).collect()).collect()
}

pub fn mat_mul<F: FieldElem>(a: &[Vec<F>], b: &[Vec<F>]) -> Matrix<F> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(F::zero(), |acc, k| {
                        if row[k].is_zero() || b[k][j].is_zero() {
                            acc
                        } else {
                            acc.add(&row[k].mul(&b[k][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<F: FieldElem>(a: &[Vec<F>], v: &[F]) -> Vec<F> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(F::zero(), |acc, (x, y)| acc.add(&x.mul(y))))
        .collect()
}

/// Determinant by Gaussian elimination with nonzero pivoting.
pub fn determinant<F: FieldElem>(m: &[Vec<F>]) -> F {
    let n = m.len();
    let mut a: Matrix<F> = m.to_vec();
    let mut det = F::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&r| !a[r][k].is_zero()) else {
            return F::zero();
        };
        if p != k {
            a.swap(p, k);
            det = F::zero().sub(&det);
        }
        let pivot = a[k][k].clone();
        det = det.mul(&pivot);
        for r in k + 1..n {
            if a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].div(&pivot);
            for c in k..n {
                let v = a[r][c].sub(&f.mul(&a[k][c]));
                a[r][c] = v;
            }
        }
    }
    det
}

/// Gauss-Jordan inverse; `None` when the matrix is singular.
pub fn inverse<F: FieldElem>(m: &[Vec<F>]) -> Option<Matrix<F>> {
    let n = m.len();
    let mut a: Matrix<F> = m.to_vec();
    let mut inv: Matrix<F> = identity(n);
    for k in 0..n {
        let p = (k..n).find(|&r| !a[r][k].is_zero())?;
        a.swap(p, k);
        inv.swap(p, k);
        let pivot = a[k][k].clone();
        for c in 0..n {
            a[k][c] = a[k][c].div(&pivot);
            inv[k][c] = inv[k][c].div(&pivot);
        }
        for r in 0..n {
            if r == k || a[r][k].is_zero() {
                continue;
            }
            let f = a[r][k].clone();
            for c in 0..n {
                let v = a[r][c].sub(&f.mul(&a[k][c]));
                a[r][c] = v;
                let w = inv[r][c].sub(&f.mul(&inv[k][c]));
                inv[r][c] = w;
            }
        }
    }
    Some(inv)
}

pub fn zeros<F: FieldElem>(rows: usize, cols: usize) -> Matrix<F> {
    vec![vec![F::zero(); cols]; rows]
}
