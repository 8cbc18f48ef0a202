//! Exact arithmetic: rationals, rational linear algebra, and numbers of the
//! form `a + b√r` used for half-integer powers of the PEPS bond dimension.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `base^exp` as an exact rational.
pub fn q_pow(base: u64, exp: usize) -> Q {
    Q::from_integer(num_traits::pow(BigInt::from(base), exp))
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // fall back for huge numerators and denominators
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// The exact rational value of a finite double.
pub fn q_from_f64(x: f64) -> Option<Q> {
    Q::from_float(x)
}

/// Numerator/denominator pair as decimal strings, for JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: String,
    pub denominator: String,
}

impl From<&Q> for Fraction {
    fn from(x: &Q) -> Self {
        Self {
            numerator: x.numer().to_string(),
            denominator: x.denom().to_string(),
        }
    }
}

impl Fraction {
    pub fn to_q(&self) -> Option<Q> {
        let n: BigInt = self.numerator.parse().ok()?;
        let d: BigInt = self.denominator.parse().ok()?;
        (!d.is_zero()).then(|| Q::new(n, d))
    }
}

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Q::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Q::one();
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(Q::zero(), |acc, j| acc + self.get(i, j) * &v[j]))
            .collect()
    }

    /// Reduced row echelon form in place; returns pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(p * self.cols + j, row * self.cols + j);
            }
            let inv = self.get(row, col).recip();
            for j in 0..self.cols {
                let v = self.get(row, j) * &inv;
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r == row || self.get(r, col).is_zero() {
                    continue;
                }
                let f = self.get(r, col).clone();
                for j in 0..self.cols {
                    let v = self.get(r, j) - &f * self.get(row, j);
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Exact inverse, `None` when singular.
    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Q::one());
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Solves `self · x = b` exactly, `None` when singular.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        let inv = self.inverse()?;
        Some(inv.mul_vec(b))
    }

    /// Basis of the column space (a subset of the columns).
    pub fn column_space(&self) -> Vec<Vec<Q>> {
        let mut m = self.clone();
        let pivots = m.rref();
        pivots
            .iter()
            .map(|&c| (0..self.rows).map(|r| self.get(r, c).clone()).collect())
            .collect()
    }

    /// Basis of the null space.
    pub fn null_space(&self) -> Vec<Vec<Q>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Q::zero(); self.cols];
                v[f] = Q::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m.get(r, f).clone();
                }
                v
            })
            .collect()
    }
}

/// Exact number `rat + irr·√radicand` with a fixed non-square radicand, or a
/// plain rational when the radicand is a perfect square (then `irr` stays 0).
#[derive(Clone, Debug)]
pub struct Surd {
    pub rat: Q,
    pub irr: Q,
    pub radicand: u64,
}

impl Surd {
    pub fn rational(x: Q) -> Self {
        Self {
            rat: x,
            irr: Q::zero(),
            radicand: 1,
        }
    }

    /// `radicand^{n/2}`; rational whenever `radicand` is a perfect square.
    pub fn sqrt_power(radicand: u64, n: usize) -> Self {
        let root = radicand.sqrt();
        if root * root == radicand {
            return Self::rational(q_pow(root, n));
        }
        let whole = q_pow(radicand, n / 2);
        if n.is_multiple_of(2) {
            Self {
                rat: whole,
                irr: Q::zero(),
                radicand,
            }
        } else {
            Self {
                rat: Q::zero(),
                irr: whole,
                radicand,
            }
        }
    }

    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.is_rational().then_some(&self.rat)
    }

    pub fn to_f64(&self) -> f64 {
        if self.irr.is_zero() {
            q_to_f64(&self.rat)
        } else {
            q_to_f64(&self.rat) + q_to_f64(&self.irr) * (self.radicand as f64).sqrt()
        }
    }

    fn merge_radicand(a: u64, b: u64, a_irr: &Q, b_irr: &Q) -> u64 {
        match (a_irr.is_zero(), b_irr.is_zero()) {
            (true, _) => b,
            (_, true) => a,
            _ => {
                assert_eq!(a, b, "surds with different radicands cannot be combined");
                a
            }
        }
    }
}

impl PartialEq for Surd {
    fn eq(&self, o: &Self) -> bool {
        self.rat == o.rat && self.irr == o.irr && (self.irr.is_zero() || self.radicand == o.radicand)
    }
}

impl Eq for Surd {}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.irr.is_zero() {
            write!(f, "{}", self.rat)
        } else if self.rat.is_zero() {
            write!(f, "({})·√{}", self.irr, self.radicand)
        } else {
            write!(f, "{} + ({})·√{}", self.rat, self.irr, self.radicand)
        }
    }
}

impl Add for &Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        Surd {
            radicand: Surd::merge_radicand(self.radicand, o.radicand, &self.irr, &o.irr),
            rat: &self.rat + &o.rat,
            irr: &self.irr + &o.irr,
        }
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        Surd {
            radicand: Surd::merge_radicand(self.radicand, o.radicand, &self.irr, &o.irr),
            rat: &self.rat - &o.rat,
            irr: &self.irr - &o.irr,
        }
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        if self.irr.is_zero() && o.irr.is_zero() {
            return Surd::rational(&self.rat * &o.rat);
        }
        let r = Surd::merge_radicand(self.radicand, o.radicand, &self.irr, &o.irr);
        let rr = Q::from_integer(BigInt::from(r));
        Surd {
            rat: &self.rat * &o.rat + &self.irr * &o.irr * rr,
            irr: &self.rat * &o.irr + &self.irr * &o.rat,
            radicand: r,
        }
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            rat: -self.rat.clone(),
            irr: -self.irr.clone(),
            radicand: self.radicand,
        }
    }
}

/// Arithmetic shared by the exact and floating evaluation paths.
pub trait Scalar: Clone + Send + Sync + fmt::Debug {
    fn s_zero() -> Self;
    fn s_one() -> Self;
    fn s_add(&self, o: &Self) -> Self;
    fn s_mul(&self, o: &Self) -> Self;
    fn s_is_zero(&self) -> bool;
    fn from_q(x: &Q) -> Self;
    fn from_surd(x: &Surd) -> Self;
    fn to_c64(&self) -> Complex64;

    fn add_assign_prod(&mut self, a: &Self, b: &Self) {
        if !a.s_is_zero() && !b.s_is_zero() {
            *self = self.s_add(&a.s_mul(b));
        }
    }
}

impl Scalar for Q {
    fn s_zero() -> Self {
        Zero::zero()
    }
    fn s_one() -> Self {
        One::one()
    }
    fn s_add(&self, o: &Self) -> Self {
        self + o
    }
    fn s_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn s_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    /// Panics on an irrational input: callers only convert surds into
    /// rationals after checking [`Surd::is_rational`].
    fn from_surd(x: &Surd) -> Self {
        x.as_rational().expect("irrational surd in rational arithmetic").clone()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(q_to_f64(self), 0.0)
    }
    fn add_assign_prod(&mut self, a: &Self, b: &Self) {
        if !Zero::is_zero(a) && !Zero::is_zero(b) {
            *self += a * b;
        }
    }
}

impl Scalar for Surd {
    fn s_zero() -> Self {
        Surd::rational(Q::zero())
    }
    fn s_one() -> Self {
        Surd::rational(Q::one())
    }
    fn s_add(&self, o: &Self) -> Self {
        self + o
    }
    fn s_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn s_is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }
    fn from_q(x: &Q) -> Self {
        Surd::rational(x.clone())
    }
    fn from_surd(x: &Surd) -> Self {
        x.clone()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.to_f64(), 0.0)
    }
}

impl Scalar for Complex64 {
    fn s_zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn s_one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn s_add(&self, o: &Self) -> Self {
        self + o
    }
    fn s_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn s_is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_q(x: &Q) -> Self {
        Complex64::new(q_to_f64(x), 0.0)
    }
    fn from_surd(x: &Surd) -> Self {
        Complex64::new(x.to_f64(), 0.0)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn add_assign_prod(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl AddAssign<&Surd> for Surd {
    fn add_assign(&mut self, o: &Surd) {
        *self = &*self + o;
    }
}

/// `|x|` for rationals, used in reports.
pub fn q_abs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_small_matrix() {
        let mut m = RatMatrix::zeros(2, 2);
        m.set(0, 0, q_int(4));
        m.set(0, 1, q_int(2));
        m.set(1, 0, q_int(2));
        m.set(1, 1, q_int(4));
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMatrix::identity(2));
        assert_eq!(*inv.get(0, 0), q_frac(1, 3));
    }

    #[test]
    fn null_and_column_space_dimensions() {
        let mut m = RatMatrix::zeros(3, 3);
        for j in 0..3 {
            m.set(0, j, q_int(1));
            m.set(1, j, q_int(2));
        }
        assert_eq!(m.column_space().len(), 1);
        let ns = m.null_space();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn surd_powers_multiply_back() {
        let s = Surd::sqrt_power(3, 1);
        assert_eq!(&s * &s, Surd::rational(q_int(3)));
        assert_eq!(Surd::sqrt_power(4, 3), Surd::rational(q_int(8)));
        assert!((Surd::sqrt_power(2, 3).to_f64() - 2f64.powf(1.5)).abs() < 1e-14);
    }
}
