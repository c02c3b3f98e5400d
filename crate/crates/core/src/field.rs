//! Arithmetic in the prime field `Z_d` and polynomials over it.
//!
//! Every element carries its modulus so that values from different fields
//! cannot be mixed silently. The operator impls panic on a mismatch; the
//! `try_*` methods report it as [`Error::ModulusMismatch`].

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};

/// Deterministic primality test by trial division. Only used on moduli below
/// 2^32, where at most 65536 candidate divisors are tried.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut k = 3u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 2;
    }
    true
}

/// A validated odd prime modulus `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Field {
    d: u64,
}

impl Field {
    /// Products of two residues must fit in a `u64`, hence the 2^32 bound.
    pub const MAX_ORDER: u64 = u32::MAX as u64;

    pub fn new(d: u64) -> Result<Self> {
        if !(3..=Self::MAX_ORDER).contains(&d) || !is_prime(d) {
            return Err(Error::InvalidModulus(d));
        }
        Ok(Field { d })
    }

    pub fn order(self) -> u64 {
        self.d
    }

    /// The residue of `value` modulo `d`.
    pub fn elem(self, value: u64) -> Fe {
        Fe { value: value % self.d, modulus: self.d }
    }

    /// The residue of a signed integer.
    pub fn elem_signed(self, value: i64) -> Fe {
        let d = self.d as i64;
        Fe { value: value.rem_euclid(d) as u64, modulus: self.d }
    }

    pub fn zero(self) -> Fe {
        self.elem(0)
    }

    pub fn one(self) -> Fe {
        self.elem(1)
    }

    /// All residues `0, 1, ..., d-1` in order.
    pub fn elements(self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.d).map(move |v| self.elem(v))
    }

    pub fn random<R: Rng + ?Sized>(self, rng: &mut R) -> Fe {
        self.elem(rng.gen_range(0..self.d))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(self, rng: &mut R) -> Fe {
        self.elem(rng.gen_range(1..self.d))
    }

    /// Checks that `x` belongs to this field.
    pub fn check(self, x: Fe) -> Result<Fe> {
        if x.modulus != self.d {
            return Err(Error::ModulusMismatch { left: self.d, right: x.modulus });
        }
        Ok(x)
    }
}

/// A residue in `Z_d`, always stored in canonical form `0 <= value < d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe {
    value: u64,
    modulus: u64,
}

impl Fe {
    /// Builds an element after validating that `modulus` is an odd prime.
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        Ok(Field::new(modulus)?.elem(value))
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn field(self) -> Field {
        Field { d: self.modulus }
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, rhs: Fe) -> Result<u64> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch { left: self.modulus, right: rhs.modulus });
        }
        Ok(self.modulus)
    }

    pub fn try_add(self, rhs: Fe) -> Result<Fe> {
        let d = self.same_field(rhs)?;
        Ok(Fe { value: (self.value + rhs.value) % d, modulus: d })
    }

    pub fn try_sub(self, rhs: Fe) -> Result<Fe> {
        let d = self.same_field(rhs)?;
        Ok(Fe { value: (self.value + d - rhs.value) % d, modulus: d })
    }

    pub fn try_mul(self, rhs: Fe) -> Result<Fe> {
        let d = self.same_field(rhs)?;
        Ok(Fe { value: (self.value * rhs.value) % d, modulus: d })
    }

    pub fn pow(self, mut exp: u64) -> Fe {
        let d = self.modulus;
        let mut base = self.value;
        let mut acc = 1 % d;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % d;
            }
            base = base * base % d;
            exp >>= 1;
        }
        Fe { value: acc, modulus: d }
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for Fe {
    type Output = Fe;

    /// # Panics
    /// If the operands belong to different fields.
    fn add(self, rhs: Fe) -> Fe {
        self.try_add(rhs).expect("field element modulus mismatch")
    }
}

impl Sub for Fe {
    type Output = Fe;

    fn sub(self, rhs: Fe) -> Fe {
        self.try_sub(rhs).expect("field element modulus mismatch")
    }
}

impl Mul for Fe {
    type Output = Fe;

    fn mul(self, rhs: Fe) -> Fe {
        self.try_mul(rhs).expect("field element modulus mismatch")
    }
}

impl Neg for Fe {
    type Output = Fe;

    fn neg(self) -> Fe {
        Fe { value: (self.modulus - self.value) % self.modulus, modulus: self.modulus }
    }
}

/// Sums an iterator of elements of `field`; the empty sum is zero.
pub fn sum<I: IntoIterator<Item = Fe>>(field: Field, items: I) -> Fe {
    items.into_iter().fold(field.zero(), |acc, x| acc + x)
}

/// A polynomial in one variable, coefficient `i` multiplying `x^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnivariatePoly {
    field: Field,
    coeffs: Vec<Fe>,
}

impl UnivariatePoly {
    pub fn new(field: Field, coeffs: Vec<Fe>) -> Result<Self> {
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(UnivariatePoly { field, coeffs })
    }

    /// Convenience constructor from raw integers, reduced modulo `d`.
    pub fn from_values(field: Field, values: &[u64]) -> Self {
        UnivariatePoly { field, coeffs: values.iter().map(|&v| field.elem(v)).collect() }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Index of the highest nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Horner evaluation.
    pub fn eval(&self, x: Fe) -> Result<Fe> {
        self.field.check(x)?;
        Ok(self.coeffs.iter().rev().fold(self.field.zero(), |acc, &c| acc * x + c))
    }
}

/// `F(x, y) = sum a[i][j] x^i y^j` with `i < t` and `j < h`.
///
/// Coefficients are stored row-major: entry `(i, j)` lives at `i * h + j`.
/// Construction enforces `a[i][j] != a[j][i]` for every `i != j` with
/// `i, j < min(t, h)`, the only pairs for which both entries exist.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BivariatePoly {
    field: Field,
    t: usize,
    h: usize,
    coeffs: Vec<Fe>,
}

impl BivariatePoly {
    pub fn new(field: Field, t: usize, h: usize, coeffs: Vec<Fe>) -> Result<Self> {
        let poly = Self::new_unchecked(field, t, h, coeffs)?;
        poly.check_asymmetry()?;
        Ok(poly)
    }

    /// Builds the table without the asymmetry check (shape and moduli are
    /// still validated). Used by exhaustive searches that filter afterwards.
    pub fn new_unchecked(field: Field, t: usize, h: usize, coeffs: Vec<Fe>) -> Result<Self> {
        if coeffs.len() != t * h {
            return Err(Error::ShapeMismatch { expected: t * h, got: coeffs.len() });
        }
        for &c in &coeffs {
            field.check(c)?;
        }
        Ok(BivariatePoly { field, t, h, coeffs })
    }

    pub fn from_values(field: Field, t: usize, h: usize, values: &[u64]) -> Result<Self> {
        Self::new(field, t, h, values.iter().map(|&v| field.elem(v)).collect())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Number of powers of `x` (degree bound `t - 1`).
    pub fn t(&self) -> usize {
        self.t
    }

    /// Number of powers of `y` (degree bound `h - 1`).
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn coeff(&self, i: usize, j: usize) -> Fe {
        self.coeffs[i * self.h + j]
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// First index pair violating asymmetry, if any.
    pub fn check_asymmetry(&self) -> Result<()> {
        let k = self.t.min(self.h);
        for i in 0..k {
            for j in (i + 1)..k {
                if self.coeff(i, j) == self.coeff(j, i) {
                    return Err(Error::SymmetricCoefficients { i, j });
                }
            }
        }
        Ok(())
    }

    pub fn is_asymmetric(&self) -> bool {
        self.check_asymmetry().is_ok()
    }

    pub fn eval(&self, x: Fe, y: Fe) -> Result<Fe> {
        self.field.check(x)?;
        self.field.check(y)?;
        let mut acc = self.field.zero();
        let mut xi = self.field.one();
        for i in 0..self.t {
            let mut yj = self.field.one();
            for j in 0..self.h {
                acc = acc + self.coeff(i, j) * xi * yj;
                yj = yj * y;
            }
            xi = xi * x;
        }
        Ok(acc)
    }

    /// `F(x0, y)` as a polynomial in `y` with `h` coefficients.
    pub fn restrict_x(&self, x0: Fe) -> Result<UnivariatePoly> {
        self.field.check(x0)?;
        let coeffs = (0..self.h)
            .map(|j| {
                let column = (0..self.t).map(|i| self.coeff(i, j));
                UnivariatePoly { field: self.field, coeffs: column.collect() }.eval(x0)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UnivariatePoly { field: self.field, coeffs })
    }

    /// `F(x, y0)` as a polynomial in `x` with `t` coefficients.
    pub fn restrict_y(&self, y0: Fe) -> Result<UnivariatePoly> {
        self.field.check(y0)?;
        let coeffs = (0..self.t)
            .map(|i| {
                let row = self.coeffs[i * self.h..(i + 1) * self.h].to_vec();
                UnivariatePoly { field: self.field, coeffs: row }.eval(y0)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(UnivariatePoly { field: self.field, coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f7() -> Field {
        Field::new(7).unwrap()
    }

    /// 1 + 2x + 3y + 4xy over Z_7 (t = h = 2).
    fn sample_f() -> BivariatePoly {
        BivariatePoly::from_values(f7(), 2, 2, &[1, 3, 2, 4]).unwrap()
    }

    #[test]
    fn modulus_validation() {
        for d in [3, 5, 7, 11, 13, 65521] {
            assert!(Field::new(d).is_ok(), "{d}");
        }
        for d in [0, 1, 2, 4, 9, 15, 21, 65535] {
            assert_eq!(Field::new(d), Err(Error::InvalidModulus(d)));
        }
        assert!(Field::new(4_294_967_311).is_err());
    }

    #[test]
    fn basic_arithmetic() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.elem(3) + f5.elem(4), f5.elem(2));
        assert_eq!(f5.elem(0) - f5.elem(2), f5.elem(3));
        assert_eq!(f7().elem(3) * f7().elem(5), f7().elem(1));
        assert_eq!(-f5.elem(0), f5.elem(0));
        assert_eq!(-f5.elem(1), f5.elem(4));
        assert_eq!(f5.elem_signed(-6), f5.elem(4));
        assert_eq!(f7().elem(3).pow(6), f7().one());
    }

    #[test]
    fn mismatch_is_reported() {
        let a = Field::new(5).unwrap().elem(1);
        let b = f7().elem(1);
        assert_eq!(a.try_add(b), Err(Error::ModulusMismatch { left: 5, right: 7 }));
        assert!(a.try_sub(b).is_err());
        assert!(a.try_mul(b).is_err());
        let p = UnivariatePoly::from_values(f7(), &[1, 2]);
        assert!(p.eval(a).is_err());
    }

    #[test]
    #[should_panic(expected = "modulus mismatch")]
    fn operator_mismatch_panics() {
        let _ = Field::new(5).unwrap().elem(1) + f7().elem(1);
    }

    #[test]
    fn univariate_eval() {
        let p = UnivariatePoly::from_values(f7(), &[1, 2]);
        assert_eq!(p.eval(f7().elem(3)).unwrap(), f7().elem(0));
        let f5 = Field::new(5).unwrap();
        let sq = UnivariatePoly::from_values(f5, &[0, 0, 1]);
        assert_eq!(sq.eval(f5.elem(3)).unwrap(), f5.elem(4));
        let c = UnivariatePoly::from_values(f5, &[3]);
        for x in f5.elements() {
            assert_eq!(c.eval(x).unwrap(), f5.elem(3));
        }
        assert_eq!(sq.degree(), Some(2));
        assert_eq!(UnivariatePoly::from_values(f5, &[0, 0]).degree(), None);
    }

    #[test]
    fn bivariate_eval_and_restrictions() {
        let f = sample_f();
        let e = |v| f7().elem(v);
        assert_eq!(f.eval(e(2), e(3)).unwrap(), e(3));
        assert_eq!(f.eval(e(3), e(2)).unwrap(), e(2));
        assert_eq!(f.eval(e(0), e(0)).unwrap(), e(1));
        assert_eq!(f.restrict_x(e(2)).unwrap(), UnivariatePoly::from_values(f7(), &[5, 4]));
        assert_eq!(f.restrict_x(e(0)).unwrap(), UnivariatePoly::from_values(f7(), &[1, 3]));
        assert_eq!(f.restrict_y(e(0)).unwrap(), UnivariatePoly::from_values(f7(), &[1, 2]));
    }

    #[test]
    fn asymmetry_enforced() {
        // a01 = a10 = 2
        let err = BivariatePoly::from_values(f7(), 2, 2, &[1, 2, 2, 4]).unwrap_err();
        assert_eq!(err, Error::SymmetricCoefficients { i: 0, j: 1 });
        // rectangular t=2, h=3: only (0,1)/(1,0) is constrained
        let ok = BivariatePoly::from_values(f7(), 2, 3, &[1, 2, 5, 3, 4, 5]).unwrap();
        assert!(ok.is_asymmetric());
        let unchecked =
            BivariatePoly::new_unchecked(f7(), 2, 2, [1, 2, 2, 4].map(|v| f7().elem(v)).to_vec())
                .unwrap();
        assert!(!unchecked.is_asymmetric());
        assert_eq!(
            BivariatePoly::from_values(f7(), 2, 3, &[1, 2]).unwrap_err(),
            Error::ShapeMismatch { expected: 6, got: 2 }
        );
    }

    #[test]
    fn restrict_then_eval_exhaustive_d3() {
        let f3 = Field::new(3).unwrap();
        // every 2 x 3 table over Z_3
        for code in 0..3u64.pow(6) {
            let vals: Vec<u64> = (0..6).map(|k| code / 3u64.pow(k) % 3).collect();
            let f = BivariatePoly::new_unchecked(f3, 2, 3, vals.iter().map(|&v| f3.elem(v)).collect())
                .unwrap();
            for a in f3.elements() {
                let rx = f.restrict_x(a).unwrap();
                let ry = f.restrict_y(a).unwrap();
                for b in f3.elements() {
                    assert_eq!(rx.eval(b).unwrap(), f.eval(a, b).unwrap());
                    assert_eq!(ry.eval(b).unwrap(), f.eval(b, a).unwrap());
                }
            }
        }
    }

    fn field_and_triple() -> impl Strategy<Value = (u64, u64, u64, u64)> {
        prop::sample::select(alloc::vec![3u64, 5, 7, 11])
            .prop_flat_map(|d| (Just(d), 0..d, 0..d, 0..d))
    }

    proptest! {
        #[test]
        fn field_axioms((d, a, b, c) in field_and_triple()) {
            let f = Field::new(d).unwrap();
            let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a + f.zero(), a);
            prop_assert_eq!(a * f.one(), a);
            prop_assert_eq!(a + (-a), f.zero());
            prop_assert_eq!(a - b, a + (-b));
            if !a.is_zero() {
                prop_assert_eq!(a * a.pow(d - 2), f.one());
            }
        }

        #[test]
        fn restriction_matches_eval(
            vals in prop::collection::vec(0u64..11, 12),
            a in 0u64..11,
            b in 0u64..11,
        ) {
            let f11 = Field::new(11).unwrap();
            let f = BivariatePoly::new_unchecked(f11, 3, 4, vals.iter().map(|&v| f11.elem(v)).collect()).unwrap();
            let (a, b) = (f11.elem(a), f11.elem(b));
            prop_assert_eq!(f.restrict_x(a).unwrap().eval(b).unwrap(), f.eval(a, b).unwrap());
            prop_assert_eq!(f.restrict_y(b).unwrap().eval(a).unwrap(), f.eval(a, b).unwrap());
        }
    }
}
