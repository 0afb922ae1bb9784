//! Exact scalar fields for the matrix kernel.
//!
//! Arithmetic goes through a [`Field`] value rather than operator overloading
//! on the elements, so that a field can carry runtime data (the modulus of
//! GF(p)) and so that wrappers such as [`CountingField`] can observe every
//! multiplication an algorithm performs.

use std::cell::Cell;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("modulus {0} is not prime")]
    NonPrimeModulus(u64),
}

/// A field whose elements are exact values of type [`Field::Elem`].
pub trait Field {
    type Elem: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    /// Whether `a` is in the canonical form this field promises for every
    /// value it produces.
    fn is_canonical(&self, a: &Self::Elem) -> bool;
}

/// The field of fractions `Ratio<I>` over a num-integer integer type.
///
/// With `I = BigInt` (the [`Rationals`] alias) arithmetic never overflows.
/// Fixed-width integers are supported but panic on overflow.
pub struct RationalField<I>(PhantomData<fn() -> I>);

pub type Rationals = RationalField<BigInt>;

impl<I> RationalField<I> {
    pub const fn new() -> Self {
        RationalField(PhantomData)
    }
}

impl<I> Default for RationalField<I> {
    fn default() -> Self {
        Self::new()
    }
}

impl<I> Clone for RationalField<I> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<I> Copy for RationalField<I> {}

impl<I> fmt::Debug for RationalField<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Q")
    }
}

impl<I> Field for RationalField<I>
where
    I: Integer + Signed + Clone + fmt::Debug + Send + Sync + TryFrom<i64>,
{
    type Elem = Ratio<I>;

    fn zero(&self) -> Ratio<I> {
        Ratio::zero()
    }

    fn one(&self) -> Ratio<I> {
        Ratio::one()
    }

    fn from_i64(&self, v: i64) -> Ratio<I> {
        let i = I::try_from(v)
            .ok()
            .expect("integer literal does not fit the rational's integer type");
        Ratio::from_integer(i)
    }

    fn add(&self, a: &Ratio<I>, b: &Ratio<I>) -> Ratio<I> {
        a + b
    }

    fn sub(&self, a: &Ratio<I>, b: &Ratio<I>) -> Ratio<I> {
        a - b
    }

    fn mul(&self, a: &Ratio<I>, b: &Ratio<I>) -> Ratio<I> {
        a * b
    }

    fn neg(&self, a: &Ratio<I>) -> Ratio<I> {
        -a
    }

    fn inv(&self, a: &Ratio<I>) -> Option<Ratio<I>> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }

    fn is_zero(&self, a: &Ratio<I>) -> bool {
        a.is_zero()
    }

    fn is_one(&self, a: &Ratio<I>) -> bool {
        a.is_one()
    }

    fn is_canonical(&self, a: &Ratio<I>) -> bool {
        let den = a.denom();
        den.is_positive() && a.numer().gcd(den).is_one()
    }
}

/// A residue modulo a prime. The modulus travels with the value so that
/// mixing residues of different fields is detectable.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    value: u64,
    modulus: u64,
}

impl Fp {
    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

impl fmt::Display for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// GF(p) for a prime `p` fitting in a machine word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if primal_check::miller_rabin(p) {
            Ok(PrimeField { p })
        } else {
            Err(FieldError::NonPrimeModulus(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: u64) -> Fp {
        Fp {
            value: v % self.p,
            modulus: self.p,
        }
    }

    /// Builds a residue that must already lie in `[0, p)`.
    pub fn try_elem(&self, v: u64) -> Option<Fp> {
        (v < self.p).then_some(Fp {
            value: v,
            modulus: self.p,
        })
    }

    fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let p = self.p as u128;
        let mut acc: u128 = 1;
        let mut b = base as u128 % p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            exp >>= 1;
        }
        acc as u64
    }

    #[inline]
    fn check(&self, a: &Fp) {
        debug_assert_eq!(a.modulus, self.p, "residue from a different field");
    }
}

impl Field for PrimeField {
    type Elem = Fp;

    fn zero(&self) -> Fp {
        self.elem(0)
    }

    fn one(&self) -> Fp {
        self.elem(1)
    }

    fn from_i64(&self, v: i64) -> Fp {
        let r = (v as i128).rem_euclid(self.p as i128);
        self.elem(r as u64)
    }

    #[inline]
    fn add(&self, a: &Fp, b: &Fp) -> Fp {
        self.check(a);
        self.check(b);
        let s = (a.value as u128 + b.value as u128) % self.p as u128;
        self.elem(s as u64)
    }

    #[inline]
    fn sub(&self, a: &Fp, b: &Fp) -> Fp {
        self.check(a);
        self.check(b);
        let s = (a.value as u128 + self.p as u128 - b.value as u128) % self.p as u128;
        self.elem(s as u64)
    }

    #[inline]
    fn mul(&self, a: &Fp, b: &Fp) -> Fp {
        self.check(a);
        self.check(b);
        let s = (a.value as u128 * b.value as u128) % self.p as u128;
        self.elem(s as u64)
    }

    #[inline]
    fn neg(&self, a: &Fp) -> Fp {
        self.check(a);
        if a.value == 0 {
            *a
        } else {
            self.elem(self.p - a.value)
        }
    }

    fn inv(&self, a: &Fp) -> Option<Fp> {
        self.check(a);
        // Fermat: a^(p-2) = a^-1
        (a.value != 0).then(|| self.elem(self.pow(a.value, self.p - 2)))
    }

    fn is_zero(&self, a: &Fp) -> bool {
        a.value == 0
    }

    fn is_one(&self, a: &Fp) -> bool {
        a.value == 1
    }

    fn is_canonical(&self, a: &Fp) -> bool {
        a.modulus == self.p && a.value < self.p
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, rhs: Fp) -> Fp {
        assert_eq!(self.modulus, rhs.modulus);
        PrimeField { p: self.modulus }.add(&self, &rhs)
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, rhs: Fp) -> Fp {
        assert_eq!(self.modulus, rhs.modulus);
        PrimeField { p: self.modulus }.sub(&self, &rhs)
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, rhs: Fp) -> Fp {
        assert_eq!(self.modulus, rhs.modulus);
        PrimeField { p: self.modulus }.mul(&self, &rhs)
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        PrimeField { p: self.modulus }.neg(&self)
    }
}

/// Wraps a field and counts scalar multiplications.
///
/// The counter belongs to the wrapper, so each measured invocation creates
/// its own `CountingField`.
pub struct CountingField<'a, F> {
    inner: &'a F,
    muls: Cell<u64>,
}

impl<'a, F: Field> CountingField<'a, F> {
    pub fn new(inner: &'a F) -> Self {
        CountingField {
            inner,
            muls: Cell::new(0),
        }
    }

    pub fn multiplications(&self) -> u64 {
        self.muls.get()
    }
}

impl<F: Field> Field for CountingField<'_, F> {
    type Elem = F::Elem;

    fn zero(&self) -> F::Elem {
        self.inner.zero()
    }

    fn one(&self) -> F::Elem {
        self.inner.one()
    }

    fn from_i64(&self, v: i64) -> F::Elem {
        self.inner.from_i64(v)
    }

    fn add(&self, a: &F::Elem, b: &F::Elem) -> F::Elem {
        self.inner.add(a, b)
    }

    fn sub(&self, a: &F::Elem, b: &F::Elem) -> F::Elem {
        self.inner.sub(a, b)
    }

    fn mul(&self, a: &F::Elem, b: &F::Elem) -> F::Elem {
        self.muls.set(self.muls.get() + 1);
        self.inner.mul(a, b)
    }

    fn neg(&self, a: &F::Elem) -> F::Elem {
        self.inner.neg(a)
    }

    fn inv(&self, a: &F::Elem) -> Option<F::Elem> {
        self.inner.inv(a)
    }

    fn is_zero(&self, a: &F::Elem) -> bool {
        self.inner.is_zero(a)
    }

    fn is_one(&self, a: &F::Elem) -> bool {
        self.inner.is_one(a)
    }

    fn is_canonical(&self, a: &F::Elem) -> bool {
        self.inner.is_canonical(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn composite_moduli_are_rejected() {
        for p in [0u64, 1, 4, 9, 100, 561] {
            assert_eq!(PrimeField::new(p), Err(FieldError::NonPrimeModulus(p)));
        }
        for p in [2u64, 3, 101, 65537, 18446744073709551557] {
            assert!(PrimeField::new(p).is_ok());
        }
    }

    #[test]
    fn rationals_stay_reduced() {
        let f = Rationals::new();
        let x = f.add(&q(1, 6), &q(1, 3));
        assert_eq!(x, q(1, 2));
        assert!(f.is_canonical(&x));
        let z = f.sub(&q(3, 4), &q(6, 8));
        assert!(f.is_zero(&z));
        assert_eq!(*z.denom(), 1.into());
        assert!(f.is_canonical(&f.from_i64(-5)));
    }

    #[test]
    fn fp_inverse_and_negation() {
        let f = PrimeField::new(101).unwrap();
        assert_eq!(f.inv(&f.zero()), None);
        let a = f.elem(37);
        assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
        assert_eq!(f.neg(&f.zero()), f.zero());
        assert_eq!(f.from_i64(-1), f.elem(100));
        assert_eq!(f.try_elem(101), None);
    }

    #[test]
    fn counting_field_counts_only_products() {
        let f = PrimeField::new(7).unwrap();
        let c = CountingField::new(&f);
        let a = c.from_i64(3);
        let b = c.add(&a, &a);
        let _ = c.mul(&a, &b);
        let _ = c.mul(&b, &b);
        let _ = c.inv(&b);
        assert_eq!(c.multiplications(), 2);
    }

    fn small_q() -> impl Strategy<Value = BigRational> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn rational_field_axioms(a in small_q(), b in small_q(), c in small_q()) {
            let f = Rationals::new();
            prop_assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
            if !f.is_zero(&a) {
                prop_assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
            }
            let lhs = f.mul(&a, &f.add(&b, &c));
            let rhs = f.add(&f.mul(&a, &b), &f.mul(&a, &c));
            prop_assert_eq!(&lhs, &rhs);
            prop_assert!(f.is_canonical(&lhs));
        }

        #[test]
        fn prime_field_axioms(p in prop::sample::select(vec![2u64, 3, 5, 101, 1_000_000_007]),
                              a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            let f = PrimeField::new(p).unwrap();
            let (a, b, c) = (f.elem(a), f.elem(b), f.elem(c));
            prop_assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
            if !f.is_zero(&a) {
                prop_assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
            }
            let lhs = f.mul(&a, &f.add(&b, &c));
            prop_assert_eq!(lhs, f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert!(f.is_canonical(&lhs));
            prop_assert_eq!(f.sub(&a, &b), f.add(&a, &f.neg(&b)));
        }
    }
}
