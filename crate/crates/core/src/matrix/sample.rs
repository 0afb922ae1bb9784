//! Random and exhaustive matrix generators.

use rand::Rng;

use super::seq::naive_product;
use super::AbstractMatrix;
use crate::field::{Field, Fp, PrimeField, Rationals};

/// A field that can draw random elements.
pub trait SampleField: Field {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
}

impl SampleField for Rationals {
    /// Small fractions `a/b` with `|a| ≤ 9`, `1 ≤ b ≤ 4`.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem {
        let num: i64 = rng.gen_range(-9..=9);
        let den: i64 = rng.gen_range(1..=4);
        num_rational::BigRational::new(num.into(), den.into())
    }
}

impl SampleField for PrimeField {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Fp {
        self.elem(rng.gen_range(0..self.modulus()))
    }
}

pub fn random_matrix<F: SampleField, R: Rng + ?Sized>(
    field: &F,
    n: usize,
    rng: &mut R,
) -> AbstractMatrix<F::Elem> {
    AbstractMatrix::from_fn(n, |_, _| field.sample(rng))
}

pub fn random_unitriangular<F: SampleField, R: Rng + ?Sized>(
    field: &F,
    n: usize,
    rng: &mut R,
) -> AbstractMatrix<F::Elem> {
    AbstractMatrix::from_fn(n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => field.sample(rng),
        std::cmp::Ordering::Equal => field.one(),
        std::cmp::Ordering::Less => field.zero(),
    })
}

/// Product of random `n × r` and `r × n` factors, so rank at most `r`.
pub fn random_low_rank<F: SampleField, R: Rng + ?Sized>(
    field: &F,
    n: usize,
    r: usize,
    rng: &mut R,
) -> AbstractMatrix<F::Elem> {
    let left: Vec<Vec<F::Elem>> = (0..n).map(|_| (0..r).map(|_| field.sample(rng)).collect()).collect();
    let right: Vec<Vec<F::Elem>> = (0..r).map(|_| (0..n).map(|_| field.sample(rng)).collect()).collect();
    let rows = if r == 0 {
        vec![vec![field.zero(); n]; n]
    } else {
        naive_product(field, &left, &right)
    };
    AbstractMatrix::from_rows(rows).expect("square product")
}

/// Every lower-unitriangular `n × n` matrix over `field`, in lexicographic
/// order of the strictly-lower entries.
pub fn all_unitriangular(field: &PrimeField, n: usize) -> Vec<AbstractMatrix<Fp>> {
    let slots = n * n.saturating_sub(1) / 2;
    let p = field.modulus();
    let total = p.checked_pow(slots as u32).expect("enumeration too large");
    (0..total)
        .map(|mut code| {
            let mut digits = Vec::with_capacity(slots);
            for _ in 0..slots {
                digits.push(code % p);
                code /= p;
            }
            let mut digits = digits.into_iter();
            AbstractMatrix::from_fn(n, |i, j| match i.cmp(&j) {
                std::cmp::Ordering::Greater => field.elem(digits.next().expect("slot")),
                std::cmp::Ordering::Equal => field.one(),
                std::cmp::Ordering::Less => field.zero(),
            })
        })
        .collect()
}
