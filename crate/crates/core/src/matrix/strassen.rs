//! Strassen multiplication on list data.
//!
//! Sizes at or below the cutoff use the naive product. Odd sizes above it
//! peel off the last row and column, recurse on the even leading block and
//! patch the border with naive dot products.

use super::seq::{check_square_pair, naive_product};
use super::{MatrixError, SeqMatrix};
use crate::field::Field;

pub const DEFAULT_CUTOFF: usize = 64;

pub fn fast_mult_seqmx<F: Field>(
    field: &F,
    a: &SeqMatrix<F::Elem>,
    b: &SeqMatrix<F::Elem>,
) -> Result<SeqMatrix<F::Elem>, MatrixError> {
    fast_mult_seqmx_with_cutoff(field, a, b, DEFAULT_CUTOFF)
}

/// As [`fast_mult_seqmx`] with an explicit cutoff. A cutoff of 0 is
/// treated as 1.
pub fn fast_mult_seqmx_with_cutoff<F: Field>(
    field: &F,
    a: &SeqMatrix<F::Elem>,
    b: &SeqMatrix<F::Elem>,
    cutoff: usize,
) -> Result<SeqMatrix<F::Elem>, MatrixError> {
    check_square_pair(a, b)?;
    Ok(SeqMatrix::from_rows_unchecked(strassen(
        field,
        a.rows(),
        b.rows(),
        cutoff.max(1),
    )))
}

type Rows<E> = Vec<Vec<E>>;

fn zip_rows<F: Field>(
    field: &F,
    x: &[Vec<F::Elem>],
    y: &[Vec<F::Elem>],
    op: fn(&F, &F::Elem, &F::Elem) -> F::Elem,
) -> Rows<F::Elem> {
    x.iter()
        .zip(y)
        .map(|(rx, ry)| rx.iter().zip(ry).map(|(a, b)| op(field, a, b)).collect())
        .collect()
}

fn add<F: Field>(field: &F, x: &[Vec<F::Elem>], y: &[Vec<F::Elem>]) -> Rows<F::Elem> {
    zip_rows(field, x, y, F::add)
}

fn sub<F: Field>(field: &F, x: &[Vec<F::Elem>], y: &[Vec<F::Elem>]) -> Rows<F::Elem> {
    zip_rows(field, x, y, F::sub)
}

fn quadrant<E: Clone>(m: &[Vec<E>], row: usize, col: usize, h: usize) -> Rows<E> {
    m[row..row + h]
        .iter()
        .map(|r| r[col..col + h].to_vec())
        .collect()
}

fn strassen<F: Field>(
    field: &F,
    a: &[Vec<F::Elem>],
    b: &[Vec<F::Elem>],
    cutoff: usize,
) -> Rows<F::Elem> {
    let n = a.len();
    if n <= cutoff {
        return naive_product(field, a, b);
    }
    if n % 2 == 1 {
        return peel(field, a, b, cutoff);
    }

    let h = n / 2;
    let (a11, a12) = (quadrant(a, 0, 0, h), quadrant(a, 0, h, h));
    let (a21, a22) = (quadrant(a, h, 0, h), quadrant(a, h, h, h));
    let (b11, b12) = (quadrant(b, 0, 0, h), quadrant(b, 0, h, h));
    let (b21, b22) = (quadrant(b, h, 0, h), quadrant(b, h, h, h));

    let rec = |x: &[Vec<F::Elem>], y: &[Vec<F::Elem>]| strassen(field, x, y, cutoff);
    let m1 = rec(&add(field, &a11, &a22), &add(field, &b11, &b22));
    let m2 = rec(&add(field, &a21, &a22), &b11);
    let m3 = rec(&a11, &sub(field, &b12, &b22));
    let m4 = rec(&a22, &sub(field, &b21, &b11));
    let m5 = rec(&add(field, &a11, &a12), &b22);
    let m6 = rec(&sub(field, &a21, &a11), &add(field, &b11, &b12));
    let m7 = rec(&sub(field, &a12, &a22), &add(field, &b21, &b22));

    let c11 = add(field, &sub(field, &add(field, &m1, &m4), &m5), &m7);
    let c12 = add(field, &m3, &m5);
    let c21 = add(field, &m2, &m4);
    let c22 = add(field, &add(field, &sub(field, &m1, &m2), &m3), &m6);

    let top = c11.into_iter().zip(c12).map(|(mut l, r)| {
        l.extend(r);
        l
    });
    let bottom = c21.into_iter().zip(c22).map(|(mut l, r)| {
        l.extend(r);
        l
    });
    top.chain(bottom).collect()
}

fn peel<F: Field>(
    field: &F,
    a: &[Vec<F::Elem>],
    b: &[Vec<F::Elem>],
    cutoff: usize,
) -> Rows<F::Elem> {
    let m = a.len() - 1;
    let lead = |x: &[Vec<F::Elem>]| -> Rows<F::Elem> { x[..m].iter().map(|r| r[..m].to_vec()).collect() };
    let last_col = |x: &[Vec<F::Elem>]| -> Vec<F::Elem> { x[..m].iter().map(|r| r[m].clone()).collect() };

    let (a11, a12, a21, a22) = (lead(a), last_col(a), &a[m][..m], &a[m][m]);
    let (b11, b12, b21, b22) = (lead(b), last_col(b), &b[m][..m], &b[m][m]);

    let dot = |xs: &[F::Elem], ys: &mut dyn Iterator<Item = &F::Elem>| {
        xs.iter()
            .zip(ys)
            .fold(field.zero(), |acc, (x, y)| field.add(&acc, &field.mul(x, y)))
    };

    let mut c11 = strassen(field, &a11, &b11, cutoff);
    for (row, ai) in c11.iter_mut().zip(&a12) {
        for (x, bj) in row.iter_mut().zip(b21) {
            *x = field.add(x, &field.mul(ai, bj));
        }
    }
    let c12: Vec<F::Elem> = a11
        .iter()
        .zip(&a12)
        .map(|(row, ai)| field.add(&dot(row, &mut b12.iter()), &field.mul(ai, b22)))
        .collect();
    let c21: Vec<F::Elem> = (0..m)
        .map(|j| {
            let col = dot(a21, &mut b11.iter().map(|r| &r[j]));
            field.add(&col, &field.mul(a22, &b21[j]))
        })
        .collect();
    let c22 = field.add(&dot(a21, &mut b12.iter()), &field.mul(a22, b22));

    let mut out: Rows<F::Elem> = c11
        .into_iter()
        .zip(c12)
        .map(|(mut row, x)| {
            row.push(x);
            row
        })
        .collect();
    let mut last = c21;
    last.push(c22);
    out.push(last);
    out
}
