//! Operations on [`SeqMatrix`]: the executable side of the refinement.
//!
//! The recursive algorithms here work by splitting lists into head and
//! tail. None of them round-trips through [`AbstractMatrix`].

use std::iter;

use super::{AbstractMatrix, MatrixError, SeqMatrix};
use crate::field::Field;

/// Row `i` of the result is row `i` of `m`.
pub fn seqmx_of_mx<E: Clone>(m: &AbstractMatrix<E>) -> SeqMatrix<E> {
    SeqMatrix::from_rows_unchecked(m.to_rows())
}

pub fn mx_of_seqmx<E: Clone>(n: usize, s: &SeqMatrix<E>) -> Result<AbstractMatrix<E>, MatrixError> {
    if s.nrows() != n || s.rows().iter().any(|r| r.len() != n) {
        return Err(MatrixError::ShapeMismatch { expected: n });
    }
    AbstractMatrix::from_rows(s.rows().to_vec())
}

fn seq_is_unitriangular<F: Field>(field: &F, rows: &[Vec<F::Elem>]) -> bool {
    rows.iter().enumerate().all(|(i, row)| {
        field.is_one(&row[i]) && row[i + 1..].iter().all(|x| field.is_zero(x))
    })
}

/// Unitriangular inverse on list data, following the same recursion as
/// [`fast_invmx`](super::fast_invmx): peel the head row and the head column,
/// invert the tail block, and rebuild.
pub fn cfast_invmx<F: Field>(
    field: &F,
    s: &SeqMatrix<F::Elem>,
) -> Result<SeqMatrix<F::Elem>, MatrixError> {
    s.square_dim()?;
    if !seq_is_unitriangular(field, s.rows()) {
        return Err(MatrixError::NotUnitriangular);
    }
    Ok(SeqMatrix::from_rows_unchecked(cfast_invmx_rec(field, s.rows())))
}

fn cfast_invmx_rec<F: Field>(field: &F, rows: &[Vec<F::Elem>]) -> Vec<Vec<F::Elem>> {
    let Some((_head, tail)) = rows.split_first() else {
        return Vec::new();
    };
    let (column, block): (Vec<F::Elem>, Vec<Vec<F::Elem>>) = tail
        .iter()
        .map(|row| {
            let (c, rest) = row.split_first().expect("square");
            (c.clone(), rest.to_vec())
        })
        .unzip();

    let block_inv = cfast_invmx_rec(field, &block);
    let new_column = mul_rows_vec(field, &block_inv, &column)
        .into_iter()
        .map(|x| field.neg(&x));

    let first = iter::once(field.one())
        .chain(iter::repeat(field.zero()).take(tail.len()))
        .collect();
    iter::once(first)
        .chain(
            new_column
                .zip(block_inv)
                .map(|(c, row)| iter::once(c).chain(row).collect()),
        )
        .collect()
}

fn dot<F: Field>(field: &F, xs: &[F::Elem], ys: &[F::Elem]) -> F::Elem {
    xs.iter()
        .zip(ys)
        .fold(field.zero(), |acc, (x, y)| field.add(&acc, &field.mul(x, y)))
}

fn mul_rows_vec<F: Field>(field: &F, rows: &[Vec<F::Elem>], v: &[F::Elem]) -> Vec<F::Elem> {
    rows.iter().map(|row| dot(field, row, v)).collect()
}

/// Naive product of row lists of shape `r × k` and `k × c`.
pub(crate) fn naive_product<F: Field>(
    field: &F,
    a: &[Vec<F::Elem>],
    b: &[Vec<F::Elem>],
) -> Vec<Vec<F::Elem>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter().zip(b).fold(field.zero(), |acc, (x, brow)| {
                        field.add(&acc, &field.mul(x, &brow[j]))
                    })
                })
                .collect()
        })
        .collect()
}

pub(crate) fn check_square_pair<E>(
    a: &SeqMatrix<E>,
    b: &SeqMatrix<E>,
) -> Result<usize, MatrixError> {
    let n = a.square_dim()?;
    let m = b.square_dim()?;
    if n != m {
        return Err(MatrixError::DimensionMismatch(n, m));
    }
    Ok(n)
}

/// Naive cubic product of two square matrices of equal size.
pub fn mul_seqmx<F: Field>(
    field: &F,
    a: &SeqMatrix<F::Elem>,
    b: &SeqMatrix<F::Elem>,
) -> Result<SeqMatrix<F::Elem>, MatrixError> {
    check_square_pair(a, b)?;
    Ok(SeqMatrix::from_rows_unchecked(naive_product(field, a.rows(), b.rows())))
}

/// Removes the first row with a nonzero head and returns it along with its
/// position.
fn take_pivot<F: Field>(field: &F, rows: &mut Vec<Vec<F::Elem>>) -> Option<(usize, Vec<F::Elem>)> {
    let pos = rows.iter().position(|r| !field.is_zero(&r[0]))?;
    Some((pos, rows.remove(pos)))
}

/// Clears the head column of every row against `pivot` and drops it.
fn eliminate_heads<F: Field>(
    field: &F,
    pivot: &[F::Elem],
    rows: Vec<Vec<F::Elem>>,
) -> Vec<Vec<F::Elem>> {
    let (p_head, p_tail) = pivot.split_first().expect("nonempty pivot");
    let p_inv = field.inv(p_head).expect("pivot is nonzero");
    rows.into_iter()
        .map(|row| {
            let (h, t) = row.split_first().expect("rectangular");
            if field.is_zero(h) {
                return t.to_vec();
            }
            let factor = field.mul(h, &p_inv);
            t.iter()
                .zip(p_tail)
                .map(|(x, p)| field.sub(x, &field.mul(&factor, p)))
                .collect()
        })
        .collect()
}

/// Determinant by elimination on list data.
pub fn det_seqmx<F: Field>(field: &F, s: &SeqMatrix<F::Elem>) -> Result<F::Elem, MatrixError> {
    s.square_dim()?;
    let mut rows = s.rows().to_vec();
    let mut det = field.one();
    while !rows.is_empty() {
        let Some((pos, pivot)) = take_pivot(field, &mut rows) else {
            return Ok(field.zero());
        };
        // moving the pivot to the front is `pos` adjacent swaps
        if pos % 2 == 1 {
            det = field.neg(&det);
        }
        det = field.mul(&det, &pivot[0]);
        rows = eliminate_heads(field, &pivot, rows);
    }
    Ok(det)
}

/// Rank by elimination on list data: a column with no nonzero head is
/// dropped; otherwise a pivot row is consumed.
pub fn rank_elim_seqmx<F: Field>(field: &F, s: &SeqMatrix<F::Elem>) -> Result<usize, MatrixError> {
    s.square_dim()?;
    let mut rows = s.rows().to_vec();
    let mut rank = 0;
    while rows.first().is_some_and(|r| !r.is_empty()) {
        match take_pivot(field, &mut rows) {
            Some((_, pivot)) => {
                rows = eliminate_heads(field, &pivot, rows);
                rank += 1;
            }
            None => {
                for row in &mut rows {
                    row.remove(0);
                }
            }
        }
    }
    Ok(rank)
}
