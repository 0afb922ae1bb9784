//! Exact square matrices in two representations.
//!
//! [`AbstractMatrix`] is the proof-oriented side: a dense `n × n` array
//! indexed by its dimension. [`SeqMatrix`] is the executable side: a list of
//! rows. The kernel implements the same algorithms on both and
//! [`seqmx_of_mx`] maps one onto the other; the equivalences between the two
//! sides are what `check` and the test suites verify.

mod dense;
pub mod json;
pub mod sample;
mod seq;
mod strassen;
pub mod check;

use std::ops::Index;

use thiserror::Error;

use crate::field::Field;

pub use dense::{block_decompose, det_mx, fast_invmx, invmx, is_unitriangular, mulmx, rank_mx};
pub use seq::{
    cfast_invmx, det_seqmx, mul_seqmx, mx_of_seqmx, rank_elim_seqmx, seqmx_of_mx,
};
pub use strassen::{fast_mult_seqmx, fast_mult_seqmx_with_cutoff, DEFAULT_CUTOFF};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not lower-unitriangular")]
    NotUnitriangular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("row {row} has length {len}, expected {expected}")]
    NotRectangular { row: usize, len: usize, expected: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("expected a {expected}x{expected} matrix")]
    ShapeMismatch { expected: usize },
}

/// Dense `n × n` matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractMatrix<E> {
    n: usize,
    entries: Vec<E>,
}

impl<E: Clone> AbstractMatrix<E> {
    /// The `0 × 0` matrix.
    pub fn empty() -> Self {
        AbstractMatrix {
            n: 0,
            entries: Vec::new(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        AbstractMatrix { n, entries }
    }

    pub fn from_rows(rows: Vec<Vec<E>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(MatrixError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(AbstractMatrix { n, entries })
    }

    pub fn identity<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { field.one() } else { field.zero() })
    }

    pub fn zero<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        Self::from_fn(n, |_, _| field.zero())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[E]> {
        // chunks(0) panics, and there are no rows to yield anyway
        self.entries.chunks(self.n.max(1)).take(self.n)
    }

    pub fn entries(&self) -> &[E] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        self.rows().map(<[E]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }
}

impl<E> Index<(usize, usize)> for AbstractMatrix<E> {
    type Output = E;

    fn index(&self, (i, j): (usize, usize)) -> &E {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of bounds");
        &self.entries[i * self.n + j]
    }
}

/// Matrix as a list of rows. Every row has the same length; the `0 × 0`
/// matrix is the empty list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqMatrix<E> {
    rows: Vec<Vec<E>>,
}

impl<E> SeqMatrix<E> {
    pub fn new(rows: Vec<Vec<E>>) -> Result<Self, MatrixError> {
        if let Some(first) = rows.first() {
            let expected = first.len();
            if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != expected) {
                return Err(MatrixError::NotRectangular {
                    row,
                    len: r.len(),
                    expected,
                });
            }
        }
        Ok(SeqMatrix { rows })
    }

    pub fn empty() -> Self {
        SeqMatrix { rows: Vec::new() }
    }

    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<E>>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0].len() == w[1].len()));
        SeqMatrix { rows }
    }

    pub fn rows(&self) -> &[Vec<E>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<E>> {
        self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub(crate) fn square_dim(&self) -> Result<usize, MatrixError> {
        let (rows, cols) = (self.nrows(), self.ncols());
        if rows == cols {
            Ok(rows)
        } else {
            Err(MatrixError::NotSquare { rows, cols })
        }
    }
}

/// The four blocks `[[top_left, top_right], [bottom_left, bottom_right]]`
/// of a matrix split after its first row and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block<E> {
    pub top_left: E,
    pub top_right: Vec<E>,
    pub bottom_left: Vec<E>,
    pub bottom_right: AbstractMatrix<E>,
}

impl<E: Clone> Block<E> {
    /// Reassembles the `(m + 1) × (m + 1)` matrix, where `m` is the size of
    /// `bottom_right`.
    pub fn compose(self) -> Result<AbstractMatrix<E>, MatrixError> {
        let m = self.bottom_right.dim();
        if self.top_right.len() != m || self.bottom_left.len() != m {
            return Err(MatrixError::ShapeMismatch { expected: m + 1 });
        }
        let n = m + 1;
        let mut entries = Vec::with_capacity(n * n);
        entries.push(self.top_left);
        entries.extend(self.top_right);
        for (c, row) in self.bottom_left.into_iter().zip(self.bottom_right.rows()) {
            entries.push(c);
            entries.extend_from_slice(row);
        }
        Ok(AbstractMatrix { n, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rows_rejects_ragged_input() {
        assert!(AbstractMatrix::from_rows(vec![vec![1, 2], vec![3]]).is_err());
        assert!(AbstractMatrix::from_rows(vec![vec![1, 2]]).is_err());
        let m = AbstractMatrix::from_rows(vec![vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(m[(1, 0)], 3);
        assert_eq!(m.transpose()[(1, 0)], 2);
    }

    #[test]
    fn seqmx_rectangularity() {
        assert_eq!(
            SeqMatrix::new(vec![vec![1, 2], vec![3]]),
            Err(MatrixError::NotRectangular {
                row: 1,
                len: 1,
                expected: 2
            })
        );
        let s = SeqMatrix::new(vec![vec![1, 2, 3]]).unwrap();
        assert_eq!(s.square_dim(), Err(MatrixError::NotSquare { rows: 1, cols: 3 }));
        assert_eq!(SeqMatrix::<i32>::empty().square_dim(), Ok(0));
    }

    #[test]
    fn empty_matrix_has_no_rows() {
        let m = AbstractMatrix::<i32>::empty();
        assert_eq!(m.rows().count(), 0);
        assert!(m.to_rows().is_empty());
    }
}
