//! Operations on [`AbstractMatrix`].

use super::{AbstractMatrix, Block, MatrixError};
use crate::field::Field;

/// Lower-unitriangular: ones on the diagonal, zeros strictly above it.
pub fn is_unitriangular<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>) -> bool {
    m.rows().enumerate().all(|(i, row)| {
        field.is_one(&row[i]) && row[i + 1..].iter().all(|x| field.is_zero(x))
    })
}

pub fn block_decompose<E: Clone>(m: &AbstractMatrix<E>) -> Result<Block<E>, MatrixError> {
    let n = m.dim();
    if n == 0 {
        return Err(MatrixError::EmptyMatrix);
    }
    Ok(Block {
        top_left: m[(0, 0)].clone(),
        top_right: m.row(0)[1..].to_vec(),
        bottom_left: (1..n).map(|i| m[(i, 0)].clone()).collect(),
        bottom_right: AbstractMatrix::from_fn(n - 1, |i, j| m[(i + 1, j + 1)].clone()),
    })
}

/// Naive cubic product.
pub fn mulmx<F: Field>(
    field: &F,
    a: &AbstractMatrix<F::Elem>,
    b: &AbstractMatrix<F::Elem>,
) -> Result<AbstractMatrix<F::Elem>, MatrixError> {
    if a.dim() != b.dim() {
        return Err(MatrixError::DimensionMismatch(a.dim(), b.dim()));
    }
    let n = a.dim();
    Ok(AbstractMatrix::from_fn(n, |i, j| {
        (0..n).fold(field.zero(), |acc, k| {
            field.add(&acc, &field.mul(&a[(i, k)], &b[(k, j)]))
        })
    }))
}

fn mul_vec<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    m.rows()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(field.zero(), |acc, (x, y)| field.add(&acc, &field.mul(x, y)))
        })
        .collect()
}

/// Inverse by Gauss-Jordan elimination.
///
/// Unlike a total "return the input on failure" convention, a singular
/// input is reported as [`MatrixError::Singular`].
pub fn invmx<F: Field>(
    field: &F,
    m: &AbstractMatrix<F::Elem>,
) -> Result<AbstractMatrix<F::Elem>, MatrixError> {
    let n = m.dim();
    let mut a = m.to_rows();
    let mut inv = AbstractMatrix::identity(field, n).to_rows();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !field.is_zero(&a[r][col]))
            .ok_or(MatrixError::Singular)?;
        a.swap(col, pivot);
        inv.swap(col, pivot);

        let scale = field.inv(&a[col][col]).expect("pivot is nonzero");
        if !field.is_one(&scale) {
            for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
                *x = field.mul(x, &scale);
            }
        }

        let (pivot_a, pivot_inv) = (a[col].clone(), inv[col].clone());
        for r in (0..n).filter(|&r| r != col) {
            let factor = a[r][col].clone();
            if field.is_zero(&factor) {
                continue;
            }
            for (x, p) in a[r].iter_mut().zip(&pivot_a) {
                *x = field.sub(x, &field.mul(&factor, p));
            }
            for (x, p) in inv[r].iter_mut().zip(&pivot_inv) {
                *x = field.sub(x, &field.mul(&factor, p));
            }
        }
    }
    AbstractMatrix::from_rows(inv)
}

/// Inverse of a lower-unitriangular matrix by recursion on the first row
/// and column:
///
/// ```text
/// [ 1 | 0 ]⁻¹   [       1      |  0  ]
/// [---+---]   = [--------------+-----]
/// [ C | N ]     [ -(N⁻¹ · C)   | N⁻¹ ]
/// ```
///
/// The `0 × 0` matrix is its own inverse.
pub fn fast_invmx<F: Field>(
    field: &F,
    m: &AbstractMatrix<F::Elem>,
) -> Result<AbstractMatrix<F::Elem>, MatrixError> {
    if !is_unitriangular(field, m) {
        return Err(MatrixError::NotUnitriangular);
    }
    Ok(fast_invmx_rec(field, m))
}

fn fast_invmx_rec<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>) -> AbstractMatrix<F::Elem> {
    if m.dim() == 0 {
        return AbstractMatrix::empty();
    }
    let block = block_decompose(m).expect("nonempty");
    let n_inv = fast_invmx_rec(field, &block.bottom_right);
    let bottom_left = mul_vec(field, &n_inv, &block.bottom_left)
        .iter()
        .map(|x| field.neg(x))
        .collect();
    Block {
        top_left: field.one(),
        top_right: vec![field.zero(); n_inv.dim()],
        bottom_left,
        bottom_right: n_inv,
    }
    .compose()
    .expect("block shapes agree")
}

/// Determinant by Gaussian elimination, flipping the sign on each row swap.
pub fn det_mx<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>) -> F::Elem {
    let n = m.dim();
    let mut a = m.to_rows();
    let mut det = field.one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !field.is_zero(&a[r][col])) else {
            return field.zero();
        };
        if pivot != col {
            a.swap(col, pivot);
            det = field.neg(&det);
        }
        let p_inv = field.inv(&a[col][col]).expect("pivot is nonzero");
        det = field.mul(&det, &a[col][col]);
        let pivot_row = a[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            if field.is_zero(&row[col]) {
                continue;
            }
            let factor = field.mul(&row[col], &p_inv);
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = field.sub(x, &field.mul(&factor, p));
            }
        }
    }
    det
}

/// Rank by reduction to row-echelon form.
pub fn rank_mx<F: Field>(field: &F, m: &AbstractMatrix<F::Elem>) -> usize {
    let n = m.dim();
    let mut a = m.to_rows();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..n).find(|&r| !field.is_zero(&a[r][col])) else {
            continue;
        };
        a.swap(rank, pivot);
        let p_inv = field.inv(&a[rank][col]).expect("pivot is nonzero");
        let pivot_row = a[rank].clone();
        for row in a.iter_mut().skip(rank + 1) {
            if field.is_zero(&row[col]) {
                continue;
            }
            let factor = field.mul(&row[col], &p_inv);
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = field.sub(x, &field.mul(&factor, p));
            }
        }
        rank += 1;
    }
    rank
}
