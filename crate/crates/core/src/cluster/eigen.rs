use super::{real, Real};

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
///
/// Returns `(values, vectors)` with `vectors[k]` the unit eigenvector for
/// `values[k]`. Only the symmetric part of `a` is meaningful.
pub fn symmetric_eigen<T: Real>(mut a: Vec<Vec<T>>) -> (Vec<T>, Vec<Vec<T>>) {
    let n = a.len();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let two = real::<T>(2.0);
    for _sweep in 0..64 {
        let mut off = T::zero();
        let mut diag = T::zero();
        for i in 0..n {
            diag = diag + a[i][i] * a[i][i];
            for j in i + 1..n {
                off = off + a[i][j] * a[i][j];
            }
        }
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == T::zero() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (two * a[p][q]);
                let t = if theta.abs() > real(1e150) {
                    T::one() / (two * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
                for row in v.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    let vectors = (0..n).map(|k| (0..n).map(|j| v[j][k]).collect()).collect();
    (values, vectors)
}
