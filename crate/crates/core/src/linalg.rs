//! Dense singular value decomposition by one-sided Jacobi rotations.
//!
//! Matrices here are small (a few dozen rows and columns), so the cubic
//! per-sweep cost is irrelevant; one-sided Jacobi gives small singular values
//! to high relative accuracy, which is what rank decisions need.

use crate::scalar::Real;

/// Singular values and right singular vectors of a matrix given by columns.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// One value per input column, in descending order.
    pub values: Vec<T>,
    /// Right singular vectors (length = number of columns), matching `values`.
    pub right: Vec<Vec<T>>,
}

const MAX_SWEEPS: usize = 80;

/// SVD of the `m × n` matrix whose `n` columns are `columns` (each of length `m`).
///
/// When `n > m` at least `n − m` of the returned values are (numerically) zero
/// and their right vectors span the null space.
pub fn svd_columns<T: Real>(columns: &[Vec<T>]) -> Svd<T> {
    let n = columns.len();
    let mut a: Vec<Vec<T>> = columns.to_vec();
    let mut v: Vec<Vec<T>> =
        (0..n).map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect()).collect();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::two() * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(T, usize)> = a.iter().enumerate().map(|(j, col)| (dot(col, col).sqrt(), j)).collect();
    // Stable sort on value keeps index order among ties, so output is deterministic.
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    Svd { values: order.iter().map(|&(s, _)| s).collect(), right: order.iter().map(|&(_, j)| v[j].clone()).collect() }
}

/// Singular values (descending) of the matrix whose rows are `rows`.
pub fn singular_values_of_rows<T: Real>(rows: &[Vec<T>]) -> Vec<T> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    // Decompose whichever orientation has fewer columns.
    let mut values = if m <= n {
        svd_columns(rows).values
    } else {
        let cols: Vec<Vec<T>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        svd_columns(&cols).values
    };
    values.truncate(m.min(n));
    values
}

fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
}

fn rotate<T: Real>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
