//! Singular values of small dense complex matrices by one-sided
//! (Hestenes) Jacobi rotations. Accurate to working precision, including
//! for tiny singular values, and adequate for the few-hundred-column
//! matrices produced by spectral grids.

use ndarray::{Array2, Axis};

use crate::scalar::{Real, C};

const MAX_SWEEPS: usize = 80;

/// Singular values of `m`, sorted nonincreasing.
pub fn singular_values<T: Real>(m: &Array2<C<T>>) -> Vec<T> {
    let (rows, cols) = m.dim();
    // Orthogonalize along the shorter dimension.
    let cols_major: Vec<Vec<C<T>>> = if cols <= rows {
        m.axis_iter(Axis(1)).map(|c| c.to_vec()).collect()
    } else {
        m.axis_iter(Axis(0))
            .map(|r| r.iter().map(|v| v.conj()).collect())
            .collect()
    };
    let mut a = cols_major;
    let n = a.len();
    let eps = T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (ap, aq) = (&a[p], &a[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = C::new(T::zero(), T::zero());
                    for (x, y) in ap.iter().zip(aq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * *y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g <= eps * (alpha * beta).sqrt() || g == T::zero() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = (T::one() + t * t).sqrt().recip();
                let s = c * t;
                let (left, right) = a.split_at_mut(q);
                let (ap, aq) = (&mut left[p], &mut right[0]);
                for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
                    let yq = *y * phase.conj();
                    let xp = *x;
                    *x = xp * c - yq * s;
                    *y = xp * s + yq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = a
        .iter()
        .map(|col| col.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a (numerically) singular matrix.
pub fn solve<T: Real>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, &r)| {
            let mut v = row.clone();
            v.push(r);
            v
        })
        .collect();
    let scale = a.iter().flatten().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tiny = scale * T::epsilon() * T::idx(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| {
            m[x][col]
                .abs()
                .partial_cmp(&m[y][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(m[pivot][col].abs() > tiny) {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[row][k] -= f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Inverse of a small dense matrix, `None` when singular.
pub fn invert<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<T> = (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect();
        cols.push(solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}
