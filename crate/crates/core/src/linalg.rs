//! Fixed-size dense helpers for metrics of dimension ≤ 4.

use crate::{Error, Result};

pub(crate) type Mat4 = [[f64; 4]; 4];

/// Inverse of the leading `n × n` block by Gauss–Jordan with partial pivoting.
/// Fails with a 1-norm condition estimate when the block is numerically singular.
pub(crate) fn invert(m: &Mat4, n: usize) -> Result<Mat4> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-300 {
            return Err(Error::SingularMetric {
                condition: f64::INFINITY,
            });
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..n {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    let condition = norm1(m, n) * norm1(&inv, n);
    if !condition.is_finite() || condition > 1e12 {
        return Err(Error::SingularMetric { condition });
    }
    Ok(inv)
}

fn norm1(m: &Mat4, n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
