//! One-sided Jacobi singular value decomposition for small dense matrices.
//!
//! Only what the nuclear-norm regularizer needs: singular values and the
//! polar factor `U·Vᵀ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

const MAX_SWEEPS: usize = 60;
const ORTHO_TOL: f64 = 1e-14;

/// Thin SVD of a row-major `rows x cols` matrix with `rows >= cols`:
/// returns `(u, sigma, v)` with `a = u · diag(sigma) · vᵀ`, `u` of size
/// `rows x cols` and `v` of size `cols x cols`. Columns whose singular value
/// is zero get a zero column in `u`.
fn jacobi_tall(a: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    debug_assert!(rows >= cols);
    let mut b = a.to_vec();
    let mut v = vec![0.0; cols * cols];
    for j in 0..cols {
        v[j * cols + j] = 1.0;
    }

    let col_dot = |m: &[f64], width: usize, height: usize, p: usize, q: usize| -> f64 {
        let mut acc = 0.0;
        for r in 0..height {
            acc += m[r * width + p] * m[r * width + q];
        }
        acc
    };

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = col_dot(&b, cols, rows, p, p);
                let beta = col_dot(&b, cols, rows, q, q);
                let gamma = col_dot(&b, cols, rows, p, q);
                if gamma.abs() <= ORTHO_TOL * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..rows {
                    let bp = b[r * cols + p];
                    let bq = b[r * cols + q];
                    b[r * cols + p] = c * bp - s * bq;
                    b[r * cols + q] = s * bp + c * bq;
                }
                for r in 0..cols {
                    let vp = v[r * cols + p];
                    let vq = v[r * cols + q];
                    v[r * cols + p] = c * vp - s * vq;
                    v[r * cols + q] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma = vec![0.0; cols];
    let mut u = vec![0.0; rows * cols];
    for j in 0..cols {
        let norm = math::sqrt(col_dot(&b, cols, rows, j, j));
        sigma[j] = norm;
        if norm > 0.0 {
            for r in 0..rows {
                u[r * cols + j] = b[r * cols + j] / norm;
            }
        }
    }
    (u, sigma, v)
}

/// Singular values of a row-major `rows x cols` matrix.
pub(crate) fn singular_values(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    if rows >= cols {
        jacobi_tall(a, rows, cols).1
    } else {
        jacobi_tall(&transpose(a, rows, cols), cols, rows).1
    }
}

/// Polar factor `U·Vᵀ` of the SVD, skipping singular directions with
/// `sigma <= cutoff` — the nuclear-norm gradient.
pub(crate) fn polar_factor(a: &[f64], rows: usize, cols: usize, cutoff: f64) -> Vec<f64> {
    if rows >= cols {
        let (u, sigma, v) = jacobi_tall(a, rows, cols);
        assemble(&u, &sigma, &v, rows, cols, cutoff)
    } else {
        // grad of ||Aᵀ||_* wrt Aᵀ, transposed back
        let (u, sigma, v) = jacobi_tall(&transpose(a, rows, cols), cols, rows);
        transpose(&assemble(&u, &sigma, &v, cols, rows, cutoff), cols, rows)
    }
}

fn assemble(
    u: &[f64],
    sigma: &[f64],
    v: &[f64],
    rows: usize,
    cols: usize,
    cutoff: f64,
) -> Vec<f64> {
    let mut g = vec![0.0; rows * cols];
    for j in 0..cols {
        if sigma[j] <= cutoff {
            continue;
        }
        for r in 0..rows {
            let urj = u[r * cols + j];
            for c in 0..cols {
                g[r * cols + c] += urj * v[c * cols + j];
            }
        }
    }
    g
}

fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = a[r * cols + c];
        }
    }
    out
}
