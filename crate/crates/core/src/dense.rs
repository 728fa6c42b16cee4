//! Small dense linear algebra: pivoted elimination and a Jacobi eigensolver.
//!
//! Matrices are row-major slices of length `n * n`.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
///
/// On success `b` holds the solution; `a` is overwritten by its factors.
pub fn solve_pivoted(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Singular(format!("zero {n}x{n} matrix")));
    }
    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
        if pivot <= 1e-14 * scale {
            return Err(Error::Singular(format!(
                "pivot {pivot:e} in column {col} of a {n}x{n} system"
            )));
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let diag = a[col * n + col];
        for r in col + 1..n {
            let factor = a[r * n + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}

/// Solves a 3x3 system without touching the inputs.
pub fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Result<[f64; 3]> {
    let mut m = [0.0; 9];
    for i in 0..3 {
        m[3 * i..3 * i + 3].copy_from_slice(&a[i]);
    }
    let mut x = *b;
    solve_pivoted(&mut m, &mut x, 3)?;
    Ok(x)
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s
    };
    let total: f64 = m.iter().map(|v| v * v).sum();
    for _sweep in 0..100 {
        if off(&m) <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}
