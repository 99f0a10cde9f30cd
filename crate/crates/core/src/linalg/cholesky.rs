use crate::error::{Error, Result};

use super::matrix::ComplexMatrix;

/// Natural log-determinant of a Hermitian positive-definite matrix via an
/// in-place lower Cholesky factorization: `ln|G| = 2 Σ ln L_ii`.
///
/// Only the lower triangle of `g` is read.
pub fn hermitian_log_det(g: &ComplexMatrix) -> Result<f64> {
    if !g.is_square() {
        return Err(Error::dimension(
            "hermitian_log_det",
            format!("matrix is {}x{}", g.rows(), g.cols()),
        ));
    }
    if !g.is_finite() {
        return Err(Error::NonFinite("log-det operand"));
    }
    let n = g.rows();
    let mut l = g.clone();
    let mut log_det = 0.0;
    for j in 0..n {
        // column j of L: l[j..n, j]
        let mut pivot = l[(j, j)].re;
        for k in 0..j {
            pivot -= l[(j, k)].norm_sqr();
        }
        if pivot.is_nan() || pivot <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                pivot: j,
                value: pivot,
            });
        }
        let d = pivot.sqrt();
        l[(j, j)] = d.into();
        log_det += 2.0 * d.ln();
        for i in j + 1..n {
            let mut s = l[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(log_det)
}
