use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::matrix::ComplexMatrix;

/// Unitary DFT matrix `F_N` with entry `(m, k) = exp(-j2πmk/N)/√N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DftMatrix {
    size: usize,
    matrix: ComplexMatrix,
}

impl DftMatrix {
    pub fn new(size: usize) -> Self {
        let scale = 1.0 / (size as f64).sqrt();
        let matrix = ComplexMatrix::from_fn(size, size, |m, k| {
            // reduce the exponent first so large sizes keep full phase accuracy
            let e = ((m * k) % size) as f64;
            Complex64::from_polar(scale, -2.0 * PI * e / size as f64)
        });
        DftMatrix { size, matrix }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `F_Nᴴ`.
    pub fn inverse(&self) -> ComplexMatrix {
        self.matrix.adjoint()
    }
}

/// Dense `F_n`.
pub fn dft_matrix(n: usize) -> ComplexMatrix {
    DftMatrix::new(n).into_matrix()
}

/// Dense `F_nᴴ`.
pub fn idft_matrix(n: usize) -> ComplexMatrix {
    DftMatrix::new(n).inverse()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place unitary transform of every consecutive chunk of `plan.len()`
/// samples in `buf`.
fn run(buf: &mut [Complex64], n: usize, inverse: bool) {
    if n <= 1 || buf.is_empty() {
        return;
    }
    debug_assert_eq!(buf.len() % n, 0);
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(buf, &mut scratch);
    let scale = 1.0 / (n as f64).sqrt();
    for z in buf.iter_mut() {
        *z *= scale;
    }
}

/// Applies `F_n` to each consecutive length-`n` block of `buf`.
pub fn fft_blocks(buf: &mut [Complex64], n: usize) {
    run(buf, n, false);
}

/// Applies `F_nᴴ` to each consecutive length-`n` block of `buf`.
pub fn ifft_blocks(buf: &mut [Complex64], n: usize) {
    run(buf, n, true);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::max_abs_diff;

    fn unitarity_error(n: usize) -> f64 {
        let f = dft_matrix(n);
        let g = f.gram();
        g.max_abs_diff(&ComplexMatrix::identity(n))
    }

    #[test]
    fn dft_is_unitary() {
        for n in [1, 2, 3, 5, 7, 8, 12, 16, 31, 64, 100] {
            assert!(unitarity_error(n) <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn dft_is_unitary_at_large_sizes() {
        // Gram of F_4096 is 2.7e11 complex MACs in total; 1024 covers the
        // same phase-reduction path at a tenth of the cost.
        assert!(unitarity_error(1024) <= 1e-12);
    }

    #[test]
    fn entries_follow_definition() {
        let f = DftMatrix::new(4);
        assert_eq!(f.size(), 4);
        let m = f.matrix();
        assert!((m[(0, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        // exp(-jπ/2)/2 = -j/2
        assert!((m[(1, 1)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((m[(2, 1)] - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!(f.inverse().max_abs_diff(&m.adjoint()) == 0.0);
    }

    #[test]
    fn fast_transforms_match_dense_for_composite_and_prime_sizes() {
        for n in [1usize, 2, 6, 7, 12, 13, 30] {
            let x: Vec<Complex64> = (0..2 * n)
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut fast = x.clone();
            fft_blocks(&mut fast, n);
            let f = dft_matrix(n);
            let dense: Vec<Complex64> = x.chunks(n).flat_map(|c| f.mul_vec(c).unwrap()).collect();
            assert!(max_abs_diff(&fast, &dense) < 1e-12, "n = {n}");

            ifft_blocks(&mut fast, n);
            assert!(max_abs_diff(&fast, &x) < 1e-12, "n = {n}");
        }
    }
}
