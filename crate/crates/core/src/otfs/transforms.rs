//! SFFT⁻¹ and SFFT between the Doppler-delay and time-frequency lattices.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{
    fft_blocks, ifft_blocks, unvec, vec, ComplexMatrix, ComplexVector, KronFactor, KronOperator,
};

use super::frame::{DopplerDelayGrid, OtfsFrameConfig};

/// `F_M` down each column, then `F_Nᴴ` along each row.
fn transform_columns_then_rows(x: &ComplexMatrix, forward_cols: bool) -> ComplexMatrix {
    let (m, n) = x.shape();
    let mut cols = x.as_slice().to_vec();
    if forward_cols {
        fft_blocks(&mut cols, m);
    } else {
        ifft_blocks(&mut cols, m);
    }
    // transpose so rows become contiguous
    let mut rows = vec![Complex64::new(0.0, 0.0); m * n];
    for c in 0..n {
        for r in 0..m {
            rows[r * n + c] = cols[c * m + r];
        }
    }
    if forward_cols {
        ifft_blocks(&mut rows, n);
    } else {
        fft_blocks(&mut rows, n);
    }
    ComplexMatrix::from_fn(m, n, |r, c| rows[r * n + c])
}

/// SFFT⁻¹: `X = F_M · D · F_Nᴴ`.
pub fn isfft(grid: &DopplerDelayGrid) -> ComplexMatrix {
    transform_columns_then_rows(grid.data(), true)
}

/// SFFT: `D̂ = F_Mᴴ · Y · F_N`.
pub fn sfft(y: &ComplexMatrix, config: OtfsFrameConfig) -> Result<DopplerDelayGrid> {
    DopplerDelayGrid::new(config, transform_columns_then_rows(y, false))
}

/// `(F_Nᴴ ⊗ F_M)` as a matrix-free operator; maps `vec(D)` to `vec(X)`.
pub fn isfft_operator(config: &OtfsFrameConfig) -> KronOperator {
    KronOperator::new(vec![
        KronFactor::InverseDft(config.n),
        KronFactor::Dft(config.m),
    ])
}

/// `(F_N ⊗ F_Mᴴ)`; maps `vec(Y)` to `vec(D̂)`.
pub fn sfft_operator(config: &OtfsFrameConfig) -> KronOperator {
    KronOperator::new(vec![
        KronFactor::Dft(config.n),
        KronFactor::InverseDft(config.m),
    ])
}

/// Vector form of [`isfft`].
pub fn isfft_vec(d: &[Complex64], config: &OtfsFrameConfig) -> Result<ComplexVector> {
    let grid = DopplerDelayGrid::new(*config, unvec(d, config.m, config.n)?)?;
    Ok(vec(&isfft(&grid)))
}

/// Vector form of [`sfft`].
pub fn sfft_vec(y: &[Complex64], config: &OtfsFrameConfig) -> Result<ComplexVector> {
    Ok(sfft(&unvec(y, config.m, config.n)?, *config)?.to_vec())
}
