//! Slow-fading view of the Doppler-delay channel as a 2D circular
//! convolution.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::stream_rng;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, unvec, vec, ComplexMatrix};

use super::frame::OtfsFrameConfig;

/// Relative tolerance for accepting an effective matrix as 2D-circulant.
pub const CONVOLUTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum TwoDimConvolution {
    /// `d̂ = D ⊛ kernel`; `max_deviation` is the worst mismatch measured.
    Kernel {
        kernel: ComplexMatrix,
        max_deviation: f64,
    },
    /// The matrix is not a 2D circular convolution.
    NotCirculant { max_deviation: f64 },
}

impl TwoDimConvolution {
    pub fn max_deviation(&self) -> f64 {
        match self {
            TwoDimConvolution::Kernel { max_deviation, .. }
            | TwoDimConvolution::NotCirculant { max_deviation } => *max_deviation,
        }
    }

    pub fn kernel(&self) -> Option<&ComplexMatrix> {
        match self {
            TwoDimConvolution::Kernel { kernel, .. } => Some(kernel),
            TwoDimConvolution::NotCirculant { .. } => None,
        }
    }
}

/// `(D ⊛ K)[m, n] = Σ_{m', n'} D[m', n'] · K[(m − m') mod M, (n − n') mod N]`.
pub fn circular_convolve_2d(d: &ComplexMatrix, kernel: &ComplexMatrix) -> ComplexMatrix {
    let (m_len, n_len) = d.shape();
    ComplexMatrix::from_fn(m_len, n_len, |m, n| {
        let mut acc = Complex64::new(0.0, 0.0);
        for np in 0..n_len {
            for mp in 0..m_len {
                acc += d[(mp, np)] * kernel[((m + m_len - mp) % m_len, (n + n_len - np) % n_len)];
            }
        }
        acc
    })
}

/// Extracts the kernel from the response to `d = e_{0,0}` and checks that
/// the matrix acts as a 2D circular convolution with it. Non-circulant
/// matrices yield [`TwoDimConvolution::NotCirculant`] rather than an error.
pub fn dd_channel_as_2d_convolution(
    effective: &ComplexMatrix,
    cfg: &OtfsFrameConfig,
) -> Result<TwoDimConvolution> {
    let mn = cfg.grid_len();
    if effective.shape() != (mn, mn) {
        return Err(Error::dimension(
            "dd_channel_as_2d_convolution",
            format!("matrix is {:?}, frame needs {mn}x{mn}", effective.shape()),
        ));
    }
    let (m_len, n_len) = (cfg.m, cfg.n);
    let kernel = unvec(effective.column(0), m_len, n_len)?;
    let scale = kernel.max_abs().max(1.0);

    // structural scan: column (m', n') must be the kernel shifted by (m', n')
    let mut deviation = 0.0f64;
    for j in 0..mn {
        let (mp, np) = (j % m_len, j / m_len);
        for (i, z) in effective.column(j).iter().enumerate() {
            let (m, n) = (i % m_len, i / m_len);
            let k = kernel[((m + m_len - mp) % m_len, (n + n_len - np) % n_len)];
            deviation = deviation.max((z - k).norm());
        }
    }

    // and the action on a random grid
    let mut rng = stream_rng(0x2d, 0, 0);
    let d = ComplexMatrix::from_fn(m_len, n_len, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    });
    let via_matrix = effective.mul_vec(&vec(&d))?;
    let via_conv = vec(&circular_convolve_2d(&d, &kernel));
    deviation = deviation.max(max_abs_diff(&via_matrix, &via_conv));

    if deviation <= CONVOLUTION_TOL * scale {
        Ok(TwoDimConvolution::Kernel {
            kernel,
            max_deviation: deviation,
        })
    } else {
        Ok(TwoDimConvolution::NotCirculant {
            max_deviation: deviation,
        })
    }
}
