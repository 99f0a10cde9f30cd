//! OFDM modulation and demodulation with cyclic prefix.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{fft_blocks, ifft_blocks, ComplexVector};

use super::cp::{add_cp, remove_cp};
use super::frame::OtfsFrameConfig;

/// `s̃ = (I_N ⊗ A_cp)(I_N ⊗ F_Mᴴ) x̃`: per OFDM symbol, an `M`-point IDFT
/// followed by the cyclic prefix. Output length `N(M + M_cp)`.
pub fn ofdm_modulate(x_windowed: &[Complex64], cfg: &OtfsFrameConfig) -> Result<ComplexVector> {
    let s = ofdm_modulate_no_cp(x_windowed, cfg)?;
    add_cp(&s, cfg)
}

/// `s = (I_N ⊗ F_Mᴴ) x̃`, before the prefix is added.
pub fn ofdm_modulate_no_cp(
    x_windowed: &[Complex64],
    cfg: &OtfsFrameConfig,
) -> Result<ComplexVector> {
    cfg.check_len("OFDM modulator input", x_windowed.len(), cfg.grid_len())?;
    let mut s = x_windowed.to_vec();
    ifft_blocks(&mut s, cfg.m);
    Ok(s)
}

/// `ỹ = (I_N ⊗ F_M)(I_N ⊗ R_cp) r̃`. Output length `MN`.
pub fn ofdm_demodulate(received: &[Complex64], cfg: &OtfsFrameConfig) -> Result<ComplexVector> {
    let mut r = remove_cp(received, cfg)?;
    fft_blocks(&mut r, cfg.m);
    Ok(r)
}
