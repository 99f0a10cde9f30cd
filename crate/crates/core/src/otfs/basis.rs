//! Explicit OFDM time-frequency basis functions.
//!
//! The modem in [`super::modem`] realizes these implicitly; the explicit
//! forms exist to check the biorthogonality `Σ_i f_{k,l}[i] g_{k',l'}[i] =
//! δ(k−k')δ(l−l')` and to cross-check the modem on small frames.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::frame::OtfsFrameConfig;

/// Transmit pulse `g_{k,l}` over one OTFS block (length `N(M+M_cp)`),
/// including its cyclic prefix.
pub fn transmit_basis(k: usize, l: usize, cfg: &OtfsFrameConfig) -> Vec<Complex64> {
    let mut g = vec![Complex64::new(0.0, 0.0); cfg.block_len()];
    let scale = 1.0 / (cfg.m as f64).sqrt();
    let start = l * cfg.symbol_len();
    for (p, slot) in g[start..start + cfg.symbol_len()].iter_mut().enumerate() {
        let i = p as i64 - cfg.cp as i64;
        let e = (k as i64 * i).rem_euclid(cfg.m as i64) as f64;
        *slot = Complex64::from_polar(scale, 2.0 * PI * e / cfg.m as f64);
    }
    g
}

/// Receive pulse `f_{k,l}`, supported on the body of OFDM symbol `l`.
pub fn receive_basis(k: usize, l: usize, cfg: &OtfsFrameConfig) -> Vec<Complex64> {
    let mut f = vec![Complex64::new(0.0, 0.0); cfg.block_len()];
    let scale = 1.0 / (cfg.m as f64).sqrt();
    let start = l * cfg.symbol_len() + cfg.cp;
    for (i, slot) in f[start..start + cfg.m].iter_mut().enumerate() {
        let e = ((k * i) % cfg.m) as f64;
        *slot = Complex64::from_polar(scale, -2.0 * PI * e / cfg.m as f64);
    }
    f
}

/// Projection `Σ_i f[i] r[i]` (no conjugation; `f` already carries it).
pub fn project(f: &[Complex64], r: &[Complex64]) -> Complex64 {
    f.iter().zip(r).map(|(a, b)| a * b).sum()
}
