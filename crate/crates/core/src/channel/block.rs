//! Per-OFDM-symbol channel blocks `H̃_n` after CP removal.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::otfs::{cp_reduced_channel, OtfsFrameConfig};

use super::ltv::LtvChannel;

/// Absolute bound on off-diagonal block entries of `H̃`, scaled by
/// `max(1, ‖H‖_max)`. With `L − 1 ≤ M_cp` those entries are exact zeros.
pub const BLOCK_DIAGONAL_TOL: f64 = 1e-14;

/// Largest magnitude outside the `block×block` diagonal blocks of `m`.
pub fn max_off_block_diagonal(m: &ComplexMatrix, block_rows: usize, block_cols: usize) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..m.cols() {
        let bc = c / block_cols;
        for (r, z) in m.column(c).iter().enumerate() {
            if r / block_rows != bc {
                worst = worst.max(z.norm());
            }
        }
    }
    worst
}

/// `(I_N ⊗ R_cp) H (I_N ⊗ A_cp)` with its block-diagonal structure verified;
/// returns the `N` diagonal `M×M` blocks.
pub fn reduce_to_block_channel(
    h: &ComplexMatrix,
    cfg: &OtfsFrameConfig,
) -> Result<Vec<ComplexMatrix>> {
    let reduced = cp_reduced_channel(h, cfg)?;
    let tolerance = BLOCK_DIAGONAL_TOL * h.max_abs().max(1.0);
    let off = max_off_block_diagonal(&reduced, cfg.m, cfg.m);
    if off > tolerance {
        return Err(Error::Structure {
            what: "CP-reduced channel",
            max_offdiag: off,
            tolerance,
        });
    }
    Ok((0..cfg.n)
        .map(|n| reduced.block(n * cfg.m, n * cfg.m, cfg.m, cfg.m))
        .collect())
}

/// `H̃_n` straight from the taps: with the prefix absorbing the channel
/// memory, lag `l` maps sample `m` of symbol `n` onto `(m − l) mod M`.
pub fn block_channels(ch: &LtvChannel, cfg: &OtfsFrameConfig) -> Result<Vec<ComplexMatrix>> {
    if ch.span() != cfg.block_len() {
        return Err(Error::length("channel span", cfg.block_len(), ch.span()));
    }
    if ch.len() - 1 > cfg.cp {
        return Err(Error::Config(format!(
            "channel memory L - 1 = {} exceeds cyclic prefix M_cp = {}",
            ch.len() - 1,
            cfg.cp
        )));
    }
    let m = cfg.m;
    Ok((0..cfg.n)
        .map(|n| {
            let mut blk = ComplexMatrix::zeros(m, m);
            for row in 0..m {
                let i = n * cfg.symbol_len() + cfg.cp + row;
                for l in 0..ch.len() {
                    blk[(row, (row + m - l % m) % m)] += ch.tap(i, l);
                }
            }
            blk
        })
        .collect())
}

/// `‖C S − S C‖_max` for the cyclic shift `S`; zero exactly when `c` is
/// circulant.
pub fn circulant_deviation(c: &ComplexMatrix) -> f64 {
    let m = c.rows();
    if !c.is_square() || m == 0 {
        return f64::INFINITY;
    }
    // (C S)[r, k] = C[r, k+1], (S C)[r, k] = C[r-1, k]  with S e_k = e_{k+1}
    let mut worst = 0.0f64;
    for r in 0..m {
        for k in 0..m {
            let lhs: Complex64 = c[(r, (k + 1) % m)];
            let rhs: Complex64 = c[((r + m - 1) % m, k)];
            worst = worst.max((lhs - rhs).norm());
        }
    }
    worst
}
