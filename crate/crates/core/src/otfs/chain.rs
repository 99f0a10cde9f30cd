//! Stage-by-stage SISO transceiver simulation.

use num_complex::Complex64;

use crate::channel::{awgn, LtvChannel, NoiseSpec};
use crate::error::{Error, Result};
use crate::linalg::{vec, ComplexVector};

use super::cp::add_cp;
use super::frame::DopplerDelayGrid;
use super::modem::{ofdm_demodulate, ofdm_modulate_no_cp};
use super::transforms::{isfft, sfft_vec};
use super::window::{apply_window, WindowSpec};
use super::OtfsFrameConfig;

/// Every intermediate signal of one OTFS block.
#[derive(Clone, Debug, PartialEq)]
pub struct SisoTranscript {
    /// `d = vec(D)`.
    pub d: ComplexVector,
    /// `x = vec(F_M D F_Nᴴ)`.
    pub x: ComplexVector,
    /// `x̃ = U x`.
    pub x_windowed: ComplexVector,
    /// `s`, OFDM symbols before the prefix.
    pub s: ComplexVector,
    /// `s̃`, transmitted samples.
    pub s_cp: ComplexVector,
    /// Additive noise `w` (zeros when noiseless).
    pub noise: ComplexVector,
    /// `r̃ = H s̃ + w`.
    pub received: ComplexVector,
    /// `ỹ`, time-frequency samples after CP removal and DFT.
    pub y_tilde: ComplexVector,
    /// `y = V ỹ`.
    pub y: ComplexVector,
    /// `d̂`.
    pub d_hat: ComplexVector,
}

/// Transmitter: `d` to `s̃`.
pub fn transmit(
    grid: &DopplerDelayGrid,
    u: &WindowSpec,
) -> Result<(ComplexVector, ComplexVector, ComplexVector, ComplexVector)> {
    let cfg = grid.config();
    let x = vec(&isfft(grid));
    let x_windowed = apply_window(&x, u, cfg)?;
    let s = ofdm_modulate_no_cp(&x_windowed, cfg)?;
    let s_cp = add_cp(&s, cfg)?;
    Ok((x, x_windowed, s, s_cp))
}

/// Receiver: `r̃` to `(ỹ, y, d̂)`.
pub fn receive(
    received: &[Complex64],
    v: &WindowSpec,
    cfg: &OtfsFrameConfig,
) -> Result<(ComplexVector, ComplexVector, ComplexVector)> {
    let y_tilde = ofdm_demodulate(received, cfg)?;
    let y = apply_window(&y_tilde, v, cfg)?;
    let d_hat = sfft_vec(&y, cfg)?;
    Ok((y_tilde, y, d_hat))
}

/// Runs one OTFS block through windowing, OFDM, the channel and back.
pub fn simulate_siso(
    grid: &DopplerDelayGrid,
    u: &WindowSpec,
    v: &WindowSpec,
    channel: &LtvChannel,
    noise: Option<&NoiseSpec>,
) -> Result<SisoTranscript> {
    let cfg = grid.config();
    if channel.span() != cfg.block_len() {
        return Err(Error::length(
            "channel span",
            cfg.block_len(),
            channel.span(),
        ));
    }
    let (x, x_windowed, s, s_cp) = transmit(grid, u)?;
    let noise = match noise {
        Some(spec) => awgn(cfg.block_len(), spec),
        None => vec![Complex64::new(0.0, 0.0); cfg.block_len()],
    };
    let received: ComplexVector = channel
        .apply(&s_cp)?
        .into_iter()
        .zip(&noise)
        .map(|(a, b)| a + b)
        .collect();
    let (y_tilde, y, d_hat) = receive(&received, v, cfg)?;
    Ok(SisoTranscript {
        d: grid.to_vec(),
        x,
        x_windowed,
        s,
        s_cp,
        noise,
        received,
        y_tilde,
        y,
        d_hat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize, ChannelModel};
    use crate::linalg::{max_abs_diff, ComplexMatrix};
    use crate::otfs::window::WindowRole;

    #[test]
    fn identity_channel_reconstructs() {
        let cfg = OtfsFrameConfig::new(8, 4, 2).unwrap();
        let d = ComplexMatrix::from_fn(8, 4, |r, c| {
            Complex64::new(r as f64 - c as f64, (r * c) as f64 * 0.1)
        });
        let grid = DopplerDelayGrid::new(cfg, d).unwrap();
        let ch = synthesize(&ChannelModel::Identity, &cfg).unwrap();
        let rect_t = WindowSpec::rectangular(WindowRole::Transmit);
        let rect_r = WindowSpec::rectangular(WindowRole::Receive);
        let t = simulate_siso(&grid, &rect_t, &rect_r, &ch, None).unwrap();
        assert!(max_abs_diff(&t.d_hat, &t.d) <= 1e-12);
        assert_eq!(t.s_cp.len(), cfg.block_len());
        assert_eq!(t.received, t.s_cp);
    }

    #[test]
    fn inverse_windows_reconstruct() {
        let cfg = OtfsFrameConfig::new(4, 3, 1).unwrap();
        let grid = DopplerDelayGrid::new(
            cfg,
            ComplexMatrix::from_fn(4, 3, |r, c| Complex64::new(1.0 + r as f64, c as f64)),
        )
        .unwrap();
        let u: Vec<Complex64> = (0..12)
            .map(|i| Complex64::from_polar(1.0 + 0.1 * i as f64, 0.3 * i as f64))
            .collect();
        let v: Vec<Complex64> = u.iter().map(|z| 1.0 / z).collect();
        let ch = synthesize(&ChannelModel::Identity, &cfg).unwrap();
        let t = simulate_siso(
            &grid,
            &WindowSpec::general(WindowRole::Transmit, u),
            &WindowSpec::general(WindowRole::Receive, v),
            &ch,
            None,
        )
        .unwrap();
        assert!(max_abs_diff(&t.d_hat, &t.d) <= 1e-10);
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let cfg = OtfsFrameConfig::new(4, 2, 1).unwrap();
        let model = ChannelModel::StaticMultipath {
            gains: vec![Complex64::new(0.3, 0.2); 2],
            delays: vec![0, 1],
        };
        let ch = synthesize(&model, &cfg).unwrap();
        let t = simulate_siso(
            &DopplerDelayGrid::zeros(cfg),
            &WindowSpec::rectangular(WindowRole::Transmit),
            &WindowSpec::rectangular(WindowRole::Receive),
            &ch,
            None,
        )
        .unwrap();
        assert!(t.d_hat.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn span_mismatch_is_rejected() {
        let cfg = OtfsFrameConfig::new(4, 2, 1).unwrap();
        let other = OtfsFrameConfig::new(4, 3, 1).unwrap();
        let ch = synthesize(&ChannelModel::Identity, &other).unwrap();
        let rect = WindowSpec::rectangular(WindowRole::Transmit);
        assert!(simulate_siso(&DopplerDelayGrid::zeros(cfg), &rect, &rect, &ch, None).is_err());
    }
}
