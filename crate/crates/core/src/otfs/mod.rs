//! Single-antenna OFDM-based OTFS: SFFT pair, windowing, OFDM with cyclic
//! prefix, and the end-to-end effective matrices.

mod basis;
mod chain;
mod convolution;
mod cp;
mod effective;
mod frame;
mod modem;
mod transforms;
mod window;

pub use basis::{project, receive_basis, transmit_basis};
pub use chain::{receive, simulate_siso, transmit, SisoTranscript};
pub use convolution::{
    circular_convolve_2d, dd_channel_as_2d_convolution, TwoDimConvolution, CONVOLUTION_TOL,
};
pub use cp::{add_cp, cp_reduced_channel, remove_cp, CpMatrices};
pub use effective::{
    effective_frequency_channel, effective_matrix_frequency_domain, effective_matrix_general,
    effective_matrix_rectangular, effective_matrix_separable, frequency_domain_channel,
    EffectiveOperator, SeparableWindows,
};
pub use frame::{DopplerDelayGrid, OtfsFrameConfig};
pub use modem::{ofdm_demodulate, ofdm_modulate, ofdm_modulate_no_cp};
pub use transforms::{isfft, isfft_operator, isfft_vec, sfft, sfft_operator, sfft_vec};
pub use window::{apply_window, reconstruction_error, WindowKind, WindowRole, WindowSpec};

pub(crate) use effective::materialize;
