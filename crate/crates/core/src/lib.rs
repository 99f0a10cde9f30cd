//! Discrete-time simulation of MIMO OFDM-based OTFS modulation.
//!
//! The crate builds the vectorized end-to-end relationship between
//! Doppler-delay data symbols and their estimates,
//!
//! ```text
//! d_hat = (F_N ⊗ F_M^H) V (I_N ⊗ F_M) (I_N ⊗ R_cp) H (I_N ⊗ A_cp) (I_N ⊗ F_M^H) U (F_N^H ⊗ F_M) d + w_hat
//! ```
//!
//! simulates the transceiver stage by stage over linear time-varying
//! channels, and evaluates log-det mutual information and Monte Carlo
//! ergodic capacity for both the OTFS block and the per-symbol OFDM view.
//!
//! Modules:
//! - [`linalg`]: dense complex matrices, unitary DFT, Kronecker products and
//!   matrix-free Kronecker operators, Hermitian log-determinant.
//! - [`otfs`]: SISO transceiver stages and effective-matrix builders.
//! - [`channel`]: LTV channel synthesis, channel matrices, AWGN.
//! - [`mimo`]: antenna stacking, MIMO chain and effective matrix.
//! - [`capacity`]: mutual information and ergodic capacity.
//! - [`cli`]: experiment configuration and the `otfs` command-line runner.
//!
//! All stacked vectors follow column-stacking (`vec`) order: the element for
//! delay bin `m` and Doppler bin `n` sits at `m + M·n`; MIMO vectors are
//! symbol-major, then antenna, then delay.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod mimo;
pub mod otfs;

pub use error::{Error, Result};
pub use num_complex::Complex64;
