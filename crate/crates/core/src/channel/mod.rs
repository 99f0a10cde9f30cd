//! Linear time-varying channels: synthesis, channel matrices, per-symbol
//! blocks and additive noise.

mod block;
mod ltv;
mod model;
mod noise;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use block::{
    block_channels, circulant_deviation, max_off_block_diagonal, reduce_to_block_channel,
    BLOCK_DIAGONAL_TOL,
};
pub use ltv::{assemble_h_matrix, synthesize, synthesize_unchecked, LtvChannel};
pub use model::{ChannelModel, PathComponent, RandomMultipath};
pub use noise::{awgn, awgn_with_rng, NoiseSpec};

/// Independent random stream for `(seed, trial, stream)`.
///
/// Streams never overlap, so trials can run on any worker in any order and
/// still draw identical numbers.
pub fn stream_rng(seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(0x1_0000).wrapping_add(stream));
    rng
}
