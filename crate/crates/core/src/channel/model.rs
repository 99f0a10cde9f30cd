use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One propagation path: `g · exp(j2πνi) · δ[l − delay]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathComponent {
    pub gain: Complex64,
    pub delay: usize,
    /// Normalized Doppler shift in cycles per sample.
    #[serde(default)]
    pub doppler: f64,
}

/// Deterministic description of a channel realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelModel {
    /// `h[i, 0] = 1`.
    Identity,
    /// Time-invariant taps.
    StaticMultipath {
        gains: Vec<Complex64>,
        delays: Vec<usize>,
    },
    /// Each path rotates at its own Doppler, sample by sample.
    DopplerPaths {
        paths: Vec<PathComponent>,
        /// Channel length `L`; defaults to the largest delay plus one.
        #[serde(default)]
        length: Option<usize>,
    },
    /// Like `DopplerPaths`, but the taps are frozen over each OFDM symbol
    /// at their value on the symbol's first sample.
    BlockInvariantDoppler {
        paths: Vec<PathComponent>,
        #[serde(default)]
        length: Option<usize>,
    },
}

fn check_paths(paths: &[PathComponent], length: Option<usize>) -> Result<()> {
    if paths.is_empty() {
        return Err(Error::Config("channel needs at least one path".into()));
    }
    let mut delays: Vec<usize> = paths.iter().map(|p| p.delay).collect();
    delays.sort_unstable();
    if delays.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("path delays must be distinct".into()));
    }
    for p in paths {
        if !(p.gain.re.is_finite() && p.gain.im.is_finite() && p.doppler.is_finite()) {
            return Err(Error::NonFinite("channel path"));
        }
        if p.doppler.abs() >= 0.5 {
            return Err(Error::Config(format!(
                "normalized Doppler {} must satisfy |ν| < 0.5",
                p.doppler
            )));
        }
    }
    if let Some(len) = length {
        if len <= *delays.last().unwrap() {
            return Err(Error::Config(format!(
                "channel length {len} does not cover delay {}",
                delays.last().unwrap()
            )));
        }
    }
    Ok(())
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelModel::Identity => Ok(()),
            ChannelModel::StaticMultipath { gains, delays } => {
                if gains.len() != delays.len() {
                    return Err(Error::Config(format!(
                        "static multipath has {} gains but {} delays",
                        gains.len(),
                        delays.len()
                    )));
                }
                let paths: Vec<PathComponent> = gains
                    .iter()
                    .zip(delays)
                    .map(|(&gain, &delay)| PathComponent {
                        gain,
                        delay,
                        doppler: 0.0,
                    })
                    .collect();
                check_paths(&paths, None)
            }
            ChannelModel::DopplerPaths { paths, length }
            | ChannelModel::BlockInvariantDoppler { paths, length } => check_paths(paths, *length),
        }
    }

    /// Channel length `L`.
    pub fn length(&self) -> usize {
        match self {
            ChannelModel::Identity => 1,
            ChannelModel::StaticMultipath { delays, .. } => {
                delays.iter().max().map_or(1, |d| d + 1)
            }
            ChannelModel::DopplerPaths { paths, length }
            | ChannelModel::BlockInvariantDoppler { paths, length } => {
                let memory = paths.iter().map(|p| p.delay + 1).max().unwrap_or(1);
                length.unwrap_or(memory).max(memory)
            }
        }
    }
}

/// Random multipath statistics: `P` paths with gains `CN(0, 1/P)`, delays
/// drawn without replacement from `0..L` (always including `0`), and
/// Dopplers uniform on `[−ν_max, ν_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMultipath {
    pub taps: usize,
    pub paths: usize,
    #[serde(default)]
    pub max_doppler: f64,
    /// Freeze taps within each OFDM symbol (slow fading).
    #[serde(default)]
    pub block_invariant: bool,
}

impl RandomMultipath {
    pub fn validate(&self) -> Result<()> {
        if self.taps == 0 || self.paths == 0 || self.paths > self.taps {
            return Err(Error::Config(format!(
                "random channel needs 1 <= paths <= taps (got paths = {}, taps = {})",
                self.paths, self.taps
            )));
        }
        if !(self.max_doppler.is_finite() && (0.0..0.5).contains(&self.max_doppler)) {
            return Err(Error::Config(format!(
                "max_doppler {} must lie in [0, 0.5)",
                self.max_doppler
            )));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelModel {
        let sigma = (0.5 / self.paths as f64).sqrt();
        let gain = Normal::new(0.0, sigma).expect("finite positive deviation");
        let mut delays = vec![0usize];
        if self.paths > 1 {
            delays.extend(
                index::sample(rng, self.taps - 1, self.paths - 1)
                    .iter()
                    .map(|d| d + 1),
            );
        }
        let paths = delays
            .into_iter()
            .map(|delay| {
                let g = Complex64::new(gain.sample(rng), gain.sample(rng));
                let doppler = if self.max_doppler > 0.0 {
                    Uniform::new_inclusive(-self.max_doppler, self.max_doppler)
                        .expect("valid range")
                        .sample(rng)
                } else {
                    0.0
                };
                PathComponent {
                    gain: g,
                    delay,
                    doppler,
                }
            })
            .collect();
        let length = Some(self.taps);
        if self.block_invariant {
            ChannelModel::BlockInvariantDoppler { paths, length }
        } else {
            ChannelModel::DopplerPaths { paths, length }
        }
    }
}
