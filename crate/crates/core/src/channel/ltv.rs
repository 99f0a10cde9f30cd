use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dense_size, ComplexMatrix, ComplexVector, DEFAULT_DENSE_CAP};
use crate::otfs::OtfsFrameConfig;

use super::model::{ChannelModel, PathComponent};

/// Discrete impulse response `h[i, l]` over one OTFS block: `span` samples
/// of time `i`, `len` taps `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct LtvChannel {
    len: usize,
    span: usize,
    /// Row-major by `i`, then `l`.
    taps: Vec<Complex64>,
}

/// Exchange format: `{"L": .., "T": .., "taps": [[re, im], ...]}`, taps
/// row-major by time then lag.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelDocument {
    #[serde(rename = "L")]
    len: usize,
    #[serde(rename = "T")]
    span: usize,
    taps: Vec<[f64; 2]>,
}

impl LtvChannel {
    pub fn new(len: usize, span: usize, taps: Vec<Complex64>) -> Result<Self> {
        if len == 0 {
            return Err(Error::Config("channel length must be at least 1".into()));
        }
        if taps.len() != len * span {
            return Err(Error::length("channel taps", len * span, taps.len()));
        }
        if !taps.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("channel taps"));
        }
        Ok(LtvChannel { len, span, taps })
    }

    pub fn zeros(len: usize, span: usize) -> Self {
        LtvChannel {
            len,
            span,
            taps: vec![Complex64::new(0.0, 0.0); len * span],
        }
    }

    pub fn from_fn(
        len: usize,
        span: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Result<Self> {
        let taps = (0..span)
            .flat_map(|i| (0..len).map(move |l| (i, l)))
            .map(|(i, l)| f(i, l))
            .collect();
        Self::new(len, span, taps)
    }

    /// Channel length `L`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.span == 0
    }

    /// Samples covered, `T`.
    pub fn span(&self) -> usize {
        self.span
    }

    #[inline]
    pub fn tap(&self, i: usize, l: usize) -> Complex64 {
        self.taps[i * self.len + l]
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    /// `r[i] = Σ_l h[i, l] s[i − l]`, zero initial state.
    pub fn apply(&self, s: &[Complex64]) -> Result<ComplexVector> {
        if s.len() != self.span {
            return Err(Error::length("channel input", self.span, s.len()));
        }
        Ok((0..self.span)
            .map(|i| {
                (0..self.len.min(i + 1))
                    .map(|l| self.tap(i, l) * s[i - l])
                    .sum()
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ChannelDocument {
            len: self.len,
            span: self.span,
            taps: self.taps.iter().map(|z| [z.re, z.im]).collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelDocument = serde_json::from_str(text)?;
        Self::new(
            doc.len,
            doc.span,
            doc.taps
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

fn paths_to_taps(
    paths: &[PathComponent],
    len: usize,
    span: usize,
    hold: Option<usize>,
) -> Result<LtvChannel> {
    LtvChannel::from_fn(len, span, |i, l| {
        let t = hold.map_or(i, |sym| (i / sym) * sym);
        paths
            .iter()
            .filter(|p| p.delay == l)
            .map(|p| {
                // fold the phase into [0, 1) cycles before scaling by 2π
                let cycles = (p.doppler * t as f64).rem_euclid(1.0);
                p.gain * Complex64::from_polar(1.0, 2.0 * PI * cycles)
            })
            .sum()
    })
}

/// Realizes `model` over one OTFS block. Fails when the channel memory
/// exceeds the cyclic prefix (`L − 1 > M_cp`).
pub fn synthesize(model: &ChannelModel, cfg: &OtfsFrameConfig) -> Result<LtvChannel> {
    let len = model.length();
    if len - 1 > cfg.cp {
        return Err(Error::Config(format!(
            "channel memory L - 1 = {} exceeds cyclic prefix M_cp = {}",
            len - 1,
            cfg.cp
        )));
    }
    synthesize_unchecked(model, cfg)
}

/// [`synthesize`] without the cyclic-prefix guard, for negative tests.
pub fn synthesize_unchecked(model: &ChannelModel, cfg: &OtfsFrameConfig) -> Result<LtvChannel> {
    model.validate()?;
    let span = cfg.block_len();
    match model {
        ChannelModel::Identity => LtvChannel::new(1, span, vec![Complex64::new(1.0, 0.0); span]),
        ChannelModel::StaticMultipath { gains, delays } => {
            let paths: Vec<PathComponent> = gains
                .iter()
                .zip(delays)
                .map(|(&gain, &delay)| PathComponent {
                    gain,
                    delay,
                    doppler: 0.0,
                })
                .collect();
            paths_to_taps(&paths, model.length(), span, None)
        }
        ChannelModel::DopplerPaths { paths, .. } => {
            paths_to_taps(paths, model.length(), span, None)
        }
        ChannelModel::BlockInvariantDoppler { paths, .. } => {
            paths_to_taps(paths, model.length(), span, Some(cfg.symbol_len()))
        }
    }
}

/// Dense `T×T` channel matrix with `H[i, i − l] = h[i, l]`.
pub fn assemble_h_matrix(ch: &LtvChannel) -> Result<ComplexMatrix> {
    let t = ch.span();
    check_dense_size(t, t, DEFAULT_DENSE_CAP)?;
    let mut h = ComplexMatrix::zeros(t, t);
    for i in 0..t {
        for l in 0..ch.len().min(i + 1) {
            h[(i, i - l)] = ch.tap(i, l);
        }
    }
    Ok(h)
}
