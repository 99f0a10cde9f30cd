use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Frame dimensions: `m` subcarriers (delay bins), `n` OFDM symbols
/// (Doppler bins), `cp` cyclic-prefix samples per symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtfsFrameConfig {
    pub m: usize,
    pub n: usize,
    pub cp: usize,
}

impl OtfsFrameConfig {
    pub fn new(m: usize, n: usize, cp: usize) -> Result<Self> {
        let cfg = OtfsFrameConfig { m, n, cp };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Config(format!(
                "frame needs m >= 1 and n >= 1 (got m = {}, n = {})",
                self.m, self.n
            )));
        }
        if self.cp >= self.m {
            return Err(Error::Config(format!(
                "cyclic prefix length {} must be smaller than m = {}",
                self.cp, self.m
            )));
        }
        Ok(())
    }

    /// `M·N`, the number of Doppler-delay symbols.
    pub fn grid_len(&self) -> usize {
        self.m * self.n
    }

    /// `M + M_cp`, samples per OFDM symbol on the air.
    pub fn symbol_len(&self) -> usize {
        self.m + self.cp
    }

    /// `N(M + M_cp)`, samples per OTFS block on the air.
    pub fn block_len(&self) -> usize {
        self.n * self.symbol_len()
    }

    pub(crate) fn check_len(&self, what: &'static str, len: usize, expected: usize) -> Result<()> {
        if len != expected {
            return Err(Error::length(what, expected, len));
        }
        Ok(())
    }
}

/// Data symbols `D` on the `M×N` Doppler-delay lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct DopplerDelayGrid {
    config: OtfsFrameConfig,
    data: ComplexMatrix,
}

impl DopplerDelayGrid {
    pub fn new(config: OtfsFrameConfig, data: ComplexMatrix) -> Result<Self> {
        if data.shape() != (config.m, config.n) {
            return Err(Error::dimension(
                "DopplerDelayGrid",
                format!(
                    "data is {:?}, frame is {}x{}",
                    data.shape(),
                    config.m,
                    config.n
                ),
            ));
        }
        Ok(DopplerDelayGrid { config, data })
    }

    /// Grid from `d = vec(D)`.
    pub fn from_vec(config: OtfsFrameConfig, d: &[num_complex::Complex64]) -> Result<Self> {
        Self::new(config, crate::linalg::unvec(d, config.m, config.n)?)
    }

    pub fn zeros(config: OtfsFrameConfig) -> Self {
        DopplerDelayGrid {
            config,
            data: ComplexMatrix::zeros(config.m, config.n),
        }
    }

    pub fn config(&self) -> &OtfsFrameConfig {
        &self.config
    }

    pub fn data(&self) -> &ComplexMatrix {
        &self.data
    }

    pub fn into_data(self) -> ComplexMatrix {
        self.data
    }

    pub fn to_vec(&self) -> Vec<num_complex::Complex64> {
        crate::linalg::vec(&self.data)
    }
}
