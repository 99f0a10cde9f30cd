//! Time-frequency windows, realized as `MN×MN` diagonal matrices whose
//! `(lM + k)`-th element weights subcarrier `k` of OFDM symbol `l`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};

use super::frame::OtfsFrameConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowRole {
    Transmit,
    Receive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WindowKind {
    Rectangular,
    /// `w_{k,l} = time[l] · freq[k]`, i.e. `diag(time) ⊗ diag(freq)`.
    Separable {
        time: Vec<Complex64>,
        freq: Vec<Complex64>,
    },
    /// Arbitrary diagonal, already in `lM + k` order.
    General {
        weights: Vec<Complex64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindowSpec {
    pub kind: WindowKind,
    pub role: WindowRole,
}

impl WindowSpec {
    pub fn rectangular(role: WindowRole) -> Self {
        WindowSpec {
            kind: WindowKind::Rectangular,
            role,
        }
    }

    pub fn separable(role: WindowRole, time: Vec<Complex64>, freq: Vec<Complex64>) -> Self {
        WindowSpec {
            kind: WindowKind::Separable { time, freq },
            role,
        }
    }

    pub fn general(role: WindowRole, weights: Vec<Complex64>) -> Self {
        WindowSpec {
            kind: WindowKind::General { weights },
            role,
        }
    }

    pub fn is_rectangular(&self) -> bool {
        matches!(self.kind, WindowKind::Rectangular)
    }

    pub fn validate(&self, cfg: &OtfsFrameConfig) -> Result<()> {
        let finite = |v: &[Complex64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        match &self.kind {
            WindowKind::Rectangular => Ok(()),
            WindowKind::Separable { time, freq } => {
                cfg.check_len("separable window time factor", time.len(), cfg.n)?;
                cfg.check_len("separable window frequency factor", freq.len(), cfg.m)?;
                if !finite(time) || !finite(freq) {
                    return Err(Error::NonFinite("window"));
                }
                Ok(())
            }
            WindowKind::General { weights } => {
                cfg.check_len("window weights", weights.len(), cfg.grid_len())?;
                if !finite(weights) {
                    return Err(Error::NonFinite("window"));
                }
                Ok(())
            }
        }
    }

    /// Diagonal of the window matrix, length `MN`.
    pub fn diagonal(&self, cfg: &OtfsFrameConfig) -> Result<ComplexVector> {
        self.validate(cfg)?;
        Ok(match &self.kind {
            WindowKind::Rectangular => vec![Complex64::new(1.0, 0.0); cfg.grid_len()],
            WindowKind::Separable { time, freq } => time
                .iter()
                .flat_map(|&a| freq.iter().map(move |&b| a * b))
                .collect(),
            WindowKind::General { weights } => weights.clone(),
        })
    }

    pub fn matrix(&self, cfg: &OtfsFrameConfig) -> Result<ComplexMatrix> {
        Ok(ComplexMatrix::from_diagonal(&self.diagonal(cfg)?))
    }

    /// `(time, freq)` factors; rectangular windows factor as all-ones.
    pub fn separable_factors(
        &self,
        cfg: &OtfsFrameConfig,
    ) -> Option<(ComplexVector, ComplexVector)> {
        let one = Complex64::new(1.0, 0.0);
        match &self.kind {
            WindowKind::Rectangular => Some((vec![one; cfg.n], vec![one; cfg.m])),
            WindowKind::Separable { time, freq } => Some((time.clone(), freq.clone())),
            WindowKind::General { .. } => None,
        }
    }
}

/// `x̃_{lM+k} = x_{lM+k} · w_{k,l}`.
pub fn apply_window(
    x: &[Complex64],
    w: &WindowSpec,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexVector> {
    cfg.check_len("windowed signal", x.len(), cfg.grid_len())?;
    if w.is_rectangular() {
        return Ok(x.to_vec());
    }
    let diag = w.diagonal(cfg)?;
    Ok(x.iter().zip(&diag).map(|(a, b)| a * b).collect())
}

/// `max_i |v_i u_i − 1|`: zero when the window pair reconstructs without
/// distortion.
pub fn reconstruction_error(u: &WindowSpec, v: &WindowSpec, cfg: &OtfsFrameConfig) -> Result<f64> {
    let (du, dv) = (u.diagonal(cfg)?, v.diagonal(cfg)?);
    Ok(du
        .iter()
        .zip(&dv)
        .map(|(a, b)| (a * b - 1.0).norm())
        .fold(0.0, f64::max))
}
