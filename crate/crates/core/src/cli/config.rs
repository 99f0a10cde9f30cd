//! Experiment configuration: JSON in, validated scenario out.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capacity::{
    noise_variance_to_snr_db, snr_db_to_noise_variance, CapacityScenario, ChannelSource,
};
use crate::channel::{ChannelModel, PathComponent, RandomMultipath};
use crate::error::{Error, Result};
use crate::linalg::DEFAULT_DENSE_CAP;
use crate::mimo::MimoConfig;
use crate::otfs::{OtfsFrameConfig, WindowKind, WindowRole, WindowSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Capacity,
    Simulate,
    Verify,
    EffectiveChannel,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Capacity => "capacity",
            Mode::Simulate => "simulate",
            Mode::Verify => "verify",
            Mode::EffectiveChannel => "effective-channel",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MimoSection {
    pub n_t: usize,
    pub n_r: usize,
}

impl Default for MimoSection {
    fn default() -> Self {
        MimoSection { n_t: 1, n_r: 1 }
    }
}

/// One window shared by every antenna on each side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    #[serde(default = "rectangular")]
    pub tx: WindowKind,
    #[serde(default = "rectangular")]
    pub rx: WindowKind,
}

fn rectangular() -> WindowKind {
    WindowKind::Rectangular
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection {
            tx: rectangular(),
            rx: rectangular(),
        }
    }
}

/// Channel description. `random` draws a fresh realization per trial and
/// antenna pair; the other kinds are fixed and apply to the direct links
/// `(a, a)` only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSection {
    Identity,
    StaticMultipath {
        gains: Vec<Complex64>,
        delays: Vec<usize>,
    },
    DopplerPaths {
        paths: Vec<PathComponent>,
        #[serde(default)]
        length: Option<usize>,
    },
    BlockInvariantDoppler {
        paths: Vec<PathComponent>,
        #[serde(default)]
        length: Option<usize>,
    },
    Random {
        /// Channel length `L`.
        taps: usize,
        /// Number of paths `P`.
        paths: usize,
        #[serde(default)]
        max_doppler: f64,
        #[serde(default)]
        block_invariant: bool,
    },
}

impl ChannelSection {
    pub fn source(&self) -> ChannelSource {
        match self.clone() {
            ChannelSection::Identity => ChannelSource::Fixed(ChannelModel::Identity),
            ChannelSection::StaticMultipath { gains, delays } => {
                ChannelSource::Fixed(ChannelModel::StaticMultipath { gains, delays })
            }
            ChannelSection::DopplerPaths { paths, length } => {
                ChannelSource::Fixed(ChannelModel::DopplerPaths { paths, length })
            }
            ChannelSection::BlockInvariantDoppler { paths, length } => {
                ChannelSource::Fixed(ChannelModel::BlockInvariantDoppler { paths, length })
            }
            ChannelSection::Random {
                taps,
                paths,
                max_doppler,
                block_invariant,
            } => ChannelSource::Random(RandomMultipath {
                taps,
                paths,
                max_doppler,
                block_invariant,
            }),
        }
    }

    /// Channel length `L`.
    pub fn length(&self) -> usize {
        match self.source() {
            ChannelSource::Fixed(model) => model.length(),
            ChannelSource::Random(spec) => spec.taps,
        }
    }

    fn validate(&self) -> Result<()> {
        match self.source() {
            ChannelSource::Fixed(model) => model.validate(),
            ChannelSource::Random(spec) => spec.validate(),
        }
    }
}

/// Noise levels, given either as SNR in dB (`σ² = 10^(−SNR/10)`) or as
/// variances directly.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<Vec<f64>>,
}

/// One noise level with both of its spellings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseLevel {
    pub snr_db: f64,
    pub sigma2: f64,
}

impl NoiseSection {
    pub fn levels(&self) -> Vec<NoiseLevel> {
        match (&self.snr_db, &self.sigma2) {
            (Some(snr), _) => snr
                .iter()
                .map(|&snr_db| NoiseLevel {
                    snr_db,
                    sigma2: snr_db_to_noise_variance(snr_db),
                })
                .collect(),
            (None, Some(s)) => s
                .iter()
                .map(|&sigma2| NoiseLevel {
                    snr_db: noise_variance_to_snr_db(sigma2),
                    sigma2,
                })
                .collect(),
            (None, None) => Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        match (&self.snr_db, &self.sigma2) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "noise: give either `snr_db` or `sigma2`, not both".into(),
                ));
            }
            (Some(v), None) | (None, Some(v)) if v.is_empty() => {
                return Err(Error::Config("noise: the level list is empty".into()));
            }
            _ => {}
        }
        if let Some(snr) = &self.snr_db {
            if let Some(bad) = snr.iter().find(|s| !s.is_finite()) {
                return Err(Error::Config(format!(
                    "noise: snr_db value {bad} is not finite"
                )));
            }
        }
        for l in self.levels() {
            if !(l.sigma2.is_finite() && l.sigma2 > 0.0) {
                return Err(Error::Config(format!(
                    "noise: sigma2 value {} must be positive and finite",
                    l.sigma2
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    #[default]
    Qpsk,
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Optional; when present it must match the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Emit one CSV row per trial in addition to the aggregates.
    #[serde(default)]
    pub per_trial: bool,
    /// Write every trial's channel realization as JSON.
    #[serde(default)]
    pub export_channels: bool,
    /// Largest dense matrix (entries) the run may materialize.
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    /// Symbol file for `simulate`: a JSON array of `[re, im]` pairs in
    /// stacked order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbols: Option<String>,
    /// Random symbol alphabet for `simulate` when no file is given.
    #[serde(default)]
    pub symbol_kind: SymbolKind,
    /// Entries with magnitude at or below this are left out of matrix dumps.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Also dump the time-frequency channel `V H̃_f U` (single antenna).
    #[serde(default)]
    pub frequency_domain: bool,
}

fn one() -> usize {
    1
}

fn default_dense_cap() -> usize {
    DEFAULT_DENSE_CAP
}

fn default_threshold() -> f64 {
    1e-12
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            mode: None,
            trials: 1,
            seed: 0,
            per_trial: false,
            export_channels: false,
            dense_cap: DEFAULT_DENSE_CAP,
            symbols: None,
            symbol_kind: SymbolKind::Qpsk,
            threshold: default_threshold(),
            frequency_domain: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub frame: OtfsFrameConfig,
    #[serde(default)]
    pub mimo: MimoSection,
    #[serde(default)]
    pub window: WindowSection,
    pub channel: ChannelSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub run: RunSection,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("config does not match the schema: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical JSON; field order is fixed so the bytes are stable.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// Leading 16 hex digits of SHA-256 over [`ExperimentConfig::to_json`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn mimo_config(&self) -> Result<MimoConfig> {
        MimoConfig::new(self.frame, self.mimo.n_t, self.mimo.n_r)
    }

    pub fn tx_window(&self) -> WindowSpec {
        WindowSpec {
            kind: self.window.tx.clone(),
            role: WindowRole::Transmit,
        }
    }

    pub fn rx_window(&self) -> WindowSpec {
        WindowSpec {
            kind: self.window.rx.clone(),
            role: WindowRole::Receive,
        }
    }

    pub fn scenario(&self) -> Result<CapacityScenario> {
        Ok(CapacityScenario {
            mimo: self.mimo_config()?,
            channel: self.channel.source(),
            tx_window: self.tx_window(),
        })
    }

    /// Checks every field and the cross-field constraints for `mode`.
    /// `verify` tolerates a channel longer than the prefix so the
    /// structural check can report it.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(m) = self.run.mode {
            if m != mode {
                return Err(Error::Config(format!(
                    "run.mode is `{m}` but the `{mode}` command was invoked"
                )));
            }
        }
        self.frame
            .validate()
            .map_err(|e| Error::Config(format!("frame: {}", strip(e))))?;
        self.mimo_config()?;
        let mn = self.frame.grid_len();
        for (side, w) in [("tx", self.tx_window()), ("rx", self.rx_window())] {
            w.validate(&self.frame).map_err(|e| {
                Error::Config(format!(
                    "window.{side}: {} (windows are M*N = {mn} weights, index l*M + k)",
                    strip(e)
                ))
            })?;
        }
        self.channel
            .validate()
            .map_err(|e| Error::Config(format!("channel: {}", strip(e))))?;
        let len = self.channel.length();
        if mode != Mode::Verify && len - 1 > self.frame.cp {
            return Err(Error::Config(format!(
                "channel length L = {len} needs a cyclic prefix of at least L - 1 = {}, but frame.cp = {}; \
                 raise frame.cp or shorten the channel",
                len - 1,
                self.frame.cp
            )));
        }
        self.noise.validate()?;
        if mode == Mode::Capacity && self.noise.levels().is_empty() {
            return Err(Error::Config(
                "capacity runs need noise.snr_db or noise.sigma2".into(),
            ));
        }
        if self.run.trials == 0 {
            return Err(Error::Config("run.trials must be at least 1".into()));
        }
        if !(self.run.threshold.is_finite() && self.run.threshold >= 0.0) {
            return Err(Error::Config(
                "run.threshold must be a finite non-negative number".into(),
            ));
        }
        if self.run.frequency_domain && (self.mimo.n_t, self.mimo.n_r) != (1, 1) {
            return Err(Error::Config(
                "run.frequency_domain dumps need a single-antenna link (n_t = n_r = 1)".into(),
            ));
        }
        Ok(())
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::Config(msg) => msg,
        other => other.to_string(),
    }
}

/// JSON Schema (draft 2020-12) for [`ExperimentConfig`].
pub const CONFIG_SCHEMA: &str = include_str!("../../schema/experiment-config.schema.json");

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> &'static str {
        r#"{"frame": {"m": 4, "n": 2, "cp": 1}, "channel": {"kind": "identity"}, "noise": {"sigma2": [1.0]}}"#
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(base()).unwrap();
        assert_eq!(cfg.mimo, MimoSection { n_t: 1, n_r: 1 });
        assert_eq!(cfg.window.tx, WindowKind::Rectangular);
        assert_eq!(cfg.run.trials, 1);
        cfg.validate(Mode::Capacity).unwrap();
        // round trip through the canonical form keeps the hash
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(again.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 16);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text =
            r#"{"frame": {"m": 4, "n": 2, "cp": 1, "q": 3}, "channel": {"kind": "identity"}}"#;
        assert!(matches!(
            ExperimentConfig::from_json(text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn cross_field_checks() {
        let mut cfg = ExperimentConfig::from_json(base()).unwrap();
        cfg.channel = ChannelSection::Random {
            taps: 3,
            paths: 2,
            max_doppler: 0.01,
            block_invariant: false,
        };
        let err = cfg.validate(Mode::Capacity).unwrap_err().to_string();
        assert!(err.contains("cyclic prefix"), "{err}");
        cfg.validate(Mode::Verify).unwrap();

        let mut cfg = ExperimentConfig::from_json(base()).unwrap();
        cfg.window.tx = WindowKind::General {
            weights: vec![Complex64::new(1.0, 0.0); 7],
        };
        assert!(cfg
            .validate(Mode::Simulate)
            .unwrap_err()
            .to_string()
            .contains("window.tx"));

        let mut cfg = ExperimentConfig::from_json(base()).unwrap();
        cfg.noise = NoiseSection::default();
        assert!(cfg.validate(Mode::Capacity).is_err());
        cfg.validate(Mode::Simulate).unwrap();

        let mut cfg = ExperimentConfig::from_json(base()).unwrap();
        cfg.noise = NoiseSection {
            snr_db: Some(vec![0.0]),
            sigma2: Some(vec![1.0]),
        };
        assert!(cfg.validate(Mode::Capacity).is_err());

        let mut cfg = ExperimentConfig::from_json(base()).unwrap();
        cfg.run.mode = Some(Mode::Verify);
        assert!(cfg.validate(Mode::Capacity).is_err());
    }

    #[test]
    fn snr_levels() {
        let noise = NoiseSection {
            snr_db: Some(vec![0.0, 10.0]),
            sigma2: None,
        };
        let levels = noise.levels();
        assert!((levels[1].sigma2 - 0.1).abs() <= 1e-15);
        assert_eq!(levels[0].sigma2, 1.0);
    }

    #[test]
    fn schema_is_valid_json() {
        let schema: serde_json::Value = serde_json::from_str(CONFIG_SCHEMA).unwrap();
        assert_eq!(schema["type"], "object");
    }
}
