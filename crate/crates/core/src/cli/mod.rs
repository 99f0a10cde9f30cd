//! Command-line front end: configuration, the four run modes, and output
//! files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 invariant
//! failure, 4 dense size cap exceeded.

mod commands;
mod config;
mod output;

use std::path::Path;

use crate::error::{Error, Result};

pub use commands::{
    run, run_capacity, run_effective_channel, run_simulate, run_verify, Artifact, Check,
    CheckStatus, RunOutput, SIMULATE_RESIDUAL_TOL,
};
pub use config::{
    ChannelSection, ExperimentConfig, MimoSection, Mode, NoiseLevel, NoiseSection, RunSection,
    SymbolKind, WindowSection, CONFIG_SCHEMA,
};
pub use output::{
    complex_pairs, fmt_f64, matrix_entries_csv, mimo_channel_from_json, mimo_channel_to_json,
    parse_complex_pairs, parse_matrix_entries_csv, records_csv, ResultRecord, RowKind,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_SIZE_CAP: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Structure { .. } | Error::NotPositiveDefinite { .. } => EXIT_INVARIANT,
        Error::SizeCap { .. } => EXIT_SIZE_CAP,
        Error::Dimension { .. }
        | Error::Length { .. }
        | Error::NonFinite(_)
        | Error::Config(_)
        | Error::Json(_) => EXIT_CONFIG,
    }
}

/// Writes every artifact under `dir`, creating subdirectories as needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &a.bytes)?;
    }
    Ok(())
}
