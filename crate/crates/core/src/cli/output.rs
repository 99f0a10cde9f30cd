//! Output formats: CSV rows, matrix dumps, channel documents.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::LtvChannel;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::mimo::MimoChannel;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn complex_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn parse_complex_pairs(text: &str) -> Result<Vec<Complex64>> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
    Ok(pairs
        .into_iter()
        .map(|[re, im]| Complex64::new(re, im))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Aggregate,
    Trial(usize),
}

/// One CSV row of a capacity run.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub kind: RowKind,
    pub snr_db: f64,
    pub sigma2: f64,
    pub mi_otfs_bits: f64,
    pub mi_ofdm_sum_bits: f64,
    pub capacity_bits_per_sample: f64,
    pub ofdm_capacity_bits_per_sample: f64,
    pub ci_halfwidth: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub config_hash: String,
}

impl ResultRecord {
    pub const HEADER: &'static str = "record,trial,snr_db,sigma2,mi_otfs_bits,mi_ofdm_sum_bits,\
capacity_bits_per_sample,ofdm_capacity_bits_per_sample,ci_halfwidth,trials,seed,config_hash";

    pub fn to_csv(&self) -> String {
        let (record, trial) = match self.kind {
            RowKind::Aggregate => ("aggregate", String::new()),
            RowKind::Trial(t) => ("trial", t.to_string()),
        };
        [
            record.to_string(),
            trial,
            fmt_f64(self.snr_db),
            fmt_f64(self.sigma2),
            fmt_f64(self.mi_otfs_bits),
            fmt_f64(self.mi_ofdm_sum_bits),
            fmt_f64(self.capacity_bits_per_sample),
            fmt_f64(self.ofdm_capacity_bits_per_sample),
            self.ci_halfwidth.map(fmt_f64).unwrap_or_default(),
            self.trials.to_string(),
            self.seed.to_string(),
            self.config_hash.clone(),
        ]
        .join(",")
    }
}

pub fn records_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from(ResultRecord::HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// `row,col,re,im` for every entry with `|z| > threshold`, column-major.
pub fn matrix_entries_csv(m: &ComplexMatrix, threshold: f64) -> (String, usize) {
    let mut out = String::from("row,col,re,im\n");
    let mut count = 0;
    for c in 0..m.cols() {
        for (r, z) in m.column(c).iter().enumerate() {
            if z.norm() > threshold {
                out.push_str(&format!("{r},{c},{},{}\n", fmt_f64(z.re), fmt_f64(z.im)));
                count += 1;
            }
        }
    }
    (out, count)
}

/// Reads a dump written by [`matrix_entries_csv`] back into a dense matrix.
pub fn parse_matrix_entries_csv(text: &str, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let bad = || Error::Config(format!("matrix dump line {}: `{line}`", lineno + 1));
        if fields.len() != 4 {
            return Err(bad());
        }
        let r: usize = fields[0].parse().map_err(|_| bad())?;
        let c: usize = fields[1].parse().map_err(|_| bad())?;
        let re: f64 = fields[2].parse().map_err(|_| bad())?;
        let im: f64 = fields[3].parse().map_err(|_| bad())?;
        if r >= rows || c >= cols {
            return Err(bad());
        }
        m.as_mut_slice()[c * rows + r] = Complex64::new(re, im);
    }
    Ok(m)
}

/// `{"n_t", "n_r", "pairs": [...]}`, pairs ordered `r·n_t + t`, each in the
/// single-link channel format.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MimoChannelDocument {
    n_t: usize,
    n_r: usize,
    pairs: Vec<Value>,
}

pub fn mimo_channel_to_json(ch: &MimoChannel) -> Result<String> {
    let pairs = ch
        .pairs()
        .iter()
        .map(|p| Ok(serde_json::from_str(&p.to_json()?)?))
        .collect::<Result<_>>()?;
    Ok(serde_json::to_string(&MimoChannelDocument {
        n_t: ch.n_t(),
        n_r: ch.n_r(),
        pairs,
    })?)
}

pub fn mimo_channel_from_json(text: &str) -> Result<MimoChannel> {
    let doc: MimoChannelDocument = serde_json::from_str(text)?;
    let pairs = doc
        .pairs
        .iter()
        .map(|v| LtvChannel::from_json(&v.to_string()))
        .collect::<Result<_>>()?;
    MimoChannel::new(doc.n_t, doc.n_r, pairs)
}
