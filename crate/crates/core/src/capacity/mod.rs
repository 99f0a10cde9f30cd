//! Mutual information and ergodic capacity of OFDM and OFDM-based OTFS.
//!
//! Inputs are unit-power and white; the receiver knows the channel and the
//! transmitter does not. The effective map `K` includes the transmit window
//! but not the receive window.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{
    max_off_block_diagonal, stream_rng, synthesize, ChannelModel, LtvChannel, RandomMultipath,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_log_det, idft_matrix, ComplexMatrix};
use crate::mimo::{
    mimo_block_channel, mimo_isfft_operator, stacked_window_diagonal, MimoChannel, MimoConfig,
};
use crate::otfs::{OtfsFrameConfig, WindowSpec};

/// Absolute tolerance on the off-diagonal blocks of `K Kᴴ`, scaled by
/// `max(1, ‖K Kᴴ‖_max)`.
pub const GRAM_BLOCK_TOL: f64 = 1e-12;
/// Allowed gap between the full-block MI and the sum of per-symbol MIs.
pub const ADDITIVITY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct MiInputs {
    pub k: ComplexMatrix,
    pub noise_variance: f64,
}

fn check_variance(noise_variance: f64) -> Result<()> {
    if !(noise_variance.is_finite() && noise_variance > 0.0) {
        return Err(Error::Config(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )));
    }
    Ok(())
}

/// `log₂ det(I + G/σ²)` for a Gram matrix `G = K Kᴴ` (or `Kᴴ K`).
pub fn mi_from_gram(gram: &ComplexMatrix, noise_variance: f64) -> Result<f64> {
    check_variance(noise_variance)?;
    let n = gram.rows();
    let scale = 1.0 / noise_variance;
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| gram[(i, j)] * scale);
    for i in 0..n {
        a.as_mut_slice()[i * n + i] += 1.0;
    }
    Ok((hermitian_log_det(&a)? / std::f64::consts::LN_2).max(0.0))
}

/// `log₂ det(I + K Kᴴ/σ²)`, factoring whichever Gram side is smaller.
pub fn mutual_information(inp: &MiInputs) -> Result<f64> {
    check_variance(inp.noise_variance)?;
    if !inp.k.is_finite() {
        return Err(Error::NonFinite("mutual information operand"));
    }
    let gram = if inp.k.rows() <= inp.k.cols() {
        inp.k.gram()
    } else {
        inp.k.adjoint().gram()
    };
    mi_from_gram(&gram, inp.noise_variance)
}

/// `K_n = H̄_n (I_{n_t} ⊗ F_Mᴴ) Ū_n` for every OFDM symbol.
pub fn ofdm_symbol_matrices(
    channel: &MimoChannel,
    u: &WindowSpec,
    cfg: &MimoConfig,
) -> Result<Vec<ComplexMatrix>> {
    let blocks = mimo_block_channel(channel, cfg)?;
    let (m, n_t) = (cfg.frame.m, cfg.n_t);
    let w = stacked_window_diagonal(u, n_t, &cfg.frame)?;
    let f_h = idft_matrix(m);
    Ok(blocks
        .blocks
        .iter()
        .enumerate()
        .map(|(n, h)| {
            let weights = &w[n * m * n_t..(n + 1) * m * n_t];
            let mut right = ComplexMatrix::zeros(m * n_t, m * n_t);
            for t in 0..n_t {
                for k in 0..m {
                    for i in 0..m {
                        right.as_mut_slice()[(t * m + k) * m * n_t + t * m + i] =
                            f_h[(i, k)] * weights[t * m + k];
                    }
                }
            }
            h.mul(&right).expect("block shapes agree")
        })
        .collect())
}

/// `K = blockdiag(K_n) · (F_Nᴴ ⊗ I_{n_t} ⊗ F_M)`, the full `MNn_r × MNn_t`
/// map from Doppler-delay data to the prefix-stripped received samples.
pub fn otfs_k_matrix(symbol_matrices: &[ComplexMatrix], cfg: &MimoConfig) -> Result<ComplexMatrix> {
    if symbol_matrices.len() != cfg.frame.n {
        return Err(Error::length(
            "per-symbol K_n",
            cfg.frame.n,
            symbol_matrices.len(),
        ));
    }
    let spread = mimo_isfft_operator(&cfg.frame, cfg.n_t);
    let (rows, cols) = (cfg.rx_len(), cfg.tx_len());
    let sym_cols = cfg.frame.m * cfg.n_t;
    let columns: Vec<Vec<Complex64>> = (0..cols)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); cols];
            e[j] = Complex64::new(1.0, 0.0);
            let x = spread.apply(&e)?;
            Ok(symbol_matrices
                .iter()
                .zip(x.chunks(sym_cols))
                .flat_map(|(k, chunk)| k.mul_vec(chunk).expect("block shapes agree"))
                .collect())
        })
        .collect::<Result<_>>()?;
    ComplexMatrix::from_col_major(rows, cols, columns.concat())
}

/// Gram matrices of one realization, reusable across noise levels.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationGrams {
    /// `K Kᴴ` of the whole OTFS block.
    pub full: ComplexMatrix,
    /// `K_n K_nᴴ` per OFDM symbol.
    pub per_symbol: Vec<ComplexMatrix>,
    /// Largest entry outside the `Mn_r × Mn_r` diagonal blocks of `K Kᴴ`.
    pub max_offdiag: f64,
}

impl RealizationGrams {
    pub fn new(channel: &MimoChannel, u: &WindowSpec, cfg: &MimoConfig) -> Result<Self> {
        let symbols = ofdm_symbol_matrices(channel, u, cfg)?;
        let full = otfs_k_matrix(&symbols, cfg)?.gram();
        let block = cfg.frame.m * cfg.n_r;
        let max_offdiag = max_off_block_diagonal(&full, block, block);
        let tol = GRAM_BLOCK_TOL * full.max_abs().max(1.0);
        if max_offdiag > tol {
            return Err(Error::Structure {
                what: "K Kᴴ off-diagonal blocks",
                max_offdiag,
                tolerance: tol,
            });
        }
        let per_symbol = symbols.iter().map(ComplexMatrix::gram).collect();
        Ok(RealizationGrams {
            full,
            per_symbol,
            max_offdiag,
        })
    }

    pub fn block_mi(&self, noise_variance: f64) -> Result<BlockMi> {
        let total_bits = mi_from_gram(&self.full, noise_variance)?;
        let per_symbol_bits = self
            .per_symbol
            .iter()
            .map(|g| mi_from_gram(g, noise_variance))
            .collect::<Result<Vec<_>>>()?;
        let sum: f64 = per_symbol_bits.iter().sum();
        let tol = ADDITIVITY_TOL * total_bits.abs().max(1.0);
        if (total_bits - sum).abs() > tol {
            return Err(Error::Structure {
                what: "MI additivity across OFDM symbols",
                max_offdiag: (total_bits - sum).abs(),
                tolerance: tol,
            });
        }
        Ok(BlockMi {
            total_bits,
            per_symbol_bits,
            max_offdiag: self.max_offdiag,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockMi {
    /// `I(r; d̄)` from the full `K`.
    pub total_bits: f64,
    /// `I(r_n; x̄_n)` from each `K_n`.
    pub per_symbol_bits: Vec<f64>,
    pub max_offdiag: f64,
}

impl BlockMi {
    pub fn per_symbol_sum(&self) -> f64 {
        self.per_symbol_bits.iter().sum()
    }
}

/// Total and per-symbol MI of one OTFS block; errors when `K Kᴴ` is not
/// block diagonal or the two routes disagree.
pub fn otfs_block_mi(
    channel: &MimoChannel,
    u: &WindowSpec,
    noise_variance: f64,
    cfg: &MimoConfig,
) -> Result<BlockMi> {
    check_variance(noise_variance)?;
    RealizationGrams::new(channel, u, cfg)?.block_mi(noise_variance)
}

/// Where the per-trial antenna-pair channels come from.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSource {
    /// The same channel every trial on each pair `(a, a)`; cross pairs are
    /// silent.
    Fixed(ChannelModel),
    /// Independent draws for every trial and pair.
    Random(RandomMultipath),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityScenario {
    pub mimo: MimoConfig,
    pub channel: ChannelSource,
    pub tx_window: WindowSpec,
}

impl CapacityScenario {
    /// Channel of trial `trial`; pair `(r, t)` draws from stream
    /// `r·n_t + t`.
    pub fn realize(&self, seed: u64, trial: u64) -> Result<MimoChannel> {
        self.realize_with(seed, trial, synthesize)
    }

    /// [`CapacityScenario::realize`] with a caller-chosen synthesizer, e.g.
    /// one that skips the cyclic-prefix check.
    pub fn realize_with(
        &self,
        seed: u64,
        trial: u64,
        synth: fn(&ChannelModel, &OtfsFrameConfig) -> Result<LtvChannel>,
    ) -> Result<MimoChannel> {
        let (frame, n_t, n_r) = (&self.mimo.frame, self.mimo.n_t, self.mimo.n_r);
        match &self.channel {
            ChannelSource::Fixed(model) => {
                let ch = synth(model, frame)?;
                MimoChannel::from_fn(n_t, n_r, |r, t| {
                    Ok(if r == t {
                        ch.clone()
                    } else {
                        LtvChannel::zeros(ch.len(), ch.span())
                    })
                })
            }
            ChannelSource::Random(spec) => {
                spec.validate()?;
                MimoChannel::from_fn(n_t, n_r, |r, t| {
                    let mut rng = stream_rng(seed, trial, (r * n_t + t) as u64);
                    synth(&spec.draw(&mut rng), frame)
                })
            }
        }
    }
}

/// Per-trial figures at one noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialMi {
    pub trial: usize,
    pub otfs_bits: f64,
    pub ofdm_sum_bits: f64,
    pub per_symbol_bits: Vec<f64>,
    pub max_offdiag: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapacityResult {
    pub noise_variance: f64,
    pub trials: Vec<TrialMi>,
    /// Mean of `I(r; d̄) / (N(M+M_cp))`, bits per sample.
    pub otfs_capacity: f64,
    /// Mean of `I(r_n; x̄_n) / (M+M_cp)` over symbols and trials.
    pub ofdm_capacity: f64,
    pub trial_count: usize,
    /// `1.96 · s / √trials` of the OTFS per-trial rates.
    pub ci_half_width: f64,
}

fn aggregate(noise_variance: f64, trials: Vec<TrialMi>, cfg: &MimoConfig) -> CapacityResult {
    let frame = &cfg.frame;
    let block = (frame.n * frame.symbol_len()) as f64;
    let symbol = frame.symbol_len() as f64;
    let count = trials.len();
    let otfs_rates: Vec<f64> = trials.iter().map(|t| t.otfs_bits / block).collect();
    let ofdm_rates: Vec<f64> = trials
        .iter()
        .map(|t| t.per_symbol_bits.iter().map(|b| b / symbol).sum::<f64>() / frame.n as f64)
        .collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let otfs_capacity = mean(&otfs_rates);
    let ci_half_width = if count > 1 {
        let var = otfs_rates
            .iter()
            .map(|r| (r - otfs_capacity).powi(2))
            .sum::<f64>()
            / (count - 1) as f64;
        1.96 * var.sqrt() / (count as f64).sqrt()
    } else {
        0.0
    };
    CapacityResult {
        noise_variance,
        otfs_capacity,
        ofdm_capacity: mean(&ofdm_rates),
        trial_count: count,
        ci_half_width,
        trials,
    }
}

/// Monte Carlo estimate at several noise levels. Every level sees the same
/// channel realizations.
pub fn capacity_sweep(
    scenario: &CapacityScenario,
    noise_variances: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<CapacityResult>> {
    if noise_variances.is_empty() {
        return Err(Error::Config(
            "capacity sweep needs at least one noise level".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    for &s in noise_variances {
        check_variance(s)?;
    }
    scenario.tx_window.validate(&scenario.mimo.frame)?;

    // trial-major results, collected in trial order regardless of scheduling
    let per_trial: Vec<Vec<TrialMi>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let channel = scenario.realize(seed, trial as u64)?;
            let grams = RealizationGrams::new(&channel, &scenario.tx_window, &scenario.mimo)?;
            noise_variances
                .iter()
                .map(|&s| {
                    let mi = grams.block_mi(s)?;
                    Ok(TrialMi {
                        trial,
                        otfs_bits: mi.total_bits,
                        ofdm_sum_bits: mi.per_symbol_sum(),
                        per_symbol_bits: mi.per_symbol_bits,
                        max_offdiag: mi.max_offdiag,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(noise_variances
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            aggregate(
                s,
                per_trial.iter().map(|t| t[i].clone()).collect(),
                &scenario.mimo,
            )
        })
        .collect())
}

pub fn ergodic_capacity(
    scenario: &CapacityScenario,
    noise_variance: f64,
    trials: usize,
    seed: u64,
) -> Result<CapacityResult> {
    Ok(capacity_sweep(scenario, &[noise_variance], trials, seed)?.remove(0))
}

/// `σ² = 10^(−SNR/10)`.
pub fn snr_db_to_noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn noise_variance_to_snr_db(noise_variance: f64) -> f64 {
    -10.0 * noise_variance.log10()
}
