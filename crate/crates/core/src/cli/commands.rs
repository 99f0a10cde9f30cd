//! The four run modes. Each returns its files as bytes; nothing here
//! touches the filesystem except reading a symbol file.

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use crate::capacity::{capacity_sweep, mi_from_gram, ofdm_symbol_matrices, otfs_k_matrix};
use crate::channel::{
    assemble_h_matrix, awgn_with_rng, block_channels, max_off_block_diagonal, stream_rng,
    synthesize_unchecked,
};
use crate::error::{Error, Result};
use crate::linalg::{
    check_dense_size, dft_matrix, kron, max_abs, max_abs_diff, vec, ComplexMatrix, ComplexVector,
};
use crate::mimo::{
    mimo_chain, mimo_effective_matrix, mimo_isfft_operator, mimo_receive, mimo_sfft_operator,
    MimoChannel, MimoDataStack, MimoEffectiveOperator,
};
use crate::otfs::{
    cp_reduced_channel, dd_channel_as_2d_convolution, effective_frequency_channel,
    effective_matrix_frequency_domain, effective_matrix_general, effective_matrix_rectangular,
    effective_matrix_separable, frequency_domain_channel, isfft_operator, SeparableWindows,
    TwoDimConvolution, WindowRole, WindowSpec,
};

use super::config::{ExperimentConfig, Mode, SymbolKind};
use super::output::{
    complex_pairs, matrix_entries_csv, mimo_channel_to_json, parse_complex_pairs, records_csv,
    ResultRecord, RowKind,
};

/// Random stream reserved for data symbols (channel pairs use the low ids).
const DATA_STREAM: u64 = 0xffff;
/// Random stream reserved for the instances drawn by `verify`.
const VERIFY_STREAM: u64 = 0xfffe;
/// Noise draws use a seed derived from the run seed so they never share a
/// stream with the channel.
const NOISE_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// Largest `|d̂ − E d − ŵ|` accepted by `simulate`.
pub const SIMULATE_RESIDUAL_TOL: f64 = 1e-9;

/// A file to write, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Artifact {
            name: name.into(),
            bytes: text.into().into_bytes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// False when an invariant failed; the run still produced its report.
    pub passed: bool,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

impl RunOutput {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn config_value(cfg: &ExperimentConfig) -> Value {
    serde_json::from_str(&cfg.to_json()).expect("canonical config is JSON")
}

fn config_artifact(cfg: &ExperimentConfig) -> Artifact {
    Artifact::new("config.json", cfg.to_json() + "\n")
}

fn first_channel(cfg: &ExperimentConfig) -> Result<MimoChannel> {
    cfg.scenario()?.realize(cfg.run.seed, 0)
}

pub fn run(mode: Mode, cfg: &ExperimentConfig) -> Result<RunOutput> {
    match mode {
        Mode::Capacity => run_capacity(cfg),
        Mode::Simulate => run_simulate(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::EffectiveChannel => run_effective_channel(cfg),
    }
}

/// Monte Carlo capacity at every configured noise level. Writes
/// `results.csv`, `summary.json`, `config.json`, and optionally
/// `channels/trial-NNNNN.json`.
pub fn run_capacity(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(Mode::Capacity)?;
    let scenario = cfg.scenario()?;
    let levels = cfg.noise.levels();
    let sigma2: Vec<f64> = levels.iter().map(|l| l.sigma2).collect();
    let (trials, seed, hash) = (cfg.run.trials, cfg.run.seed, cfg.hash());
    let results = capacity_sweep(&scenario, &sigma2, trials, seed)?;

    let frame = &cfg.frame;
    let block_samples = (frame.n * frame.symbol_len()) as f64;
    let mut records = Vec::new();
    let mut summary_rows = Vec::new();
    let mut summary = Vec::new();
    let mut max_route_gap = 0.0f64;
    for (level, res) in levels.iter().zip(&results) {
        let mean_otfs = res.trials.iter().map(|t| t.otfs_bits).sum::<f64>() / trials as f64;
        let mean_ofdm = res.trials.iter().map(|t| t.ofdm_sum_bits).sum::<f64>() / trials as f64;
        let gap = res
            .trials
            .iter()
            .map(|t| (t.otfs_bits - t.ofdm_sum_bits).abs())
            .fold(0.0, f64::max);
        max_route_gap = max_route_gap.max(gap);
        let base = |kind, otfs, ofdm, cap, ofdm_cap, ci| ResultRecord {
            kind,
            snr_db: level.snr_db,
            sigma2: level.sigma2,
            mi_otfs_bits: otfs,
            mi_ofdm_sum_bits: ofdm,
            capacity_bits_per_sample: cap,
            ofdm_capacity_bits_per_sample: ofdm_cap,
            ci_halfwidth: ci,
            trials,
            seed,
            config_hash: hash.clone(),
        };
        records.push(base(
            RowKind::Aggregate,
            mean_otfs,
            mean_ofdm,
            res.otfs_capacity,
            res.ofdm_capacity,
            Some(res.ci_half_width),
        ));
        if cfg.run.per_trial {
            for t in &res.trials {
                records.push(base(
                    RowKind::Trial(t.trial),
                    t.otfs_bits,
                    t.ofdm_sum_bits,
                    t.otfs_bits / block_samples,
                    t.ofdm_sum_bits / block_samples,
                    None,
                ));
            }
        }
        summary_rows.push(json!({
            "snr_db": level.snr_db,
            "sigma2": level.sigma2,
            "otfs_capacity_bits_per_sample": res.otfs_capacity,
            "ofdm_capacity_bits_per_sample": res.ofdm_capacity,
            "ci_halfwidth": res.ci_half_width,
            "max_route_difference_bits": gap,
            "max_kkh_offdiag": res.trials.iter().map(|t| t.max_offdiag).fold(0.0, f64::max),
        }));
        summary.push(format!(
            "snr_db {:>8.3}  sigma2 {:.6e}  C_OTFS {:.12}  C_OFDM {:.12}  ±{:.3e}",
            level.snr_db, level.sigma2, res.otfs_capacity, res.ofdm_capacity, res.ci_half_width
        ));
    }

    let mut artifacts = vec![
        Artifact::new("results.csv", records_csv(&records)),
        Artifact::new(
            "summary.json",
            pretty(&json!({
                "mode": "capacity",
                "config_hash": hash,
                "trials": trials,
                "seed": seed,
                "max_route_difference_bits": max_route_gap,
                "results": summary_rows,
                "config": config_value(cfg),
            })),
        ),
        config_artifact(cfg),
    ];
    if cfg.run.export_channels {
        for trial in 0..trials {
            let ch = scenario.realize(seed, trial as u64)?;
            artifacts.push(Artifact::new(
                format!("channels/trial-{trial:05}.json"),
                mimo_channel_to_json(&ch)?,
            ));
        }
    }
    Ok(RunOutput {
        artifacts,
        passed: true,
        summary,
    })
}

fn load_symbols(cfg: &ExperimentConfig, len: usize) -> Result<ComplexVector> {
    match &cfg.run.symbols {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read symbol file {path}: {e}")))?;
            let d = parse_complex_pairs(&text).map_err(|e| {
                Error::Config(format!(
                    "symbol file {path} is not a list of [re, im] pairs: {e}"
                ))
            })?;
            if d.len() != len {
                return Err(Error::length("symbol file entries (M*N*n_t)", len, d.len()));
            }
            if !d.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite("symbol file"));
            }
            Ok(d)
        }
        None => {
            let mut rng = stream_rng(cfg.run.seed, 0, DATA_STREAM);
            Ok(match cfg.run.symbol_kind {
                SymbolKind::Qpsk => {
                    let a = std::f64::consts::FRAC_1_SQRT_2;
                    (0..len)
                        .map(|_| {
                            let (i, q): (bool, bool) = (rng.random(), rng.random());
                            Complex64::new(if i { a } else { -a }, if q { a } else { -a })
                        })
                        .collect()
                }
                SymbolKind::Gaussian => awgn_with_rng(len, 1.0, &mut rng),
            })
        }
    }
}

/// Runs one block through the stage-by-stage chain and checks it against
/// the effective operator. Writes `transcript.json`, `channel.json`,
/// `config.json`.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(Mode::Simulate)?;
    let mimo = cfg.mimo_config()?;
    let (u, v) = (cfg.tx_window(), cfg.rx_window());
    let channel = first_channel(cfg)?;
    let d = load_symbols(cfg, mimo.tx_len())?;
    let stack = MimoDataStack::from_vector(cfg.frame, mimo.n_t, &d)?;
    let noise = cfg
        .noise
        .levels()
        .first()
        .map(|l| {
            crate::channel::NoiseSpec::new(l.sigma2, cfg.run.seed.wrapping_add(NOISE_SEED_OFFSET))
        })
        .transpose()?;
    let t = mimo_chain(&stack, &u, &v, &channel, noise.as_ref(), &mimo)?;

    let predicted = MimoEffectiveOperator::new(&channel, &u, &v, &mimo)?.apply(&t.d)?;
    let (_, _, _, w_hat) = mimo_receive(&t.noise, &v, &mimo)?;
    let residual = t
        .d_hat
        .iter()
        .zip(&predicted)
        .zip(&w_hat)
        .map(|((a, b), w)| (a - b - w).norm())
        .fold(0.0, f64::max);
    let error = if mimo.n_t == mimo.n_r {
        max_abs_diff(&t.d_hat, &t.d)
    } else {
        f64::NAN
    };
    let passed = residual <= SIMULATE_RESIDUAL_TOL;

    let transcript = json!({
        "mode": "simulate",
        "config_hash": cfg.hash(),
        "noise_variance": noise.map(|n| n.variance),
        "residual": residual,
        "residual_tolerance": SIMULATE_RESIDUAL_TOL,
        "max_abs_error": if error.is_nan() { Value::Null } else { json!(error) },
        "stages": {
            "d": complex_pairs(&t.d),
            "x": complex_pairs(&t.x),
            "x_windowed": complex_pairs(&t.x_windowed),
            "s": complex_pairs(&t.s),
            "transmitted": t.transmitted.iter().map(|s| complex_pairs(s)).collect::<Vec<_>>(),
            "noise": t.noise.iter().map(|s| complex_pairs(s)).collect::<Vec<_>>(),
            "received": t.received.iter().map(|s| complex_pairs(s)).collect::<Vec<_>>(),
            "r": complex_pairs(&t.r),
            "y_tilde": complex_pairs(&t.y_tilde),
            "y": complex_pairs(&t.y),
            "d_hat": complex_pairs(&t.d_hat),
            "w_hat": complex_pairs(&w_hat),
        },
    });
    let mut summary = vec![format!(
        "residual |d_hat - E d - w_hat|_max = {residual:.3e} (tolerance {SIMULATE_RESIDUAL_TOL:.0e})"
    )];
    if !error.is_nan() {
        summary.push(format!("|d_hat - d|_max = {error:.3e}"));
    }
    Ok(RunOutput {
        artifacts: vec![
            Artifact::new("transcript.json", pretty(&transcript)),
            Artifact::new("channel.json", mimo_channel_to_json(&channel)?),
            config_artifact(cfg),
        ],
        passed,
        summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    fn measure(name: &'static str, measured: f64, tolerance: f64) -> Self {
        let status = if measured <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Check {
            name,
            status,
            measured: Some(measured),
            tolerance: Some(tolerance),
            detail: String::new(),
        }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn skipped(name: &'static str, why: impl Into<String>) -> Self {
        Check {
            name,
            status: CheckStatus::Skipped,
            measured: None,
            tolerance: None,
            detail: why.into(),
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "status": match self.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "fail",
                CheckStatus::Skipped => "skipped",
            },
            "measured": self.measured,
            "tolerance": self.tolerance,
            "detail": self.detail,
        })
    }

    fn line(&self) -> String {
        let tag = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        match (self.measured, self.tolerance) {
            (Some(m), Some(t)) => {
                format!("{tag} {:<34} {m:.3e} <= {t:.1e} {}", self.name, self.detail)
            }
            _ => format!("{tag} {:<34} {}", self.name, self.detail),
        }
    }
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

fn random_vector<R: Rng>(rng: &mut R, len: usize) -> ComplexVector {
    (0..len)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

fn random_weights<R: Rng>(rng: &mut R, len: usize) -> ComplexVector {
    (0..len)
        .map(|_| Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(-3.0..3.0)))
        .collect()
}

fn relative(dev: f64, scale: f64) -> f64 {
    dev / scale.max(1.0)
}

/// Kronecker, DFT and transform identities at the configured sizes.
fn algebra_checks(
    cfg: &ExperimentConfig,
    rng: &mut impl Rng,
    checks: &mut Vec<Check>,
) -> Result<()> {
    let (m, n) = (cfg.frame.m, cfg.frame.n);
    let (p, q) = (m.min(4), n.min(4));
    let (a, b) = (random_matrix(rng, p, q), random_matrix(rng, q, p));
    let (c, d) = (random_matrix(rng, q, p), random_matrix(rng, p, q));
    let lhs = kron(&a, &b)?.mul(&kron(&c, &d)?)?;
    let rhs = kron(&a.mul(&c)?, &b.mul(&d)?)?;
    checks.push(Check::measure(
        "kron.mixed_product",
        relative(lhs.max_abs_diff(&rhs), lhs.max_abs()),
        1e-10,
    ));

    let lhs = kron(&a, &b)?.adjoint();
    let rhs = kron(&a.adjoint(), &b.adjoint())?;
    checks.push(Check::measure(
        "kron.adjoint_order",
        lhs.max_abs_diff(&rhs),
        1e-10,
    ));

    let x = random_matrix(rng, q, q);
    let lhs = kron(&b.transpose(), &a)?.mul_vec(&vec(&x))?;
    let rhs = vec(&a.mul(&x)?.mul(&b)?);
    checks.push(Check::measure(
        "kron.vec_identity",
        relative(max_abs_diff(&lhs, &rhs), max_abs(&rhs)),
        1e-10,
    ));

    for (name, size) in [("dft.unitary_m", m), ("dft.unitary_n", n)] {
        let f = dft_matrix(size);
        let dev = f
            .mul(&f.adjoint())?
            .max_abs_diff(&ComplexMatrix::identity(size));
        checks.push(Check::measure(name, dev, 1e-10).with_detail(format!("size {size}")));
    }

    let mn = cfg.frame.grid_len();
    let d = random_vector(rng, mn * cfg.mimo.n_t);
    let op = mimo_isfft_operator(&cfg.frame, cfg.mimo.n_t);
    let back = mimo_sfft_operator(&cfg.frame, cfg.mimo.n_t).apply(&op.apply(&d)?)?;
    checks.push(Check::measure(
        "sfft.round_trip",
        max_abs_diff(&back, &d),
        1e-10,
    ));

    if mn * mn <= cfg.run.dense_cap && mn <= 1024 {
        let x = random_vector(rng, mn);
        let dense = isfft_operator(&cfg.frame).materialize()?.mul_vec(&x)?;
        let fast = isfft_operator(&cfg.frame).apply(&x)?;
        checks.push(Check::measure(
            "kron.operator_matches_dense",
            max_abs_diff(&dense, &fast),
            1e-10,
        ));
    } else {
        checks.push(Check::skipped(
            "kron.operator_matches_dense",
            "M*N above the dense check limit",
        ));
    }
    Ok(())
}

/// Full invariant suite at the configured dimensions. Writes `verify.json`
/// and `config.json`; `passed` is false when any check fails.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(Mode::Verify)?;
    let mimo = cfg.mimo_config()?;
    let frame = cfg.frame;
    let (u, v) = (cfg.tx_window(), cfg.rx_window());
    let mut rng = stream_rng(cfg.run.seed, 0, VERIFY_STREAM);
    let mut checks = Vec::new();
    algebra_checks(cfg, &mut rng, &mut checks)?;

    let channel = cfg
        .scenario()?
        .realize_with(cfg.run.seed, 0, synthesize_unchecked)?;
    let block_len = frame.block_len();
    check_dense_size(block_len, block_len, cfg.run.dense_cap)?;

    // block structure of every antenna pair's prefix-reduced channel
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut reduced = Vec::new();
    for pair in channel.pairs() {
        let h_tilde = cp_reduced_channel(&assemble_h_matrix(pair)?, &frame)?;
        worst = worst.max(max_off_block_diagonal(&h_tilde, frame.m, frame.m));
        scale = scale.max(h_tilde.max_abs());
        reduced.push(h_tilde);
    }
    let block_ok = worst <= 1e-12 * scale.max(1.0);
    checks.push(
        Check::measure("channel.block_diagonal", relative(worst, scale), 1e-12)
            .with_detail(format!("L = {}, cp = {}", channel.len(), frame.cp)),
    );
    let dependents = [
        "channel.block_fast_path",
        "chain.matches_effective",
        "effective.rectangular",
        "effective.separable",
        "effective.frequency_domain",
        "capacity.kkh_block_diagonal",
        "capacity.mi_additivity",
    ];
    if !block_ok {
        for name in dependents {
            checks.push(Check::skipped(
                name,
                "needs a block-diagonal channel (cp >= L - 1)",
            ));
        }
        return Ok(verify_output(cfg, checks));
    }

    let mut fast_dev = 0.0f64;
    for (pair, h_tilde) in channel.pairs().iter().zip(&reduced) {
        let fast = ComplexMatrix::block_diagonal(&block_channels(pair, &frame)?);
        fast_dev = fast_dev.max(fast.max_abs_diff(h_tilde));
    }
    checks.push(Check::measure("channel.block_fast_path", fast_dev, 1e-12));

    let d = random_vector(&mut rng, mimo.tx_len());
    let stack = MimoDataStack::from_vector(frame, mimo.n_t, &d)?;
    let chain = mimo_chain(&stack, &u, &v, &channel, None, &mimo)?;
    let via_operator = MimoEffectiveOperator::new(&channel, &u, &v, &mimo)?.apply(&d)?;
    checks.push(Check::measure(
        "chain.matches_effective",
        relative(
            max_abs_diff(&chain.d_hat, &via_operator),
            max_abs(&via_operator),
        ),
        1e-10,
    ));

    let mn = frame.grid_len();
    if mn * mn <= cfg.run.dense_cap {
        let h = assemble_h_matrix(channel.pair(0, 0))?;
        let h_tilde = &reduced[0];
        let rect_t = WindowSpec::rectangular(WindowRole::Transmit);
        let rect_r = WindowSpec::rectangular(WindowRole::Receive);
        let general = effective_matrix_general(&h, &rect_t, &rect_r, &frame)?;
        let rect = effective_matrix_rectangular(h_tilde, &frame)?;
        checks.push(Check::measure(
            "effective.rectangular",
            relative(general.max_abs_diff(&rect), general.max_abs()),
            1e-10,
        ));

        let su = WindowSpec::separable(
            WindowRole::Transmit,
            random_weights(&mut rng, frame.n),
            random_weights(&mut rng, frame.m),
        );
        let sv = WindowSpec::separable(
            WindowRole::Receive,
            random_weights(&mut rng, frame.n),
            random_weights(&mut rng, frame.m),
        );
        let windows = SeparableWindows::from_specs(&su, &sv, &frame).expect("separable windows");
        let general = effective_matrix_general(&h, &su, &sv, &frame)?;
        let sep = effective_matrix_separable(h_tilde, &windows, &frame)?;
        checks.push(Check::measure(
            "effective.separable",
            relative(general.max_abs_diff(&sep), general.max_abs()),
            1e-10,
        ));

        let general = effective_matrix_general(&h, &u, &v, &frame)?;
        let freq = effective_matrix_frequency_domain(
            &frequency_domain_channel(h_tilde, &frame)?,
            &u,
            &v,
            &frame,
        )?;
        checks.push(Check::measure(
            "effective.frequency_domain",
            relative(general.max_abs_diff(&freq), general.max_abs()),
            1e-10,
        ));
    } else {
        for name in [
            "effective.rectangular",
            "effective.separable",
            "effective.frequency_domain",
        ] {
            checks.push(Check::skipped(name, "(M*N)^2 above run.dense_cap"));
        }
    }

    if mimo.rx_len() * mimo.tx_len() <= cfg.run.dense_cap {
        let symbols = ofdm_symbol_matrices(&channel, &u, &mimo)?;
        let gram = otfs_k_matrix(&symbols, &mimo)?.gram();
        let block = frame.m * mimo.n_r;
        let off = max_off_block_diagonal(&gram, block, block);
        checks.push(Check::measure(
            "capacity.kkh_block_diagonal",
            relative(off, gram.max_abs()),
            1e-12,
        ));
        let sigma2 = cfg.noise.levels().first().map_or(1.0, |l| l.sigma2);
        let total = mi_from_gram(&gram, sigma2)?;
        let parts = symbols
            .iter()
            .map(|k| mi_from_gram(&k.gram(), sigma2))
            .sum::<Result<f64>>()?;
        checks.push(
            Check::measure("capacity.mi_additivity", (total - parts).abs(), 1e-8)
                .with_detail(format!("sigma2 = {sigma2}, total {total:.6} bits")),
        );
    } else {
        for name in ["capacity.kkh_block_diagonal", "capacity.mi_additivity"] {
            checks.push(Check::skipped(name, "K above run.dense_cap"));
        }
    }
    Ok(verify_output(cfg, checks))
}

fn verify_output(cfg: &ExperimentConfig, checks: Vec<Check>) -> RunOutput {
    let passed = checks.iter().all(|c| c.status != CheckStatus::Fail);
    let report = json!({
        "mode": "verify",
        "config_hash": cfg.hash(),
        "all_passed": passed,
        "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
    });
    RunOutput {
        artifacts: vec![
            Artifact::new("verify.json", pretty(&report)),
            config_artifact(cfg),
        ],
        passed,
        summary: checks.iter().map(Check::line).collect(),
    }
}

/// Dumps the Doppler-delay effective matrix (and optionally `V H̃_f U`).
/// Writes `effective_dd.csv`, `summary.json`, `channel.json`, `config.json`
/// and, when requested, `effective_tf.csv`.
pub fn run_effective_channel(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate(Mode::EffectiveChannel)?;
    let mimo = cfg.mimo_config()?;
    let frame = cfg.frame;
    check_dense_size(mimo.rx_len(), mimo.tx_len(), cfg.run.dense_cap)?;
    let (u, v) = (cfg.tx_window(), cfg.rx_window());
    let channel = first_channel(cfg)?;
    let e = mimo_effective_matrix(&channel, &u, &v, &mimo)?;
    let (dd_csv, dd_count) = matrix_entries_csv(&e, cfg.run.threshold);
    let mut summary = vec![format!(
        "effective matrix {}x{}, {dd_count} entries above {:.1e}",
        e.rows(),
        e.cols(),
        cfg.run.threshold
    )];

    let convolution = if (mimo.n_t, mimo.n_r) == (1, 1) {
        let res = dd_channel_as_2d_convolution(&e, &frame)?;
        let circulant = matches!(res, TwoDimConvolution::Kernel { .. });
        summary.push(format!(
            "2D circular convolution: {} (max deviation {:.3e})",
            if circulant { "yes" } else { "no" },
            res.max_deviation()
        ));
        json!({ "circulant": circulant, "max_deviation": res.max_deviation() })
    } else {
        Value::Null
    };

    let mut artifacts = vec![Artifact::new("effective_dd.csv", dd_csv)];
    let mut tf_count = Value::Null;
    if cfg.run.frequency_domain {
        let h_tilde = ComplexMatrix::block_diagonal(&block_channels(channel.pair(0, 0), &frame)?);
        let tf = effective_frequency_channel(
            &frequency_domain_channel(&h_tilde, &frame)?,
            &u,
            &v,
            &frame,
        )?;
        let (tf_csv, count) = matrix_entries_csv(&tf, cfg.run.threshold);
        summary.push(format!(
            "time-frequency channel {}x{}, {count} entries",
            tf.rows(),
            tf.cols()
        ));
        tf_count = json!(count);
        artifacts.push(Artifact::new("effective_tf.csv", tf_csv));
    }
    artifacts.push(Artifact::new(
        "summary.json",
        pretty(&json!({
            "mode": "effective-channel",
            "config_hash": cfg.hash(),
            "rows": e.rows(),
            "cols": e.cols(),
            "threshold": cfg.run.threshold,
            "entries": dd_count,
            "frequency_domain_entries": tf_count,
            "two_dim_convolution": convolution,
        })),
    ));
    artifacts.push(Artifact::new(
        "channel.json",
        mimo_channel_to_json(&channel)?,
    ));
    artifacts.push(config_artifact(cfg));
    Ok(RunOutput {
        artifacts,
        passed: true,
        summary,
    })
}
