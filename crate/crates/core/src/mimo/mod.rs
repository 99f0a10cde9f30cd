//! `n_t × n_r` MIMO OFDM-based OTFS.
//!
//! Stacked vectors are symbol-major, then antenna, then delay/subcarrier:
//! element `n·(n_a·M) + a·M + m` belongs to symbol (or Doppler bin) `n`,
//! antenna `a`, bin `m`. This is `vec` of the antenna-stacked `(M·n_a)×N`
//! grid.

use num_complex::Complex64;

use crate::channel::{awgn_with_rng, block_channels, stream_rng, LtvChannel, NoiseSpec};
use crate::error::{Error, Result};
use crate::linalg::{
    fft_blocks, ifft_blocks, unvec, vec, ComplexMatrix, ComplexVector, KronFactor, KronOperator,
};
use crate::otfs::{materialize, OtfsFrameConfig, WindowSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MimoConfig {
    pub frame: OtfsFrameConfig,
    pub n_t: usize,
    pub n_r: usize,
}

impl MimoConfig {
    pub fn new(frame: OtfsFrameConfig, n_t: usize, n_r: usize) -> Result<Self> {
        frame.validate()?;
        if n_t == 0 || n_r == 0 {
            return Err(Error::Config(format!(
                "antenna counts must be at least 1 (got n_t = {n_t}, n_r = {n_r})"
            )));
        }
        Ok(MimoConfig { frame, n_t, n_r })
    }

    pub fn siso(frame: OtfsFrameConfig) -> Self {
        MimoConfig {
            frame,
            n_t: 1,
            n_r: 1,
        }
    }

    /// `M·N·n_t`.
    pub fn tx_len(&self) -> usize {
        self.frame.grid_len() * self.n_t
    }

    /// `M·N·n_r`.
    pub fn rx_len(&self) -> usize {
        self.frame.grid_len() * self.n_r
    }
}

/// Per-antenna Doppler-delay grids `D⁰ … D^{n_t−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoDataStack {
    frame: OtfsFrameConfig,
    grids: Vec<ComplexMatrix>,
}

impl MimoDataStack {
    pub fn new(frame: OtfsFrameConfig, grids: Vec<ComplexMatrix>) -> Result<Self> {
        if grids.is_empty() {
            return Err(Error::Config(
                "data stack needs at least one antenna".into(),
            ));
        }
        if let Some(g) = grids.iter().find(|g| g.shape() != (frame.m, frame.n)) {
            return Err(Error::dimension(
                "MimoDataStack",
                format!("grid is {:?}, frame is {}x{}", g.shape(), frame.m, frame.n),
            ));
        }
        Ok(MimoDataStack { frame, grids })
    }

    /// Inverse of [`MimoDataStack::to_vector`].
    pub fn from_vector(frame: OtfsFrameConfig, antennas: usize, d: &[Complex64]) -> Result<Self> {
        let stacked = unvec(d, frame.m * antennas, frame.n)?;
        let grids = (0..antennas)
            .map(|t| stacked.block(t * frame.m, 0, frame.m, frame.n))
            .collect();
        Self::new(frame, grids)
    }

    pub fn antennas(&self) -> usize {
        self.grids.len()
    }

    pub fn frame(&self) -> &OtfsFrameConfig {
        &self.frame
    }

    pub fn grid(&self, antenna: usize) -> &ComplexMatrix {
        &self.grids[antenna]
    }

    /// `D̄`, the `(M·n_t)×N` vertical stack.
    pub fn stacked(&self) -> ComplexMatrix {
        let m = self.frame.m;
        let mut out = ComplexMatrix::zeros(m * self.antennas(), self.frame.n);
        for (t, g) in self.grids.iter().enumerate() {
            out.set_block(t * m, 0, g);
        }
        out
    }

    /// `d̄ = vec(D̄)`.
    pub fn to_vector(&self) -> ComplexVector {
        vec(&self.stacked())
    }
}

/// `(F_Nᴴ ⊗ I_{n_a} ⊗ F_M)`.
pub fn mimo_isfft_operator(frame: &OtfsFrameConfig, antennas: usize) -> KronOperator {
    KronOperator::new(vec![
        KronFactor::InverseDft(frame.n),
        KronFactor::Identity(antennas),
        KronFactor::Dft(frame.m),
    ])
}

/// `(F_N ⊗ I_{n_a} ⊗ F_Mᴴ)`.
pub fn mimo_sfft_operator(frame: &OtfsFrameConfig, antennas: usize) -> KronOperator {
    KronOperator::new(vec![
        KronFactor::Dft(frame.n),
        KronFactor::Identity(antennas),
        KronFactor::InverseDft(frame.m),
    ])
}

/// `x̄ = (F_Nᴴ ⊗ I_{n_t} ⊗ F_M) d̄`.
pub fn mimo_isfft(stack: &MimoDataStack) -> Result<ComplexVector> {
    mimo_isfft_operator(stack.frame(), stack.antennas()).apply(&stack.to_vector())
}

/// Diagonal of `blockdiag(I_{n_a} ⊗ U_n)`, one window shared by all antennas.
pub fn stacked_window_diagonal(
    w: &WindowSpec,
    antennas: usize,
    frame: &OtfsFrameConfig,
) -> Result<ComplexVector> {
    let diag = w.diagonal(frame)?;
    Ok(diag
        .chunks(frame.m)
        .flat_map(|symbol| (0..antennas).flat_map(move |_| symbol.iter().copied()))
        .collect())
}

/// Applies `Ū = blockdiag(I_{n_a} ⊗ U_n)` to a stacked vector.
pub fn mimo_window(
    x: &[Complex64],
    w: &WindowSpec,
    antennas: usize,
    frame: &OtfsFrameConfig,
) -> Result<ComplexVector> {
    let len = frame.grid_len() * antennas;
    if x.len() != len {
        return Err(Error::length("MIMO windowed signal", len, x.len()));
    }
    let diag = stacked_window_diagonal(w, antennas, frame)?;
    Ok(x.iter().zip(&diag).map(|(a, b)| a * b).collect())
}

/// Channels for every antenna pair; pair `(r, t)` links transmit antenna
/// `t` to receive antenna `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoChannel {
    n_t: usize,
    n_r: usize,
    pairs: Vec<LtvChannel>,
}

impl MimoChannel {
    /// `pairs` is row-major by receive antenna: index `r·n_t + t`.
    pub fn new(n_t: usize, n_r: usize, pairs: Vec<LtvChannel>) -> Result<Self> {
        if pairs.len() != n_t * n_r {
            return Err(Error::length(
                "antenna-pair channels",
                n_t * n_r,
                pairs.len(),
            ));
        }
        let (len, span) = (pairs[0].len(), pairs[0].span());
        if pairs.iter().any(|p| p.len() != len || p.span() != span) {
            return Err(Error::Config(
                "all antenna-pair channels must share length L and span T".into(),
            ));
        }
        Ok(MimoChannel { n_t, n_r, pairs })
    }

    pub fn from_fn(
        n_t: usize,
        n_r: usize,
        mut f: impl FnMut(usize, usize) -> Result<LtvChannel>,
    ) -> Result<Self> {
        let mut pairs = Vec::with_capacity(n_t * n_r);
        for r in 0..n_r {
            for t in 0..n_t {
                pairs.push(f(r, t)?);
            }
        }
        Self::new(n_t, n_r, pairs)
    }

    /// Antenna `a` talks only to antenna `a` through `ch`; cross links are
    /// silent.
    pub fn parallel(antennas: usize, ch: &LtvChannel) -> Self {
        let pairs = (0..antennas * antennas)
            .map(|i| {
                if i / antennas == i % antennas {
                    ch.clone()
                } else {
                    LtvChannel::zeros(ch.len(), ch.span())
                }
            })
            .collect();
        MimoChannel {
            n_t: antennas,
            n_r: antennas,
            pairs,
        }
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn len(&self) -> usize {
        self.pairs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn span(&self) -> usize {
        self.pairs[0].span()
    }

    pub fn pair(&self, r: usize, t: usize) -> &LtvChannel {
        &self.pairs[r * self.n_t + t]
    }

    pub fn pairs(&self) -> &[LtvChannel] {
        &self.pairs
    }

    fn check(&self, cfg: &MimoConfig) -> Result<()> {
        if (self.n_t, self.n_r) != (cfg.n_t, cfg.n_r) {
            return Err(Error::Config(format!(
                "channel is {}x{} (n_t x n_r) but configuration is {}x{}",
                self.n_t, self.n_r, cfg.n_t, cfg.n_r
            )));
        }
        if self.span() != cfg.frame.block_len() {
            return Err(Error::length(
                "channel span",
                cfg.frame.block_len(),
                self.span(),
            ));
        }
        if self.len() - 1 > cfg.frame.cp {
            return Err(Error::Config(format!(
                "channel memory L - 1 = {} exceeds cyclic prefix M_cp = {}",
                self.len() - 1,
                cfg.frame.cp
            )));
        }
        Ok(())
    }
}

/// Per-symbol MIMO channel matrices `H̄_n` (`M·n_r × M·n_t`), block
/// `(r, t)` being the SISO `H̃_n` of pair `(r, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoBlockChannel {
    pub blocks: Vec<ComplexMatrix>,
}

impl MimoBlockChannel {
    /// `H̄ = blockdiag(H̄_0 … H̄_{N−1})` applied to a stacked vector.
    pub fn apply(&self, s: &[Complex64]) -> ComplexVector {
        let cols = self.blocks[0].cols();
        self.blocks
            .iter()
            .zip(s.chunks(cols))
            .flat_map(|(b, chunk)| b.mul_vec(chunk).expect("block sizes are consistent"))
            .collect()
    }
}

pub fn mimo_block_channel(channel: &MimoChannel, cfg: &MimoConfig) -> Result<MimoBlockChannel> {
    channel.check(cfg)?;
    let (m, frame) = (cfg.frame.m, &cfg.frame);
    let mut blocks = vec![ComplexMatrix::zeros(m * cfg.n_r, m * cfg.n_t); frame.n];
    for r in 0..cfg.n_r {
        for t in 0..cfg.n_t {
            for (n, b) in block_channels(channel.pair(r, t), frame)?
                .into_iter()
                .enumerate()
            {
                blocks[n].set_block(r * m, t * m, &b);
            }
        }
    }
    Ok(MimoBlockChannel { blocks })
}

/// Intermediate signals of one MIMO OTFS block, each in stacked order
/// except the per-antenna time-domain streams.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoTranscript {
    pub d: ComplexVector,
    pub x: ComplexVector,
    pub x_windowed: ComplexVector,
    pub s: ComplexVector,
    /// `s̃ᵗ` per transmit antenna, `N(M+M_cp)` samples each.
    pub transmitted: Vec<ComplexVector>,
    /// `wʳ` per receive antenna.
    pub noise: Vec<ComplexVector>,
    /// `r̃ʳ` per receive antenna.
    pub received: Vec<ComplexVector>,
    pub r: ComplexVector,
    pub y_tilde: ComplexVector,
    pub y: ComplexVector,
    pub d_hat: ComplexVector,
}

/// Receiver: per-antenna received streams to `(r, y̆, y, d̂)`.
pub fn mimo_receive(
    received: &[ComplexVector],
    v: &WindowSpec,
    cfg: &MimoConfig,
) -> Result<(ComplexVector, ComplexVector, ComplexVector, ComplexVector)> {
    let frame = &cfg.frame;
    if received.len() != cfg.n_r {
        return Err(Error::length("receive antennas", cfg.n_r, received.len()));
    }
    if let Some(bad) = received.iter().find(|r| r.len() != frame.block_len()) {
        return Err(Error::length(
            "received stream",
            frame.block_len(),
            bad.len(),
        ));
    }
    let mut r = Vec::with_capacity(cfg.rx_len());
    for n in 0..frame.n {
        let start = n * frame.symbol_len() + frame.cp;
        for stream in received {
            r.extend_from_slice(&stream[start..start + frame.m]);
        }
    }
    let mut y_tilde = r.clone();
    fft_blocks(&mut y_tilde, frame.m);
    let y = mimo_window(&y_tilde, v, cfg.n_r, frame)?;
    let d_hat = mimo_sfft_operator(frame, cfg.n_r).apply(&y)?;
    Ok((r, y_tilde, y, d_hat))
}

/// Stage-by-stage MIMO chain. Noise, when given, is drawn per receive
/// antenna from independent streams of `noise.seed`.
pub fn mimo_chain(
    stack: &MimoDataStack,
    u: &WindowSpec,
    v: &WindowSpec,
    channel: &MimoChannel,
    noise: Option<&NoiseSpec>,
    cfg: &MimoConfig,
) -> Result<MimoTranscript> {
    channel.check(cfg)?;
    let frame = &cfg.frame;
    if stack.antennas() != cfg.n_t || stack.frame() != frame {
        return Err(Error::Config(format!(
            "data stack has {} antennas, configuration expects {}",
            stack.antennas(),
            cfg.n_t
        )));
    }
    let d = stack.to_vector();
    let x = mimo_isfft(stack)?;
    let x_windowed = mimo_window(&x, u, cfg.n_t, frame)?;
    let mut s = x_windowed.clone();
    ifft_blocks(&mut s, frame.m);

    let transmitted: Vec<ComplexVector> = (0..cfg.n_t)
        .map(|t| {
            let mut stream = Vec::with_capacity(frame.block_len());
            for n in 0..frame.n {
                let start = (n * cfg.n_t + t) * frame.m;
                let symbol = &s[start..start + frame.m];
                stream.extend_from_slice(&symbol[frame.m - frame.cp..]);
                stream.extend_from_slice(symbol);
            }
            stream
        })
        .collect();

    let noise: Vec<ComplexVector> = (0..cfg.n_r)
        .map(|r| match noise {
            Some(spec) => awgn_with_rng(
                frame.block_len(),
                spec.variance,
                &mut stream_rng(spec.seed, 0, r as u64),
            ),
            None => vec![Complex64::new(0.0, 0.0); frame.block_len()],
        })
        .collect();

    let mut received = noise.clone();
    for (r, acc) in received.iter_mut().enumerate() {
        for (t, stream) in transmitted.iter().enumerate() {
            for (a, z) in acc.iter_mut().zip(channel.pair(r, t).apply(stream)?) {
                *a += z;
            }
        }
    }

    let (r, y_tilde, y, d_hat) = mimo_receive(&received, v, cfg)?;
    Ok(MimoTranscript {
        d,
        x,
        x_windowed,
        s,
        transmitted,
        noise,
        received,
        r,
        y_tilde,
        y,
        d_hat,
    })
}

/// Matrix-free `d̄ ↦ d̂` (noiseless) through the per-symbol channels `H̄_n`.
#[derive(Clone, Debug)]
pub struct MimoEffectiveOperator {
    cfg: MimoConfig,
    tx: ComplexVector,
    rx: ComplexVector,
    channel: MimoBlockChannel,
}

impl MimoEffectiveOperator {
    pub fn new(
        channel: &MimoChannel,
        u: &WindowSpec,
        v: &WindowSpec,
        cfg: &MimoConfig,
    ) -> Result<Self> {
        Ok(MimoEffectiveOperator {
            cfg: *cfg,
            tx: stacked_window_diagonal(u, cfg.n_t, &cfg.frame)?,
            rx: stacked_window_diagonal(v, cfg.n_r, &cfg.frame)?,
            channel: mimo_block_channel(channel, cfg)?,
        })
    }

    pub fn apply(&self, d: &[Complex64]) -> Result<ComplexVector> {
        let frame = &self.cfg.frame;
        let mut x = mimo_isfft_operator(frame, self.cfg.n_t).apply(d)?;
        for (a, w) in x.iter_mut().zip(&self.tx) {
            *a *= w;
        }
        ifft_blocks(&mut x, frame.m);
        let mut y = self.channel.apply(&x);
        fft_blocks(&mut y, frame.m);
        for (a, w) in y.iter_mut().zip(&self.rx) {
            *a *= w;
        }
        mimo_sfft_operator(frame, self.cfg.n_r).apply(&y)
    }

    pub fn materialize(&self) -> Result<ComplexMatrix> {
        materialize(self.cfg.rx_len(), self.cfg.tx_len(), |e| self.apply(e))
    }
}

/// Dense `(MN·n_r)×(MN·n_t)` end-to-end matrix.
pub fn mimo_effective_matrix(
    channel: &MimoChannel,
    u: &WindowSpec,
    v: &WindowSpec,
    cfg: &MimoConfig,
) -> Result<ComplexMatrix> {
    MimoEffectiveOperator::new(channel, u, v, cfg)?.materialize()
}
