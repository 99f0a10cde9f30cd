//! Builders for the end-to-end Doppler-delay matrix
//!
//! ```text
//! (F_N ⊗ F_Mᴴ) V (I_N ⊗ F_M)(I_N ⊗ R_cp) H (I_N ⊗ A_cp)(I_N ⊗ F_Mᴴ) U (F_Nᴴ ⊗ F_M)
//! ```
//!
//! and its specializations. Every builder works column by column through
//! matrix-free Kronecker operators, so only the `MN×MN` result is dense.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{
    check_dense_size, dft_matrix, idft_matrix, ComplexMatrix, ComplexVector, KronFactor,
    KronOperator, NonzeroColumns, DEFAULT_DENSE_CAP,
};

use super::cp::CpMatrices;
use super::frame::OtfsFrameConfig;
use super::transforms::{isfft_operator, sfft_operator};
use super::window::WindowSpec;

fn unit(n: usize, j: usize) -> ComplexVector {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[j] = Complex64::new(1.0, 0.0);
    e
}

/// Materializes the linear map `f` column by column.
pub(crate) fn materialize<F>(rows: usize, cols: usize, f: F) -> Result<ComplexMatrix>
where
    F: Fn(&[Complex64]) -> Result<ComplexVector> + Sync,
{
    check_dense_size(rows, cols, DEFAULT_DENSE_CAP)?;
    let columns: Vec<ComplexVector> = (0..cols)
        .into_par_iter()
        .map(|j| f(&unit(cols, j)))
        .collect::<Result<_>>()?;
    let data = columns.into_iter().flatten().collect();
    ComplexMatrix::from_col_major(rows, cols, data)
}

fn scale_by(x: &mut [Complex64], diag: &[Complex64]) {
    for (a, w) in x.iter_mut().zip(diag) {
        *a *= w;
    }
}

fn check_square(op: &'static str, m: &ComplexMatrix, size: usize) -> Result<()> {
    if m.shape() != (size, size) {
        return Err(Error::dimension(
            op,
            format!("matrix is {:?}, expected {size}x{size}", m.shape()),
        ));
    }
    Ok(())
}

fn check_diag(what: &'static str, d: &[Complex64], len: usize) -> Result<()> {
    if d.len() != len {
        return Err(Error::length(what, len, d.len()));
    }
    Ok(())
}

/// Matrix-free form of the general end-to-end relationship.
#[derive(Clone, Debug)]
pub struct EffectiveOperator {
    cfg: OtfsFrameConfig,
    tx: ComplexVector,
    rx: ComplexVector,
    channel: NonzeroColumns,
    isfft: KronOperator,
    ofdm_mod: KronOperator,
    cp_add: KronOperator,
    cp_remove: KronOperator,
    ofdm_demod: KronOperator,
    sfft: KronOperator,
}

impl EffectiveOperator {
    /// `h` is the `N(M+M_cp)`-square time-domain channel matrix.
    pub fn new(
        h: &ComplexMatrix,
        u: &WindowSpec,
        v: &WindowSpec,
        cfg: &OtfsFrameConfig,
    ) -> Result<Self> {
        check_square("effective operator", h, cfg.block_len())?;
        let cp = CpMatrices::new(cfg);
        let n = cfg.n;
        Ok(EffectiveOperator {
            cfg: *cfg,
            tx: u.diagonal(cfg)?,
            rx: v.diagonal(cfg)?,
            channel: NonzeroColumns::new(h),
            isfft: isfft_operator(cfg),
            ofdm_mod: KronOperator::new(vec![
                KronFactor::Identity(n),
                KronFactor::InverseDft(cfg.m),
            ]),
            cp_add: KronOperator::new(vec![KronFactor::Identity(n), KronFactor::Dense(cp.add)]),
            cp_remove: KronOperator::new(vec![
                KronFactor::Identity(n),
                KronFactor::Dense(cp.remove),
            ]),
            ofdm_demod: KronOperator::new(vec![KronFactor::Identity(n), KronFactor::Dft(cfg.m)]),
            sfft: sfft_operator(cfg),
        })
    }

    pub fn config(&self) -> &OtfsFrameConfig {
        &self.cfg
    }

    /// Noiseless `d̂` for data vector `d`.
    pub fn apply(&self, d: &[Complex64]) -> Result<ComplexVector> {
        let mut x = self.isfft.apply(d)?;
        scale_by(&mut x, &self.tx);
        let s = self.ofdm_mod.apply(&x)?;
        let s_cp = self.cp_add.apply(&s)?;
        debug_assert_eq!(s_cp.len(), self.channel.ncols());
        let r_cp = self.channel.mul_vec(&s_cp);
        let r = self.cp_remove.apply(&r_cp)?;
        let mut y = self.ofdm_demod.apply(&r)?;
        scale_by(&mut y, &self.rx);
        self.sfft.apply(&y)
    }

    pub fn materialize(&self) -> Result<ComplexMatrix> {
        let mn = self.cfg.grid_len();
        materialize(mn, mn, |e| self.apply(e))
    }
}

/// Dense `MN×MN` end-to-end matrix for time-domain channel `h` and
/// windows `u` (transmit), `v` (receive).
pub fn effective_matrix_general(
    h: &ComplexMatrix,
    u: &WindowSpec,
    v: &WindowSpec,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexMatrix> {
    EffectiveOperator::new(h, u, v, cfg)?.materialize()
}

/// Diagonal factors of separable windows: transmit `U = diag(a) ⊗ diag(b)`,
/// receive `V = diag(p) ⊗ diag(q)`. `a`, `p` have length `N`; `b`, `q`
/// length `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableWindows {
    pub a: ComplexVector,
    pub b: ComplexVector,
    pub p: ComplexVector,
    pub q: ComplexVector,
}

impl SeparableWindows {
    pub fn from_specs(u: &WindowSpec, v: &WindowSpec, cfg: &OtfsFrameConfig) -> Option<Self> {
        let (a, b) = u.separable_factors(cfg)?;
        let (p, q) = v.separable_factors(cfg)?;
        Some(SeparableWindows { a, b, p, q })
    }
}

/// `(I_N ⊗ F_Mᴴ Q F_M)(F_N ⊗ I_M)(P ⊗ I_M) H̃ (A ⊗ I_M)(F_Nᴴ ⊗ I_M)(I_N ⊗ F_Mᴴ B F_M)`
/// for the block-diagonal `MN×MN` channel `h_tilde`.
pub fn effective_matrix_separable(
    h_tilde: &ComplexMatrix,
    windows: &SeparableWindows,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexMatrix> {
    let (m, n) = (cfg.m, cfg.n);
    check_square("effective_matrix_separable", h_tilde, cfg.grid_len())?;
    check_diag("window factor a", &windows.a, n)?;
    check_diag("window factor b", &windows.b, m)?;
    check_diag("window factor p", &windows.p, n)?;
    check_diag("window factor q", &windows.q, m)?;

    let freq_filter = |w: &[Complex64]| -> Result<ComplexMatrix> {
        idft_matrix(m)
            .mul(&ComplexMatrix::from_diagonal(w))?
            .mul(&dft_matrix(m))
    };
    let right = [
        KronOperator::new(vec![
            KronFactor::Identity(n),
            KronFactor::Dense(freq_filter(&windows.b)?),
        ]),
        KronOperator::new(vec![KronFactor::InverseDft(n), KronFactor::Identity(m)]),
        KronOperator::new(vec![
            KronFactor::Diagonal(windows.a.clone()),
            KronFactor::Identity(m),
        ]),
    ];
    let left = [
        KronOperator::new(vec![
            KronFactor::Diagonal(windows.p.clone()),
            KronFactor::Identity(m),
        ]),
        KronOperator::new(vec![KronFactor::Dft(n), KronFactor::Identity(m)]),
        KronOperator::new(vec![
            KronFactor::Identity(n),
            KronFactor::Dense(freq_filter(&windows.q)?),
        ]),
    ];
    let channel = NonzeroColumns::new(h_tilde);
    let mn = cfg.grid_len();
    materialize(mn, mn, |e| {
        let mut x = e.to_vec();
        for op in &right {
            x = op.apply(&x)?;
        }
        x = channel.mul_vec(&x);
        for op in &left {
            x = op.apply(&x)?;
        }
        Ok(x)
    })
}

/// `(F_N ⊗ I_M) H̃ (F_Nᴴ ⊗ I_M)`: rectangular windows, where the `F_M`
/// factors cancel by the mixed-product property.
pub fn effective_matrix_rectangular(
    h_tilde: &ComplexMatrix,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexMatrix> {
    check_square("effective_matrix_rectangular", h_tilde, cfg.grid_len())?;
    let spread = KronOperator::new(vec![
        KronFactor::InverseDft(cfg.n),
        KronFactor::Identity(cfg.m),
    ]);
    let gather = KronOperator::new(vec![KronFactor::Dft(cfg.n), KronFactor::Identity(cfg.m)]);
    let channel = NonzeroColumns::new(h_tilde);
    let mn = cfg.grid_len();
    materialize(mn, mn, |e| {
        gather.apply(&channel.mul_vec(&spread.apply(e)?))
    })
}

/// `H̃_f = (I_N ⊗ F_M) H̃ (I_N ⊗ F_Mᴴ)`, the frequency-domain channel.
pub fn frequency_domain_channel(
    h_tilde: &ComplexMatrix,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexMatrix> {
    check_square("frequency_domain_channel", h_tilde, cfg.grid_len())?;
    let to_time = KronOperator::new(vec![
        KronFactor::Identity(cfg.n),
        KronFactor::InverseDft(cfg.m),
    ]);
    let to_freq = KronOperator::new(vec![KronFactor::Identity(cfg.n), KronFactor::Dft(cfg.m)]);
    let channel = NonzeroColumns::new(h_tilde);
    let mn = cfg.grid_len();
    materialize(mn, mn, |e| {
        to_freq.apply(&channel.mul_vec(&to_time.apply(e)?))
    })
}

/// `V H̃_f U`, the effective time-frequency channel.
pub fn effective_frequency_channel(
    h_f: &ComplexMatrix,
    u: &WindowSpec,
    v: &WindowSpec,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexMatrix> {
    check_square("effective_frequency_channel", h_f, cfg.grid_len())?;
    let (du, dv) = (u.diagonal(cfg)?, v.diagonal(cfg)?);
    Ok(ComplexMatrix::from_fn(h_f.rows(), h_f.cols(), |r, c| {
        dv[r] * h_f[(r, c)] * du[c]
    }))
}

/// `(F_N ⊗ F_Mᴴ) V H̃_f U (F_Nᴴ ⊗ F_M)`.
pub fn effective_matrix_frequency_domain(
    h_f: &ComplexMatrix,
    u: &WindowSpec,
    v: &WindowSpec,
    cfg: &OtfsFrameConfig,
) -> Result<ComplexMatrix> {
    check_square("effective_matrix_frequency_domain", h_f, cfg.grid_len())?;
    let (du, dv) = (u.diagonal(cfg)?, v.diagonal(cfg)?);
    let channel = NonzeroColumns::new(h_f);
    let (spread, gather) = (isfft_operator(cfg), sfft_operator(cfg));
    let mn = cfg.grid_len();
    materialize(mn, mn, |e| {
        let mut x = spread.apply(e)?;
        scale_by(&mut x, &du);
        let mut y = channel.mul_vec(&x);
        scale_by(&mut y, &dv);
        gather.apply(&y)
    })
}
