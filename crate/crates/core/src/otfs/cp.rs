//! Cyclic-prefix addition and removal.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{check_dense_size, ComplexMatrix, DEFAULT_DENSE_CAP};

use super::frame::OtfsFrameConfig;

/// Dense CP matrices for one OFDM symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct CpMatrices {
    /// `A_cp = [G_cp, I_M]ᵀ`, `(M+M_cp)×M`.
    pub add: ComplexMatrix,
    /// `R_cp`: `I_{M+M_cp}` without its first `M_cp` rows.
    pub remove: ComplexMatrix,
    /// `G_cp`: last `M_cp` columns of `I_M`.
    pub selector: ComplexMatrix,
}

impl CpMatrices {
    pub fn new(cfg: &OtfsFrameConfig) -> Self {
        let (m, cp) = (cfg.m, cfg.cp);
        let one = Complex64::new(1.0, 0.0);
        let selector =
            ComplexMatrix::from_fn(m, cp, |r, c| if r == m - cp + c { one } else { 0.0.into() });
        let identity = ComplexMatrix::identity(m);
        let mut stacked = ComplexMatrix::zeros(m, m + cp);
        stacked.set_block(0, 0, &selector);
        stacked.set_block(0, cp, &identity);
        let add = stacked.transpose();
        let remove =
            ComplexMatrix::from_fn(m, m + cp, |r, c| if c == r + cp { one } else { 0.0.into() });
        CpMatrices {
            add,
            remove,
            selector,
        }
    }
}

/// Prepends the last `M_cp` samples of each length-`M` block.
pub fn add_cp(s: &[Complex64], cfg: &OtfsFrameConfig) -> Result<Vec<Complex64>> {
    cfg.check_len("CP input", s.len(), cfg.grid_len())?;
    let mut out = Vec::with_capacity(cfg.block_len());
    for block in s.chunks(cfg.m) {
        out.extend_from_slice(&block[cfg.m - cfg.cp..]);
        out.extend_from_slice(block);
    }
    Ok(out)
}

/// Drops the first `M_cp` samples of each length-`(M+M_cp)` block.
pub fn remove_cp(r: &[Complex64], cfg: &OtfsFrameConfig) -> Result<Vec<Complex64>> {
    cfg.check_len("CP removal input", r.len(), cfg.block_len())?;
    Ok(r.chunks(cfg.symbol_len())
        .flat_map(|b| b[cfg.cp..].iter().copied())
        .collect())
}

/// `H̃ = (I_N ⊗ R_cp) H (I_N ⊗ A_cp)` without forming the Kronecker factors.
///
/// Row `nM + m` of `H̃` is row `n(M+M_cp) + M_cp + m` of `H`; column
/// `nM + m` sums the columns of `H` that carry sample `m` of symbol `n`
/// (its body position and, for the last `M_cp` samples, its CP copy).
pub fn cp_reduced_channel(h: &ComplexMatrix, cfg: &OtfsFrameConfig) -> Result<ComplexMatrix> {
    let t = cfg.block_len();
    if h.shape() != (t, t) {
        return Err(Error::dimension(
            "cp_reduced_channel",
            format!("channel matrix is {:?}, frame needs {t}x{t}", h.shape()),
        ));
    }
    let mn = cfg.grid_len();
    check_dense_size(mn, mn, DEFAULT_DENSE_CAP)?;
    let (m, cp, sym) = (cfg.m, cfg.cp, cfg.symbol_len());
    let row_of = |i: usize| (i / m) * sym + cp + i % m;
    let mut out = ComplexMatrix::zeros(mn, mn);
    for j in 0..mn {
        let (n, k) = (j / m, j % m);
        let body = h.column(n * sym + cp + k);
        let copy = (k >= m - cp).then(|| h.column(n * sym + k - (m - cp)));
        let dst = out.column_mut(j);
        for (i, d) in dst.iter_mut().enumerate() {
            let r = row_of(i);
            *d = body[r] + copy.map_or(Complex64::new(0.0, 0.0), |c| c[r]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, max_abs_diff};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn remove_after_add_is_identity() {
        for (m, cp) in [(4, 0), (4, 2), (5, 4), (1, 0)] {
            let cfg = OtfsFrameConfig::new(m, 1, cp).unwrap();
            let mats = CpMatrices::new(&cfg);
            assert_eq!(
                mats.remove.mul(&mats.add).unwrap(),
                ComplexMatrix::identity(m)
            );
            assert_eq!(mats.add.shape(), (m + cp, m));
            assert_eq!(mats.selector.shape(), (m, cp));
        }
    }

    #[test]
    fn matrices_follow_construction() {
        let cfg = OtfsFrameConfig::new(4, 1, 2).unwrap();
        let mats = CpMatrices::new(&cfg);
        let ident = ComplexMatrix::identity(6);
        assert_eq!(mats.remove, ident.block(2, 0, 4, 6));
        assert_eq!(mats.selector, ComplexMatrix::identity(4).block(0, 2, 4, 2));
        let s = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)];
        let with_cp = mats.add.mul_vec(&s).unwrap();
        let re: Vec<f64> = with_cp.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(add_cp(&s, &cfg).unwrap(), with_cp);
        assert_eq!(remove_cp(&with_cp, &cfg).unwrap(), s);
    }

    #[test]
    fn reduced_channel_matches_dense_kronecker_form() {
        let cfg = OtfsFrameConfig::new(4, 3, 2).unwrap();
        let t = cfg.block_len();
        let h = ComplexMatrix::from_fn(t, t, |r, k| {
            c((r as f64 * 0.3 + k as f64).sin(), (r * k) as f64 * 0.01)
        });
        let mats = CpMatrices::new(&cfg);
        let i_n = ComplexMatrix::identity(cfg.n);
        let dense = kron(&i_n, &mats.remove)
            .unwrap()
            .mul(&h)
            .unwrap()
            .mul(&kron(&i_n, &mats.add).unwrap())
            .unwrap();
        let fast = cp_reduced_channel(&h, &cfg).unwrap();
        assert!(max_abs_diff(fast.as_slice(), dense.as_slice()) < 1e-14);
        assert!(cp_reduced_channel(&ComplexMatrix::identity(3), &cfg).is_err());
    }
}
