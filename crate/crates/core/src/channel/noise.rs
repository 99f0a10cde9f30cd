use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexVector;

use super::stream_rng;

/// Circularly-symmetric complex Gaussian noise with per-sample power
/// `variance`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(variance: f64, seed: u64) -> Result<Self> {
        if !(variance.is_finite() && variance >= 0.0) {
            return Err(Error::Config(format!(
                "noise variance {variance} must be finite and >= 0"
            )));
        }
        Ok(NoiseSpec { variance, seed })
    }
}

/// `len` i.i.d. `CN(0, σ²)` samples, deterministic in the seed.
pub fn awgn(len: usize, spec: &NoiseSpec) -> ComplexVector {
    awgn_with_rng(len, spec.variance, &mut stream_rng(spec.seed, 0, 0))
}

pub fn awgn_with_rng<R: Rng + ?Sized>(len: usize, variance: f64, rng: &mut R) -> ComplexVector {
    if variance == 0.0 {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    let normal = Normal::new(0.0, (variance / 2.0).sqrt()).expect("finite deviation");
    (0..len)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_silent() {
        let spec = NoiseSpec::new(0.0, 9).unwrap();
        assert!(awgn(16, &spec)
            .iter()
            .all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn empirical_variance_within_one_percent() {
        let spec = NoiseSpec::new(2.0, 42).unwrap();
        let w = awgn(1_000_000, &spec);
        let n = w.len() as f64;
        let power = w.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((power - 2.0).abs() < 0.02, "power {power}");
        // each real component carries half
        let re = w.iter().map(|z| z.re * z.re).sum::<f64>() / n;
        assert!((re - 1.0).abs() < 0.01, "real part {re}");
    }

    #[test]
    fn same_seed_same_noise() {
        let spec = NoiseSpec::new(0.7, 1234).unwrap();
        assert_eq!(awgn(100, &spec), awgn(100, &spec));
        assert_ne!(
            awgn(100, &spec),
            awgn(100, &NoiseSpec::new(0.7, 1235).unwrap())
        );
    }

    #[test]
    fn rejects_negative_variance() {
        assert!(NoiseSpec::new(-1.0, 0).is_err());
        assert!(NoiseSpec::new(f64::NAN, 0).is_err());
    }
}
