//! Reference implementations written from the definitions, sharing nothing
//! with the library beyond its matrix container.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use otfs::channel::{stream_rng, LtvChannel};
use otfs::linalg::ComplexMatrix;
use otfs::otfs::{OtfsFrameConfig, WindowRole, WindowSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 0, 0x7e57)
}

/// `F[m, k] = e^{−j2πmk/n}/√n`.
pub fn dft(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |m, k| {
        Complex64::from_polar(
            1.0 / (n as f64).sqrt(),
            -2.0 * PI * (m * k) as f64 / n as f64,
        )
    })
}

pub fn idft(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |m, k| {
        Complex64::from_polar(
            1.0 / (n as f64).sqrt(),
            2.0 * PI * (m * k) as f64 / n as f64,
        )
    })
}

pub fn eye(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn diag(d: &[Complex64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { d[i] } else { c(0.0, 0.0) })
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = b.shape();
    ComplexMatrix::from_fn(a.rows() * p, a.cols() * q, |i, j| {
        a[(i / p, j / q)] * b[(i % p, j % q)]
    })
}

pub fn mul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!(a.cols(), b.rows());
    ComplexMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

pub fn mul_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, f| mul(&acc, f))
}

pub fn mat_vec(a: &ComplexMatrix, x: &[Complex64]) -> Vec<Complex64> {
    (0..a.rows())
        .map(|i| (0..a.cols()).map(|k| a[(i, k)] * x[k]).sum())
        .collect()
}

pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)].conj())
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect()
}

pub fn random_weights<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| Complex64::from_polar(rng.random_range(0.5..1.5), rng.random_range(-3.0..3.0)))
        .collect()
}

pub fn random_window<R: Rng>(rng: &mut R, role: WindowRole, cfg: &OtfsFrameConfig) -> WindowSpec {
    WindowSpec::general(role, random_weights(rng, cfg.grid_len()))
}

/// Arbitrary LTV taps (every tap independently random at every sample).
pub fn random_ltv<R: Rng>(rng: &mut R, len: usize, span: usize) -> LtvChannel {
    LtvChannel::from_fn(len, span, |_, _| {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    })
    .unwrap()
}

/// Time-domain channel matrix `H[i, i − l] = h[i, l]`.
pub fn channel_matrix(ch: &LtvChannel) -> ComplexMatrix {
    let t = ch.span();
    ComplexMatrix::from_fn(t, t, |i, j| {
        if i >= j && i - j < ch.len() {
            ch.tap(i, i - j)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `A_cp`: `(M + cp) × M`, last `cp` rows of `I_M` on top of `I_M`.
pub fn cp_add(m: usize, cp: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m + cp, m, |i, j| {
        let src = if i < cp { m - cp + i } else { i - cp };
        if src == j {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `R_cp = [0 I_M]`.
pub fn cp_remove(m: usize, cp: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, m + cp, |i, j| {
        if j == i + cp {
            c(1.0, 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// The end-to-end matrix as the literal product of its nine factors.
pub fn effective_oracle(
    ch: &LtvChannel,
    u: &[Complex64],
    v: &[Complex64],
    cfg: &OtfsFrameConfig,
) -> ComplexMatrix {
    let (m, n, cp) = (cfg.m, cfg.n, cfg.cp);
    mul_all(&[
        kron(&dft(n), &idft(m)),
        diag(v),
        kron(&eye(n), &dft(m)),
        kron(&eye(n), &cp_remove(m, cp)),
        channel_matrix(ch),
        kron(&eye(n), &cp_add(m, cp)),
        kron(&eye(n), &idft(m)),
        diag(u),
        kron(&idft(n), &dft(m)),
    ])
}

/// Noiseless MIMO response from Doppler-delay data `d̄` to the
/// prefix-stripped received samples `r`, by direct simulation: per-antenna
/// inverse SFFT as double sums, per-symbol IDFT, prefix, convolution, prefix
/// removal. `pairs[r·n_t + t]`.
pub fn mimo_time_response(
    pairs: &[LtvChannel],
    n_t: usize,
    n_r: usize,
    u: &[Complex64],
    cfg: &OtfsFrameConfig,
    d: &[Complex64],
) -> Vec<Complex64> {
    let (m_len, n_len, cp) = (cfg.m, cfg.n, cfg.cp);
    let sym = m_len + cp;
    let at = |n: usize, a: usize, m: usize, ants: usize| n * ants * m_len + a * m_len + m;
    let mut streams = Vec::new();
    for t in 0..n_t {
        let mut s_cp = vec![c(0.0, 0.0); n_len * sym];
        for l in 0..n_len {
            // X[k, l] = (1/√(MN)) Σ_{m,n} D[m, n] e^{−j2πmk/M} e^{j2πnl/N}, windowed
            let x: Vec<Complex64> = (0..m_len)
                .map(|k| {
                    let mut acc = c(0.0, 0.0);
                    for n in 0..n_len {
                        for m in 0..m_len {
                            let phase = -2.0 * PI * (m * k) as f64 / m_len as f64
                                + 2.0 * PI * (n * l) as f64 / n_len as f64;
                            acc += d[at(n, t, m, n_t)] * Complex64::from_polar(1.0, phase);
                        }
                    }
                    acc / ((m_len * n_len) as f64).sqrt() * u[l * m_len + k]
                })
                .collect();
            for i in 0..m_len {
                let s: Complex64 = (0..m_len)
                    .map(|k| {
                        x[k] * Complex64::from_polar(1.0, 2.0 * PI * (i * k) as f64 / m_len as f64)
                    })
                    .sum::<Complex64>()
                    / (m_len as f64).sqrt();
                s_cp[l * sym + cp + i] = s;
                if i >= m_len - cp {
                    s_cp[l * sym + i - (m_len - cp)] = s;
                }
            }
        }
        streams.push(s_cp);
    }
    let mut out = vec![c(0.0, 0.0); n_len * n_r * m_len];
    for r in 0..n_r {
        for t in 0..n_t {
            let h = &pairs[r * n_t + t];
            for n in 0..n_len {
                for m in 0..m_len {
                    let i = n * sym + cp + m;
                    let mut acc = c(0.0, 0.0);
                    for l in 0..h.len().min(i + 1) {
                        acc += h.tap(i, l) * streams[t][i - l];
                    }
                    out[at(n, r, m, n_r)] += acc;
                }
            }
        }
    }
    out
}

/// `K` column by column from [`mimo_time_response`].
pub fn mimo_k_oracle(
    pairs: &[LtvChannel],
    n_t: usize,
    n_r: usize,
    u: &[Complex64],
    cfg: &OtfsFrameConfig,
) -> ComplexMatrix {
    let cols = cfg.grid_len() * n_t;
    let rows = cfg.grid_len() * n_r;
    let mut k = ComplexMatrix::zeros(rows, cols);
    for j in 0..cols {
        let mut e = vec![c(0.0, 0.0); cols];
        e[j] = c(1.0, 0.0);
        k.set_column(j, &mimo_time_response(pairs, n_t, n_r, u, cfg, &e));
    }
    k
}

/// `log₂ |det A|` by LU with partial pivoting.
pub fn log2_abs_det(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| a[(i, j)]).collect())
        .collect();
    let mut acc = 0.0;
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm()))
            .unwrap();
        m.swap(p, col);
        let piv = m[col][col];
        let top = m[col].clone();
        acc += piv.norm().log2();
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col] / piv;
            if f == c(0.0, 0.0) {
                continue;
            }
            for (x, v) in row[col..].iter_mut().zip(&top[col..]) {
                *x -= f * v;
            }
        }
    }
    acc
}

/// `log₂ det(I + K Kᴴ/σ²)` from the definition.
pub fn mi_oracle(k: &ComplexMatrix, sigma2: f64) -> f64 {
    let g = mul(k, &adjoint(k));
    let n = g.rows();
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        g[(i, j)] / sigma2 + if i == j { 1.0 } else { 0.0 }
    });
    log2_abs_det(&a)
}

/// `(D ⊛ K)[m, n]` by the double sum.
pub fn circular_convolution(d: &ComplexMatrix, kernel: &ComplexMatrix) -> ComplexMatrix {
    let (m_len, n_len) = d.shape();
    ComplexMatrix::from_fn(m_len, n_len, |m, n| {
        let mut acc = c(0.0, 0.0);
        for np in 0..n_len {
            for mp in 0..m_len {
                acc += d[(mp, np)] * kernel[((m + m_len - mp) % m_len, (n + n_len - np) % n_len)];
            }
        }
        acc
    })
}
