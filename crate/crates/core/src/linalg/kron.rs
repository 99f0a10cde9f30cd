use num_complex::Complex64;

use crate::error::{Error, Result};

use super::dft::{dft_matrix, fft_blocks, idft_matrix, ifft_blocks};
use super::matrix::{check_dense_size, vec, ComplexMatrix, ComplexVector, DEFAULT_DENSE_CAP};

/// Relative tolerance used by the identity checks below.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Kronecker product `a ⊗ b`: block `(i, j)` equals `a[i, j] · b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, DEFAULT_DENSE_CAP)
}

pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let rows = a
        .rows()
        .checked_mul(b.rows())
        .ok_or_else(|| Error::dimension("kron", "row count overflows"))?;
    let cols = a
        .cols()
        .checked_mul(b.cols())
        .ok_or_else(|| Error::dimension("kron", "column count overflows"))?;
    check_dense_size(rows, cols, cap)?;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ac in 0..a.cols() {
        for bc in 0..b.cols() {
            let dst = out.column_mut(ac * b.cols() + bc);
            for ar in 0..a.rows() {
                let s = a[(ar, ac)];
                for (br, &z) in b.column(bc).iter().enumerate() {
                    dst[ar * b.rows() + br] = s * z;
                }
            }
        }
    }
    Ok(out)
}

fn close(lhs: &ComplexMatrix, rhs: &ComplexMatrix) -> bool {
    let scale = lhs.max_abs().max(rhs.max_abs()).max(1.0);
    lhs.max_abs_diff(rhs) <= IDENTITY_TOL * scale
}

/// Whether `(a ⊗ b)(c ⊗ d) = (ac) ⊗ (bd)` holds to [`IDENTITY_TOL`].
pub fn mixed_product_check(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    d: &ComplexMatrix,
) -> Result<bool> {
    if a.cols() != c.rows() || b.cols() != d.rows() {
        return Err(Error::dimension(
            "mixed_product_check",
            format!(
                "a {:?}, b {:?}, c {:?}, d {:?}",
                a.shape(),
                b.shape(),
                c.shape(),
                d.shape()
            ),
        ));
    }
    let lhs = kron(a, b)?.mul(&kron(c, d)?)?;
    let rhs = kron(&a.mul(c)?, &b.mul(d)?)?;
    Ok(close(&lhs, &rhs))
}

/// Whether `(bᵀ ⊗ a) vec(x) = vec(a x b)` holds to [`IDENTITY_TOL`].
pub fn vec_identity_check(a: &ComplexMatrix, x: &ComplexMatrix, b: &ComplexMatrix) -> Result<bool> {
    if a.cols() != x.rows() || x.cols() != b.rows() {
        return Err(Error::dimension(
            "vec_identity_check",
            format!("a {:?}, x {:?}, b {:?}", a.shape(), x.shape(), b.shape()),
        ));
    }
    let lhs = kron(&b.transpose(), a)?.mul_vec(&vec(x))?;
    let rhs = vec(&a.mul(x)?.mul(b)?);
    let lhs = ComplexMatrix::from_col_major(lhs.len(), 1, lhs)?;
    let rhs = ComplexMatrix::from_col_major(rhs.len(), 1, rhs)?;
    Ok(close(&lhs, &rhs))
}

/// One factor of a Kronecker-structured operator.
#[derive(Clone, Debug, PartialEq)]
pub enum KronFactor {
    Dense(ComplexMatrix),
    Identity(usize),
    /// Unitary `F_n`.
    Dft(usize),
    /// `F_nᴴ`.
    InverseDft(usize),
    Diagonal(Vec<Complex64>),
}

impl KronFactor {
    pub fn rows(&self) -> usize {
        match self {
            KronFactor::Dense(m) => m.rows(),
            KronFactor::Identity(n) | KronFactor::Dft(n) | KronFactor::InverseDft(n) => *n,
            KronFactor::Diagonal(d) => d.len(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            KronFactor::Dense(m) => m.cols(),
            _ => self.rows(),
        }
    }

    pub fn materialize(&self) -> ComplexMatrix {
        match self {
            KronFactor::Dense(m) => m.clone(),
            KronFactor::Identity(n) => ComplexMatrix::identity(*n),
            KronFactor::Dft(n) => dft_matrix(*n),
            KronFactor::InverseDft(n) => idft_matrix(*n),
            KronFactor::Diagonal(d) => ComplexMatrix::from_diagonal(d),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            KronFactor::Dense(m) => KronFactor::Dense(m.adjoint()),
            KronFactor::Identity(n) => KronFactor::Identity(*n),
            KronFactor::Dft(n) => KronFactor::InverseDft(*n),
            KronFactor::InverseDft(n) => KronFactor::Dft(*n),
            KronFactor::Diagonal(d) => KronFactor::Diagonal(d.iter().map(|z| z.conj()).collect()),
        }
    }

    /// Applies the factor to a contiguous fiber, writing `rows()` outputs.
    fn apply_fiber(&self, input: &[Complex64], out: &mut Vec<Complex64>) {
        out.clear();
        match self {
            KronFactor::Dense(m) => {
                out.resize(m.rows(), Complex64::new(0.0, 0.0));
                for (k, &x) in input.iter().enumerate() {
                    for (o, &a) in out.iter_mut().zip(m.column(k)) {
                        *o += a * x;
                    }
                }
            }
            KronFactor::Identity(_) => out.extend_from_slice(input),
            KronFactor::Dft(n) => {
                out.extend_from_slice(input);
                fft_blocks(out, *n);
            }
            KronFactor::InverseDft(n) => {
                out.extend_from_slice(input);
                ifft_blocks(out, *n);
            }
            KronFactor::Diagonal(d) => out.extend(input.iter().zip(d).map(|(x, w)| x * w)),
        }
    }
}

/// Kronecker product of an ordered list of factors, applied without
/// materializing the product. The first factor is the most significant
/// (outermost) index.
#[derive(Clone, Debug, PartialEq)]
pub struct KronOperator {
    factors: Vec<KronFactor>,
}

impl KronOperator {
    pub fn new(factors: Vec<KronFactor>) -> Self {
        KronOperator { factors }
    }

    pub fn factors(&self) -> &[KronFactor] {
        &self.factors
    }

    pub fn rows(&self) -> usize {
        self.factors.iter().map(KronFactor::rows).product()
    }

    pub fn cols(&self) -> usize {
        self.factors.iter().map(KronFactor::cols).product()
    }

    /// `(A ⊗ B ⊗ …)ᴴ = Aᴴ ⊗ Bᴴ ⊗ …`.
    pub fn adjoint(&self) -> Self {
        KronOperator::new(self.factors.iter().map(KronFactor::adjoint).collect())
    }

    pub fn materialize(&self) -> Result<ComplexMatrix> {
        self.materialize_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<ComplexMatrix> {
        check_dense_size(self.rows(), self.cols(), cap)?;
        let mut acc = ComplexMatrix::identity(1);
        for f in &self.factors {
            acc = kron_with_cap(&acc, &f.materialize(), cap)?;
        }
        Ok(acc)
    }

    /// Computes `op · v` one factor at a time, using FFTs for DFT factors.
    pub fn apply(&self, v: &[Complex64]) -> Result<ComplexVector> {
        if v.len() != self.cols() {
            return Err(Error::length(
                "Kronecker operator input",
                self.cols(),
                v.len(),
            ));
        }
        // dims[i] is the current extent of tensor axis i
        let mut dims: Vec<usize> = self.factors.iter().map(KronFactor::cols).collect();
        let mut cur = v.to_vec();
        let mut fiber = Vec::new();
        let mut mapped = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            if matches!(f, KronFactor::Identity(_)) {
                continue;
            }
            let outer: usize = dims[..i].iter().product();
            let inner: usize = dims[i + 1..].iter().product();
            let (cin, rout) = (f.cols(), f.rows());
            let mut next = vec![Complex64::new(0.0, 0.0); outer * rout * inner];
            for o in 0..outer {
                let src = &cur[o * cin * inner..(o + 1) * cin * inner];
                let dst = &mut next[o * rout * inner..(o + 1) * rout * inner];
                for p in 0..inner {
                    fiber.clear();
                    fiber.extend((0..cin).map(|k| src[k * inner + p]));
                    f.apply_fiber(&fiber, &mut mapped);
                    for (k, &z) in mapped.iter().enumerate() {
                        dst[k * inner + p] = z;
                    }
                }
            }
            dims[i] = rout;
            cur = next;
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn pseudo_random(rows: usize, cols: usize, salt: f64) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |r, k| {
            let t = salt + r as f64 * 1.618 + k as f64 * 2.71;
            c(t.sin(), (1.3 * t).cos())
        })
    }

    #[test]
    fn kron_small_literals() {
        let out = kron(&ComplexMatrix::identity(2), &real(&[&[5.0]])).unwrap();
        assert_eq!(out, real(&[&[5.0, 0.0], &[0.0, 5.0]]));
        let out = kron(&real(&[&[1.0], &[2.0]]), &real(&[&[3.0]])).unwrap();
        assert_eq!(out, real(&[&[3.0], &[6.0]]));
    }

    #[test]
    fn kron_matches_block_definition() {
        let f2 = dft_matrix(2);
        let i2 = ComplexMatrix::identity(2);
        let got = kron(&f2, &i2).unwrap();
        // (i, j) of A⊗B is A[i / p, j / q] · B[i % p, j % q]
        let want = ComplexMatrix::from_fn(4, 4, |r, k| f2[(r / 2, k / 2)] * i2[(r % 2, k % 2)]);
        assert!(got.max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn kron_respects_size_cap() {
        let a = ComplexMatrix::identity(10);
        assert!(matches!(
            kron_with_cap(&a, &a, 9_999),
            Err(Error::SizeCap { .. })
        ));
        assert!(kron_with_cap(&a, &a, 10_000).is_ok());
    }

    #[test]
    fn mixed_product_identities_and_negative_control() {
        let i2 = ComplexMatrix::identity(2);
        let i3 = ComplexMatrix::identity(3);
        assert!(mixed_product_check(&i2, &i3, &i2, &i3).unwrap());

        let [a, b, cc, d] = [0.1, 0.7, 1.9, 3.3].map(|s| pseudo_random(2, 2, s));
        assert!(mixed_product_check(&a, &b, &cc, &d).unwrap());

        // perturbing d on one side only must break the identity
        let lhs = kron(&a, &b).unwrap().mul(&kron(&cc, &d).unwrap()).unwrap();
        let mut d2 = d.clone();
        d2[(0, 1)] += c(1e-3, 0.0);
        let rhs = kron(&a.mul(&cc).unwrap(), &b.mul(&d2).unwrap()).unwrap();
        assert!(!close(&lhs, &rhs));

        assert!(mixed_product_check(&pseudo_random(2, 3, 0.0), &i2, &i2, &i2).is_err());
    }

    #[test]
    fn vec_identity_uses_transpose_not_adjoint() {
        let i2 = ComplexMatrix::identity(2);
        assert!(vec_identity_check(&i2, &pseudo_random(2, 2, 0.3), &i2).unwrap());

        let a = pseudo_random(2, 3, 0.4);
        let x = pseudo_random(3, 2, 1.1);
        let b = pseudo_random(2, 4, 2.2);
        assert!(vec_identity_check(&a, &x, &b).unwrap());

        // with b replaced by bᴴ on the Kronecker side the identity fails
        let lhs = kron(&b.adjoint(), &a).unwrap().mul_vec(&vec(&x)).unwrap();
        let rhs = vec(&a.mul(&x).unwrap().mul(&b).unwrap());
        let lhs = ComplexMatrix::from_col_major(lhs.len(), 1, lhs).unwrap();
        let rhs = ComplexMatrix::from_col_major(rhs.len(), 1, rhs).unwrap();
        assert!(!close(&lhs, &rhs));

        assert!(vec_identity_check(&a, &a, &b).is_err());
    }

    #[test]
    fn operator_identity_and_dense_agreement() {
        let v: Vec<Complex64> = (0..8).map(|i| c(i as f64, -(i as f64) * 0.5)).collect();
        let id = KronOperator::new(vec![KronFactor::Identity(4), KronFactor::Identity(2)]);
        assert_eq!(id.apply(&v).unwrap(), v);

        let op = KronOperator::new(vec![KronFactor::Dft(4), KronFactor::Identity(2)]);
        let dense = kron(&dft_matrix(4), &ComplexMatrix::identity(2)).unwrap();
        let got = op.apply(&v).unwrap();
        let want = dense.mul_vec(&v).unwrap();
        assert!(
            super::super::matrix::max_abs_diff(&got, &want)
                <= 1e-10 * super::super::matrix::max_abs(&want)
        );
    }

    #[test]
    fn operator_composition_cancels() {
        let first = KronOperator::new(vec![KronFactor::InverseDft(2), KronFactor::Dft(2)]);
        let second = KronOperator::new(vec![KronFactor::Dft(2), KronFactor::InverseDft(2)]);
        assert_eq!(first.adjoint(), second);
        let v = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(4.0, -1.0)];
        let round = second.apply(&first.apply(&v).unwrap()).unwrap();
        assert!(super::super::matrix::max_abs_diff(&round, &v) <= 1e-12);
    }

    #[test]
    fn operator_rejects_wrong_length() {
        let op = KronOperator::new(vec![KronFactor::Dft(3)]);
        assert!(matches!(
            op.apply(&[c(1.0, 0.0)]),
            Err(Error::Length { .. })
        ));
    }
}
