use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Column vector of complex samples.
pub type ComplexVector = Vec<Complex64>;

/// Default upper bound on the number of entries a dense matrix may hold.
pub const DEFAULT_DENSE_CAP: usize = 100_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored column-major, so that `vec()` is the raw
/// entry buffer.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

pub(crate) fn check_dense_size(rows: usize, cols: usize, cap: usize) -> Result<()> {
    let entries = rows as u128 * cols as u128;
    if entries > cap as u128 {
        return Err(Error::SizeCap { entries, cap });
    }
    Ok(())
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    /// Zero matrix, refusing allocations beyond `cap` entries.
    pub fn try_zeros(rows: usize, cols: usize, cap: usize) -> Result<Self> {
        check_dense_size(rows, cols, cap)?;
        Ok(Self::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for c in 0..cols {
            for r in 0..rows {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Wraps a column-major buffer. Rejects wrong lengths and NaN/Inf entries.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::length("matrix entries", rows * cols, data.len()));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Builds a matrix from row slices; convenient for literals in tests.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::dimension("from_rows", "ragged rows"));
        }
        let m = Self::from_fn(nrows, ncols, |r, c| rows[r][c]);
        Self::from_col_major(nrows, ncols, m.data)
    }

    /// Real-valued literal, row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn column(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn column_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn set_column(&mut self, c: usize, values: &[Complex64]) {
        self.column_mut(c).copy_from_slice(values);
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::dimension(
                op,
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Matrix product `self · other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dimension(
                "mul",
                format!("{:?} · {:?}", self.shape(), other.shape()),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (k, &b) in other.column(j).iter().enumerate() {
                if b == ZERO {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.column(k)) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<ComplexVector> {
        if v.len() != self.cols {
            return Err(Error::length("matrix-vector operand", self.cols, v.len()));
        }
        let mut out = vec![ZERO; self.rows];
        for (k, &b) in v.iter().enumerate() {
            if b == ZERO {
                continue;
            }
            for (d, &a) in out.iter_mut().zip(self.column(k)) {
                *d += a * b;
            }
        }
        Ok(out)
    }

    /// `self · selfᴴ`, exploiting Hermitian symmetry.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut g = Self::zeros(n, n);
        for k in 0..self.cols {
            let col = self.column(k);
            for j in 0..n {
                let cj = col[j].conj();
                if cj == ZERO {
                    continue;
                }
                let dst = &mut g.data[j * n..(j + 1) * n];
                for i in j..n {
                    dst[i] += col[i] * cj;
                }
            }
        }
        for j in 0..n {
            for i in 0..j {
                g.data[j * n + i] = g.data[i * n + j].conj();
            }
        }
        g
    }

    pub fn block(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Self {
        Self::from_fn(nrows, ncols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for c in 0..block.cols {
            for r in 0..block.rows {
                self[(r0 + r, c0 + c)] = block[(r, c)];
            }
        }
    }

    /// Block-diagonal matrix assembled from `blocks` in order.
    pub fn block_diagonal(blocks: &[Self]) -> Self {
        let rows = blocks.iter().map(Self::rows).sum();
        let cols = blocks.iter().map(Self::cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            out.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        max_abs_diff(&self.data, &other.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[c * self.rows + r]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[c * self.rows + r]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:>9.4}{:+.4}j ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Stacks the columns of `x` into one vector: element `m + rows·n` is `x[m, n]`.
pub fn vec(x: &ComplexMatrix) -> ComplexVector {
    x.data.clone()
}

/// Inverse of [`vec`].
pub fn unvec(v: &[Complex64], rows: usize, cols: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::from_col_major(rows, cols, v.to_vec())
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Nonzero entries of a matrix, grouped by column. Used to apply large,
/// mostly-zero channel matrices without touching their zero entries.
#[derive(Clone, Debug)]
pub(crate) struct NonzeroColumns {
    rows: usize,
    cols: Vec<Vec<(usize, Complex64)>>,
}

impl NonzeroColumns {
    pub(crate) fn new(m: &ComplexMatrix) -> Self {
        let cols = (0..m.cols())
            .map(|c| {
                m.column(c)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(r, &z)| (r, z))
                    .collect()
            })
            .collect();
        NonzeroColumns {
            rows: m.rows(),
            cols,
        }
    }

    pub(crate) fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub(crate) fn mul_vec(&self, v: &[Complex64]) -> ComplexVector {
        debug_assert_eq!(v.len(), self.cols.len());
        let mut out = vec![ZERO; self.rows];
        for (col, &x) in self.cols.iter().zip(v) {
            if x == ZERO {
                continue;
            }
            for &(r, h) in col {
                out[r] += h * x;
            }
        }
        out
    }
}
