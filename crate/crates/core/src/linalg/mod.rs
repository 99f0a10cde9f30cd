//! Complex dense linear algebra, unitary DFTs and Kronecker-structured
//! operators.

mod cholesky;
mod dft;
mod kron;
mod matrix;

pub use cholesky::hermitian_log_det;
pub use dft::{dft_matrix, fft_blocks, idft_matrix, ifft_blocks, DftMatrix};
pub use kron::{
    kron, kron_with_cap, mixed_product_check, vec_identity_check, KronFactor, KronOperator,
    IDENTITY_TOL,
};
pub use matrix::{
    max_abs, max_abs_diff, norm2, unvec, vec, ComplexMatrix, ComplexVector, DEFAULT_DENSE_CAP,
};

pub(crate) use matrix::{check_dense_size, NonzeroColumns};
