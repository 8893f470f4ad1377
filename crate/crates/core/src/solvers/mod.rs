//! Small dense least squares, conjugate gradients, FFT convolution and the
//! Dirichlet Laplacian used by the deconvolution stage.

mod cg;
mod conv;
mod laplacian;
mod lstsq;

pub use cg::{cg_solve, pcg_solve, CgOptions, CgOutcome, IdentityPreconditioner, Preconditioner};
pub use conv::Convolution2D;
pub use laplacian::{gradient_norm_sq, laplacian_apply, neg_laplacian_apply};
pub use lstsq::{lstsq_qr, LstsqSolution};

use crate::scalar::Real;

/// A linear map on flat vectors of length `len()`.
pub trait LinearOperator<T> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `out = A x`; `out` is fully overwritten.
    fn apply(&self, x: &[T], out: &mut [T]);
}

/// Dense row-major square matrix as an operator.
#[derive(Clone, Debug)]
pub struct DenseMatrix<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Real> LinearOperator<T> for DenseMatrix<T> {
    fn len(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        for (row, o) in self.data.chunks(self.n).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }
}

/// Identity map, handy for tests and as a degenerate system.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl<T: Real> LinearOperator<T> for Identity {
    fn len(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}
