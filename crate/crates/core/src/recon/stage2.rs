use crate::error::{Error, Result};
use crate::grid::{Grid2D, Image2D};
use crate::scalar::Real;
use crate::solvers::{cg_solve, neg_laplacian_apply, CgOptions, CgOutcome, Convolution2D, LinearOperator};

/// Tikhonov system `λ DᵀD + KᵀK` for deconvolution with `κ_h` on the plane.
pub struct Deconvolver<T: Real> {
    conv: Convolution2D<T>,
    h: T,
}

/// `λ DᵀD + KᵀK` borrowed from a [`Deconvolver`].
pub struct NormalOperator<'a, T: Real> {
    conv: &'a Convolution2D<T>,
    lambda: T,
}

impl<T: Real> LinearOperator<T> for NormalOperator<'_, T> {
    fn len(&self) -> usize {
        self.conv.len()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        let grid = self.conv.grid();
        let mut kx = vec![T::zero(); x.len()];
        self.conv.apply(x, &mut kx);
        self.conv.apply_adjoint(&kx, out);
        let mut lx = vec![T::zero(); x.len()];
        neg_laplacian_apply(grid, x, &mut lx);
        for (o, l) in out.iter_mut().zip(&lx) {
            *o += self.lambda * *l;
        }
    }
}

impl<T: Real> Deconvolver<T> {
    pub fn new(grid: Grid2D<T>, h: T, truncation: Option<T>) -> Result<Self> {
        if !(h > T::zero()) {
            return Err(Error::validation("h must be positive"));
        }
        Ok(Self {
            conv: Convolution2D::kappa(grid, h, truncation),
            h,
        })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        self.conv.grid()
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn convolution(&self) -> &Convolution2D<T> {
        &self.conv
    }

    pub fn system(&self, lambda: T) -> NormalOperator<'_, T> {
        NormalOperator {
            conv: &self.conv,
            lambda,
        }
    }

    /// `argmin λ‖Dχ‖² + ‖Kχ − u‖²` via CG on the normal equations.
    pub fn deconvolve(&self, u: &Image2D<T>, lambda: T, opts: &CgOptions<T>) -> Result<(Image2D<T>, CgOutcome<T>)> {
        if !(lambda > T::zero()) {
            return Err(Error::validation("lambda must be positive"));
        }
        if !u.grid.same_as(self.grid()) {
            return Err(Error::dimension("trace image grid differs from the deconvolution grid"));
        }
        let mut rhs = vec![T::zero(); u.values.len()];
        self.conv.apply_adjoint(&u.values, &mut rhs);
        let outcome = cg_solve(&self.system(lambda), &rhs, opts)?;
        let chi = Image2D::from_values(*self.grid(), outcome.x.clone())?;
        Ok((chi, outcome))
    }
}

/// One-shot form of [`Deconvolver::deconvolve`].
pub fn stage2_deconvolve<T: Real>(u: &Image2D<T>, h: T, lambda: T, opts: &CgOptions<T>) -> Result<Image2D<T>> {
    Ok(Deconvolver::new(u.grid, h, None)?.deconvolve(u, lambda, opts)?.0)
}
