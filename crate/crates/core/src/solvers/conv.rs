use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, Image2D};
use crate::model::kernel_kappa;
use crate::scalar::Real;

use super::LinearOperator;

/// Smallest 5-smooth integer `>= n`.
fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

struct Plan2<T: Real> {
    pu: usize,
    pv: usize,
    fwd_u: Arc<dyn Fft<T>>,
    inv_u: Arc<dyn Fft<T>>,
    fwd_v: Arc<dyn Fft<T>>,
    inv_v: Arc<dyn Fft<T>>,
}

impl<T: Real> Plan2<T> {
    fn new(pu: usize, pv: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            pu,
            pv,
            fwd_u: planner.plan_fft_forward(pu),
            inv_u: planner.plan_fft_inverse(pu),
            fwd_v: planner.plan_fft_forward(pv),
            inv_v: planner.plan_fft_inverse(pv),
        }
    }

    fn transform(&self, buf: &mut [Complex<T>], inverse: bool) {
        let (fu, fv) = if inverse {
            (&self.inv_u, &self.inv_v)
        } else {
            (&self.fwd_u, &self.fwd_v)
        };
        fu.process(buf);
        let mut col = vec![Complex::new(T::zero(), T::zero()); self.pv];
        for c in 0..self.pu {
            for (r, slot) in col.iter_mut().enumerate() {
                *slot = buf[r * self.pu + c];
            }
            fv.process(&mut col);
            for (r, &v) in col.iter().enumerate() {
                buf[r * self.pu + c] = v;
            }
        }
    }
}

/// Linear (non-periodic) 2D convolution with a fixed kernel, evaluated by
/// zero-padded FFTs and cropped back to the image grid.
///
/// The kernel is sampled on every grid offset `(du, dv)` with
/// `|du| < Nu`, `|dv| < Nv`, so the padded length `≥ 2N - 1` avoids wraparound.
pub struct Convolution2D<T: Real> {
    grid: Grid2D<T>,
    plan: Plan2<T>,
    spectrum: Vec<Complex<T>>,
}

impl<T: Real> Convolution2D<T> {
    /// `kernel(du, dv)` gives the discrete weight for a physical offset.
    pub fn from_fn(grid: Grid2D<T>, kernel: impl Fn(T, T) -> T) -> Self {
        let [nu, nv] = grid.dims();
        let (pu, pv) = (fast_len(2 * nu - 1), fast_len(2 * nv - 1));
        let plan = Plan2::new(pu, pv);
        let (du, dv) = (grid.u.spacing(), grid.v.spacing());
        let mut spectrum = vec![Complex::new(T::zero(), T::zero()); pu * pv];
        for oj in -(nv as isize - 1)..nv as isize {
            for oi in -(nu as isize - 1)..nu as isize {
                let w = kernel(T::lit(oi as f64) * du, T::lit(oj as f64) * dv);
                let (r, c) = (oj.rem_euclid(pv as isize) as usize, oi.rem_euclid(pu as isize) as usize);
                spectrum[r * pu + c] = Complex::new(w, T::zero());
            }
        }
        plan.transform(&mut spectrum, false);
        Self { grid, plan, spectrum }
    }

    /// Midpoint-rule discretization of convolution with `κ_h` in the plane:
    /// weight `κ_h(|offset|)·Δu·Δv`, optionally zero beyond `truncation`.
    pub fn kappa(grid: Grid2D<T>, h: T, truncation: Option<T>) -> Self {
        let area = grid.cell_area();
        Self::from_fn(grid, move |du, dv| {
            let d = du.hypot(dv);
            match truncation {
                Some(rc) if d > rc => T::zero(),
                _ => kernel_kappa(d, h, 2) * area,
            }
        })
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    fn run(&self, x: &[T], out: &mut [T], adjoint: bool) {
        let [nu, nv] = self.grid.dims();
        let pu = self.plan.pu;
        let mut buf = vec![Complex::new(T::zero(), T::zero()); pu * self.plan.pv];
        for k in 0..nv {
            for j in 0..nu {
                buf[k * pu + j].re = x[k * nu + j];
            }
        }
        self.plan.transform(&mut buf, false);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b = if adjoint { *b * s.conj() } else { *b * s };
        }
        self.plan.transform(&mut buf, true);
        let norm = T::from_usize_lossy(buf.len()).recip();
        for k in 0..nv {
            for j in 0..nu {
                out[k * nu + j] = buf[k * pu + j].re * norm;
            }
        }
    }

    /// Correlation with the kernel, the adjoint of [`LinearOperator::apply`].
    pub fn apply_adjoint(&self, x: &[T], out: &mut [T]) {
        self.run(x, out, true);
    }

    pub fn convolve(&self, image: &Image2D<T>) -> Result<Image2D<T>> {
        if !image.grid.same_as(&self.grid) {
            return Err(Error::dimension("image grid differs from the convolution grid"));
        }
        let mut out = Image2D::zeros(self.grid);
        self.apply(&image.values, &mut out.values);
        Ok(out)
    }
}

impl<T: Real> LinearOperator<T> for Convolution2D<T> {
    fn len(&self) -> usize {
        self.grid.len()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        self.run(x, out, false);
    }
}
