use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, Grid3D, Image2D, Volume3D};
use crate::scalar::Real;

/// Frequency window applied on top of the ramp `|ω|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Ram-Lak: 1 up to the cutoff.
    #[default]
    Rect,
    /// `w(x) = x` up to the cutoff, giving an overall `|ω|²` filter.
    PaperLiteral,
    Hann,
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" => Ok(Self::Rect),
            "paper_literal" => Ok(Self::PaperLiteral),
            "hann" => Ok(Self::Hann),
            other => Err(Error::Config(format!(
                "unknown window '{other}' (expected rect, paper_literal or hann)"
            ))),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rect => "rect",
            Self::PaperLiteral => "paper_literal",
            Self::Hann => "hann",
        })
    }
}

/// Window value at `omega` cycles/sample; zero above `cutoff` and above Nyquist.
pub fn ramp_window<T: Real>(omega: T, kind: WindowKind, cutoff: T) -> T {
    let omega = omega.abs();
    let limit = cutoff.min(T::lit(0.5));
    if omega > limit {
        return T::zero();
    }
    match kind {
        WindowKind::Rect => T::one(),
        WindowKind::PaperLiteral => omega,
        WindowKind::Hann => T::lit(0.5) * (T::one() + (T::PI() * omega / cutoff).cos()),
    }
}

/// Per-angle projections `χ_l` on one shared `(ξ, z)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionStack<T> {
    pub angles: Vec<T>,
    pub images: Vec<Image2D<T>>,
}

impl<T: Real> ProjectionStack<T> {
    pub fn new(angles: Vec<T>, images: Vec<Image2D<T>>) -> Result<Self> {
        if angles.len() != images.len() {
            return Err(Error::dimension(format!(
                "{} angles but {} images",
                angles.len(),
                images.len()
            )));
        }
        if let Some(first) = images.first() {
            if images.iter().any(|im| !im.grid.same_as(&first.grid)) {
                return Err(Error::dimension("projection images do not share one grid"));
            }
        }
        Ok(Self { angles, images })
    }

    pub fn grid(&self) -> Option<&Grid2D<T>> {
        self.images.first().map(|im| &im.grid)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Filter spectrum of length `padded`: the DFT of the band-limited spatial
/// ramp kernel (`1/4` at 0, `-1/(πn)²` at odd `n`), times the window.
pub fn ramp_filter<T: Real>(padded: usize, kind: WindowKind, cutoff: T) -> Vec<T> {
    let mut kernel = vec![Complex::new(T::zero(), T::zero()); padded];
    kernel[0].re = T::lit(0.25);
    for (i, slot) in kernel.iter_mut().enumerate().skip(1) {
        let n = i.min(padded - i);
        if n % 2 == 1 {
            *slot = Complex::new(-(T::PI() * T::from_usize_lossy(n)).powi(2).recip(), T::zero());
        }
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut kernel);
    kernel
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let omega = T::from_usize_lossy(i.min(padded - i)) / T::from_usize_lossy(padded);
            c.re * ramp_window(omega, kind, cutoff)
        })
        .collect()
}

/// Slice-wise filtered back projection of a projection stack into `vol_grid`.
///
/// The stack's `u` axis is the detector coordinate `ξ = ⟨x, e_θ^⊥⟩`, and its
/// `v` axis must coincide with the volume's z axis. With `circle` set, voxels
/// outside the disc seen by every angle (radius = distance from 0 to the
/// nearer detector end) are left at zero.
pub fn stage3_fbp<T: Real>(
    stack: &ProjectionStack<T>,
    vol_grid: &Grid3D<T>,
    window: WindowKind,
    cutoff: T,
    circle: bool,
) -> Result<Volume3D<T>> {
    if stack.len() < 2 {
        return Err(Error::validation("filtered back projection needs at least two angles"));
    }
    let plane = *stack.grid().expect("non-empty stack");
    if !plane.v.same_as(&vol_grid.z) {
        return Err(Error::dimension("projection z axis differs from the volume z axis"));
    }
    let nd = plane.u.n;
    let padded = (2 * nd).next_power_of_two().max(64);
    let filter = ramp_filter(padded, window, cutoff);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(padded);
    let inv = planner.plan_fft_inverse(padded);

    let trig: Vec<(T, T)> = stack.angles.iter().map(|a| a.sin_cos()).collect();
    let weight = T::PI() / T::from_usize_lossy(stack.len());
    // Filtered rows are in physical units: the ramp in cycles/sample divided by Δξ.
    let scale = weight / (plane.u.spacing() * T::from_usize_lossy(padded));
    let (xs, ys) = (vol_grid.x.centers(), vol_grid.y.centers());
    let (u0, du) = (plane.u.center(0), plane.u.spacing());
    let slice_len = vol_grid.x.n * vol_grid.y.n;
    let radius = (-plane.u.lo).min(plane.u.hi).max(T::zero());
    let support: Vec<bool> = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| !circle || x * x + y * y <= radius * radius))
        .collect();

    let mut vol = Volume3D::zeros(*vol_grid);
    vol.values.par_chunks_mut(slice_len).enumerate().for_each(|(k, slice)| {
        let mut buf = vec![Complex::new(T::zero(), T::zero()); padded];
        let mut row = vec![T::zero(); nd];
        for (img, &(s, c)) in stack.images.iter().zip(&trig) {
            buf.iter_mut().for_each(|b| *b = Complex::new(T::zero(), T::zero()));
            for (b, &x) in buf.iter_mut().zip(img.row(k)) {
                b.re = x;
            }
            fwd.process(&mut buf);
            for (b, &f) in buf.iter_mut().zip(&filter) {
                *b = *b * f;
            }
            inv.process(&mut buf);
            for (r, b) in row.iter_mut().zip(&buf) {
                *r = b.re * scale;
            }
            for (jy, &y) in ys.iter().enumerate() {
                for (ix, &x) in xs.iter().enumerate() {
                    if !support[jy * xs.len() + ix] {
                        continue;
                    }
                    let pos = (c * y - s * x - u0) / du;
                    let p0 = pos.floor();
                    let Some(i0) = p0.to_isize() else { continue };
                    let w = pos - p0;
                    let at = |i: isize| {
                        if i < 0 || i >= nd as isize {
                            T::zero()
                        } else {
                            row[i as usize]
                        }
                    };
                    slice[jy * xs.len() + ix] += (T::one() - w) * at(i0) + w * at(i0 + 1);
                }
            }
        }
    });
    Ok(vol)
}
