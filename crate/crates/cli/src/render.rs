use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use ffl_core::{Image, Volume};
use image::{GrayImage, Luma};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SliceAxis {
    X,
    Y,
    Z,
}

/// A 2D array of values, row-major with `width` columns.
pub struct Slice {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

pub fn volume_slice(vol: &Volume, axis: SliceAxis, index: usize) -> Result<Slice> {
    let [nx, ny, nz] = vol.grid.dims();
    let (limit, width, height) = match axis {
        SliceAxis::X => (nx, ny, nz),
        SliceAxis::Y => (ny, nx, nz),
        SliceAxis::Z => (nz, nx, ny),
    };
    if index >= limit {
        bail!("--index {index} is out of range for axis {axis:?} with {limit} cells");
    }
    let mut values = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            values.push(match axis {
                SliceAxis::X => vol.get(index, c, r),
                SliceAxis::Y => vol.get(c, index, r),
                SliceAxis::Z => vol.get(c, r, index),
            });
        }
    }
    Ok(Slice { width, height, values })
}

pub fn image_slice(img: &Image) -> Slice {
    let [nu, nv] = img.grid.dims();
    Slice {
        width: nu,
        height: nv,
        values: img.values.clone(),
    }
}

/// Min-max normalised 8-bit grayscale; the first row of `slice` ends up at the bottom.
pub fn to_png(slice: &Slice, range: Option<(f64, f64)>, path: &Path) -> Result<()> {
    let (lo, hi) = range.unwrap_or_else(|| min_max(&slice.values));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut img = GrayImage::new(slice.width as u32, slice.height as u32);
    for r in 0..slice.height {
        for c in 0..slice.width {
            let v = ((slice.values[r * slice.width + c] - lo) / span).clamp(0.0, 1.0);
            let y = (slice.height - 1 - r) as u32;
            img.put_pixel(c as u32, y, Luma([(v * 255.0).round() as u8]));
        }
    }
    img.save(path).with_context(|| format!("writing {}", path.display()))
}

pub fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}
