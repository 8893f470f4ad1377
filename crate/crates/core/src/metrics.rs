//! Volume comparison: RMSE, relative L2 and Dice overlap after thresholding.

use crate::error::{Error, Result};
use crate::grid::Volume3D;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics<T> {
    pub rmse: T,
    /// `‖a − b‖ / ‖b‖`: the second volume is the reference.
    pub rel_l2: T,
    pub dice: T,
}

/// Cells with value `>= frac · max|v|`; empty for an all-zero volume.
pub fn threshold_mask<T: Real>(vol: &Volume3D<T>, frac: T) -> Vec<bool> {
    let m = vol.max_abs();
    if m == T::zero() {
        return vec![false; vol.values.len()];
    }
    let cut = frac * m;
    vol.values.iter().map(|&v| v >= cut).collect()
}

pub fn rmse<T: Real>(a: &[T], b: &[T]) -> T {
    let n = T::from_usize_lossy(a.len().max(1));
    (a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>() / n).sqrt()
}

pub fn rel_l2<T: Real>(a: &[T], b: &[T]) -> T {
    let num: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let den: T = b.iter().map(|&y| y * y).sum();
    if den == T::zero() {
        return if num == T::zero() { T::zero() } else { T::infinity() };
    }
    (num / den).sqrt()
}

/// `2|A∩B| / (|A|+|B|)`, 1 when both sets are empty.
pub fn dice(a: &[bool], b: &[bool]) -> f64 {
    let (mut both, mut na, mut nb) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.iter().zip(b) {
        na += x as usize;
        nb += y as usize;
        both += (x && y) as usize;
    }
    if na + nb == 0 {
        1.0
    } else {
        2.0 * both as f64 / (na + nb) as f64
    }
}

/// Each volume is thresholded at `threshold_frac` of its own maximum.
pub fn metrics<T: Real>(a: &Volume3D<T>, b: &Volume3D<T>, threshold_frac: T) -> Result<Metrics<T>> {
    if !a.grid.same_as(&b.grid) {
        return Err(Error::validation("volumes live on different grids"));
    }
    let d = dice(&threshold_mask(a, threshold_frac), &threshold_mask(b, threshold_frac));
    Ok(Metrics {
        rmse: rmse(&a.values, &b.values),
        rel_l2: rel_l2(&a.values, &b.values),
        dice: T::lit(d),
    })
}
