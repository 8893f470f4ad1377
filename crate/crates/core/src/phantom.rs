//! Analytic indicator phantoms and the voxel X-ray projector.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, Grid3D, Image2D, Volume3D};
use crate::linalg::Vec3;
use crate::model::{e_theta, e_theta_perp};
use crate::scalar::Real;

/// A solid whose indicator can be rasterized onto a grid.
pub trait Shape<T> {
    fn contains(&self, p: Vec3<T>) -> bool;
}

/// Solid right circular cone, boundary inclusive.
#[derive(Clone, Copy, Debug)]
pub struct Cone<T> {
    apex: Vec3<T>,
    axis: Vec3<T>,
    height: T,
    radius: T,
}

impl<T: Real> Cone<T> {
    pub fn new(apex: Vec3<T>, base_center: Vec3<T>, base_radius: T) -> Result<Self> {
        let d = base_center - apex;
        let height = d.norm();
        if !(height > T::zero()) {
            return Err(Error::validation("cone apex and base centre coincide"));
        }
        if !(base_radius > T::zero()) {
            return Err(Error::validation("cone base radius must be > 0"));
        }
        Ok(Self {
            apex,
            axis: d.scale(height.recip()),
            height,
            radius: base_radius,
        })
    }
}

impl<T: Real> Shape<T> for Cone<T> {
    fn contains(&self, p: Vec3<T>) -> bool {
        let rel = p - self.apex;
        let t = rel.dot(self.axis);
        if t < T::zero() || t > self.height {
            return false;
        }
        let radial = (rel - self.axis.scale(t)).norm();
        radial <= self.radius * t / self.height
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Ball<T> {
    pub center: Vec3<T>,
    pub radius: T,
}

impl<T: Real> Shape<T> for Ball<T> {
    fn contains(&self, p: Vec3<T>) -> bool {
        (p - self.center).norm() <= self.radius
    }
}

/// Indicator volume evaluated at `supersample³` points per cell (1 = cell centres only).
pub fn rasterize<T: Real, S: Shape<T> + Sync>(grid: Grid3D<T>, shape: &S, supersample: usize) -> Volume3D<T> {
    let n = supersample.max(1);
    let inv = T::from_usize_lossy(n).recip();
    let offsets: Vec<T> = (0..n)
        .map(|a| (T::lit(0.5) + T::from_usize_lossy(a)) * inv - T::lit(0.5))
        .collect();
    let (dx, dy, dz) = (grid.x.spacing(), grid.y.spacing(), grid.z.spacing());
    let weight = inv * inv * inv;
    let mut vol = Volume3D::zeros(grid);
    let plane = grid.x.n * grid.y.n;
    vol.values.par_chunks_mut(plane).enumerate().for_each(|(k, slab)| {
        let zc = grid.z.center(k);
        for j in 0..grid.y.n {
            let yc = grid.y.center(j);
            for i in 0..grid.x.n {
                let xc = grid.x.center(i);
                let mut hits = 0usize;
                for &oz in &offsets {
                    for &oy in &offsets {
                        for &ox in &offsets {
                            let p = Vec3::new(xc + ox * dx, yc + oy * dy, zc + oz * dz);
                            hits += usize::from(shape.contains(p));
                        }
                    }
                }
                slab[i + grid.x.n * j] = T::from_usize_lossy(hits) * weight;
            }
        }
    });
    vol
}

/// Binary cone indicator sampled at cell centres.
pub fn cone_phantom<T: Real>(
    grid: Grid3D<T>,
    apex: Vec3<T>,
    base_center: Vec3<T>,
    base_radius: T,
) -> Result<Volume3D<T>> {
    Ok(rasterize(grid, &Cone::new(apex, base_center, base_radius)?, 1))
}

/// Binary ball indicator sampled at cell centres.
pub fn ball_phantom<T: Real>(grid: Grid3D<T>, center: Vec3<T>, radius: T) -> Result<Volume3D<T>> {
    if !(radius > T::zero()) {
        return Err(Error::validation("ball radius must be > 0"));
    }
    Ok(rasterize(grid, &Ball { center, radius }, 1))
}

/// The stand-in cone used by the examples: apex and base centre on the x-axis.
pub fn default_cone<T: Real>(grid: Grid3D<T>) -> Result<Volume3D<T>> {
    cone_phantom(
        grid,
        Vec3::new(T::lit(0.6), T::zero(), T::zero()),
        Vec3::new(T::lit(-0.6), T::zero(), T::zero()),
        T::lit(0.45),
    )
}

/// Trilinear interpolation of cell-centre values, zero beyond the outermost centres' neighbours.
fn trilinear<T: Real>(vol: &Volume3D<T>, p: Vec3<T>) -> T {
    let g = &vol.grid;
    let fx = g.x.fractional_index(p.x);
    let fy = g.y.fractional_index(p.y);
    let fz = g.z.fractional_index(p.z);
    let (ix, iy, iz) = (fx.floor(), fy.floor(), fz.floor());
    let (wx, wy, wz) = (fx - ix, fy - iy, fz - iz);
    let (Some(ix), Some(iy), Some(iz)) = (ix.to_isize(), iy.to_isize(), iz.to_isize()) else {
        return T::zero();
    };
    let n = [g.x.n as isize, g.y.n as isize, g.z.n as isize];
    let mut acc = T::zero();
    for (dz, cz) in [(0, T::one() - wz), (1, wz)] {
        let k = iz + dz;
        if k < 0 || k >= n[2] || cz == T::zero() {
            continue;
        }
        for (dy, cy) in [(0, T::one() - wy), (1, wy)] {
            let j = iy + dy;
            if j < 0 || j >= n[1] || cy == T::zero() {
                continue;
            }
            for (dx, cx) in [(0, T::one() - wx), (1, wx)] {
                let i = ix + dx;
                if i < 0 || i >= n[0] || cx == T::zero() {
                    continue;
                }
                acc += cx * cy * cz * vol.get(i as usize, j as usize, k as usize);
            }
        }
    }
    acc
}

/// X-ray projection `X_θ[ρ](ξ, z) = ∫ ρ(ξ e_θ^⊥ + z e_z + s e_θ) ds` onto `out`.
///
/// Each ray is integrated with the composite midpoint rule at a step of at most
/// half the smaller in-plane spacing, over the interpolant's support.
pub fn xray_project<T: Real>(vol: &Volume3D<T>, theta: T, out: &Grid2D<T>) -> Image2D<T> {
    let g = &vol.grid;
    let dir = e_theta(theta);
    let perp = e_theta_perp(theta);
    let max_step = g.x.spacing().min(g.y.spacing()) * T::lit(0.5);

    // Interpolant support is the box widened by half a cell on each side.
    let xs = [
        g.x.lo - g.x.spacing() * T::lit(0.5),
        g.x.hi + g.x.spacing() * T::lit(0.5),
    ];
    let ys = [
        g.y.lo - g.y.spacing() * T::lit(0.5),
        g.y.hi + g.y.spacing() * T::lit(0.5),
    ];
    let reach = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| (x * dir.x + y * dir.y).abs()))
        .fold(T::zero(), T::max);
    // Tolerance keeps the step count stable when the ratio is an integer up to roundoff.
    let steps = (T::lit(2.0) * reach / max_step - T::lit(1e-9))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let step = T::lit(2.0) * reach / T::from_usize_lossy(steps);

    let mut img = Image2D::zeros(*out);
    let nu = out.u.n;
    img.values.par_chunks_mut(nu).enumerate().for_each(|(k, row)| {
        let z = out.v.center(k);
        for (j, cell) in row.iter_mut().enumerate() {
            let xi = out.u.center(j);
            let base = perp.scale(xi) + Vec3::new(T::zero(), T::zero(), z);
            let mut acc = T::zero();
            for m in 0..steps {
                let s = -reach + (T::lit(0.5) + T::from_usize_lossy(m)) * step;
                acc += trilinear(vol, base + dir.scale(s));
            }
            *cell = acc * step;
        }
    });
    img
}
