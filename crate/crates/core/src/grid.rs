//! Regular cell-centred grids and the scalar volumes/images that live on them.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One axis of a cell-centred grid: `center(i) = lo + (0.5 + i)·Δ`, `Δ = (hi - lo)/n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub n: usize,
}

impl<T: Real> Axis<T> {
    pub fn new(lo: T, hi: T, n: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::validation(format!("axis extents [{lo}, {hi}] are not ordered")));
        }
        if n == 0 {
            return Err(Error::validation("axis needs at least one cell"));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn spacing(&self) -> T {
        (self.hi - self.lo) / T::from_usize_lossy(self.n)
    }

    pub fn center(&self, i: usize) -> T {
        self.lo + (T::lit(0.5) + T::from_usize_lossy(i)) * self.spacing()
    }

    pub fn centers(&self) -> Vec<T> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    /// Cell containing `x` with half-open cells `[edge_i, edge_{i+1})`.
    pub fn cell_of(&self, x: T) -> Option<usize> {
        if !(x >= self.lo && x < self.hi) {
            return None;
        }
        let i = ((x - self.lo) / self.spacing()).floor().to_usize()?;
        Some(i.min(self.n - 1))
    }

    /// Continuous index such that `center(i)` maps to `i`.
    pub fn fractional_index(&self, x: T) -> T {
        (x - self.lo) / self.spacing() - T::lit(0.5)
    }

    pub fn same_as(&self, o: &Self) -> bool {
        self.n == o.n && self.lo == o.lo && self.hi == o.hi
    }
}

/// Cell-centred grid on the box `[x1,x2]×[y1,y2]×[z1,z2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid3D<T> {
    pub x: Axis<T>,
    pub y: Axis<T>,
    pub z: Axis<T>,
}

/// Build a 3D grid from `[[x1,x2],[y1,y2],[z1,z2]]` and `[Nx,Ny,Nz]`.
pub fn make_grid<T: Real>(extents: [[T; 2]; 3], dims: [usize; 3]) -> Result<Grid3D<T>> {
    Ok(Grid3D {
        x: Axis::new(extents[0][0], extents[0][1], dims[0])?,
        y: Axis::new(extents[1][0], extents[1][1], dims[1])?,
        z: Axis::new(extents[2][0], extents[2][1], dims[2])?,
    })
}

impl<T: Real> Grid3D<T> {
    /// The cube `[-half, half]³` with `n` cells per axis.
    pub fn cube(half: T, n: usize) -> Result<Self> {
        make_grid([[-half, half]; 3], [n; 3])
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.x.n, self.y.n, self.z.n]
    }

    pub fn len(&self) -> usize {
        self.x.n * self.y.n * self.z.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> T {
        self.x.spacing() * self.y.spacing() * self.z.spacing()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.x.n * (j + self.y.n * k)
    }

    /// Grid of the common projection plane: `(ξ, z)` with the y-axis extents for ξ.
    pub fn projection_grid(&self) -> Grid2D<T> {
        Grid2D { u: self.y, v: self.z }
    }

    pub fn same_as(&self, o: &Self) -> bool {
        self.x.same_as(&o.x) && self.y.same_as(&o.y) && self.z.same_as(&o.z)
    }
}

/// Cell-centred 2D grid; `u` is the fast (ξ or y) axis, `v` the slow (z) axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<T> {
    pub u: Axis<T>,
    pub v: Axis<T>,
}

impl<T: Real> Grid2D<T> {
    pub fn new(u: Axis<T>, v: Axis<T>) -> Self {
        Self { u, v }
    }

    pub fn square(half: T, n: usize) -> Result<Self> {
        Ok(Self {
            u: Axis::new(-half, half, n)?,
            v: Axis::new(-half, half, n)?,
        })
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.u.n, self.v.n]
    }

    pub fn len(&self) -> usize {
        self.u.n * self.v.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> T {
        self.u.spacing() * self.v.spacing()
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j + self.u.n * k
    }

    pub fn same_as(&self, o: &Self) -> bool {
        self.u.same_as(&o.u) && self.v.same_as(&o.v)
    }
}

/// Scalar values on a [`Grid3D`], x-fastest then y then z.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume3D<T> {
    pub grid: Grid3D<T>,
    pub values: Vec<T>,
}

impl<T: Real> Volume3D<T> {
    pub fn zeros(grid: Grid3D<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: Grid3D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dimension(format!(
                "{} values for a {:?} grid",
                values.len(),
                grid.dims()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid3D<T>, f: impl Fn(T, T, T) -> T) -> Self {
        let (xs, ys, zs) = (grid.x.centers(), grid.y.centers(), grid.z.centers());
        let mut values = Vec::with_capacity(grid.len());
        for &z in &zs {
            for &y in &ys {
                for &x in &xs {
                    values.push(f(x, y, z));
                }
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> T {
        self.values[self.grid.index(i, j, k)]
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// Midpoint-rule integral over the box.
    pub fn integral(&self) -> T {
        self.sum() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }
}

/// Scalar values on a [`Grid2D`], u-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Image2D<T> {
    pub grid: Grid2D<T>,
    pub values: Vec<T>,
}

impl<T: Real> Image2D<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: Grid2D<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::dimension(format!(
                "{} values for a {:?} image",
                values.len(),
                grid.dims()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D<T>, f: impl Fn(T, T) -> T) -> Self {
        let (us, vs) = (grid.u.centers(), grid.v.centers());
        let mut values = Vec::with_capacity(grid.len());
        for &v in &vs {
            for &u in &us {
                values.push(f(u, v));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> T {
        self.values[self.grid.index(j, k)]
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    pub fn integral(&self) -> T {
        self.sum() * self.grid.cell_area()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Row `k` along the fast axis.
    pub fn row(&self, k: usize) -> &[T] {
        let n = self.grid.u.n;
        &self.values[k * n..(k + 1) * n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_centers() {
        let g = Grid3D::<f64>::cube(1.0, 200).unwrap();
        assert!((g.x.spacing() - 0.01).abs() < 1e-16);
        assert!((g.x.center(0) + 0.995).abs() < 1e-15);
        assert!((g.z.center(99) + 0.005).abs() < 1e-15);
        let single = make_grid([[0.0, 1.0]; 3], [1, 1, 1]).unwrap();
        assert_eq!(single.x.center(0), 0.5);
    }

    #[test]
    fn centers_follow_the_formula_bitwise() {
        let a = Axis::new(-0.7_f64, 1.3, 37).unwrap();
        let d = (1.3 - -0.7) / 37.0;
        for i in 0..37 {
            assert_eq!(a.center(i), -0.7 + (0.5 + i as f64) * d);
        }
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(make_grid([[1.0, -1.0], [0.0, 1.0], [0.0, 1.0]], [2, 2, 2]).is_err());
        assert!(make_grid([[0.0_f64, 1.0]; 3], [2, 0, 2]).is_err());
        assert!(Axis::new(0.0, 0.0, 3).is_err());
    }

    #[test]
    fn cells_are_half_open() {
        let a = Axis::new(0.0_f64, 1.0, 4).unwrap();
        assert_eq!(a.cell_of(0.0), Some(0));
        assert_eq!(a.cell_of(0.25), Some(1));
        assert_eq!(a.cell_of(0.999), Some(3));
        assert_eq!(a.cell_of(1.0), None);
        assert_eq!(a.cell_of(-1e-12), None);
        assert_eq!(a.cell_of(f64::NAN), None);
    }
}
