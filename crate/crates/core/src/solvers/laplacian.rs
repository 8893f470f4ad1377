use crate::grid::Grid2D;
use crate::scalar::Real;

/// `DᵀD x` for the forward-difference gradient with zero Dirichlet ghosts,
/// i.e. the negative 5-point Laplacian scaled by `1/Δu²`, `1/Δv²`.
pub fn neg_laplacian_apply<T: Real>(grid: &Grid2D<T>, x: &[T], out: &mut [T]) {
    let [nu, nv] = grid.dims();
    let cu = grid.u.spacing().powi(2).recip();
    let cv = grid.v.spacing().powi(2).recip();
    let two = T::lit(2.0);
    let at = |j: isize, k: isize| {
        if j < 0 || k < 0 || j >= nu as isize || k >= nv as isize {
            T::zero()
        } else {
            x[k as usize * nu + j as usize]
        }
    };
    for k in 0..nv {
        for j in 0..nu {
            let (ji, ki) = (j as isize, k as isize);
            let c = x[k * nu + j];
            out[k * nu + j] =
                cu * (two * c - at(ji - 1, ki) - at(ji + 1, ki)) + cv * (two * c - at(ji, ki - 1) - at(ji, ki + 1));
        }
    }
}

/// The Dirichlet Laplacian `L = -DᵀD`.
pub fn laplacian_apply<T: Real>(grid: &Grid2D<T>, x: &[T], out: &mut [T]) {
    neg_laplacian_apply(grid, x, out);
    out.iter_mut().for_each(|v| *v = -*v);
}

/// `‖D x‖²` including the boundary differences against the zero ghosts.
pub fn gradient_norm_sq<T: Real>(grid: &Grid2D<T>, x: &[T]) -> T {
    let [nu, nv] = grid.dims();
    let (du, dv) = (grid.u.spacing(), grid.v.spacing());
    let get = |j: usize, k: usize| x[k * nu + j];
    let mut acc = T::zero();
    for k in 0..nv {
        for j in 0..=nu {
            let left = if j == 0 { T::zero() } else { get(j - 1, k) };
            let right = if j == nu { T::zero() } else { get(j, k) };
            acc += ((right - left) / du).powi(2);
        }
    }
    for j in 0..nu {
        for k in 0..=nv {
            let lo = if k == 0 { T::zero() } else { get(j, k - 1) };
            let hi = if k == nv { T::zero() } else { get(j, k) };
            acc += ((hi - lo) / dv).powi(2);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Axis;
    use crate::solvers::dot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_grid(nu: usize, nv: usize) -> Grid2D<f64> {
        Grid2D::new(
            Axis::new(0.0, nu as f64, nu).unwrap(),
            Axis::new(0.0, nv as f64, nv).unwrap(),
        )
    }

    #[test]
    fn constant_image_leaks_only_at_boundary() {
        let g = unit_grid(6, 5);
        let x = vec![1.0; 30];
        let mut y = vec![0.0; 30];
        laplacian_apply(&g, &x, &mut y);
        for k in 0..5 {
            for j in 0..6 {
                let interior = j > 0 && j < 5 && k > 0 && k < 4;
                assert_eq!(y[k * 6 + j] == 0.0, interior);
            }
        }
    }

    #[test]
    fn one_dimensional_dirichlet_spectrum() {
        // A 1×N strip with a huge spacing in the other direction isolates the 1D operator
        // up to the constant 2/Δv² shift from the two ghost neighbours.
        let n = 24;
        let g = Grid2D::new(Axis::new(0.0, n as f64, n).unwrap(), Axis::new(0.0, 1e8, 1).unwrap());
        let shift = 2.0 / 1e16;
        // Power iteration for the largest eigenvalue, checked against 4 sin²(Nπ/(2(N+1))).
        let mut x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let mut y = vec![0.0; n];
        let mut lambda = 0.0;
        for _ in 0..4000 {
            neg_laplacian_apply(&g, &x, &mut y);
            lambda = dot(&x, &y) / dot(&x, &x);
            let norm = dot(&y, &y).sqrt();
            x.iter_mut().zip(&y).for_each(|(a, b)| *a = b / norm);
        }
        let want = 4.0
            * (n as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0)))
                .sin()
                .powi(2);
        assert!((lambda - shift - want).abs() < 1e-6, "{lambda} vs {want}");
        // Every analytic mode is an exact eigenvector.
        for k in 1..=n {
            let mode: Vec<f64> = (0..n)
                .map(|i| ((i + 1) as f64 * k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin())
                .collect();
            neg_laplacian_apply(&g, &mode, &mut y);
            let ev = 4.0
                * (k as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0)))
                    .sin()
                    .powi(2);
            for (a, b) in y.iter().zip(&mode) {
                assert!((a - (ev + shift) * b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_is_symmetric_and_matches_gradient_energy() {
        let g = Grid2D::new(Axis::new(-1.0, 1.0, 9).unwrap(), Axis::new(0.0, 3.0, 7).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<f64> = (0..63).map(|_| rng.random()).collect();
        let z: Vec<f64> = (0..63).map(|_| rng.random()).collect();
        let (mut ax, mut az) = (vec![0.0; 63], vec![0.0; 63]);
        neg_laplacian_apply(&g, &x, &mut ax);
        neg_laplacian_apply(&g, &z, &mut az);
        assert!((dot(&ax, &z) - dot(&x, &az)).abs() < 1e-12 * dot(&ax, &z).abs());
        assert!((dot(&ax, &x) - gradient_norm_sq(&g, &x)).abs() < 1e-10 * dot(&ax, &x));
    }
}
