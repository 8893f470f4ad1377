use ffl_core::grid::{Grid2D, Image2D};
use ffl_core::linalg::Vec2;
use ffl_core::model::kernel_kappa;
use ffl_core::recon::{stage2_deconvolve, Deconvolver};
use ffl_core::solvers::CgOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn direct_blur(img: &Image2D<f64>, h: f64) -> Image2D<f64> {
    let g = img.grid;
    let area = g.cell_area();
    Image2D::from_fn(g, |u, v| {
        let mut acc = 0.0;
        for k in 0..g.v.n {
            for j in 0..g.u.n {
                let d = Vec2::new(u - g.u.center(j), v - g.v.center(k));
                acc += img.get(j, k) * kernel_kappa(d.norm(), h, 2) * area;
            }
        }
        acc
    })
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn smooth(grid: Grid2D<f64>) -> Image2D<f64> {
    Image2D::from_fn(grid, |u, v| {
        (-((u - 0.1).powi(2) + (v + 0.2).powi(2)) / (2.0 * 0.2f64.powi(2))).exp()
    })
}

fn opts() -> CgOptions<f64> {
    CgOptions {
        tol: 1e-12,
        max_iter: 5000,
    }
}

#[test]
fn inverts_blur_of_smooth_image() {
    let grid = Grid2D::square(1.0, 32).unwrap();
    let h = grid.u.spacing();
    let chi0 = smooth(grid);
    let u = direct_blur(&chi0, h);
    let chi = stage2_deconvolve(&u, h, 1e-8, &opts()).unwrap();
    let e = rel(&chi.values, &chi0.values);
    assert!(e < 1e-2, "relative error {e}");
}

#[test]
fn zero_data_gives_zero() {
    let grid = Grid2D::square(1.0, 12).unwrap();
    let chi = stage2_deconvolve(&Image2D::zeros(grid), 0.1, 1e-3, &opts()).unwrap();
    assert!(chi.values.iter().all(|&x| x == 0.0));
}

fn functional(chi: &Image2D<f64>, u: &Image2D<f64>, h: f64, lambda: f64) -> f64 {
    let g = chi.grid;
    let blurred = direct_blur(chi, h);
    let fit: f64 = blurred.values.iter().zip(&u.values).map(|(a, b)| (a - b).powi(2)).sum();
    let [nu, nv] = g.dims();
    let at = |j: isize, k: isize| {
        if j < 0 || k < 0 || j >= nu as isize || k >= nv as isize {
            0.0
        } else {
            chi.get(j as usize, k as usize)
        }
    };
    let (du, dv) = (g.u.spacing(), g.v.spacing());
    let mut grad = 0.0;
    for k in 0..=nv as isize {
        for j in 0..=nu as isize {
            if k < nv as isize {
                grad += ((at(j, k) - at(j - 1, k)) / du).powi(2);
            }
            if j < nu as isize {
                grad += ((at(j, k) - at(j, k - 1)) / dv).powi(2);
            }
        }
    }
    0.5 * fit + 0.5 * lambda * grad
}

#[test]
fn minimizes_the_regularized_functional() {
    let grid = Grid2D::square(1.0, 10).unwrap();
    let h = 0.3;
    let lambda = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let noise = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let u = Image2D::from_values(grid, noise).unwrap();
    let chi = stage2_deconvolve(&u, h, lambda, &opts()).unwrap();
    let base = functional(&chi, &u, h, lambda);
    for _ in 0..10 {
        let mut probe = chi.clone();
        let eps = 1e-4;
        for x in probe.values.iter_mut() {
            *x += eps * rng.random_range(-1.0..1.0);
        }
        let j = functional(&probe, &u, h, lambda);
        assert!(j >= base - 1e-12 * base.abs(), "{j} < {base}");
    }
    // first-order condition along coordinate directions
    for c in [0, 17, 55, 99] {
        let mut plus = chi.clone();
        let mut minus = chi.clone();
        let eps = 1e-5;
        plus.values[c] += eps;
        minus.values[c] -= eps;
        let slope = (functional(&plus, &u, h, lambda) - functional(&minus, &u, h, lambda)) / (2.0 * eps);
        assert!(slope.abs() < 1e-6, "cell {c}: slope {slope}");
    }
}

#[test]
fn heavy_regularization_is_bounded_by_the_smallest_dirichlet_mode() {
    let n = 16;
    let grid = Grid2D::square(1.0, n).unwrap();
    let h = grid.u.spacing();
    let u = direct_blur(&smooth(grid), h);
    let ktu = direct_blur(&u, h);
    let delta = grid.u.spacing();
    let mu_min = 2.0 * (2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos()) / (delta * delta);
    let d = Deconvolver::new(grid, h, None).unwrap();
    for lambda in [1e4, 1e6] {
        let (chi, out) = d.deconvolve(&u, lambda, &opts()).unwrap();
        assert!(out.converged);
        let bound = ktu.norm() / (lambda * mu_min);
        assert!(
            chi.norm() <= bound * (1.0 + 1e-9),
            "lambda {lambda}: {} > {bound}",
            chi.norm()
        );
    }
}

#[test]
fn rejects_bad_parameters() {
    let grid = Grid2D::square(1.0, 4).unwrap();
    let u = Image2D::zeros(grid);
    assert!(stage2_deconvolve(&u, 0.0, 1e-3, &opts()).is_err());
    assert!(stage2_deconvolve(&u, 0.1, 0.0, &opts()).is_err());
    assert!(stage2_deconvolve(&u, 0.1, -1.0, &opts()).is_err());
}
