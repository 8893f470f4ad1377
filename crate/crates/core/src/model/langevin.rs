//! Langevin magnetization curve and the kernels derived from it.
//!
//! Every function here has a removable singularity at the origin. Below
//! [`Real::SERIES_RADIUS`] the Taylor expansion (six terms) is used; above it
//! the closed forms are evaluated through `exp(-2|x|)` so that nothing
//! overflows for large arguments.

use crate::linalg::{Mat2, Vec2};
use crate::scalar::Real;

// Taylor coefficients of L(x)/x in powers of x².
const L_OVER_X: [f64; 6] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
    -1382.0 / 638512875.0,
];

// Taylor coefficients of L'(x) in powers of x².
const L_PRIME: [f64; 6] = [
    1.0 / 3.0,
    -1.0 / 15.0,
    2.0 / 189.0,
    -1.0 / 675.0,
    2.0 / 10395.0,
    -15202.0 / 638512875.0,
];

fn even_series<T: Real>(coeffs: &[f64; 6], x: T) -> T {
    let x2 = x * x;
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x2 + T::lit(c))
}

fn in_series_range<T: Real>(x: T) -> bool {
    x.abs() < T::lit(T::SERIES_RADIUS)
}

/// `coth(|x|)` and `1/sinh²(|x|)` from `e = exp(-2|x|)`.
fn coth_csch2<T: Real>(x: T) -> (T, T) {
    let one_minus_e = -(T::lit(-2.0) * x.abs()).exp_m1();
    let e = T::one() - one_minus_e;
    let two = T::lit(2.0);
    let coth = two / one_minus_e - T::one();
    let csch2 = T::lit(4.0) * e / (one_minus_e * one_minus_e);
    (coth, csch2)
}

/// Langevin function `L(x) = coth(x) - 1/x`, with `L(0) = 0`.
pub fn langevin<T: Real>(x: T) -> T {
    if in_series_range(x) {
        return x * even_series(&L_OVER_X, x);
    }
    let (coth, _) = coth_csch2(x);
    (coth - x.abs().recip()).copysign(x)
}

/// `L(x)/x`, continuous at 0 with value 1/3.
pub fn langevin_over_x<T: Real>(x: T) -> T {
    if in_series_range(x) {
        return even_series(&L_OVER_X, x);
    }
    langevin(x) / x
}

/// Derivative `L'(x) = 1/x² - 1/sinh²(x)`, with `L'(0) = 1/3`.
pub fn langevin_deriv<T: Real>(x: T) -> T {
    if in_series_range(x) {
        return even_series(&L_PRIME, x);
    }
    let (_, csch2) = coth_csch2(x);
    (x * x).recip() - csch2
}

/// Radial profile `f(z) = L'(z) + (n-1) L(z)/z` of the scalar kernel.
pub fn kernel_profile<T: Real>(z: T, dim: usize) -> T {
    let n1 = T::from_usize_lossy(dim.saturating_sub(1));
    langevin_deriv(z) + n1 * langevin_over_x(z)
}

/// Scalar convolution kernel `κ_h(y) = f(|y|/h) / h` at distance `dist`.
///
/// `dim` is the dimension of the space the convolution lives in; the
/// reconstruction pipeline always uses 2.
pub fn kernel_kappa<T: Real>(dist: T, h: T, dim: usize) -> T {
    kernel_profile(dist.abs() / h, dim) / h
}

/// The vector field `L(|d|/h) d/|d|` whose Jacobian is the core-operator integrand.
pub fn langevin_field<T: Real>(d: Vec2<T>, h: T) -> Vec2<T> {
    let s = d.norm();
    if s == T::zero() {
        return Vec2::zero();
    }
    // L(s/h)/s = L(s/h)/(s/h) / h keeps the small-distance branch accurate.
    d.scale(langevin_over_x(s / h) / h)
}

/// Jacobian of [`langevin_field`] with respect to the evaluation point.
///
/// Closed form `L'(s/h)/h · uuᵀ + L(s/h)/s · (I - uuᵀ)` with `s = |d|`,
/// `u = d/s`; equals `I/(3h)` at `d = 0`. Its trace is
/// `kernel_kappa(|d|, h, 2)`.
pub fn kernel_jacobian<T: Real>(d: Vec2<T>, h: T) -> Mat2<T> {
    let s = d.norm();
    let inv_h = h.recip();
    let z = s * inv_h;
    let radial = langevin_deriv(z) * inv_h;
    let tangential = langevin_over_x(z) * inv_h;
    if s == T::zero() {
        return Mat2::identity().scale(radial);
    }
    let (ux, uy) = (d.x / s, d.y / s);
    let diff = radial - tangential;
    let off = diff * ux * uy;
    Mat2([[tangential + diff * ux * ux, off], [off, tangential + diff * uy * uy]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn langevin_reference_values() {
        assert_eq!(langevin(0.0_f64), 0.0);
        assert!((langevin(1.0_f64) - 0.313_035_285_499_331_2).abs() < 1e-15);
        assert!((langevin_deriv(0.0_f64) - 1.0 / 3.0).abs() < 1e-16);
        assert!((langevin_deriv(50.0_f64) - 1.0 / 2500.0).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let x = 1.0_f64;
        let step = 1e-5;
        let fd = (langevin(x + step) - langevin(x - step)) / (2.0 * step);
        assert!((langevin_deriv(x) - fd).abs() < 1e-8);
    }

    #[test]
    fn huge_arguments_do_not_overflow() {
        for x in [700.0_f64, 800.0, 1e6, 1e300] {
            assert!((langevin(x) - (1.0 - 1.0 / x)).abs() < 1e-15);
            assert!((langevin_deriv(x) - 1.0 / (x * x)).abs() <= 1e-15 / (x * x));
            assert!(langevin(-x) < 0.0);
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_switchover() {
        let r = f64::SERIES_RADIUS;
        for x in [r * (1.0 - 1e-12), r * (1.0 + 1e-12)] {
            let series_l = x * even_series(&L_OVER_X, x);
            let closed_l = {
                let (coth, _) = coth_csch2(x);
                coth - 1.0 / x
            };
            assert!((series_l - closed_l).abs() < 1e-12);
            let series_d = even_series(&L_PRIME, x);
            let closed_d = {
                let (_, csch2) = coth_csch2(x);
                1.0 / (x * x) - csch2
            };
            assert!((series_d - closed_d).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_reference_values() {
        assert!((kernel_kappa(0.0_f64, 1.0, 2) - 2.0 / 3.0).abs() < 1e-15);
        assert!((kernel_kappa(0.0_f64, 1.0, 3) - 1.0).abs() < 1e-15);
        let far = kernel_kappa(100.0_f64, 0.01, 2);
        assert!((far - 0.01).abs() < 0.01 * 0.01);
        let d = 0.37_f64;
        let s = 2.0;
        let scaled = kernel_kappa(d / s, 1.0 / s, 2);
        assert!((scaled - s * kernel_kappa(d, 1.0, 2)).abs() < 1e-12 * scaled);
    }

    #[test]
    fn jacobian_at_origin_is_isotropic() {
        let j = kernel_jacobian(Vec2::new(0.0_f64, 0.0), 1.0);
        assert!((j.0[0][0] - 1.0 / 3.0).abs() < 1e-16);
        assert!((j.0[1][1] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(j.0[0][1], 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let d = Vec2::new(0.3_f64, -0.2);
        let h = 0.05;
        let step = 1e-7;
        let j = kernel_jacobian(d, h);
        let dx = Vec2::new(step, 0.0);
        let dy = Vec2::new(0.0, step);
        let col_x = (langevin_field(d + dx, h) - langevin_field(d - dx, h)).scale(0.5 / step);
        let col_y = (langevin_field(d + dy, h) - langevin_field(d - dy, h)).scale(0.5 / step);
        assert!((j.0[0][0] - col_x.x).abs() < 1e-6);
        assert!((j.0[1][0] - col_x.y).abs() < 1e-6);
        assert!((j.0[0][1] - col_y.x).abs() < 1e-6);
        assert!((j.0[1][1] - col_y.y).abs() < 1e-6);
    }

    #[test]
    fn f32_kernels_are_sane() {
        assert!((langevin(1.0_f32) - 0.313_035_3).abs() < 1e-6);
        assert!((kernel_kappa(0.0_f32, 1.0, 2) - 2.0 / 3.0).abs() < 1e-6);
        let j = kernel_jacobian(Vec2::new(0.01_f32, 0.02), 0.05);
        let k = kernel_kappa(Vec2::new(0.01_f32, 0.02).norm(), 0.05, 2);
        assert!((j.trace() - k).abs() < 1e-5 * k);
    }

    proptest! {
        #[test]
        fn langevin_is_odd_and_bounded(x in -1e3_f64..1e3) {
            prop_assert_eq!(langevin(-x), -langevin(x));
            prop_assert!(langevin(x).abs() < 1.0);
            prop_assert_eq!(langevin_deriv(-x), langevin_deriv(x));
        }

        #[test]
        fn trace_identity(dx in -2.0_f64..2.0, dy in -2.0_f64..2.0, h in 1e-3_f64..1.0) {
            let d = Vec2::new(dx, dy);
            let j = kernel_jacobian(d, h);
            let k = kernel_kappa(d.norm(), h, 2);
            prop_assert!((j.trace() - k).abs() <= 1e-12 * k.max(1.0));
            prop_assert_eq!(j.0[0][1], j.0[1][0]);
        }

        #[test]
        fn kappa_decreases_with_distance(a in 0.0_f64..5.0, b in 0.0_f64..5.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(kernel_kappa(lo, 0.1, 2) > kernel_kappa(hi, 0.1, 2));
            prop_assert!(kernel_kappa(hi, 0.1, 2) > 0.0);
        }
    }
}
