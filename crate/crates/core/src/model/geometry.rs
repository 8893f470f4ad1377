//! Scan geometry, rotations, drive waveforms and the FFL trajectory.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec2, Vec3};
use crate::scalar::Real;

/// Permeability of free space used by the reference experiment.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Every parameter of a multi-angle 3D FFL scan.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanGeometry<T> {
    /// Rotation angles of the FFL in the xy-plane, strictly increasing in `[0, π)`.
    pub angles: Vec<T>,
    /// Gradient strength `G` of the selection field.
    pub gradient: T,
    /// Drive amplitudes `A1` (in-plane, along `e_θ^⊥`) and `A2` (along z).
    pub amplitudes: [T; 2],
    /// Drive frequencies in cycles per scan period.
    pub frequencies: [u32; 2],
    /// Drive phases in radians.
    pub phases: [T; 2],
    /// Acquisition period shared by all angles unless `angle_periods` is set.
    pub period: T,
    pub angle_periods: Option<Vec<T>>,
    /// Number of time samples `L` per angle.
    pub samples_per_angle: usize,
    /// Resolution parameter `h = H_sat / G`.
    pub h: T,
    pub mu0: T,
    /// Magnetic moment of one particle.
    pub moment: T,
    /// Homogeneous receive-coil sensitivity matrix `P`.
    pub coil: Mat3<T>,
}

/// `θ_l = l·π/n` for `l = 0..n`.
pub fn uniform_angles<T: Real>(n: usize) -> Vec<T> {
    let step = T::PI() / T::from_usize_lossy(n);
    (0..n).map(|l| T::from_usize_lossy(l) * step).collect()
}

impl<T: Real> ScanGeometry<T> {
    /// Constants of the reference experiment: 200 angles, `f = (201, 202)`,
    /// `φ = π/2`, unit amplitudes/gradient/moment, `h = 0.01`, `L = 400 000`, `T = 1`.
    pub fn reference() -> Self {
        Self {
            angles: uniform_angles(200),
            gradient: T::one(),
            amplitudes: [T::one(), T::one()],
            frequencies: [201, 202],
            phases: [T::FRAC_PI_2(), T::FRAC_PI_2()],
            period: T::one(),
            angle_periods: None,
            samples_per_angle: 400_000,
            h: T::lit(0.01),
            mu0: T::lit(MU0),
            moment: T::one(),
            coil: Mat3::identity(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::validation(msg));
        if !(self.gradient > T::zero()) {
            return bad(format!("gradient must be > 0, got {}", self.gradient));
        }
        if !(self.h > T::zero()) {
            return bad(format!("h must be > 0, got {}", self.h));
        }
        if self.samples_per_angle < 2 {
            return bad(format!(
                "samples_per_angle must be >= 2, got {}",
                self.samples_per_angle
            ));
        }
        if !(self.period > T::zero()) {
            return bad(format!("period must be > 0, got {}", self.period));
        }
        if self.angles.is_empty() {
            return bad("at least one angle is required".into());
        }
        for (l, &a) in self.angles.iter().enumerate() {
            if !(a >= T::zero() && a < T::PI()) {
                return bad(format!("angle {l} = {a} is outside [0, π)"));
            }
            if l > 0 && !(a > self.angles[l - 1]) {
                return bad(format!("angles must be strictly increasing (index {l})"));
            }
        }
        if let Some(p) = &self.angle_periods {
            if p.len() != self.angles.len() {
                return bad(format!(
                    "{} per-angle periods for {} angles",
                    p.len(),
                    self.angles.len()
                ));
            }
            if p.iter().any(|&t| !(t > T::zero())) {
                return bad("per-angle periods must be > 0".into());
            }
        }
        if self.coil.inverse().is_none() {
            return bad("coil sensitivity matrix P is singular".into());
        }
        if !(self.mu0 > T::zero()) || self.moment == T::zero() {
            return bad("mu0 must be > 0 and the particle moment nonzero".into());
        }
        Ok(())
    }

    /// Saturation field strength `H_sat = h·G`.
    pub fn saturation_field(&self) -> T {
        self.h * self.gradient
    }

    pub fn period_for(&self, angle_index: usize) -> T {
        self.angle_periods
            .as_ref()
            .and_then(|p| p.get(angle_index).copied())
            .unwrap_or(self.period)
    }

    /// Sample times `t_m = m·T/L`, endpoint excluded.
    pub fn sample_times(&self, angle_index: usize) -> Vec<T> {
        let dt = self.period_for(angle_index) / T::from_usize_lossy(self.samples_per_angle);
        (0..self.samples_per_angle)
            .map(|m| T::from_usize_lossy(m) * dt)
            .collect()
    }

    /// Drive waveforms `Λ_i(t) = cos(2π f_i t/T + φ_i)` and their time derivatives.
    pub fn drive(&self, t: T, period: T) -> ([T; 2], [T; 2]) {
        let mut value = [T::zero(); 2];
        let mut rate = [T::zero(); 2];
        for i in 0..2 {
            let omega = T::TAU() * T::from_u32(self.frequencies[i]).unwrap() / period;
            let phase = omega * t + self.phases[i];
            value[i] = phase.cos();
            rate[i] = -omega * phase.sin();
        }
        (value, rate)
    }
}

/// In-plane rotation `R_θ` about the z-axis.
pub fn rotation<T: Real>(theta: T) -> Mat3<T> {
    let (s, c) = theta.sin_cos();
    Mat3([[c, -s, T::zero()], [s, c, T::zero()], [T::zero(), T::zero(), T::one()]])
}

/// FFL direction `e_θ = (cos θ, sin θ, 0)`.
pub fn e_theta<T: Real>(theta: T) -> Vec3<T> {
    let (s, c) = theta.sin_cos();
    Vec3::new(c, s, T::zero())
}

/// `e_θ^⊥ = (-sin θ, cos θ, 0)`.
pub fn e_theta_perp<T: Real>(theta: T) -> Vec3<T> {
    let (s, c) = theta.sin_cos();
    Vec3::new(-s, c, T::zero())
}

/// The reflection-rotation `E_θ` mapping the rotated-frame field onto the scanner frame.
pub fn e_theta_matrix<T: Real>(theta: T) -> Mat3<T> {
    let mut m = rotation(theta);
    m.0[2][2] = -T::one();
    m
}

/// One point of the FFL/plane intersection trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample<T> {
    pub t: T,
    /// Position in the `(ξ, z)` plane.
    pub r: Vec2<T>,
    /// Analytic velocity `dr/dt`.
    pub v: Vec2<T>,
}

/// Lissajous point `r(t) = (A1 Λ1(t)/G, A2 Λ2(t)/G)` for the shared period.
pub fn ffl_trajectory<T: Real>(t: T, geom: &ScanGeometry<T>) -> TrajectorySample<T> {
    ffl_trajectory_with_period(t, geom, geom.period)
}

pub fn ffl_trajectory_with_period<T: Real>(t: T, geom: &ScanGeometry<T>, period: T) -> TrajectorySample<T> {
    let (value, rate) = geom.drive(t, period);
    let g = geom.gradient;
    let [a1, a2] = geom.amplitudes;
    TrajectorySample {
        t,
        r: Vec2::new(a1 * value[0] / g, a2 * value[1] / g),
        v: Vec2::new(a1 * rate[0] / g, a2 * rate[1] / g),
    }
}

/// Trajectory samples at `t_m = m·T_l/L` for one angle.
pub fn trajectory_samples<T: Real>(geom: &ScanGeometry<T>, angle_index: usize) -> Vec<TrajectorySample<T>> {
    let period = geom.period_for(angle_index);
    geom.sample_times(angle_index)
        .into_iter()
        .map(|t| ffl_trajectory_with_period(t, geom, period))
        .collect()
}

/// Precomputed map `s ↦ s̃ = -(1/(m μ0)) E_θ⁻¹ P⁻¹ s` and its inverse.
#[derive(Clone, Copy, Debug)]
pub struct SignalTransform<T> {
    forward: Mat3<T>,
    inverse: Mat3<T>,
}

impl<T: Real> SignalTransform<T> {
    pub fn new(theta: T, geom: &ScanGeometry<T>) -> Result<Self> {
        let p_inv = geom
            .coil
            .inverse()
            .ok_or_else(|| Error::validation("coil sensitivity matrix P is singular"))?;
        let e = e_theta_matrix(theta);
        let c = geom.moment * geom.mu0;
        let forward = e.transpose().mul_mat(&p_inv).scale(-c.recip());
        let inverse = geom.coil.mul_mat(&e).scale(-c);
        Ok(Self { forward, inverse })
    }

    pub fn apply(&self, s: Vec3<T>) -> Vec3<T> {
        self.forward.mul_vec(s)
    }

    pub fn invert(&self, s_tilde: Vec3<T>) -> Vec3<T> {
        self.inverse.mul_vec(s_tilde)
    }
}

/// Single-shot form of [`SignalTransform::apply`].
pub fn transform_signal<T: Real>(s: Vec3<T>, theta: T, geom: &ScanGeometry<T>) -> Result<Vec3<T>> {
    Ok(SignalTransform::new(theta, geom)?.apply(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geom() -> ScanGeometry<f64> {
        ScanGeometry {
            samples_per_angle: 1000,
            ..ScanGeometry::reference()
        }
    }

    #[test]
    fn e_theta_reference_values() {
        let e0 = e_theta_matrix(0.0_f64);
        assert_eq!(e0, Mat3::diag([1.0, 1.0, -1.0]));
        let e90 = e_theta_matrix(std::f64::consts::FRAC_PI_2);
        let want = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((e90.0[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn e_theta_is_orthogonal_with_negative_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let e = e_theta_matrix(th);
            let id = e * e.transpose();
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((id.0[i][j] - want).abs() < 1e-14);
                }
            }
            assert!((e.determinant() + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn trajectory_starts_at_origin_and_closes() {
        let g = geom();
        let s0 = ffl_trajectory(0.0, &g);
        assert!(s0.r.norm() < 1e-15);
        let s1 = ffl_trajectory(1.0, &g);
        assert!((s1.r - s0.r).norm() < 1e-12);
        assert!((s1.v - s0.v).norm() < 1e-9);
    }

    #[test]
    fn trajectory_velocity_matches_finite_difference() {
        let g = geom();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-6 * g.period;
        for _ in 0..1000 {
            let t: f64 = rng.random_range(0.0..1.0);
            let s = ffl_trajectory(t, &g);
            let fd = (ffl_trajectory(t + step, &g).r - ffl_trajectory(t - step, &g).r).scale(0.5 / step);
            // Velocities are O(2π·200); compare relative to that scale.
            let scale = std::f64::consts::TAU * 202.0;
            assert!((s.v - fd).norm() < 1e-6 * scale, "t={t}");
            assert!(s.r.x.abs() <= 1.0 && s.r.y.abs() <= 1.0);
        }
    }

    #[test]
    fn transform_reference_value_and_roundtrip() {
        let mu = 2.5_f64;
        let g = ScanGeometry { mu0: mu, ..geom() };
        let s = Vec3::new(0.0, 0.7, -1.3);
        let st = transform_signal(s, 0.0, &g).unwrap();
        assert!((st.x - 0.0).abs() < 1e-15);
        assert!((st.y - (-0.7 / mu)).abs() < 1e-15);
        assert!((st.z - (-1.3 / mu)).abs() < 1e-15);
        assert_eq!(transform_signal(Vec3::zero(), 1.0, &g).unwrap(), Vec3::zero());

        let coil = Mat3([[1.0, 0.2, 0.0], [0.1, 0.9, 0.3], [0.0, -0.2, 1.1]]);
        let g = ScanGeometry { coil, ..geom() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let th: f64 = rng.random_range(0.0..3.0);
            let tr = SignalTransform::new(th, &g).unwrap();
            let s = Vec3::new(rng.random(), rng.random(), rng.random());
            let back = tr.invert(tr.apply(s));
            assert!((back - s).norm() < 1e-12 * s.norm());
        }
    }

    #[test]
    fn validation_rejects_bad_geometry() {
        let mut g = geom();
        g.angles = vec![0.5, 0.2];
        assert!(g.validate().is_err());
        let mut g = geom();
        g.angles = vec![0.0, std::f64::consts::PI];
        assert!(g.validate().is_err());
        let mut g = geom();
        g.coil = Mat3::zero();
        assert!(g.validate().is_err());
        let mut g = geom();
        g.samples_per_angle = 1;
        assert!(g.validate().is_err());
        let mut g = geom();
        g.h = 0.0;
        assert!(g.validate().is_err());
        assert!(geom().validate().is_ok());
    }

    #[test]
    fn sample_times_exclude_endpoint() {
        let g = geom();
        let t = g.sample_times(0);
        assert_eq!(t.len(), 1000);
        assert_eq!(t[0], 0.0);
        assert!((t[999] - 0.999).abs() < 1e-15);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}
