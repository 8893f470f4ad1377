//! Signal synthesis for the rotated 3D FFL scan.
//!
//! Two independent routes produce the induced voltage `s^θ(t)`:
//!
//! * [`simulate_fast`] projects the density along the FFL direction and
//!   applies the 2D core operator `A_h[X_θ ρ](r(t)) v(t)` with the analytic
//!   kernel Jacobian, then maps back through `-μ0 m P E_θ`.
//! * [`simulate_oracle`] integrates the Langevin magnetization over every
//!   voxel in 3D and differentiates in time by central differences.
//!
//! Agreement between them is the numerical form of the signal decomposition.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Volume3D;
use crate::linalg::{Mat2, Vec2, Vec3};
use crate::model::{
    applied_field_with_period, ffl_trajectory_with_period, kernel_jacobian, langevin, ScanGeometry, SignalTransform,
};
use crate::phantom::xray_project;
use crate::scalar::Real;

/// Magnetization directions are undefined below this field magnitude; the integrand is taken as zero.
const ZERO_FIELD: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignalSample<T> {
    pub t: T,
    pub s: Vec3<T>,
}

/// Induced voltages for one scan angle.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalRecord<T> {
    pub theta: T,
    pub angle_index: usize,
    pub samples: Vec<SignalSample<T>>,
}

impl<T: Real> SignalRecord<T> {
    /// Largest absolute component over all samples.
    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.s.max_abs()))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            theta: self.theta,
            angle_index: self.angle_index,
            samples: self
                .samples
                .iter()
                .map(|s| SignalSample {
                    t: s.t,
                    s: s.s.scale(c),
                })
                .collect(),
        }
    }

    /// Flattened `(sx, sy, sz)` values.
    pub fn flat(&self) -> Vec<T> {
        self.samples.iter().flat_map(|s| s.s.to_array()).collect()
    }
}

/// Relative L2 distance between the stacked voltages of two records.
pub fn relative_l2<T: Real>(a: &SignalRecord<T>, b: &SignalRecord<T>) -> T {
    let (fa, fb) = (a.flat(), b.flat());
    let num: T = fa.iter().zip(&fb).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let den: T = fb.iter().map(|&y| y * y).sum();
    (num / den).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastOptions<T> {
    /// Ignore projection cells farther than this from `r(t)`. `None` integrates the whole plane.
    pub truncation_radius: Option<T>,
}

impl<T> Default for FastOptions<T> {
    fn default() -> Self {
        Self {
            truncation_radius: None,
        }
    }
}

fn angle_of<T: Real>(geom: &ScanGeometry<T>, angle_index: usize) -> Result<T> {
    geom.angles.get(angle_index).copied().ok_or_else(|| {
        Error::validation(format!(
            "angle index {angle_index} out of range ({} angles)",
            geom.angles.len()
        ))
    })
}

/// Signal via the projection/core-operator decomposition.
pub fn simulate_fast<T: Real>(
    vol: &Volume3D<T>,
    angle_index: usize,
    geom: &ScanGeometry<T>,
    opts: &FastOptions<T>,
) -> Result<SignalRecord<T>> {
    geom.validate()?;
    let theta = angle_of(geom, angle_index)?;
    let transform = SignalTransform::new(theta, geom)?;
    let plane = vol.grid.projection_grid();
    let projection = xray_project(vol, theta, &plane);
    let area = plane.cell_area();
    let weights: Vec<(Vec2<T>, T)> = (0..plane.v.n)
        .flat_map(|k| (0..plane.u.n).map(move |j| (j, k)))
        .filter_map(|(j, k)| {
            let x = projection.get(j, k);
            (x != T::zero()).then(|| (Vec2::new(plane.u.center(j), plane.v.center(k)), x * area))
        })
        .collect();

    let period = geom.period_for(angle_index);
    let times = geom.sample_times(angle_index);
    let (u_edge, v_edge) = (plane.u.hi.max(-plane.u.lo), plane.v.hi.max(-plane.v.lo));
    let reach = Vec2::new(
        geom.amplitudes[0].abs() / geom.gradient,
        geom.amplitudes[1].abs() / geom.gradient,
    );
    if reach.x > u_edge || reach.y > v_edge {
        warn!("FFL trajectory leaves the projection grid at angle {angle_index}");
    }
    let cutoff = opts.truncation_radius;
    let samples = times
        .par_iter()
        .map(|&t| {
            let traj = ffl_trajectory_with_period(t, geom, period);
            let mut a = Mat2::zero();
            for &(y, w) in &weights {
                let d = traj.r - y;
                if let Some(rc) = cutoff {
                    if d.norm() > rc {
                        continue;
                    }
                }
                a = a + kernel_jacobian(d, geom.h).scale(w);
            }
            let plane_signal = a.mul_vec(traj.v);
            let s_tilde = Vec3::new(T::zero(), plane_signal.x, plane_signal.y);
            SignalSample {
                t,
                s: transform.invert(s_tilde),
            }
        })
        .collect();
    Ok(SignalRecord {
        theta,
        angle_index,
        samples,
    })
}

/// Signal via the direct 3D magnetization integral, differentiated in time by
/// central differences with step `fd_step` (default `T/(100 L)`).
///
/// Cost is `O(voxels × samples)`; intended for volumes up to about 32³.
pub fn simulate_oracle<T: Real>(
    vol: &Volume3D<T>,
    angle_index: usize,
    geom: &ScanGeometry<T>,
    fd_step: Option<T>,
) -> Result<SignalRecord<T>> {
    geom.validate()?;
    let theta = angle_of(geom, angle_index)?;
    let period = geom.period_for(angle_index);
    let step = fd_step.unwrap_or_else(|| period / (T::lit(100.0) * T::from_usize_lossy(geom.samples_per_angle)));
    if !(step > T::zero()) {
        return Err(Error::validation("fd_step must be > 0"));
    }
    let g = &vol.grid;
    let dv = g.cell_volume();
    let mut voxels = Vec::new();
    for k in 0..g.z.n {
        for j in 0..g.y.n {
            for i in 0..g.x.n {
                let rho = vol.get(i, j, k);
                if rho != T::zero() {
                    voxels.push((Vec3::new(g.x.center(i), g.y.center(j), g.z.center(k)), rho * dv));
                }
            }
        }
    }
    let h_sat = geom.saturation_field();
    let zero_field = T::lit(ZERO_FIELD);
    let magnetization = |t: T| {
        let mut m = Vec3::zero();
        for &(x, w) in &voxels {
            let field = applied_field_with_period(x, t, theta, geom, period);
            let norm = field.norm();
            if norm < zero_field {
                continue;
            }
            m = m + field.scale(w * langevin(norm / h_sat) / norm);
        }
        m
    };
    let factor = -geom.mu0 * geom.moment / (T::lit(2.0) * step);
    let samples = geom
        .sample_times(angle_index)
        .par_iter()
        .map(|&t| {
            let dm = magnetization(t + step) - magnetization(t - step);
            SignalSample {
                t,
                s: geom.coil.mul_vec(dm).scale(factor),
            }
        })
        .collect();
    Ok(SignalRecord {
        theta,
        angle_index,
        samples,
    })
}

/// Which magnitude sets the per-angle noise scale `ε_θ = level · max |s|`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseScale {
    /// Maximum over all samples and all three components.
    #[default]
    JointMax,
    /// Separate maximum for each component.
    PerComponent,
}

/// Add i.i.d. Gaussian noise scaled by `level · max|s|`.
///
/// The generator is ChaCha8 seeded with `seed` on stream `angle_index`, so each
/// angle gets an independent, reproducible sequence regardless of execution order.
pub fn add_noise<T: Real>(rec: &SignalRecord<T>, level: T, seed: u64) -> Result<SignalRecord<T>> {
    add_noise_with(rec, level, seed, NoiseScale::JointMax)
}

pub fn add_noise_with<T: Real>(
    rec: &SignalRecord<T>,
    level: T,
    seed: u64,
    scale: NoiseScale,
) -> Result<SignalRecord<T>> {
    if !(level >= T::zero()) {
        return Err(Error::validation(format!("noise level must be >= 0, got {level}")));
    }
    if level == T::zero() {
        return Ok(rec.clone());
    }
    let eps = match scale {
        NoiseScale::JointMax => {
            let m = rec.max_abs() * level;
            [m; 3]
        }
        NoiseScale::PerComponent => {
            let mut m = [T::zero(); 3];
            for s in &rec.samples {
                for (c, v) in m.iter_mut().zip(s.s.to_array()) {
                    *c = c.max(v.abs());
                }
            }
            m.map(|c| c * level)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rec.angle_index as u64);
    let samples = rec
        .samples
        .iter()
        .map(|s| {
            let mut v = s.s.to_array();
            for (c, e) in v.iter_mut().zip(eps) {
                let n: f64 = StandardNormal.sample(&mut rng);
                *c += e * T::lit(n);
            }
            SignalSample {
                t: s.t,
                s: Vec3::from_array(v),
            }
        })
        .collect();
    Ok(SignalRecord {
        theta: rec.theta,
        angle_index: rec.angle_index,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid3D;
    use crate::model::uniform_angles;
    use crate::phantom::ball_phantom;

    fn small_geom(samples: usize) -> ScanGeometry<f64> {
        ScanGeometry {
            angles: uniform_angles(4),
            samples_per_angle: samples,
            h: 0.2,
            ..ScanGeometry::reference()
        }
    }

    #[test]
    fn zero_volume_gives_zero_signal() {
        let g = small_geom(50);
        let vol = Volume3D::zeros(Grid3D::cube(1.0, 8).unwrap());
        let fast = simulate_fast(&vol, 1, &g, &FastOptions::default()).unwrap();
        let oracle = simulate_oracle(&vol, 1, &g, None).unwrap();
        assert!(fast.samples.iter().all(|s| s.s == Vec3::zero()));
        assert!(oracle.samples.iter().all(|s| s.s == Vec3::zero()));
    }

    #[test]
    fn transformed_first_component_vanishes() {
        let g = small_geom(200);
        let vol = ball_phantom(Grid3D::cube(1.0, 12).unwrap(), Vec3::new(0.1, 0.0, -0.1), 0.5).unwrap();
        for l in 0..4 {
            let rec = simulate_fast(&vol, l, &g, &FastOptions::default()).unwrap();
            let tr = SignalTransform::new(rec.theta, &g).unwrap();
            let st: Vec<_> = rec.samples.iter().map(|s| tr.apply(s.s)).collect();
            let scale = st.iter().fold(0.0_f64, |m, v| m.max(v.max_abs()));
            assert!(st.iter().all(|v| v.x.abs() < 1e-10 * scale));
        }
    }

    #[test]
    fn fast_signal_is_linear_in_density() {
        let g = small_geom(100);
        let vol = ball_phantom(Grid3D::cube(1.0, 10).unwrap(), Vec3::zero(), 0.6).unwrap();
        let a = simulate_fast(&vol, 2, &g, &FastOptions::default()).unwrap();
        let b = simulate_fast(&vol.scaled(3.5), 2, &g, &FastOptions::default()).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((y.s - x.s.scale(3.5)).norm() <= 1e-12 * y.s.norm().max(1e-300));
        }
    }

    #[test]
    fn closed_trajectory_gives_periodic_signal() {
        let g = small_geom(100);
        let vol = ball_phantom(Grid3D::cube(1.0, 10).unwrap(), Vec3::zero(), 0.6).unwrap();
        let mut one = g.clone();
        one.samples_per_angle = 2;
        // Sample at t = 0 and t = T/2; then shift the phase by a full period.
        let a = simulate_fast(&vol, 0, &one, &FastOptions::default()).unwrap();
        let mut shifted = one.clone();
        shifted.phases = [
            g.phases[0] + std::f64::consts::TAU * 201.0,
            g.phases[1] + std::f64::consts::TAU * 202.0,
        ];
        let b = simulate_fast(&vol, 0, &shifted, &FastOptions::default()).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.s - y.s).norm() < 1e-9 * x.s.norm().max(1e-30));
        }
    }

    #[test]
    fn fast_matches_oracle_on_small_ball() {
        let g = small_geom(120);
        let vol = ball_phantom(Grid3D::cube(1.0, 10).unwrap(), Vec3::new(0.05, -0.1, 0.0), 0.55).unwrap();
        let fast = simulate_fast(&vol, 0, &g, &FastOptions::default()).unwrap();
        let oracle = simulate_oracle(&vol, 0, &g, None).unwrap();
        assert!(relative_l2(&fast, &oracle) < 1e-2);
    }

    #[test]
    fn noise_contract() {
        let g = small_geom(400_000);
        let n = g.samples_per_angle;
        let rec = SignalRecord {
            theta: 0.0,
            angle_index: 3,
            samples: (0..n)
                .map(|m| {
                    let t = m as f64 / n as f64;
                    SignalSample {
                        t,
                        s: Vec3::new((t * 40.0).sin(), 0.5, -2.0 * t),
                    }
                })
                .collect(),
        };
        assert_eq!(add_noise(&rec, 0.0, 1).unwrap(), rec);
        let noisy = add_noise(&rec, 0.1, 42).unwrap();
        let eps = 0.1 * rec.max_abs();
        let diffs: Vec<f64> = noisy.flat().iter().zip(rec.flat()).map(|(a, b)| a - b).collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let std = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64).sqrt();
        assert!((std - eps).abs() < 0.05 * eps);
        assert_eq!(add_noise(&rec, 0.1, 42).unwrap(), noisy);
        assert_ne!(add_noise(&rec, 0.1, 43).unwrap(), noisy);
        let other_angle = SignalRecord {
            angle_index: 4,
            ..rec.clone()
        };
        assert_ne!(add_noise(&other_angle, 0.1, 42).unwrap().samples, noisy.samples);
        assert!(add_noise(&rec, -0.1, 1).is_err());
    }

    #[test]
    fn per_component_noise_scale() {
        let rec = SignalRecord {
            theta: 0.0,
            angle_index: 0,
            samples: (0..20_000)
                .map(|m| SignalSample {
                    t: m as f64,
                    s: Vec3::new(1.0, 100.0, 0.0),
                })
                .collect(),
        };
        let noisy = add_noise_with(&rec, 0.1, 7, NoiseScale::PerComponent).unwrap();
        let dx: f64 = noisy.samples.iter().map(|s| (s.s.x - 1.0).powi(2)).sum::<f64>() / 20_000.0;
        assert!((dx.sqrt() - 0.1).abs() < 0.01);
        assert!(noisy.samples.iter().all(|s| s.s.z == 0.0));
    }
}
