//! Selection and drive fields of the rotated FFL scanner, plus a numerical
//! check of the source-free Maxwell conditions on sampled fields.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

use super::geometry::{e_theta_perp, rotation, ScanGeometry};

/// Static selection field `G R_θ diag(0,-1,1) R_θᵀ x`; zero on the line spanned by `e_θ`.
pub fn static_field<T: Real>(x: Vec3<T>, theta: T, gradient: T) -> Vec3<T> {
    static_field_matrix(theta, gradient).mul_vec(x)
}

/// The constant Jacobian of [`static_field`].
pub fn static_field_matrix<T: Real>(theta: T, gradient: T) -> Mat3<T> {
    let r = rotation(theta);
    let d = Mat3::diag([T::zero(), -gradient, gradient]);
    r.mul_mat(&d).mul_mat(&r.transpose())
}

/// Total applied field `(A1Λ1(t) - G⟨x,e_θ^⊥⟩) e_θ^⊥ + (-A2Λ2(t) + G z) e_z`.
pub fn applied_field<T: Real>(x: Vec3<T>, t: T, theta: T, geom: &ScanGeometry<T>) -> Vec3<T> {
    applied_field_with_period(x, t, theta, geom, geom.period)
}

pub fn applied_field_with_period<T: Real>(x: Vec3<T>, t: T, theta: T, geom: &ScanGeometry<T>, period: T) -> Vec3<T> {
    let (lambda, _) = geom.drive(t, period);
    let perp = e_theta_perp(theta);
    let g = geom.gradient;
    let a = geom.amplitudes[0] * lambda[0] - g * x.dot(perp);
    let b = -geom.amplitudes[1] * lambda[1] + g * x.z;
    Vec3::new(a * perp.x, a * perp.y, b)
}

/// A vector field sampled on a regular 3D lattice, x-fastest.
#[derive(Clone, Debug)]
pub struct SampledField<T> {
    pub dims: [usize; 3],
    pub spacing: [T; 3],
    pub values: Vec<Vec3<T>>,
}

impl<T: Real> SampledField<T> {
    /// Sample `f` at `origin + (i,j,k)·spacing`.
    pub fn sample(dims: [usize; 3], origin: Vec3<T>, spacing: [T; 3], f: impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        let mut values = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = Vec3::new(
                        origin.x + T::from_usize_lossy(i) * spacing[0],
                        origin.y + T::from_usize_lossy(j) * spacing[1],
                        origin.z + T::from_usize_lossy(k) * spacing[2],
                    );
                    values.push(f(p));
                }
            }
        }
        Self { dims, spacing, values }
    }

    fn at(&self, i: usize, j: usize, k: usize) -> Vec3<T> {
        self.values[i + self.dims[0] * (j + self.dims[1] * k)]
    }
}

/// Max-norms over interior lattice points of the central-difference divergence,
/// curl, and Jacobian asymmetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxwellNorms<T> {
    pub div_norm: T,
    pub curl_norm: T,
    pub jac_asym_norm: T,
}

pub fn maxwell_validate<T: Real>(field: &SampledField<T>) -> Result<MaxwellNorms<T>> {
    let [nx, ny, nz] = field.dims;
    if nx < 3 || ny < 3 || nz < 3 {
        return Err(Error::dimension(format!(
            "maxwell_validate needs at least 3 points per axis, got {nx}x{ny}x{nz}"
        )));
    }
    if field.values.len() != nx * ny * nz {
        return Err(Error::dimension(format!(
            "{} samples for a {nx}x{ny}x{nz} lattice",
            field.values.len()
        )));
    }
    let two = T::lit(2.0);
    let mut norms = MaxwellNorms {
        div_norm: T::zero(),
        curl_norm: T::zero(),
        jac_asym_norm: T::zero(),
    };
    for k in 1..nz - 1 {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                // jac[a][b] = ∂H_a / ∂x_b
                let cols = [
                    (field.at(i + 1, j, k) - field.at(i - 1, j, k)).scale((two * field.spacing[0]).recip()),
                    (field.at(i, j + 1, k) - field.at(i, j - 1, k)).scale((two * field.spacing[1]).recip()),
                    (field.at(i, j, k + 1) - field.at(i, j, k - 1)).scale((two * field.spacing[2]).recip()),
                ];
                let mut jac = [[T::zero(); 3]; 3];
                for (b, col) in cols.iter().enumerate() {
                    let c = col.to_array();
                    for a in 0..3 {
                        jac[a][b] = c[a];
                    }
                }
                let div = jac[0][0] + jac[1][1] + jac[2][2];
                let curl = Vec3::new(jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1]);
                let mut asym = T::zero();
                for a in 0..3 {
                    for b in 0..3 {
                        asym = asym.max((jac[a][b] - jac[b][a]).abs());
                    }
                }
                norms.div_norm = norms.div_norm.max(div.abs());
                norms.curl_norm = norms.curl_norm.max(curl.max_abs());
                norms.jac_asym_norm = norms.jac_asym_norm.max(asym);
            }
        }
    }
    Ok(norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::geometry::e_theta;

    fn lattice(f: impl Fn(Vec3<f64>) -> Vec3<f64>) -> SampledField<f64> {
        SampledField::sample([5, 5, 5], Vec3::new(-1.0, -1.0, -1.0), [0.5; 3], f)
    }

    #[test]
    fn static_field_reference_value() {
        let h = static_field(Vec3::new(0.0, 1.0, 0.0), 0.0, 1.0);
        assert_eq!(h, Vec3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn static_field_vanishes_on_ffl() {
        for th in [0.0, 0.3, 1.2, 2.9] {
            for s in [-2.0, -0.5, 0.7, 3.0] {
                let h = static_field(e_theta(th).scale(s), th, 1.7);
                assert!(h.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn static_jacobian_is_symmetric_and_traceless() {
        for th in [0.0, 0.4, 2.2] {
            let m = static_field_matrix::<f64>(th, 2.0);
            assert!(m.trace().abs() < 1e-14);
            let asym = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .map(|(i, j)| (m.0[i][j] - m.0[j][i]).abs())
                .fold(0.0, f64::max);
            assert!(asym < 1e-15);
        }
    }

    #[test]
    fn applied_field_vanishes_on_instantaneous_ffl() {
        let g = ScanGeometry::<f64>::reference();
        let th = 0.9;
        let t = 0.0137;
        let (lam, _) = g.drive(t, g.period);
        let perp = e_theta_perp(th);
        let base = perp.scale(lam[0] / g.gradient) + Vec3::new(0.0, 0.0, lam[1] / g.gradient);
        for s in [-1.0, 0.0, 0.5] {
            let x = base + e_theta(th).scale(s);
            assert!(applied_field(x, t, th, &g).norm() < 1e-14);
        }
    }

    #[test]
    fn applied_field_reduces_to_static_when_drives_vanish() {
        let g = ScanGeometry::<f64>::reference();
        // φ = π/2 puts both drive cosines at zero for t = 0.
        assert!(applied_field(Vec3::zero(), 0.0, 0.0, &g).norm() < 1e-15);
        let x = Vec3::new(0.3, -0.4, 0.25);
        let d = applied_field(x, 0.0, 1.1, &g) - static_field(x, 1.1, g.gradient);
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn maxwell_norms_of_static_field_vanish() {
        for th in [0.0, 0.7, 2.5] {
            let f = lattice(|x| static_field(x, th, 1.3));
            let n = maxwell_validate(&f).unwrap();
            assert!(n.div_norm < 1e-10 && n.curl_norm < 1e-10 && n.jac_asym_norm < 1e-10);
        }
    }

    #[test]
    fn maxwell_detects_counterexamples() {
        let n = maxwell_validate(&lattice(|x| Vec3::new(x.x, 0.0, 0.0))).unwrap();
        assert!((n.div_norm - 1.0).abs() < 1e-12);
        assert!(n.curl_norm < 1e-12);
        let n = maxwell_validate(&lattice(|x| Vec3::new(-x.y, x.x, 0.0))).unwrap();
        assert!((n.curl_norm - 2.0).abs() < 1e-12);
        assert!(n.div_norm < 1e-12);
        assert!((n.jac_asym_norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn maxwell_rejects_tiny_lattices() {
        let f = SampledField::sample([2, 5, 5], Vec3::zero(), [1.0; 3], |x: Vec3<f64>| x);
        assert!(matches!(maxwell_validate(&f), Err(Error::Dimension(_))));
    }
}
