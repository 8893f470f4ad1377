//! Closed-form physics of the 3D FFL scanner.

mod field;
mod geometry;
mod langevin;

pub use field::{
    applied_field, applied_field_with_period, maxwell_validate, static_field, static_field_matrix, MaxwellNorms,
    SampledField,
};
pub use geometry::{
    e_theta, e_theta_matrix, e_theta_perp, ffl_trajectory, ffl_trajectory_with_period, rotation, trajectory_samples,
    transform_signal, uniform_angles, ScanGeometry, SignalTransform, TrajectorySample, MU0,
};
pub use langevin::{
    kernel_jacobian, kernel_kappa, kernel_profile, langevin, langevin_deriv, langevin_field, langevin_over_x,
};
