//! Simulation and three-stage model-based reconstruction for 3D field-free-line
//! magnetic particle imaging.
//!
//! Everything numeric is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the file formats and the CLI use.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod forward;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod phantom;
pub mod recon;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec2 = linalg::Vec2<f64>;
pub type Vec3 = linalg::Vec3<f64>;
pub type Mat2 = linalg::Mat2<f64>;
pub type Mat3 = linalg::Mat3<f64>;
pub type Axis = grid::Axis<f64>;
pub type Grid2D = grid::Grid2D<f64>;
pub type Grid3D = grid::Grid3D<f64>;
pub type Volume = grid::Volume3D<f64>;
pub type Image = grid::Image2D<f64>;
pub type Geometry = model::ScanGeometry<f64>;
pub type Signal = forward::SignalRecord<f64>;
pub type CoreField = recon::CoreField<f64>;
pub type ProjectionStack = recon::ProjectionStack<f64>;
pub type ReconConfig = recon::ReconConfig<f64>;
