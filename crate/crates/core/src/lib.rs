//! Discrete laboratory for singular parabolic and stationary p-Laplacian
//! systems with zero Dirichlet data on the unit box.

pub mod error;
pub mod exponents;
pub mod field;
mod linalg;
pub mod nonlinearity;
pub mod parabolic;
pub mod scalar;
pub mod stationary;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type VectorField64 = field::VectorField<f64>;
pub type VectorField32 = field::VectorField<f32>;
pub type TensorField64 = field::TensorField<f64>;
pub type Trajectory64 = field::Trajectory<f64>;
pub type Trajectory32 = field::Trajectory<f32>;
pub type Params64 = nonlinearity::NonlinearityParams<f64>;
pub type Params32 = nonlinearity::NonlinearityParams<f32>;
pub type StationaryResult64 = stationary::StationaryResult<f64>;
pub type ParabolicRun64 = parabolic::ParabolicRun<f64>;
