//! Gromov-Wasserstein distances between finite measure networks whose kernels
//! take values in an arbitrary metric space.

pub mod approximation;
pub mod bounds;
pub mod error;
pub mod exponent;
pub mod geometry;
pub mod gw;
pub mod json;
pub mod matrix;
pub mod metric;
pub mod network;
pub mod ot;
pub mod sampling;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use metric::{MetricPoint, SpaceDescriptor};
pub use network::ZNetwork;
