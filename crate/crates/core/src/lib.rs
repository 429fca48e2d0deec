pub mod constructions;
pub mod error;
pub mod euclidean;
pub mod fields;
pub mod frame;
pub mod geometry;
pub mod harness;
pub mod jet;
pub mod limits;
pub mod quadform;
pub mod quadrature;
pub mod sim;
pub mod spline;

pub use error::{Error, Result};
