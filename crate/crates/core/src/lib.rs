pub mod error;
pub mod function_space;
pub mod geometry;
pub mod io;
pub mod kernels;
pub mod product;
pub mod quadrature;
pub mod semiclassical;
pub mod summation;
pub mod verify;

pub use error::{Error, Result};
