//! Bernstein-Bezier bases for pyramids and their simplex / tensor-product
//! neighbours, together with the quadrature, geometry and matrix machinery
//! needed to use them as finite element bases.

pub mod analysis;
pub mod assembly;
pub mod bases;
pub mod error;
pub mod export;
pub mod geometry;
pub mod polynomials;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
