pub mod cli;
pub mod error;
pub mod geodesic;
pub mod halfspace;
pub mod harness;
pub mod horoconvex;
pub mod lattice;
pub mod planar;
pub mod polyhedral;
pub mod quadrature;
pub mod quotient;
pub mod report;

pub use error::{Error, Result};
