//! Planar props of multi-differential operators on finite-dimensional
//! associative algebras, computed exactly over the rationals.

pub mod error;
pub mod linalg;
pub mod ordinal;
pub mod partition;
pub mod graph;
pub mod prop;
pub mod tensor;
pub mod algebra;
pub mod diffop;
pub mod aut;

pub use error::{Error, Result};
