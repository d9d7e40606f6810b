//! Pseudo-normal forms of codimension-two real submanifolds
//! w = |z|² + E(z, z̄) in Cⁿ⁺¹ near a CR singular point, computed with exact
//! Gaussian-rational power series.

pub mod error;
pub mod flatten;
pub mod io;
pub mod linalg;
pub mod moser;
pub mod oracle;
pub mod pseudo_normal;
pub mod quadric_auto;
pub mod series;
pub mod uv;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
