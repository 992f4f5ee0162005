//! Shared numerical machinery: special functions, quadrature, statistics.

pub mod quad;
pub mod special;
pub mod stats;
