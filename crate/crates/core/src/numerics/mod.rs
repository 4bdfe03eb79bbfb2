//! Log-domain arithmetic and quadrature.

pub mod quad;
pub mod slv;

pub use quad::{quad_u, quad_with, Divergence, DivergentEnd, Integral, QuadConfig, QuadError, QuadratureResult};
pub use slv::SignedLogValue;
