//! Free-boundary incompressible MHD on star-shaped two-dimensional domains.
//!
//! The crate builds the full diagnostic stack for the free-boundary MHD
//! system ∂_t v + v·∇v − B·∇B + ∇P = 0 with P = 0 and B·n = 0 on the moving
//! boundary: collar-graph surfaces, mapped-grid elliptic solvers with a
//! Dirichlet-to-Neumann calculus, pressure recovery with Taylor-sign
//! validation, Elsässer good variables, the higher energy functional and the
//! two-state distance functional, regularization operators, and an
//! Euler-plus-transport time stepper with continuation monitoring.

mod complex;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod functionals;
mod linalg;
pub mod oracle;
pub mod regularize;
pub mod series;
pub mod state;
pub mod stepper;
pub mod surface;

pub use complex::Complex64;
pub use error::{Error, Result};
pub use series::BoundarySeries;
