//! Numerical laboratory for the one-dimensional cubic Schrödinger equation
//! on a periodic box: pseudo-spectral calculus, two independent time
//! integrators with exact-solution oracles, conservation-law diagnostics,
//! a local-smoothing-estimate harness and variational (action) diagnostics.
//!
//! The numerical core is generic over the scalar type via [`Real`]; the
//! `f64` instantiations used by the CLI and the verification suite are
//! exported as type aliases at the crate root.

pub mod analysis;
pub mod conservation;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod scalar;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use field::{im_product, re_product};
pub use num_complex::Complex64;
pub use scalar::Real;
pub use spectral::{derivative, dft, integrate, inverse_dft, l2_norm_sq};

/// `f64` grid, the resolution every shipped experiment runs at.
pub type Grid = grid::Grid1D<f64>;
/// `f64` complex field.
pub type ComplexField = field::ComplexField1D<f64>;
/// `f64` real field.
pub type RealField = field::RealField1D<f64>;
/// `f64` equation parameters.
pub type Params = dynamics::NlsParams<f64>;
/// `f64` solver configuration.
pub type SolverConfig = dynamics::SolverConfig<f64>;
/// `f64` trajectory.
pub type Trajectory = dynamics::Trajectory<f64>;
