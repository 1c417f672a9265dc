//! Arbitrary-precision Laplacian eigenvalues of polygons by point matching.
//!
//! The eigenfunction is expanded in Fourier-Bessel functions centred at a
//! single non-analytic vertex, the boundary conditions are imposed at `N`
//! points, and the roots of the resulting determinant are followed as `N`
//! grows. Successive roots alternate around the true eigenvalue, which gives
//! two-sided bounds.

pub mod assembly;
pub mod eigenfunction;
pub mod error;
pub mod expansion;
pub mod geometry;
pub mod precision;
pub mod shapes;
pub mod solver;

pub use error::{Error, Result};
pub use precision::{BigReal, PrecisionContext};
