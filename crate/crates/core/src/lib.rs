//! Discrete spin geometry of closed surfaces in Euclidean 3-space.
//!
//! The crate builds the hypersurface Dirac operator of a triangulated
//! surface, computes its smallest eigenvalues, compares them with the
//! mean-curvature and Friedrich lower bounds, and checks Reilly-type
//! integral identities for spinor fields on the unit ball.
//!
//! ```
//! use spindirac::{clifford::build_rep, curvature::curvature, dirac, mesh::make_sphere};
//!
//! let mesh = make_sphere(1.0, 3).unwrap();
//! let curv = curvature(&mesh).unwrap();
//! let op = dirac::assemble(&mesh, &build_rep(), &curv).unwrap();
//! let report = dirac::spectrum(&op, 4).unwrap();
//! assert!((report.eigenvalues[0].abs() - 1.0).abs() < 0.02);
//! ```

pub mod bounds;
pub mod clifford;
pub mod curvature;
pub mod dirac;
mod error;
pub mod mesh;
pub mod reilly;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
