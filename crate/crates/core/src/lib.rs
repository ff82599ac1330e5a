//! Numerical workbench for anisotropic Orlicz-Laplacian stress fields.

pub mod error;
pub mod geometry;
pub mod norms;
pub mod operator;
pub mod quadrature;
pub mod solver;
pub mod verify;
pub mod young;

pub use error::{Error, Result};
pub use geometry::Domain2D;
pub use norms::{AnisotropicNorm, NormKind};
pub use operator::StressOperator;
pub use solver::{Mesh, ProblemSpec};
pub use young::{RegularizedYoung, YoungFunction, YoungKind};
