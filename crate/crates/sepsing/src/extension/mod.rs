//! Fredholm solve of the remainder equation, jet corrections at exceptional
//! points, and bounded extensions to the polydisk.

mod build;
mod exceptional;
mod fredholm;
mod jets;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::decomposition::DecompositionError;
use crate::geometry::GeometryError;
use crate::transforms::TransformError;

pub use build::{
    build_extension, build_extension_with, certify_norm_bound, evaluate_extension, interior_samples, interpolation_error, AttemptRecord,
    ExtensionDiagnostics, ExtensionExport, TermExport,
    ExtensionOptions, PolydiskExtension,
};
pub use exceptional::{detect_exceptional, ExceptionalPoint, ExceptionalSet, PointKind};
pub use fredholm::{fredholm_solve, FredholmSolution, FredholmSolver};
pub use jets::{jet_correction, monomials, CurveFunction, JetPolynomial, JET_LEN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("coordinate {0} has modulus {1} >= 1")]
    OutsidePolydisk(usize, f64),
    #[error("singular values {kept:e} and {dropped:e} straddle the threshold within a factor 10")]
    IllConditioned { kept: f64, dropped: f64 },
    #[error("inconsistent jets: {0}")]
    JetMismatch(String),
    #[error("no convergence: residual {residual:e} with {cokernel_dim} cokernel directions (order {order})")]
    NoConvergence { residual: f64, cokernel_dim: usize, order: usize },
    #[error("exceptional points {0} and {1} are closer than 1e-3")]
    ClusterAmbiguity(C64, C64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}
