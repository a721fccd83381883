//! Quadrature, Cauchy transforms, kernel matrices and Hölder estimates.

pub mod cauchy;
pub mod gauss;
pub mod holder;
pub mod nystrom;
pub mod quadrature;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::geometry::GeometryError;

pub use cauchy::{cauchy_transform, modified_cauchy_transform, CauchySum, CauchyTerm};
pub use holder::{holder_seminorm, holder_seminorm_real};
pub use nystrom::{nystrom_matrix, DiscreteOperator};
pub use quadrature::{build_quadrature, build_quadrature_with_breaks, Panel, QuadNode, QuadratureRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("target lies on the contour (distance {0:e})")]
    OnContour(f64),
    #[error("target lies on the image contour (distance {0:e})")]
    OnImageContour(f64),
    #[error("adaptive refinement exceeded its depth near {0}")]
    AdaptiveDepthExceeded(C64),
    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFiniteEntry(usize, usize),
    #[error("grading depth {0} exceeds 30")]
    GradingTooDeep(usize),
    #[error("{0} panels cannot give two to each of {1} arcs")]
    TooFewPanels(usize, usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
