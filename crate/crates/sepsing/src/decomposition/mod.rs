//! The decomposition `f = Σ F_k(f)∘φ_k + K f`: the corner plan, the operators
//! `F_k` and `G_k^±`, the remainder matrix, its adjoint and low-rank cuts.

mod finite_rank;
mod operators;
mod plan;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::transforms::TransformError;

pub use finite_rank::{discrete_adjoint, geometric_fit, low_rank_approx, weighted_pairing, GeometricFit};
pub use operators::{apply_fk, apply_gk, assemble_remainder, cauchy_sum, decompose, reconstruct, remainder_rows, DecompositionResult, Side};
pub use plan::{build_plan, plan_breakpoints, plan_decomposition, DecompositionPlan, PlanSummary};

/// Samples of a density at the plan's quadrature nodes.
pub type BoundaryDensity = Vec<num_complex::Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecompositionError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("corner {0}: disk radius is below the finest panel, no panel lies inside it")]
    EmptySplit(usize),
    #[error("corner {0}: bump is nonzero on a panel that straddles the disk boundary")]
    MisalignedSplit(usize),
    #[error("rotations are missing for {0} corners")]
    MissingRotations(usize),
    #[error("piece index {0} out of range (n = {1})")]
    IndexOutOfRange(usize, usize),
    #[error("density has {0} samples, expected {1}")]
    DensityLength(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

#[cfg(test)]
mod tests;
