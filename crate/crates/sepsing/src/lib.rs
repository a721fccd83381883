//! Separation of singularities on domains with corners, and bounded
//! analytic extension from curves of the form `Φ(Ω)` to the polydisk.

pub mod algebra;
pub mod cli;
pub mod continuity;
pub mod decomposition;
pub mod expr;
pub mod extension;
pub mod geometry;
pub mod linalg;
pub mod scenario;
pub mod transforms;
