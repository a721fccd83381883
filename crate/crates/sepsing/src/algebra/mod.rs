//! Finite-dimensional commutative algebras: characters, glued subalgebras,
//! lying over, interpolation elements and point derivations.

mod characters;
mod derivations;
mod family;
mod glue;
mod structure;

use thiserror::Error;

pub use characters::{characters_of, Character};
pub use derivations::{decompose_derivation, derivations_at, Derivation, DerivationSplit};
pub use family::{exhaustive_family, gluings, run_family, verify_gluing, FamilyReport, GluingReport};
pub use glue::{glue, interpolation_element, lying_over_check, GluedSubalgebra, LyingOverReport};
pub use structure::FiniteCommAlgebra;

pub const MAX_DIM: usize = 12;
/// Tolerance for identifying two characters.
pub const CHAR_MERGE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("invalid algebra: {0}")]
    Invalid(String),
    #[error("cannot parse algebra {0:?}: {1}")]
    Parse(String, String),
    #[error("character verification failed after {0} randomized attempts")]
    NumericalDegeneracy(usize),
    #[error("glued pair {0} joins a character to itself")]
    NotDistinct(usize),
    #[error("character {0} coincides with the base character")]
    CharactersCollide(usize),
    #[error("fiber resolution failed: {0}")]
    FiberResolutionFailure(String),
}
