//! Lüders quantum operations `Φ(B) = Σ Ei B Ei` on finite-dimensional spaces.
//!
//! The crate builds effect sets, computes fixed points and commutants of the
//! induced operation, and turns the spectral-window arguments about
//! non-commuting operators into searchable, checkable certificates.

pub mod effects;
pub mod error;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod lueders;
pub mod matrix;
pub mod rng;
pub mod suite;
pub mod tolerance;
pub mod witness;

pub use effects::{
    build_effect_set, spectral_window, validate_effect, Effect, EffectSet, Normalization,
    SpectralWindow,
};
pub use error::{Error, Result};
pub use linalg::{OperatorSubspace, SubspaceComparison};
pub use lueders::{FixedPointReport, LuedersOperation};
pub use matrix::{ComplexMatrix, C64};
pub use tolerance::Tolerances;
