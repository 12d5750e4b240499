//! Dyadic cubes and grid functions, ε-maximal operators, Calderón–Zygmund
//! decompositions, Haar multipliers, sparse operators, and a
//! variable-exponent Lebesgue norm engine.

pub mod bank;
pub mod dyadic;
pub mod epsilon;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod operators;
pub mod oracle;

pub use bank::{generate_bank, BankKind, BankSpec, Lcg};
pub use dyadic::{DyadicCube, Relation};
pub use epsilon::{decay_profile, validate_domination, EpsilonCollection, EpsilonRule, LevelProfile};
pub use error::{Error, Result};
pub use exponent::{ConditionRecord, ConditionReport, ExponentDescriptor, ExponentField, ExponentFunction, LhInftyFit};
pub use grid::{GridFunction, GridHeader, Layout};
pub use operators::{CzResult, HaarMode, Operator, SparseCollection};
