//! Decomposition-based multiobjective evolutionary optimization with
//! classical, language-model and distilled linear search operators.

pub mod algorithms;
pub mod decomp;
pub mod error;
pub mod fit;
pub mod indicators;
pub mod llm;
pub mod operators;
pub mod primitives;
pub mod problems;

pub use error::{Error, Result};
