//! Exact computation of descendent intersection numbers of a point and of
//! the Virasoro operators attached to finite cohomology models.

pub mod cli;
pub mod coh_model;
pub mod constraint_eval;
pub mod diffalg;
pub mod error;
pub mod exact_core;
pub mod gelfand_dikii;
pub mod genus_zero;
pub mod jet;
pub mod kdv_oracle;
pub mod point_correlators;
pub mod report;
pub mod virasoro_symbols;

pub use error::{Error, Result};
pub use exact_core::Rational;
