//! Finite spectral triples, Connes distances, derivations, morphism checks and
//! discrete Hodge–de Rham geometries.

pub mod cli;
pub mod derivations;
pub mod error;
pub mod hodge_discrete;
pub mod io;
pub mod morphisms;
pub mod numeric;
pub mod operator_core;
pub mod sparse;
pub mod states_metric;
pub mod triples;

pub use error::{Error, Result};
