//! Twin-aware evaluation for Winograd-schema style datasets.
//!
//! The crate ingests WSC and Winogrande files, reconstructs twin pairs, builds
//! the artifact-probing ablations (`no-cands`, `part-sent`) and the zero-shot
//! masked special-word reformulation, talks to an external model scorer over
//! files or HTTP, and reports single-instance and worst-of-group scores.

pub mod artifact;
pub mod corpus;
pub mod error;
pub mod exec;
pub mod harness;
pub mod protocol;
pub mod scoring;
pub mod text;
pub mod transforms;

pub use error::{Error, Result};
pub use exec::Execution;
