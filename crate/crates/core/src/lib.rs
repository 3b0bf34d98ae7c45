//! Capacity evaluators, an executable geometric coding scheme, a one-shot
//! feedback scheme and converse diagnostics for the Gaussian channel whose
//! noise is described to the encoder and decoder by a rate-limited helper.

pub mod capacity;
pub mod cli;
pub mod codebook;
pub mod cognizant;
pub mod converse;
pub mod error;
pub mod feedback;
pub mod geometry;
pub mod harness;
pub mod seeds;
pub mod stats;
pub mod summary;

pub use error::{Error, Result};
