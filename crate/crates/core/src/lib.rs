//! Tabular data synthesis toolkit.
//!
//! The pipeline: declare or infer a [`schema::TableSchema`] for a CSV file,
//! encode rows into dense vectors ([`encoding`]), optionally rearrange
//! columns so associated features sit together ([`sorting`]), train the
//! latent-space synthesizer ([`synthesis`]), and score the synthetic output
//! against the real data ([`evaluation`]).

pub mod association;
pub mod encoding;
pub mod error;
pub mod evaluation;
pub mod schema;
pub mod sorting;
pub mod synthesis;
pub(crate) mod util;

pub use error::{Error, Result};
