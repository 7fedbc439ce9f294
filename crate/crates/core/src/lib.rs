//! Measures ideological skew in ranked search results.
//!
//! The pipeline: load a corpus of result pages ([`corpus`]), aggregate
//! crowdsourced stance labels ([`annotations`]), score each page with
//! rank-weighted retrieval metrics ([`metrics`]), reduce those scores to
//! per-query and per-cell bias figures ([`bias`]), test the figures for
//! significance under multiple-comparison control ([`stats`], [`audit`]),
//! and render the results as tables, figure data, and a machine-readable
//! summary ([`report`]).

pub mod annotations;
pub mod audit;
pub mod bias;
pub mod config;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod report;
pub mod stats;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
