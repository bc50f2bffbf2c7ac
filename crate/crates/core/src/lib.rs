//! Metadata-only relatedness of tabular datasets.
//!
//! The crate is organised as a pipeline of small, separately usable stages:
//!
//! - [`catalog`]: load delimited files and sidecars into [`catalog::MetadataRecord`]s.
//! - [`cognate`]: pair columns across two datasets and score each pair,
//!   producing `(source, target, percent)` triples and connection evidence.
//! - [`partition`]: divide the node space by domain and bulk datasets per domain.
//! - [`grouping`]: similarity matrices and threshold clustering, batch or streaming.
//! - [`centers`]: exact or annealed medoids of each cluster.
//! - [`pooling`]: domain channels, linear pointer traversals, the visit graph
//!   and the search cycle log.
//! - [`pipeline`]: the end-to-end run and its report files.
//!
//! See the `examples/` directory of this crate for one runnable program per stage.

pub mod catalog;
pub mod centers;
pub mod cognate;
pub mod error;
pub mod grouping;
pub mod partition;
pub mod pipeline;
pub mod pooling;

pub use error::{Error, Result};

/// Integer similarity percentage in `0..=100`.
pub type Percent = u8;
