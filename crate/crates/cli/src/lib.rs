//! Configuration, right-hand-side catalog, mollification and experiment
//! drivers behind the `pucci-harness` binary.
//!
//! A run is described by a TOML file (see [`config::RunConfig`]), executed by
//! [`run::run`], and leaves one or more CSV tables plus `manifest.json` in the
//! output directory.

pub mod catalog;
pub mod config;
pub mod mollify;
pub mod output;
pub mod run;

pub use catalog::RhsCatalogEntry;
pub use config::RunConfig;
pub use mollify::{mollify, MollifierSpec};
pub use run::{run, RunOutcome};
