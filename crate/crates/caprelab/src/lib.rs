//! Static-analysis-driven prefetching over a simulated distributed
//! persistent object store.
//!
//! The pipeline: load a compact application model ([`model`]), build type
//! graphs and per-method augmented navigation graphs ([`graph`]), turn
//! them into prefetching hints with a schema-only baseline for comparison
//! ([`hints`]), and quantify the effect in a deterministic virtual-time
//! store simulator ([`sim`]). [`bench`] generates the standard workload
//! families.
//!
//! Each runnable example under `examples/` demonstrates one capability
//! end to end; the `caprelab` binary exposes the same pipeline as
//! subcommands.

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod error;
pub mod graph;
pub mod hints;
pub mod logging;
pub mod model;
pub mod rng;
pub mod sim;

pub use analysis::{analyze, analyze_with, Analysis, AnalysisOptions};
