//! File formats, parallel solving, benchmarking and the command line for
//! [`forgecon_core`].
//!
//! - [`format`]: TOML instance and solution documents.
//! - [`mps`]: fixed-format MPS export and re-import of [`LinearModel`]s.
//! - [`parallel`]: component-parallel solving with a wall clock.
//! - [`bench`]: consolidation-vs-baseline rows and parameter sweeps.
//!
//! [`LinearModel`]: forgecon_core::milp::LinearModel

pub mod bench;
pub mod format;
pub mod mps;
pub mod parallel;

pub use forgecon_core as core;
pub use parallel::{solve, WallClock};
