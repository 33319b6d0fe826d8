//! Exact optimizer for multi-tier forging consolidation.
//!
//! A set of Tier-1 parts can each be machined from one of several Tier-2
//! forgings. Choosing fewer forgings pools volume (quantity discounts, fewer
//! fixed ordering costs) at the price of more expensive machining. This crate
//! holds the pure algorithmic side of the problem:
//!
//! - [`instance`]: parts, forgings, discount schedules and solutions,
//! - [`cost`]: the reference cost evaluator and the no-consolidation baseline,
//! - [`milp`]: the linearized mixed-integer model and a small linearization toolkit,
//! - [`solver`]: a branch-and-bound solver that certifies optimality,
//! - [`oracle`]: exhaustive enumeration for small instances,
//! - [`instgen`]: seeded random instance generation.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, wall clocks and
//! threads live in the `forgecon` companion crate.
#![no_std]

extern crate alloc;

pub mod cost;
pub mod discount;
pub mod error;
pub mod instance;
pub mod instgen;
pub mod milp;
pub mod oracle;
pub mod solver;

pub use cost::{baseline_no_consolidation, evaluate, ratios, CostBreakdown, RatioRecord};
pub use discount::{DiscountLevel, DiscountSchedule};
pub use error::Error;
pub use instance::{
    Forging, ForgingId, Instance, MachiningOption, Part, PartId, Quantity, Solution,
};
pub use solver::{solve, verify, SolveConfig, SolveResult, SolveStatus};

/// Absolute tolerance used for every cost comparison.
pub const COST_TOLERANCE: f64 = 1e-6;
