use alloc::string::String;

use crate::instance::{ForgingId, PartId};

/// Everything that can go wrong in the core crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("discount schedule has no levels")]
    EmptySchedule,
    #[error("first discount threshold must be 0")]
    FirstThresholdNotZero,
    #[error("discount thresholds must be strictly increasing (level {0})")]
    ThresholdsNotIncreasing(usize),
    #[error("discount fraction at level {0} must lie in [0, 1)")]
    DiscountOutOfRange(usize),
    #[error("discount fractions must be non-decreasing (level {0})")]
    DiscountsDecreasing(usize),

    #[error("duplicate part id {0}")]
    DuplicatePart(PartId),
    #[error("duplicate forging id {0}")]
    DuplicateForging(ForgingId),
    #[error("part {0} has no machining options")]
    NoOptions(PartId),
    #[error("part {0} lists forging {1} more than once")]
    DuplicateOption(PartId, ForgingId),
    #[error("part {0} references unknown forging {1}")]
    UnknownForging(PartId, ForgingId),
    #[error("part {0}: units per part must be positive")]
    NonPositiveUnits(PartId),
    #[error("invalid cost: {0}")]
    InvalidCost(String),
    #[error("quantity arithmetic overflowed")]
    QuantityOverflow,

    #[error("selected forging {0} does not exist")]
    UnknownSelected(ForgingId),
    #[error("unknown part {0}")]
    UnknownPart(PartId),
    #[error("part {0} is not assigned to any forging")]
    UncoveredPart(PartId),
    #[error("forging {1} is not a machining option of part {0}")]
    NotAnOption(PartId, ForgingId),
    #[error("part {0} is assigned to forging {1}, which is not selected")]
    NotSelected(PartId, ForgingId),
    #[error("selected forging {0} is not used by any part")]
    UnusedForging(ForgingId),
    #[error("wrong discount level for forging {0}")]
    WrongDiscountLevel(ForgingId),
    #[error("cost mismatch in {component}: stored {stored}, recomputed {recomputed}")]
    CostMismatch {
        component: &'static str,
        stored: f64,
        recomputed: f64,
    },

    #[error("product linearization needs at least one factor")]
    EmptyFactors,
    #[error("big-M cap must be positive")]
    NonPositiveCap,
    #[error("variable index {0} does not exist")]
    UnknownVariable(usize),
    #[error("variable {0} is not binary")]
    NotBinary(String),
    #[error("duplicate name {0}")]
    DuplicateName(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid generator spec: {0}")]
    InvalidSpec(&'static str),
    #[error("options per part ({options}) exceeds number of forgings ({forgings})")]
    OptionsExceedForgings { options: usize, forgings: usize },

    #[error("enumeration needs {needed} evaluations, limit is {limit}")]
    EnumerationLimit { needed: u128, limit: u128 },
}
