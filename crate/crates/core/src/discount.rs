//! Piecewise-constant all-units quantity discounts.
//!
//! Level `d` covers the half-open interval `(Q_d, Q_{d+1}]`. The first level
//! starts at 0 inclusive and the last one is unbounded above, so quantity 0
//! and quantity `Q_1` both fall into level 0.

use alloc::vec::Vec;

use crate::error::Error;
use crate::instance::Quantity;

/// One step of a discount schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscountLevel {
    /// Lower (exclusive) end of the quantity interval.
    pub threshold: Quantity,
    /// Fraction taken off the unit price, in `[0, 1)`.
    pub discount: f64,
}

impl DiscountLevel {
    pub fn new(threshold: u64, discount: f64) -> Self {
        Self {
            threshold: Quantity::from_integer(threshold),
            discount,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscountSchedule {
    levels: Vec<DiscountLevel>,
}

impl DiscountSchedule {
    pub fn new(levels: Vec<DiscountLevel>) -> Result<Self, Error> {
        let first = levels.first().ok_or(Error::EmptySchedule)?;
        if *first.threshold.numer() != 0 {
            return Err(Error::FirstThresholdNotZero);
        }
        for (d, level) in levels.iter().enumerate() {
            if !(0.0..1.0).contains(&level.discount) {
                return Err(Error::DiscountOutOfRange(d));
            }
            if d > 0 {
                let prev = &levels[d - 1];
                if level.threshold <= prev.threshold {
                    return Err(Error::ThresholdsNotIncreasing(d));
                }
                if level.discount < prev.discount {
                    return Err(Error::DiscountsDecreasing(d));
                }
            }
        }
        Ok(Self { levels })
    }

    /// A single 0% level: no discounts at all.
    pub fn flat() -> Self {
        Self {
            levels: alloc::vec![DiscountLevel::new(0, 0.0)],
        }
    }

    /// Builds a schedule from integer thresholds and matching fractions.
    pub fn from_pairs(pairs: &[(u64, f64)]) -> Result<Self, Error> {
        Self::new(
            pairs
                .iter()
                .map(|&(q, d)| DiscountLevel::new(q, d))
                .collect(),
        )
    }

    pub fn levels(&self) -> &[DiscountLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn discount(&self, level: usize) -> f64 {
        self.levels[level].discount
    }

    pub fn max_discount(&self) -> f64 {
        self.levels.last().map_or(0.0, |l| l.discount)
    }

    /// Level index and discount fraction for an ordered quantity.
    pub fn discount_for_quantity(&self, q: Quantity) -> (usize, f64) {
        let level = self.levels[1..].partition_point(|l| l.threshold < q);
        (level, self.levels[level].discount)
    }

    /// Same lookup on quantities pre-multiplied by a common denominator.
    /// `scaled_thresholds` must come from [`Self::scaled_thresholds`] with the
    /// same scale.
    pub fn level_for_scaled(scaled_thresholds: &[u128], q: u128) -> usize {
        scaled_thresholds[1..].partition_point(|&t| t < q)
    }

    /// Thresholds multiplied by `scale`; `None` if a threshold is not an
    /// integer multiple of `1/scale` or the product overflows.
    pub fn scaled_thresholds(&self, scale: u64) -> Option<Vec<u128>> {
        self.levels
            .iter()
            .map(|l| scale_quantity(l.threshold, scale))
            .collect()
    }

    /// Returns a copy with every discount fraction multiplied by `factor` and
    /// capped at `cap`.
    pub fn scaled_discounts(&self, factor: f64, cap: f64) -> Result<Self, Error> {
        Self::new(
            self.levels
                .iter()
                .map(|l| DiscountLevel {
                    threshold: l.threshold,
                    discount: (l.discount * factor).min(cap),
                })
                .collect(),
        )
    }
}

/// `q * scale` as an integer, if exact.
pub(crate) fn scale_quantity(q: Quantity, scale: u64) -> Option<u128> {
    let numer = *q.numer() as u128;
    let denom = *q.denom() as u128;
    let scaled = numer.checked_mul(scale as u128)?;
    (scaled % denom == 0).then(|| scaled / denom)
}
