//! Reference cost evaluation and the no-consolidation baseline.
//!
//! Costs split into three components:
//!
//! ```text
//! C_M = sum_i CMF_i + (1 - D_i) M_i (CMU_ik + CMT_ik)
//! C_F = sum_k CFF_k + (CFU_k + CFT_k)(1 - d_k) m_k
//! C_I = sum_i CFH_k L_ik P_i + sum_k (CFU_k + CFT_k)(1 - d_k) p_k
//! ```
//!
//! where `m_k` and `p_k` are the forging quantities needed for orders and
//! inventory of the parts machined from forging `k`, and `d_k` is the discount
//! level reached by the pooled quantity `m_k + p_k`.

use alloc::collections::{BTreeMap, BTreeSet};

use crate::discount::DiscountSchedule;
use crate::error::Error;
use crate::instance::{ForgingId, Instance, Part, PartId, Solution};
use crate::COST_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub machining: f64,
    pub forging: f64,
    pub inventory: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(machining: f64, forging: f64, inventory: f64) -> Self {
        Self {
            machining,
            forging,
            inventory,
            total: machining + forging + inventory,
        }
    }

    /// Largest absolute component-wise difference.
    pub fn max_abs_diff(&self, other: &CostBreakdown) -> f64 {
        [
            self.machining - other.machining,
            self.forging - other.forging,
            self.inventory - other.inventory,
            self.total - other.total,
        ]
        .iter()
        .fold(0.0, |acc, d| acc.max(d.abs()))
    }
}

pub(crate) struct Detailed {
    pub costs: CostBreakdown,
    pub levels: BTreeMap<ForgingId, usize>,
}

/// Evaluates a (selected set, assignment) pair.
pub fn evaluate(
    instance: &Instance,
    selected: &BTreeSet<ForgingId>,
    assignment: &BTreeMap<PartId, ForgingId>,
) -> Result<CostBreakdown, Error> {
    evaluate_detailed(instance, selected, assignment).map(|d| d.costs)
}

pub(crate) fn evaluate_detailed(
    instance: &Instance,
    selected: &BTreeSet<ForgingId>,
    assignment: &BTreeMap<PartId, ForgingId>,
) -> Result<Detailed, Error> {
    for part in assignment.keys() {
        if instance.part_position(*part).is_none() {
            return Err(Error::UnknownPart(*part));
        }
    }
    let mut order_qty = BTreeMap::<ForgingId, u128>::new();
    let mut inventory_qty = BTreeMap::<ForgingId, u128>::new();
    for k in selected {
        if instance.forging_position(*k).is_none() {
            return Err(Error::UnknownSelected(*k));
        }
        order_qty.insert(*k, 0);
        inventory_qty.insert(*k, 0);
    }

    let mut machining = 0.0;
    for (i, part) in instance.parts().iter().enumerate() {
        let k = *assignment
            .get(&part.id)
            .ok_or(Error::UncoveredPart(part.id))?;
        let j = part
            .options
            .iter()
            .position(|o| o.forging == k)
            .ok_or(Error::NotAnOption(part.id, k))?;
        if !selected.contains(&k) {
            return Err(Error::NotSelected(part.id, k));
        }
        machining += part.fixed_order_cost
            + (1.0 - part.precomputed_discount())
                * part.order_quantity as f64
                * part.options[j].unit_cost();
        let (m, p) = instance.scaled_quantities(i, j)?;
        *order_qty.get_mut(&k).expect("selected") += m;
        *inventory_qty.get_mut(&k).expect("selected") += p;
    }

    let scale = instance.scale() as f64;
    let mut forging = 0.0;
    let mut inventory = 0.0;
    let mut levels = BTreeMap::new();
    for k in selected {
        let f = instance.forging(*k).expect("checked above");
        let m = order_qty[k];
        let p = inventory_qty[k];
        let thresholds = f
            .discounts
            .scaled_thresholds(instance.scale())
            .ok_or(Error::QuantityOverflow)?;
        let level = DiscountSchedule::level_for_scaled(&thresholds, m + p);
        let factor = f.unit_price() * (1.0 - f.discounts.discount(level));
        forging += f.fixed_order_cost + factor * (m as f64 / scale);
        inventory += (f.unit_holding_cost + factor) * (p as f64 / scale);
        levels.insert(*k, level);
    }

    Ok(Detailed {
        costs: CostBreakdown::new(machining, forging, inventory),
        levels,
    })
}

/// Index of the part's cheapest option; costs within [`COST_TOLERANCE`] tie
/// and ties go to the lowest forging id.
pub(crate) fn cheapest_option(part: &Part) -> usize {
    let mut best = 0;
    for (j, o) in part.options.iter().enumerate().skip(1) {
        let b = &part.options[best];
        let diff = o.unit_cost() - b.unit_cost();
        if diff < -COST_TOLERANCE || (diff <= COST_TOLERANCE && o.forging < b.forging) {
            best = j;
        }
    }
    best
}

/// Every part machined from its cheapest option (machining plus transport),
/// ties going to the lowest forging id. No coordination across parts.
pub fn baseline_no_consolidation(instance: &Instance) -> Solution {
    let assignment = instance
        .parts()
        .iter()
        .map(|p| (p.id, p.options[cheapest_option(p)].forging))
        .collect();
    Solution::from_assignment(instance, assignment).expect("baseline assignment is always valid")
}

/// Costs of a solution together with the size of its forging set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSummary {
    pub costs: CostBreakdown,
    pub selected: usize,
}

impl From<&Solution> for CostSummary {
    fn from(s: &Solution) -> Self {
        Self {
            costs: s.costs,
            selected: s.selected.len(),
        }
    }
}

/// Consolidated-over-baseline ratios. `None` marks a zero baseline component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioRecord {
    /// Selected forgings over all available forgings.
    pub consolidated: Option<f64>,
    pub forging: Option<f64>,
    pub machining: Option<f64>,
    pub holding: Option<f64>,
    pub total: Option<f64>,
}

pub fn ratios(with: &CostSummary, without: &CostSummary, n_forgings: usize) -> RatioRecord {
    let div = |a: f64, b: f64| (b != 0.0).then(|| a / b);
    RatioRecord {
        consolidated: div(with.selected as f64, n_forgings as f64),
        forging: div(with.costs.forging, without.costs.forging),
        machining: div(with.costs.machining, without.costs.machining),
        holding: div(with.costs.inventory, without.costs.inventory),
        total: div(with.costs.total, without.costs.total),
    }
}
