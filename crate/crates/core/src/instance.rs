//! Problem data: parts, forgings, their machining options, and solutions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_integer::Integer;
use num_rational::Ratio;

use crate::cost::CostBreakdown;
use crate::discount::{scale_quantity, DiscountSchedule};
use crate::error::Error;

/// Exact non-negative rational quantity (units of parts or forgings).
pub type Quantity = Ratio<u64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ForgingId(pub u32);

impl fmt::Display for PartId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl fmt::Display for ForgingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

/// One way of manufacturing a part: machine it from a given forging.
#[derive(Debug, Clone, PartialEq)]
pub struct MachiningOption {
    pub forging: ForgingId,
    /// Forgings consumed per finished part (`L_ik`).
    pub units_per_part: Quantity,
    pub unit_machining_cost: f64,
    pub unit_transport_cost: f64,
}

impl MachiningOption {
    /// Machining plus transport cost per part.
    pub fn unit_cost(&self) -> f64 {
        self.unit_machining_cost + self.unit_transport_cost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub id: PartId,
    pub order_quantity: u64,
    pub inventory_quantity: u64,
    pub fixed_order_cost: f64,
    pub discounts: DiscountSchedule,
    pub options: Vec<MachiningOption>,
}

impl Part {
    pub fn option_for(&self, forging: ForgingId) -> Option<&MachiningOption> {
        self.options.iter().find(|o| o.forging == forging)
    }

    /// Discount on the part price. Depends on the order quantity only and is
    /// fixed before any optimization takes place.
    pub fn precomputed_discount(&self) -> f64 {
        self.discounts
            .discount_for_quantity(Quantity::from_integer(self.order_quantity))
            .1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forging {
    pub id: ForgingId,
    pub fixed_order_cost: f64,
    pub unit_cost: f64,
    pub unit_transport_cost: f64,
    pub unit_holding_cost: f64,
    pub discounts: DiscountSchedule,
}

impl Forging {
    /// Purchase plus transport cost per forging, before discounts.
    pub fn unit_price(&self) -> f64 {
        self.unit_cost + self.unit_transport_cost
    }
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    parts: Vec<Part>,
    forgings: Vec<Forging>,
    part_index: BTreeMap<PartId, usize>,
    forging_index: BTreeMap<ForgingId, usize>,
    scale: u64,
}

impl Instance {
    pub fn new(parts: Vec<Part>, forgings: Vec<Forging>) -> Result<Self, Error> {
        let mut forging_index = BTreeMap::new();
        for (k, f) in forgings.iter().enumerate() {
            if forging_index.insert(f.id, k).is_some() {
                return Err(Error::DuplicateForging(f.id));
            }
            for (what, v) in [
                ("fixed order cost", f.fixed_order_cost),
                ("unit cost", f.unit_cost),
                ("unit transport cost", f.unit_transport_cost),
                ("unit holding cost", f.unit_holding_cost),
            ] {
                check_cost(v, || format!("forging {} {what} = {v}", f.id))?;
            }
        }

        let mut part_index = BTreeMap::new();
        for (i, p) in parts.iter().enumerate() {
            if part_index.insert(p.id, i).is_some() {
                return Err(Error::DuplicatePart(p.id));
            }
            check_cost(p.fixed_order_cost, || {
                format!("part {} fixed order cost = {}", p.id, p.fixed_order_cost)
            })?;
            if p.options.is_empty() {
                return Err(Error::NoOptions(p.id));
            }
            let mut seen = BTreeSet::new();
            for o in &p.options {
                if !forging_index.contains_key(&o.forging) {
                    return Err(Error::UnknownForging(p.id, o.forging));
                }
                if !seen.insert(o.forging) {
                    return Err(Error::DuplicateOption(p.id, o.forging));
                }
                if *o.units_per_part.numer() == 0 {
                    return Err(Error::NonPositiveUnits(p.id));
                }
                check_cost(o.unit_machining_cost, || {
                    format!("part {} machining cost via {}", p.id, o.forging)
                })?;
                check_cost(o.unit_transport_cost, || {
                    format!("part {} transport cost via {}", p.id, o.forging)
                })?;
            }
        }

        let scale = common_scale(&parts, &forgings)?;
        let instance = Self {
            parts,
            forgings,
            part_index,
            forging_index,
            scale,
        };
        // Largest possible pooled quantity must fit the scaled representation.
        let mut total: u128 = 0;
        for (i, p) in instance.parts.iter().enumerate() {
            let mut widest = 0;
            for j in 0..p.options.len() {
                let (m, inv) = instance.scaled_quantities(i, j)?;
                widest = widest.max(m.checked_add(inv).ok_or(Error::QuantityOverflow)?);
            }
            total = total.checked_add(widest).ok_or(Error::QuantityOverflow)?;
        }
        if total > u64::MAX as u128 {
            return Err(Error::QuantityOverflow);
        }
        Ok(instance)
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    pub fn forgings(&self) -> &[Forging] {
        &self.forgings
    }

    pub fn part_position(&self, id: PartId) -> Option<usize> {
        self.part_index.get(&id).copied()
    }

    pub fn forging_position(&self, id: ForgingId) -> Option<usize> {
        self.forging_index.get(&id).copied()
    }

    pub fn part(&self, id: PartId) -> Option<&Part> {
        self.part_position(id).map(|i| &self.parts[i])
    }

    pub fn forging(&self, id: ForgingId) -> Option<&Forging> {
        self.forging_position(id).map(|k| &self.forgings[k])
    }

    /// Common denominator of every `L_ik` and every discount threshold.
    /// Multiplying quantities by it turns all interval tests into integer
    /// comparisons.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Forging quantities `(L_ik * M_i, L_ik * P_i)` for option `option` of the
    /// part at position `part`, multiplied by [`Self::scale`].
    pub fn scaled_quantities(&self, part: usize, option: usize) -> Result<(u128, u128), Error> {
        let p = &self.parts[part];
        let l = p.options[option].units_per_part;
        let per_unit = scale_quantity(l, self.scale).ok_or(Error::QuantityOverflow)?;
        let m = per_unit
            .checked_mul(p.order_quantity as u128)
            .ok_or(Error::QuantityOverflow)?;
        let inv = per_unit
            .checked_mul(p.inventory_quantity as u128)
            .ok_or(Error::QuantityOverflow)?;
        Ok((m, inv))
    }

    /// Returns a copy with a transformation applied to every forging.
    pub fn map_forgings(&self, f: impl Fn(&mut Forging)) -> Result<Self, Error> {
        let mut forgings = self.forgings.clone();
        forgings.iter_mut().for_each(f);
        Self::new(self.parts.clone(), forgings)
    }
}

fn check_cost(v: f64, what: impl FnOnce() -> alloc::string::String) -> Result<(), Error> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidCost(what()))
    }
}

fn common_scale(parts: &[Part], forgings: &[Forging]) -> Result<u64, Error> {
    let mut scale: u64 = 1;
    let mut absorb = |d: u64| -> Result<(), Error> {
        let g = scale.gcd(&d);
        scale = (scale / g).checked_mul(d).ok_or(Error::QuantityOverflow)?;
        Ok(())
    };
    for p in parts {
        for o in &p.options {
            absorb(*o.units_per_part.denom())?;
        }
        for l in p.discounts.levels() {
            absorb(*l.threshold.denom())?;
        }
    }
    for f in forgings {
        for l in f.discounts.levels() {
            absorb(*l.threshold.denom())?;
        }
    }
    Ok(scale)
}

/// A complete consolidation decision with its evaluated costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// The consolidated forging set.
    pub selected: BTreeSet<ForgingId>,
    /// Which forging each part is machined from.
    pub assignment: BTreeMap<PartId, ForgingId>,
    /// Discount level applied to each selected forging.
    pub discount_level: BTreeMap<ForgingId, usize>,
    pub costs: CostBreakdown,
}

impl Solution {
    /// Builds the solution implied by an assignment: the selected set is the
    /// image of the assignment and costs come from [`crate::cost::evaluate`].
    pub fn from_assignment(
        instance: &Instance,
        assignment: BTreeMap<PartId, ForgingId>,
    ) -> Result<Self, Error> {
        let selected: BTreeSet<ForgingId> = assignment.values().copied().collect();
        let detail = crate::cost::evaluate_detailed(instance, &selected, &assignment)?;
        Ok(Self {
            selected,
            assignment,
            discount_level: detail.levels,
            costs: detail.costs,
        })
    }

    pub fn consolidated_count(&self) -> usize {
        self.selected.len()
    }
}
