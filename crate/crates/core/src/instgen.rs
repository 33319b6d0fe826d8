//! Seeded random instances.
//!
//! Every draw comes from a PCG-XSL-RR 128/64 generator (`rand_pcg::Pcg64`).
//! Each entity owns a separate generator so that changing one spec field only
//! perturbs the values that depend on it:
//!
//! - part `i` (0-based) uses stream `(1 << 64) | i`,
//! - forging `k` (0-based) uses stream `(2 << 64) | k`,
//!
//! both with state `(splitmix(seed) << 64) | splitmix(seed ^ (tag << 56) ^ index)`.
//!
//! Draw order for a part: order quantity, inventory quantity, fixed cost, then
//! `options_per_part` option slots, each drawing forging (uniform over all
//! forgings, with replacement), yield index, machining cost and machining
//! transport cost. A slot that repeats an earlier forging is dropped, so a part
//! has between 1 and `options_per_part` options. Slots are drawn in the same
//! order whatever `options_per_part` is, which makes option sets nested across
//! an options sweep.
//!
//! Draw order for a forging: fixed cost, unit cost, transport cost, holding cost.
//!
//! Integers are drawn uniformly from inclusive ranges with Lemire's
//! multiply-and-reject method. Multipliers are applied after sampling.

use alloc::vec::Vec;
use core::ops::RangeInclusive;

use rand_core::Rng;
use rand_pcg::Pcg64;

use crate::discount::DiscountSchedule;
use crate::error::Error;
use crate::instance::{Forging, ForgingId, Instance, MachiningOption, Part, PartId, Quantity};

/// Largest forging discount reachable through the discount multiplier.
pub const DISCOUNT_CAP: f64 = 0.5;

/// Scaling applied to sampled values, for sensitivity sweeps.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub part_fixed_cost: f64,
    pub forging_fixed_cost: f64,
    pub machining_cost: f64,
    pub machining_transport: f64,
    pub forging_unit_cost: f64,
    pub forging_transport: f64,
    pub holding_cost: f64,
    /// Scales forging discount fractions, capped at [`DISCOUNT_CAP`].
    pub forging_discount: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Self {
            part_fixed_cost: 1.0,
            forging_fixed_cost: 1.0,
            machining_cost: 1.0,
            machining_transport: 1.0,
            forging_unit_cost: 1.0,
            forging_transport: 1.0,
            holding_cost: 1.0,
            forging_discount: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub parts: usize,
    pub forgings: usize,
    /// Forging draws per part; repeats collapse, so this is an upper bound.
    pub options_per_part: usize,
    pub seed: u64,
    pub order_range: RangeInclusive<u64>,
    pub inventory_range: RangeInclusive<u64>,
    /// Fixed ordering cost, used for parts and forgings alike.
    pub fixed_cost_range: RangeInclusive<u64>,
    pub machining_unit_range: RangeInclusive<u64>,
    pub machining_transport_range: RangeInclusive<u64>,
    pub holding_range: RangeInclusive<u64>,
    pub forging_unit_range: RangeInclusive<u64>,
    pub forging_transport_range: RangeInclusive<u64>,
    /// Parts made from one forging; `L_ik = 1 / yield`.
    pub yield_choices: Vec<u64>,
    /// (threshold, discount) pairs shared by every part and forging.
    pub discount_levels: Vec<(u64, f64)>,
    pub multipliers: Multipliers,
}

impl GenSpec {
    pub fn new(parts: usize, forgings: usize, seed: u64) -> Self {
        Self {
            parts,
            forgings,
            options_per_part: 2,
            seed,
            order_range: 100..=500,
            inventory_range: 10..=50,
            fixed_cost_range: 1000..=5000,
            machining_unit_range: 10..=40,
            machining_transport_range: 1..=5,
            holding_range: 15..=40,
            forging_unit_range: 10..=40,
            forging_transport_range: 5..=25,
            yield_choices: alloc::vec![1, 2, 3],
            discount_levels: alloc::vec![(0, 0.0), (250, 0.05), (400, 0.10)],
            multipliers: Multipliers::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.parts == 0 {
            return Err(Error::InvalidSpec("need at least one part"));
        }
        if self.forgings == 0 {
            return Err(Error::InvalidSpec("need at least one forging"));
        }
        if self.options_per_part == 0 {
            return Err(Error::InvalidSpec("options per part must be at least 1"));
        }
        if self.options_per_part > self.forgings {
            return Err(Error::OptionsExceedForgings {
                options: self.options_per_part,
                forgings: self.forgings,
            });
        }
        for r in [
            &self.order_range,
            &self.inventory_range,
            &self.fixed_cost_range,
            &self.machining_unit_range,
            &self.machining_transport_range,
            &self.holding_range,
            &self.forging_unit_range,
            &self.forging_transport_range,
        ] {
            if r.is_empty() {
                return Err(Error::InvalidSpec("empty sampling range"));
            }
        }
        if self.yield_choices.is_empty() || self.yield_choices.contains(&0) {
            return Err(Error::InvalidSpec(
                "yield choices must be non-empty and positive",
            ));
        }
        let m = &self.multipliers;
        for v in [
            m.part_fixed_cost,
            m.forging_fixed_cost,
            m.machining_cost,
            m.machining_transport,
            m.forging_unit_cost,
            m.forging_transport,
            m.holding_cost,
            m.forging_discount,
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidSpec(
                    "multipliers must be finite and non-negative",
                ));
            }
        }
        DiscountSchedule::from_pairs(&self.discount_levels)?;
        Ok(())
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const PART_TAG: u64 = 1;
const FORGING_TAG: u64 = 2;

/// Generator for one entity.
pub fn entity_rng(seed: u64, tag: u64, index: u64) -> Pcg64 {
    let state = ((splitmix(seed) as u128) << 64) | splitmix(seed ^ (tag << 56) ^ index) as u128;
    let stream = ((tag as u128) << 64) | index as u128;
    Pcg64::new(state, stream)
}

/// Uniform integer in `0..n`, `n > 0`.
pub fn below(rng: &mut impl Rng, n: u64) -> u64 {
    debug_assert!(n > 0);
    let mut m = rng.next_u64() as u128 * n as u128;
    if (m as u64) < n {
        let threshold = n.wrapping_neg() % n;
        while (m as u64) < threshold {
            m = rng.next_u64() as u128 * n as u128;
        }
    }
    (m >> 64) as u64
}

/// Uniform integer in an inclusive range.
pub fn uniform(rng: &mut impl Rng, range: &RangeInclusive<u64>) -> u64 {
    let (lo, hi) = (*range.start(), *range.end());
    match (hi - lo).checked_add(1) {
        Some(span) => lo + below(rng, span),
        None => rng.next_u64(),
    }
}

pub fn generate(spec: &GenSpec) -> Result<Instance, Error> {
    spec.validate()?;
    let mult = &spec.multipliers;
    let part_schedule = DiscountSchedule::from_pairs(&spec.discount_levels)?;
    let forging_schedule = part_schedule.scaled_discounts(mult.forging_discount, DISCOUNT_CAP)?;

    let forgings: Vec<Forging> = (0..spec.forgings)
        .map(|k| {
            let mut rng = entity_rng(spec.seed, FORGING_TAG, k as u64);
            let fixed = uniform(&mut rng, &spec.fixed_cost_range) as f64;
            let unit = uniform(&mut rng, &spec.forging_unit_range) as f64;
            let transport = uniform(&mut rng, &spec.forging_transport_range) as f64;
            let holding = uniform(&mut rng, &spec.holding_range) as f64;
            Forging {
                id: ForgingId(k as u32 + 1),
                fixed_order_cost: fixed * mult.forging_fixed_cost,
                unit_cost: unit * mult.forging_unit_cost,
                unit_transport_cost: transport * mult.forging_transport,
                unit_holding_cost: holding * mult.holding_cost,
                discounts: forging_schedule.clone(),
            }
        })
        .collect();

    let n = spec.forgings as u64;
    let parts: Vec<Part> = (0..spec.parts)
        .map(|i| {
            let mut rng = entity_rng(spec.seed, PART_TAG, i as u64);
            let order = uniform(&mut rng, &spec.order_range);
            let inventory = uniform(&mut rng, &spec.inventory_range);
            let fixed = uniform(&mut rng, &spec.fixed_cost_range) as f64;

            let mut options: Vec<MachiningOption> = Vec::with_capacity(spec.options_per_part);
            for _ in 0..spec.options_per_part {
                let forging = ForgingId(below(&mut rng, n) as u32 + 1);
                let y =
                    spec.yield_choices[below(&mut rng, spec.yield_choices.len() as u64) as usize];
                let machining = uniform(&mut rng, &spec.machining_unit_range) as f64;
                let transport = uniform(&mut rng, &spec.machining_transport_range) as f64;
                // repeated picks collapse, so a part ends up with 1..=options_per_part options
                if options.iter().any(|o| o.forging == forging) {
                    continue;
                }
                options.push(MachiningOption {
                    forging,
                    units_per_part: Quantity::new(1, y),
                    unit_machining_cost: machining * mult.machining_cost,
                    unit_transport_cost: transport * mult.machining_transport,
                });
            }
            Part {
                id: PartId(i as u32 + 1),
                order_quantity: order,
                inventory_quantity: inventory,
                fixed_order_cost: fixed * mult.part_fixed_cost,
                discounts: part_schedule.clone(),
                options,
            }
        })
        .collect();

    Instance::new(parts, forgings)
}
