#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use forgecon_core::instgen::{below, entity_rng, generate, GenSpec};
use forgecon_core::{
    DiscountSchedule, Forging, ForgingId, Instance, MachiningOption, Part, PartId, Quantity,
    Solution,
};

/// The hand-evaluated one-part instance: total 7000.
pub fn single_point() -> Instance {
    let schedule = DiscountSchedule::from_pairs(&[(0, 0.0), (250, 0.05), (400, 0.10)]).unwrap();
    Instance::new(
        vec![Part {
            id: PartId(1),
            order_quantity: 100,
            inventory_quantity: 10,
            fixed_order_cost: 1000.0,
            discounts: schedule.clone(),
            options: vec![MachiningOption {
                forging: ForgingId(1),
                units_per_part: Quantity::from_integer(1),
                unit_machining_cost: 20.0,
                unit_transport_cost: 2.0,
            }],
        }],
        vec![Forging {
            id: ForgingId(1),
            fixed_order_cost: 2000.0,
            unit_cost: 10.0,
            unit_transport_cost: 5.0,
            unit_holding_cost: 15.0,
            discounts: schedule,
        }],
    )
    .unwrap()
}

/// A small random spec whose discount thresholds sit where small pools
/// actually reach them.
pub fn small_spec(seed: u64, max_parts: u64, max_forgings: u64, max_options: u64) -> GenSpec {
    let mut rng = entity_rng(seed, 0x5eed, 0);
    let parts = 1 + below(&mut rng, max_parts) as usize;
    let forgings = 1 + below(&mut rng, max_forgings) as usize;
    let mut spec = GenSpec::new(parts, forgings, seed);
    spec.options_per_part = 1 + below(&mut rng, max_options.min(forgings as u64)) as usize;
    spec.order_range = 20..=220;
    spec.inventory_range = 0..=40;
    spec.fixed_cost_range = 100..=3000;
    spec.discount_levels = vec![(0, 0.0), (120, 0.08), (300, 0.2)];
    spec
}

pub fn small_instance(seed: u64, max_parts: u64, max_forgings: u64, max_options: u64) -> Instance {
    generate(&small_spec(seed, max_parts, max_forgings, max_options)).unwrap()
}

/// Every complete assignment of `instance`, in mixed-radix order.
pub fn assignments(instance: &Instance) -> Vec<BTreeMap<PartId, ForgingId>> {
    let mut out = vec![BTreeMap::new()];
    for p in instance.parts() {
        out = out
            .into_iter()
            .flat_map(|a| {
                p.options.iter().map(move |o| {
                    let mut a = a.clone();
                    a.insert(p.id, o.forging);
                    a
                })
            })
            .collect();
    }
    out
}

pub fn solutions(instance: &Instance) -> Vec<Solution> {
    assignments(instance)
        .into_iter()
        .map(|a| Solution::from_assignment(instance, a).unwrap())
        .collect()
}

pub fn image(assignment: &BTreeMap<PartId, ForgingId>) -> BTreeSet<ForgingId> {
    assignment.values().copied().collect()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
