//! Instance data flattened for the search, split into independent components.
//!
//! Parts only interact through the forgings they may use, so forgings linked
//! by a multi-option part form a component and components can be optimized
//! separately. Parts with a single option never branch; they are folded into
//! the base load of their forging.

use alloc::vec;
use alloc::vec::Vec;

use crate::discount::DiscountSchedule;
use crate::error::Error;
use crate::instance::Instance;

#[derive(Debug, Clone)]
pub(crate) struct OptionData {
    /// Local forging index within the component.
    pub forging: usize,
    /// Position of the option in the part's option list.
    pub option: usize,
    /// Assignment-dependent cost that does not depend on pooling: discounted
    /// machining of the order plus forging holding cost for the inventory.
    pub lin: f64,
    /// Pooled forging quantity times the instance scale.
    pub weight: u128,
    /// Pooled forging quantity.
    pub qty: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ForgingData {
    pub fixed: f64,
    pub thresholds: Vec<u128>,
    /// Discounted unit price per level.
    pub factor: Vec<f64>,
    pub inv_scale: f64,
}

impl ForgingData {
    pub fn level(&self, weight: u128) -> usize {
        DiscountSchedule::level_for_scaled(&self.thresholds, weight)
    }

    /// Cost of buying `weight` scaled units; zero when the forging is unused.
    pub fn cost(&self, weight: u128, users: u32) -> f64 {
        if users == 0 {
            0.0
        } else {
            self.fixed + self.factor[self.level(weight)] * weight as f64 * self.inv_scale
        }
    }

    pub fn min_factor(&self) -> f64 {
        *self.factor.last().expect("schedule has a level")
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Component {
    /// Global forging positions.
    pub forging_ids: Vec<usize>,
    pub forgings: Vec<ForgingData>,
    /// Load and user count from single-option parts.
    pub base_weight: Vec<u128>,
    pub base_count: Vec<u32>,
    pub base_lin: f64,
    /// Global positions of the branching parts, in branching order.
    pub parts: Vec<usize>,
    pub options: Vec<Vec<OptionData>>,
    /// Per local forging: (branch position, option slot), sorted by position.
    pub users: Vec<Vec<(usize, usize)>>,
    /// Slot of the cheapest machining option per branch part.
    pub baseline: Vec<usize>,
}

impl Component {
    pub fn branch_len(&self) -> usize {
        self.parts.len()
    }

    /// Exact component cost of a complete choice (option slot per branch part).
    pub fn cost(&self, choice: &[usize]) -> f64 {
        let mut weight = self.base_weight.clone();
        let mut count = self.base_count.clone();
        let mut total = self.base_lin;
        for (pos, &j) in choice.iter().enumerate() {
            let o = &self.options[pos][j];
            total += o.lin;
            weight[o.forging] += o.weight;
            count[o.forging] += 1;
        }
        total
            + self
                .forgings
                .iter()
                .enumerate()
                .map(|(k, f)| f.cost(weight[k], count[k]))
                .sum::<f64>()
    }
}

/// A component with parts reordered or options removed, plus the way back to
/// the slots of the component it came from.
#[derive(Debug, Clone)]
pub(crate) struct Restriction {
    pub comp: Component,
    /// Source branch position of every new branch position.
    pub positions: Vec<usize>,
    /// Source slot of every kept option.
    pub slots: Vec<Vec<usize>>,
    /// Source (position, slot) of parts left with a single option.
    pub fixed: Vec<(usize, usize)>,
}

impl Restriction {
    /// Maps a choice on the restricted component to the source component.
    pub fn lift(&self, choice: &[usize], source_len: usize) -> Vec<usize> {
        let mut out = vec![0; source_len];
        for &(pos, slot) in &self.fixed {
            out[pos] = slot;
        }
        for (new_pos, &slot) in choice.iter().enumerate() {
            out[self.positions[new_pos]] = self.slots[new_pos][slot];
        }
        out
    }
}

impl Component {
    /// Rebuilds the component with branch parts in `order` and only the
    /// options accepted by `keep(position, slot)`. Parts left with one option
    /// move into the base load. Every part must keep at least one option.
    pub fn restrict(&self, order: &[usize], keep: &dyn Fn(usize, usize) -> bool) -> Restriction {
        let mut comp = Component {
            forging_ids: self.forging_ids.clone(),
            forgings: self.forgings.clone(),
            base_weight: self.base_weight.clone(),
            base_count: self.base_count.clone(),
            base_lin: self.base_lin,
            parts: Vec::new(),
            options: Vec::new(),
            users: vec![Vec::new(); self.forgings.len()],
            baseline: Vec::new(),
        };
        let mut positions = Vec::new();
        let mut slots = Vec::new();
        let mut fixed = Vec::new();
        for &pos in order {
            let kept: Vec<usize> = (0..self.options[pos].len())
                .filter(|&s| keep(pos, s))
                .collect();
            assert!(
                !kept.is_empty(),
                "restriction removed every option of a part"
            );
            if let [only] = kept[..] {
                let o = &self.options[pos][only];
                comp.base_lin += o.lin;
                comp.base_weight[o.forging] += o.weight;
                comp.base_count[o.forging] += 1;
                fixed.push((pos, only));
                continue;
            }
            let new_pos = comp.parts.len();
            for (slot, &s) in kept.iter().enumerate() {
                comp.users[self.options[pos][s].forging].push((new_pos, slot));
            }
            comp.parts.push(self.parts[pos]);
            comp.options
                .push(kept.iter().map(|&s| self.options[pos][s].clone()).collect());
            comp.baseline.push(
                kept.iter()
                    .position(|&s| s == self.baseline[pos])
                    .unwrap_or(0),
            );
            positions.push(pos);
            slots.push(kept);
        }
        Restriction {
            comp,
            positions,
            slots,
            fixed,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    /// Sum of part fixed ordering costs.
    pub constant: f64,
    pub components: Vec<Component>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl Compiled {
    pub fn new(instance: &Instance, seed: u64) -> Result<Self, Error> {
        let scale = instance.scale();
        let inv_scale = 1.0 / scale as f64;
        let n = instance.forgings().len();

        let global_forgings: Vec<ForgingData> = instance
            .forgings()
            .iter()
            .map(|f| {
                Ok(ForgingData {
                    fixed: f.fixed_order_cost,
                    thresholds: f
                        .discounts
                        .scaled_thresholds(scale)
                        .ok_or(Error::QuantityOverflow)?,
                    factor: f
                        .discounts
                        .levels()
                        .iter()
                        .map(|l| f.unit_price() * (1.0 - l.discount))
                        .collect(),
                    inv_scale,
                })
            })
            .collect::<Result<_, Error>>()?;

        // Global option data, forging index still global.
        let mut part_options: Vec<Vec<OptionData>> = Vec::with_capacity(instance.parts().len());
        for (i, p) in instance.parts().iter().enumerate() {
            if p.options.is_empty() {
                return Err(Error::NoOptions(p.id));
            }
            let order_factor = (1.0 - p.precomputed_discount()) * p.order_quantity as f64;
            let mut opts = Vec::with_capacity(p.options.len());
            for (j, o) in p.options.iter().enumerate() {
                let k = instance.forging_position(o.forging).expect("validated");
                let (m, inv) = instance.scaled_quantities(i, j)?;
                let holding = instance.forgings()[k].unit_holding_cost;
                opts.push(OptionData {
                    forging: k,
                    option: j,
                    lin: order_factor * o.unit_cost() + holding * inv as f64 * inv_scale,
                    weight: m + inv,
                    qty: (m + inv) as f64 * inv_scale,
                });
            }
            part_options.push(opts);
        }

        let mut uf = UnionFind((0..n).collect());
        let mut used = vec![false; n];
        for opts in &part_options {
            for o in opts {
                used[o.forging] = true;
                uf.union(opts[0].forging, o.forging);
            }
        }

        // Components keyed by their root, ordered by smallest forging position.
        let mut root_to_comp = vec![usize::MAX; n];
        let mut components: Vec<Component> = Vec::new();
        let mut local = vec![usize::MAX; n];
        for k in 0..n {
            if !used[k] {
                continue;
            }
            let r = uf.find(k);
            if root_to_comp[r] == usize::MAX {
                root_to_comp[r] = components.len();
                components.push(Component {
                    forging_ids: Vec::new(),
                    forgings: Vec::new(),
                    base_weight: Vec::new(),
                    base_count: Vec::new(),
                    base_lin: 0.0,
                    parts: Vec::new(),
                    options: Vec::new(),
                    users: Vec::new(),
                    baseline: Vec::new(),
                });
            }
            let c = &mut components[root_to_comp[r]];
            local[k] = c.forging_ids.len();
            c.forging_ids.push(k);
            c.forgings.push(global_forgings[k].clone());
            c.base_weight.push(0);
            c.base_count.push(0);
            c.users.push(Vec::new());
        }

        let mut branching: Vec<Vec<(f64, u64, usize)>> = vec![Vec::new(); components.len()];
        for (i, opts) in part_options.iter().enumerate() {
            let c = root_to_comp[uf.find(opts[0].forging)];
            if opts.len() == 1 {
                let o = &opts[0];
                let comp = &mut components[c];
                comp.base_lin += o.lin;
                comp.base_weight[local[o.forging]] += o.weight;
                comp.base_count[local[o.forging]] += 1;
            } else {
                let est = |o: &OptionData| o.lin + global_forgings[o.forging].factor[0] * o.qty;
                let lo = opts.iter().map(est).fold(f64::INFINITY, f64::min);
                let hi = opts.iter().map(est).fold(f64::NEG_INFINITY, f64::max);
                branching[c].push((hi - lo, mix(seed ^ mix(i as u64)), i));
            }
        }

        for (c, mut order) in branching.into_iter().enumerate() {
            // largest regret first
            order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let comp = &mut components[c];
            for (pos, &(_, _, i)) in order.iter().enumerate() {
                let opts: Vec<OptionData> = part_options[i]
                    .iter()
                    .map(|o| OptionData {
                        forging: local[o.forging],
                        ..o.clone()
                    })
                    .collect();
                for (slot, o) in opts.iter().enumerate() {
                    comp.users[o.forging].push((pos, slot));
                }
                let p = &instance.parts()[i];
                comp.baseline.push(crate::cost::cheapest_option(p));
                comp.parts.push(i);
                comp.options.push(opts);
            }
        }

        Ok(Self {
            constant: instance.parts().iter().map(|p| p.fixed_order_cost).sum(),
            components,
        })
    }
}
