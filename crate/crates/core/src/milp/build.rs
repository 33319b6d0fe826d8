use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{linearize_product_of_binaries, LinearModel, RowSense, VarId};
use crate::error::Error;
use crate::instance::{ForgingId, Instance, PartId, Solution};

/// Margin turning the strict lower end of a discount interval into `>=`.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Where each family of model variables lives.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableMap {
    /// Forging selected.
    pub z: BTreeMap<ForgingId, VarId>,
    /// Per-unit machining cost of the option chosen for a part.
    pub v: BTreeMap<PartId, VarId>,
    /// Part machined from forging; one per machining option.
    pub x: BTreeMap<(PartId, ForgingId), VarId>,
    /// Forging bought at discount level `d`.
    pub u: BTreeMap<(ForgingId, usize), VarId>,
    /// `z_k * x_ik * u_dk`.
    pub y: BTreeMap<(PartId, ForgingId, usize), VarId>,
    /// `x_ik * u_dk`.
    pub w: BTreeMap<(PartId, ForgingId, usize), VarId>,
    pub big_m: f64,
    pub epsilon: f64,
}

/// Builds the linearized consolidation MILP.
///
/// Objective (constant part `sum_i CMF_i` kept in the offset):
///
/// ```text
/// sum_i (1 - D_i) M_i v_i + sum_ik CFH_k L_ik P_i x_ik
///   + sum_k [ CFF_k z_k + sum_d (CFU_k + CFT_k)(1 - D_kd) sum_i L_ik (M_i + P_i) y_ikd ]
/// ```
///
/// The lower end of each discount interval is written as
/// `u_dk (Q_d + E) <= q_k + (1 - u_dk) B_k` with `B_k` the largest quantity
/// forging `k` could ever carry, so the row is inert when `u_dk = 0` and a
/// closed forging can sit at level 0 with `q_k = 0`.
pub fn build_model(instance: &Instance) -> Result<(LinearModel, VariableMap), Error> {
    let epsilon = DEFAULT_EPSILON;
    let big_m = 1.0
        + instance
            .parts()
            .iter()
            .flat_map(|p| p.options.iter().map(|o| o.unit_cost()))
            .fold(0.0, f64::max);

    let mut model = LinearModel::new();
    let mut map = VariableMap {
        z: BTreeMap::new(),
        v: BTreeMap::new(),
        x: BTreeMap::new(),
        u: BTreeMap::new(),
        y: BTreeMap::new(),
        w: BTreeMap::new(),
        big_m,
        epsilon,
    };
    let mut objective: Vec<(VarId, f64)> = Vec::new();

    for f in instance.forgings() {
        let z = model.add_binary(format!("z_{}", f.id.0))?;
        objective.push((z, f.fixed_order_cost));
        map.z.insert(f.id, z);
    }
    for p in instance.parts() {
        if p.options.is_empty() {
            return Err(Error::NoOptions(p.id));
        }
        let widest = p.options.iter().map(|o| o.unit_cost()).fold(0.0, f64::max);
        let v = model.add_continuous(format!("v_{}", p.id.0), 0.0, widest.max(epsilon))?;
        objective.push((
            v,
            (1.0 - p.precomputed_discount()) * p.order_quantity as f64,
        ));
        map.v.insert(p.id, v);
    }

    let scale = instance.scale() as f64;
    // (part, forging) -> pooled forging quantity L_ik (M_i + P_i)
    let mut pooled = BTreeMap::<(PartId, ForgingId), f64>::new();
    for (i, p) in instance.parts().iter().enumerate() {
        for (j, o) in p.options.iter().enumerate() {
            let x = model.add_binary(format!("x_{}_{}", p.id.0, o.forging.0))?;
            map.x.insert((p.id, o.forging), x);
            let (m, inv) = instance.scaled_quantities(i, j)?;
            pooled.insert((p.id, o.forging), (m + inv) as f64 / scale);
            let holding = instance
                .forging(o.forging)
                .expect("validated")
                .unit_holding_cost;
            objective.push((x, holding * inv as f64 / scale));
        }
    }
    for f in instance.forgings() {
        for d in 0..f.discounts.len() {
            let u = model.add_binary(format!("u_{}_{}", d, f.id.0))?;
            map.u.insert((f.id, d), u);
        }
    }

    // Users of each forging, in part order.
    let mut users = BTreeMap::<ForgingId, Vec<PartId>>::new();
    for p in instance.parts() {
        for o in &p.options {
            users.entry(o.forging).or_default().push(p.id);
        }
    }

    for f in instance.forgings() {
        let z = map.z[&f.id];
        for &pid in users.get(&f.id).map(Vec::as_slice).unwrap_or(&[]) {
            let x = map.x[&(pid, f.id)];
            for d in 0..f.discounts.len() {
                let u = map.u[&(f.id, d)];
                let tag = format!("{}_{}_{}", pid.0, f.id.0, d);
                let y = linearize_product_of_binaries(&mut model, &format!("y_{tag}"), &[z, x, u])?;
                let w = linearize_product_of_binaries(&mut model, &format!("w_{tag}"), &[x, u])?;
                map.y.insert((pid, f.id, d), y);
                map.w.insert((pid, f.id, d), w);
                let price = f.unit_price() * (1.0 - f.discounts.discount(d));
                objective.push((y, price * pooled[&(pid, f.id)]));
            }
        }
    }

    for p in instance.parts() {
        let v = map.v[&p.id];
        model.add_constraint(
            format!("exists_{}", p.id.0),
            [(v, 1.0)],
            RowSense::Ge,
            epsilon,
        )?;
        for o in &p.options {
            let x = map.x[&(p.id, o.forging)];
            let z = map.z[&o.forging];
            model.add_constraint(
                format!("mincost_{}_{}", p.id.0, o.forging.0),
                [(v, 1.0), (x, -(o.unit_cost() + big_m))],
                RowSense::Ge,
                -big_m,
            )?;
            model.add_constraint(
                format!("open_{}_{}", p.id.0, o.forging.0),
                [(x, 1.0), (z, -1.0)],
                RowSense::Le,
                0.0,
            )?;
        }
        model.add_constraint(
            format!("assign_{}", p.id.0),
            p.options.iter().map(|o| (map.x[&(p.id, o.forging)], 1.0)),
            RowSense::Eq,
            1.0,
        )?;
    }

    for f in instance.forgings() {
        let levels = f.discounts.levels();
        let fusers = users.get(&f.id).map(Vec::as_slice).unwrap_or(&[]);
        let bound: f64 = fusers.iter().map(|&pid| pooled[&(pid, f.id)]).sum();
        model.add_constraint(
            format!("level_{}", f.id.0),
            (0..levels.len()).map(|d| (map.u[&(f.id, d)], 1.0)),
            RowSense::Eq,
            1.0,
        )?;
        for d in 0..levels.len() {
            if d + 1 < levels.len() {
                let upper = to_f64(levels[d + 1].threshold);
                model.add_constraint(
                    format!("qmax_{}_{}", f.id.0, d),
                    fusers
                        .iter()
                        .map(|&pid| (map.w[&(pid, f.id, d)], pooled[&(pid, f.id)])),
                    RowSense::Le,
                    upper,
                )?;
            }
            if d > 0 {
                let lower = to_f64(levels[d].threshold);
                let mut terms = vec![(map.u[&(f.id, d)], lower + epsilon + bound)];
                terms.extend(
                    fusers
                        .iter()
                        .map(|&pid| (map.x[&(pid, f.id)], -pooled[&(pid, f.id)])),
                );
                model.add_constraint(
                    format!("qmin_{}_{}", f.id.0, d),
                    terms,
                    RowSense::Le,
                    bound,
                )?;
            }
        }
    }

    let offset = instance.parts().iter().map(|p| p.fixed_order_cost).sum();
    model.set_objective(objective, offset)?;
    Ok((model, map))
}

fn to_f64(q: crate::instance::Quantity) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl VariableMap {
    /// Variable values representing `solution`. Unselected forgings sit at
    /// discount level 0.
    pub fn point_from_solution(
        &self,
        model: &LinearModel,
        instance: &Instance,
        solution: &Solution,
    ) -> Result<Vec<f64>, Error> {
        let mut values = vec![0.0; model.variables().len()];
        for (k, &z) in &self.z {
            let on = solution.selected.contains(k);
            values[z.0] = on as u8 as f64;
            let level = if on {
                *solution.discount_level.get(k).unwrap_or(&0)
            } else {
                0
            };
            values[self.u[&(*k, level)].0] = 1.0;
        }
        for p in instance.parts() {
            let k = *solution
                .assignment
                .get(&p.id)
                .ok_or(Error::UncoveredPart(p.id))?;
            let o = p.option_for(k).ok_or(Error::NotAnOption(p.id, k))?;
            values[self.v[&p.id].0] = o.unit_cost().max(self.epsilon);
            values[self.x[&(p.id, k)].0] = 1.0;
        }
        for (&(i, k, d), &y) in &self.y {
            let x = values[self.x[&(i, k)].0];
            let u = values[self.u[&(k, d)].0];
            values[y.0] = values[self.z[&k].0] * x * u;
            values[self.w[&(i, k, d)].0] = x * u;
        }
        Ok(values)
    }

    /// Reads an assignment off an integer point. Forgings with `z_k = 1` but
    /// no parts are dropped from the selected set.
    pub fn solution_from_point(
        &self,
        instance: &Instance,
        values: &[f64],
    ) -> Result<Solution, Error> {
        let mut assignment = BTreeMap::new();
        for p in instance.parts() {
            let chosen: Vec<ForgingId> = p
                .options
                .iter()
                .filter(|o| values[self.x[&(p.id, o.forging)].0] > 0.5)
                .map(|o| o.forging)
                .collect();
            match chosen.as_slice() {
                [k] => {
                    assignment.insert(p.id, *k);
                }
                _ => return Err(Error::UncoveredPart(p.id)),
            }
        }
        Solution::from_assignment(instance, assignment)
    }
}
