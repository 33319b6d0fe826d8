//! Admissible lower bounds for partially committed assignments.
//!
//! Two bounds are used. The combinatorial one is cheap: every part pays its
//! cheapest option at the deepest discount, and only forgings already opened
//! by committed parts pay their fixed cost. The Lagrangian one relaxes the
//! "exactly one option per part" rows with multipliers `lambda`; what remains
//! splits per forging into "pick a subset of candidate parts", solved exactly
//! over the discount level and with a fractional knapsack for the quantity
//! needed to reach that level. Any `lambda` yields a valid bound; subgradient
//! steps push it up.

use alloc::vec;
use alloc::vec::Vec;

use super::compiled::Component;

/// Commitments along the current search path.
#[derive(Debug, Clone)]
pub(crate) struct NodeState {
    /// Branch parts `0..depth` are committed.
    pub depth: usize,
    pub weight: Vec<u128>,
    pub count: Vec<u32>,
    /// Base cost plus `lin` of every committed option.
    pub lin: f64,
}

impl NodeState {
    pub fn root(comp: &Component) -> Self {
        Self {
            depth: 0,
            weight: comp.base_weight.clone(),
            count: comp.base_count.clone(),
            lin: comp.base_lin,
        }
    }

    pub fn push(&mut self, comp: &Component, slot: usize) {
        let o = &comp.options[self.depth][slot];
        self.weight[o.forging] += o.weight;
        self.count[o.forging] += 1;
        self.lin += o.lin;
        self.depth += 1;
    }

    pub fn pop(&mut self, comp: &Component, slot: usize) {
        self.depth -= 1;
        let o = &comp.options[self.depth][slot];
        self.weight[o.forging] -= o.weight;
        self.count[o.forging] -= 1;
        self.lin -= o.lin;
    }
}

pub(crate) fn combinatorial_bound(comp: &Component, state: &NodeState) -> f64 {
    let mut lb = state.lin;
    for (k, f) in comp.forgings.iter().enumerate() {
        if state.count[k] > 0 {
            lb += f.fixed + f.min_factor() * state.weight[k] as f64 * f.inv_scale;
        }
    }
    for opts in &comp.options[state.depth..] {
        lb += opts
            .iter()
            .map(|o| o.lin + comp.forgings[o.forging].min_factor() * o.qty)
            .fold(f64::INFINITY, f64::min);
    }
    lb
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SubgradientParams {
    pub max_iter: usize,
    pub theta: f64,
    pub stall_limit: usize,
}

pub(crate) const ROOT_PARAMS: SubgradientParams = SubgradientParams {
    max_iter: 600,
    theta: 2.0,
    stall_limit: 25,
};

pub(crate) const NODE_PARAMS: SubgradientParams = SubgradientParams {
    max_iter: 40,
    theta: 0.5,
    stall_limit: 6,
};

struct Item {
    ratio: f64,
    reduced: f64,
    weight: u128,
    pos: usize,
}

pub(crate) struct Lagrangian {
    items: Vec<Item>,
    coverage: Vec<f64>,
    grad: Vec<f64>,
    best: Vec<f64>,
}

impl Lagrangian {
    pub fn new(comp: &Component) -> Self {
        let n = comp.branch_len();
        Self {
            items: Vec::new(),
            coverage: vec![0.0; n],
            grad: vec![0.0; n],
            best: vec![0.0; n],
        }
    }

    /// Starting multipliers: each part's cheapest option priced at the first
    /// discount level, without any fixed cost.
    pub fn initial_multipliers(comp: &Component) -> Vec<f64> {
        comp.options
            .iter()
            .map(|opts| {
                opts.iter()
                    .map(|o| o.lin + comp.forgings[o.forging].factor[0] * o.qty)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Value of subset problem `k` restricted to discount level `d`, or `None`
    /// if the uncommitted candidates cannot reach the level. When `record` is
    /// set, chosen fractions are added to `coverage`.
    fn level_value(
        &mut self,
        comp: &Component,
        state: &NodeState,
        lambda: &[f64],
        k: usize,
        d: usize,
        record: bool,
    ) -> Option<f64> {
        let f = &comp.forgings[k];
        let need = if d == 0 { 0 } else { f.thresholds[d] + 1 };
        let factor = f.factor[d];
        let mut covered = state.weight[k];
        let mut value = f.fixed + factor * covered as f64 * f.inv_scale;
        self.items.clear();
        let users = &comp.users[k];
        let start = users.partition_point(|&(pos, _)| pos < state.depth);
        for &(pos, slot) in &users[start..] {
            let o = &comp.options[pos][slot];
            let reduced = factor * o.qty + o.lin - lambda[pos];
            if reduced < 0.0 {
                value += reduced;
                covered += o.weight;
                if record {
                    self.coverage[pos] += 1.0;
                }
            } else if o.weight > 0 && covered < need {
                self.items.push(Item {
                    ratio: reduced / o.weight as f64,
                    reduced,
                    weight: o.weight,
                    pos,
                });
            }
        }
        if covered >= need {
            return Some(value);
        }
        let mut deficit = need - covered;
        self.items.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
        for item in &self.items {
            if item.weight >= deficit {
                let frac = deficit as f64 / item.weight as f64;
                value += frac * item.reduced;
                if record {
                    self.coverage[item.pos] += frac;
                }
                return Some(value);
            }
            value += item.reduced;
            deficit -= item.weight;
            if record {
                self.coverage[item.pos] += 1.0;
            }
        }
        None
    }

    /// Lagrangian bound for `lambda`; fills `coverage` with the subgradient
    /// ingredients and `open` (if given) with the forgings the relaxation uses.
    pub fn evaluate(
        &mut self,
        comp: &Component,
        state: &NodeState,
        lambda: &[f64],
        mut open: Option<&mut [bool]>,
    ) -> f64 {
        for c in &mut self.coverage[state.depth..] {
            *c = 0.0;
        }
        let mut total = state.lin + lambda[state.depth..].iter().sum::<f64>();
        for k in 0..comp.forgings.len() {
            let committed = state.count[k] > 0;
            let mut best = if committed { f64::INFINITY } else { 0.0 };
            let mut best_level = None;
            for d in 0..comp.forgings[k].factor.len() {
                if let Some(v) = self.level_value(comp, state, lambda, k, d, false) {
                    if v < best {
                        best = v;
                        best_level = Some(d);
                    }
                }
            }
            if let Some(d) = best_level {
                self.level_value(comp, state, lambda, k, d, true);
            }
            if let Some(open) = open.as_deref_mut() {
                open[k] = committed || best_level.is_some();
            }
            total += best;
        }
        total
    }

    /// Subgradient ascent from `lambda`; on return `lambda` holds the best
    /// multipliers found and the best bound is returned.
    pub fn optimize(
        &mut self,
        comp: &Component,
        state: &NodeState,
        lambda: &mut [f64],
        upper: f64,
        prune_at: f64,
        params: SubgradientParams,
    ) -> f64 {
        let depth = state.depth;
        let mut best_lb = f64::NEG_INFINITY;
        let mut theta = params.theta;
        let mut stall = 0;
        for _ in 0..params.max_iter {
            let lb = self.evaluate(comp, state, lambda, None);
            if lb > best_lb {
                if lb > best_lb + 1e-9 * best_lb.abs().max(1.0) {
                    stall = 0;
                } else {
                    stall += 1;
                }
                best_lb = lb;
                self.best[depth..].copy_from_slice(&lambda[depth..]);
            } else {
                stall += 1;
            }
            if best_lb >= prune_at {
                break;
            }
            if stall >= params.stall_limit {
                theta *= 0.5;
                stall = 0;
                if theta < 1e-3 {
                    break;
                }
            }
            let mut norm2 = 0.0;
            for pos in depth..lambda.len() {
                let g = 1.0 - self.coverage[pos];
                self.grad[pos] = g;
                norm2 += g * g;
            }
            if norm2 < 1e-12 {
                break;
            }
            let step = theta * (upper - lb).max(1e-6 * upper.abs().max(1.0)) / norm2;
            for (l, g) in lambda[depth..].iter_mut().zip(&self.grad[depth..]) {
                *l += step * g;
            }
        }
        lambda[depth..].copy_from_slice(&self.best[depth..]);
        best_lb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instgen::{below, entity_rng, generate, GenSpec};
    use crate::solver::compiled::Compiled;

    fn spec(seed: u64) -> GenSpec {
        let mut s = GenSpec::new(7, 4, seed);
        s.options_per_part = 3;
        s.order_range = 20..=220;
        s.discount_levels = vec![(0, 0.0), (60, 0.1), (150, 0.25), (300, 0.3)];
        s
    }

    /// Minimum cost over every completion of `prefix`.
    fn best_completion(comp: &Component, prefix: &mut Vec<usize>) -> f64 {
        if prefix.len() == comp.branch_len() {
            return comp.cost(prefix);
        }
        let mut best = f64::INFINITY;
        for j in 0..comp.options[prefix.len()].len() {
            prefix.push(j);
            best = best.min(best_completion(comp, prefix));
            prefix.pop();
        }
        best
    }

    #[test]
    fn bounds_never_exceed_the_subproblem_optimum() {
        let mut checked = 0;
        for seed in 0..40 {
            let inst = generate(&spec(seed)).unwrap();
            let compiled = Compiled::new(&inst, seed).unwrap();
            let mut rng = entity_rng(seed, 99, 0);
            for comp in &compiled.components {
                let n = comp.branch_len();
                let mut lag = Lagrangian::new(comp);
                for _ in 0..6 {
                    let depth = below(&mut rng, n as u64 + 1) as usize;
                    let mut state = NodeState::root(comp);
                    let mut prefix = Vec::new();
                    for pos in 0..depth {
                        let j = below(&mut rng, comp.options[pos].len() as u64) as usize;
                        state.push(comp, j);
                        prefix.push(j);
                    }
                    let opt = best_completion(comp, &mut prefix);
                    let tol = 1e-9 * opt.abs().max(1.0);

                    assert!(combinatorial_bound(comp, &state) <= opt + tol);

                    let mut lambda = Lagrangian::initial_multipliers(comp);
                    let lb =
                        lag.optimize(comp, &state, &mut lambda, opt, f64::INFINITY, ROOT_PARAMS);
                    assert!(
                        lb <= opt + tol,
                        "seed {seed}: lagrangian {lb} > optimum {opt}"
                    );

                    // any multipliers give a valid bound, even arbitrary ones
                    let noisy: Vec<f64> = lambda
                        .iter()
                        .map(|l| l + below(&mut rng, 2001) as f64 - 1000.0)
                        .collect();
                    assert!(lag.evaluate(comp, &state, &noisy, None) <= opt + tol);
                    checked += 1;
                }
            }
        }
        assert!(checked >= 40);
    }

    #[test]
    fn push_then_pop_restores_the_state() {
        let inst = generate(&spec(3)).unwrap();
        let compiled = Compiled::new(&inst, 0).unwrap();
        let comp = &compiled.components[0];
        let root = NodeState::root(comp);
        let mut s = root.clone();
        s.push(comp, 0);
        s.push(comp, comp.options[1].len() - 1);
        s.pop(comp, comp.options[1].len() - 1);
        s.pop(comp, 0);
        assert_eq!(s.depth, 0);
        assert_eq!(s.weight, root.weight);
        assert_eq!(s.count, root.count);
        assert!((s.lin - root.lin).abs() < 1e-9);
    }
}
