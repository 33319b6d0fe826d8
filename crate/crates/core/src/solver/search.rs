//! Depth-first branch-and-bound over per-part option choices.

use alloc::vec;
use alloc::vec::Vec;

use super::bound::{combinatorial_bound, Lagrangian, NodeState, NODE_PARAMS, ROOT_PARAMS};
use super::compiled::{Component, Restriction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Finish {
    Complete,
    Gap,
    Time,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    /// Option slot per branch part.
    pub choice: Vec<usize>,
    pub upper: f64,
    pub lower: f64,
    pub nodes: u64,
    pub finish: Finish,
}

struct Entry {
    depth: usize,
    slot: usize,
    lower: f64,
    lambda: Vec<f64>,
}

const IMPROVE_EPS: f64 = 1e-9;

fn prune_tolerance(upper: f64) -> f64 {
    1e-9 * upper.abs().max(1.0)
}

/// Solves one component. `stop` is polled periodically; when it returns
/// true the search ends with the best solution found so far.
pub(crate) fn solve_component(
    comp: &Component,
    target_gap: f64,
    stop: &dyn Fn() -> bool,
) -> Outcome {
    let n = comp.branch_len();
    let mut best = comp.baseline.clone();
    let mut upper = local_search(comp, &mut best);

    if n == 0 {
        return Outcome {
            choice: best,
            upper,
            lower: upper,
            nodes: 1,
            finish: Finish::Complete,
        };
    }

    let mut lag = Lagrangian::new(comp);
    let state = NodeState::root(comp);
    let mut lambda = Lagrangian::initial_multipliers(comp);
    let mut root_lower = combinatorial_bound(comp, &state);
    let lag_lower = lag.optimize(
        comp,
        &state,
        &mut lambda,
        upper,
        upper - prune_tolerance(upper),
        ROOT_PARAMS,
    );
    root_lower = root_lower.max(lag_lower);

    // Lagrangian heuristic: keep the forgings the relaxation opens.
    let mut open = vec![false; comp.forgings.len()];
    lag.evaluate(comp, &state, &lambda, Some(&mut open));
    let mut guided: Vec<usize> = comp
        .options
        .iter()
        .map(|opts| {
            let price = |j: &usize| {
                let o = &opts[*j];
                o.lin + comp.forgings[o.forging].factor[0] * o.qty
            };
            (0..opts.len())
                .filter(|&j| open[opts[j].forging])
                .min_by(|a, b| price(a).total_cmp(&price(b)))
                .or_else(|| (0..opts.len()).min_by(|a, b| price(a).total_cmp(&price(b))))
                .expect("part has options")
        })
        .collect();
    let guided_cost = local_search(comp, &mut guided);
    if guided_cost < upper - IMPROVE_EPS {
        upper = guided_cost;
        best = guided;
    }

    let mut nodes: u64 = 1;
    let closed = |lower: f64, upper: f64| lower >= upper - prune_tolerance(upper);
    let within_gap =
        |lower: f64, upper: f64| target_gap > 0.0 && upper - lower <= target_gap * upper.abs();
    let finish_at = |lower: f64, upper: f64| {
        if closed(lower, upper) {
            Finish::Complete
        } else {
            Finish::Gap
        }
    };
    if closed(root_lower, upper) || within_gap(root_lower, upper) {
        return Outcome {
            choice: best,
            upper,
            lower: root_lower.min(upper),
            nodes,
            finish: finish_at(root_lower, upper),
        };
    }

    // Probe every option at the root and search only what survives.
    let mut current = comp.restrict(&(0..n).collect::<Vec<_>>(), &|_, _| true);
    for _ in 0..PROBE_ROUNDS {
        if stop() {
            break;
        }
        let sub = &current.comp;
        let sub_lambda: Vec<f64> = current.positions.iter().map(|&p| lambda[p]).collect();
        let Some((keep, interrupted)) = probe(sub, &sub_lambda, upper, stop, &mut nodes) else {
            // every option of some part is dominated: the incumbent is optimal
            return Outcome {
                choice: best,
                upper,
                lower: upper,
                nodes,
                finish: Finish::Complete,
            };
        };
        if keep.iter().all(|k| k.iter().all(|&b| b)) {
            break;
        }
        let next = sub.restrict(&(0..sub.branch_len()).collect::<Vec<_>>(), &|p, s| {
            keep[p][s]
        });
        current = chain(&current, next);
        if interrupted {
            break;
        }
        let sub = &current.comp;
        if sub.branch_len() == 0 {
            let choice = current.lift(&[], n);
            let cost = comp.cost(&choice);
            if cost < upper - IMPROVE_EPS {
                upper = cost;
                best = choice;
            }
            return Outcome {
                choice: best,
                upper,
                lower: upper,
                nodes,
                finish: Finish::Complete,
            };
        }
        let mut sub_lambda: Vec<f64> = current.positions.iter().map(|&p| lambda[p]).collect();
        let mut sub_lag = Lagrangian::new(sub);
        let sub_state = NodeState::root(sub);
        let lb = sub_lag.optimize(
            sub,
            &sub_state,
            &mut sub_lambda,
            upper,
            upper - prune_tolerance(upper),
            ROOT_PARAMS,
        );
        root_lower = root_lower.max(lb.min(upper));
        for (new_pos, &p) in current.positions.iter().enumerate() {
            lambda[p] = sub_lambda[new_pos];
        }
        if closed(root_lower, upper) || within_gap(root_lower, upper) {
            return Outcome {
                choice: best,
                upper,
                lower: root_lower.min(upper),
                nodes,
                finish: finish_at(root_lower, upper),
            };
        }
    }

    let sub = &current.comp;
    let sub_lambda: Vec<f64> = current.positions.iter().map(|&p| lambda[p]).collect();
    let found = branch(
        sub,
        &sub_lambda,
        root_lower,
        &mut upper,
        target_gap,
        stop,
        &mut nodes,
    );
    if let Some(choice) = found.choice {
        best = current.lift(&choice, n);
    }
    Outcome {
        choice: best,
        upper,
        lower: found.lower.max(root_lower.min(upper)),
        nodes,
        finish: found.finish,
    }
}

const PROBE_ROUNDS: usize = 4;

/// Composes two restrictions: `next` was built on `first.comp`.
fn chain(first: &Restriction, next: Restriction) -> Restriction {
    let mut fixed = first.fixed.clone();
    for &(p, s) in &next.fixed {
        fixed.push((first.positions[p], first.slots[p][s]));
    }
    Restriction {
        positions: next.positions.iter().map(|&p| first.positions[p]).collect(),
        slots: next
            .positions
            .iter()
            .zip(&next.slots)
            .map(|(&p, kept)| kept.iter().map(|&s| first.slots[p][s]).collect())
            .collect(),
        fixed,
        comp: next.comp,
    }
}

/// For every option, bounds the subproblem with the option forced. Options
/// whose bound reaches the incumbent are marked for removal; `None` means
/// some part lost all of its options. Stops early (flag set) when `stop`
/// fires; the marks made so far remain valid.
fn probe(
    comp: &Component,
    lambda: &[f64],
    upper: f64,
    stop: &dyn Fn() -> bool,
    nodes: &mut u64,
) -> Option<(Vec<Vec<bool>>, bool)> {
    let n = comp.branch_len();
    let prune_at = upper - prune_tolerance(upper);
    let mut keep: Vec<Vec<bool>> = comp.options.iter().map(|o| vec![true; o.len()]).collect();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for p in 0..n {
        if p % 8 == 7 && stop() {
            return Some((keep, true));
        }
        order.clear();
        order.push(p);
        order.extend((0..n).filter(|&q| q != p));
        let r = comp.restrict(&order, &|_, _| true);
        let sub = &r.comp;
        let base: Vec<f64> = r.positions.iter().map(|&q| lambda[q]).collect();
        let mut lag = Lagrangian::new(sub);
        let mut state = NodeState::root(sub);
        for slot in 0..sub.options[0].len() {
            *nodes += 1;
            state.push(sub, slot);
            let mut lower = combinatorial_bound(sub, &state);
            if lower < prune_at {
                let mut lam = base.clone();
                lower =
                    lower.max(lag.optimize(sub, &state, &mut lam, upper, prune_at, NODE_PARAMS));
            }
            if lower >= prune_at {
                keep[p][r.slots[0][slot]] = false;
            }
            state.pop(sub, slot);
        }
        if keep[p].iter().all(|&b| !b) {
            return None;
        }
    }
    Some((keep, false))
}

struct Branched {
    choice: Option<Vec<usize>>,
    lower: f64,
    finish: Finish,
}

/// Depth-first search for a choice strictly cheaper than `upper`.
fn branch(
    comp: &Component,
    lambda: &[f64],
    root_lower: f64,
    upper: &mut f64,
    target_gap: f64,
    stop: &dyn Fn() -> bool,
    nodes: &mut u64,
) -> Branched {
    let n = comp.branch_len();
    let mut lag = Lagrangian::new(comp);
    let mut state = NodeState::root(comp);
    let mut best: Vec<usize> = Vec::new();
    let mut path: Vec<usize> = Vec::with_capacity(n);
    let mut stack: Vec<Entry> = Vec::new();
    let mut children: Vec<Entry> = Vec::new();
    let found = |best: &Vec<usize>| (!best.is_empty()).then(|| best.clone());

    expand(
        comp,
        &mut lag,
        &mut state,
        &mut path,
        lambda,
        root_lower,
        upper,
        &mut best,
        &mut children,
    );
    push_children(&mut stack, &mut children);

    while let Some(entry) = stack.pop() {
        if entry.lower >= *upper - prune_tolerance(*upper) {
            continue;
        }
        *nodes += 1;
        if nodes.is_multiple_of(32) {
            let global = stack
                .iter()
                .map(|e| e.lower)
                .fold(entry.lower, f64::min)
                .min(*upper);
            if stop() {
                return Branched {
                    choice: found(&best),
                    lower: global,
                    finish: Finish::Time,
                };
            }
            if target_gap > 0.0 && *upper - global <= target_gap * upper.abs() {
                return Branched {
                    choice: found(&best),
                    lower: global,
                    finish: Finish::Gap,
                };
            }
        }
        while state.depth >= entry.depth {
            let slot = path.pop().expect("path matches depth");
            state.pop(comp, slot);
        }
        state.push(comp, entry.slot);
        path.push(entry.slot);
        expand(
            comp,
            &mut lag,
            &mut state,
            &mut path,
            &entry.lambda,
            entry.lower,
            upper,
            &mut best,
            &mut children,
        );
        push_children(&mut stack, &mut children);
    }

    Branched {
        choice: found(&best),
        lower: *upper - prune_tolerance(*upper),
        finish: Finish::Complete,
    }
}

fn push_children(stack: &mut Vec<Entry>, children: &mut Vec<Entry>) {
    // smallest bound popped first
    children.sort_by(|a, b| b.lower.total_cmp(&a.lower).then(b.slot.cmp(&a.slot)));
    stack.append(children);
}

#[allow(clippy::too_many_arguments)]
fn expand(
    comp: &Component,
    lag: &mut Lagrangian,
    state: &mut NodeState,
    path: &mut [usize],
    lambda: &[f64],
    parent_lower: f64,
    upper: &mut f64,
    best: &mut Vec<usize>,
    children: &mut Vec<Entry>,
) {
    let n = comp.branch_len();
    let depth = state.depth;
    for slot in 0..comp.options[depth].len() {
        state.push(comp, slot);
        if state.depth == n {
            let cost = leaf_cost(comp, state);
            if cost < *upper - IMPROVE_EPS {
                *upper = cost;
                best.clear();
                best.extend_from_slice(path);
                best.push(slot);
            }
        } else {
            let prune_at = *upper - prune_tolerance(*upper);
            let mut lower = combinatorial_bound(comp, state).max(parent_lower);
            if lower < prune_at {
                let mut child_lambda = lambda.to_vec();
                let lag_lower = lag.optimize(
                    comp,
                    state,
                    &mut child_lambda,
                    *upper,
                    prune_at,
                    NODE_PARAMS,
                );
                lower = lower.max(lag_lower);
                if lower < prune_at {
                    children.push(Entry {
                        depth: depth + 1,
                        slot,
                        lower,
                        lambda: child_lambda,
                    });
                }
            }
        }
        state.pop(comp, slot);
    }
}

fn leaf_cost(comp: &Component, state: &NodeState) -> f64 {
    state.lin
        + comp
            .forgings
            .iter()
            .enumerate()
            .map(|(k, f)| f.cost(state.weight[k], state.count[k]))
            .sum::<f64>()
}

/// First-improvement local search with single-part moves and whole-forging
/// closures. Returns the cost of the improved choice.
#[allow(clippy::needless_range_loop)]
pub(crate) fn local_search(comp: &Component, choice: &mut [usize]) -> f64 {
    let mut weight = comp.base_weight.clone();
    let mut count = comp.base_count.clone();
    for (pos, &slot) in choice.iter().enumerate() {
        let o = &comp.options[pos][slot];
        weight[o.forging] += o.weight;
        count[o.forging] += 1;
    }
    let delta = |weight: &[u128], count: &[u32], pos: usize, from: usize, to: usize| {
        let a = &comp.options[pos][from];
        let b = &comp.options[pos][to];
        let (fa, fb) = (&comp.forgings[a.forging], &comp.forgings[b.forging]);
        let before = fa.cost(weight[a.forging], count[a.forging])
            + fb.cost(weight[b.forging], count[b.forging]);
        let after = fa.cost(weight[a.forging] - a.weight, count[a.forging] - 1)
            + fb.cost(weight[b.forging] + b.weight, count[b.forging] + 1);
        b.lin - a.lin + after - before
    };
    let apply = |weight: &mut [u128], count: &mut [u32], pos: usize, from: usize, to: usize| {
        let a = &comp.options[pos][from];
        let b = &comp.options[pos][to];
        weight[a.forging] -= a.weight;
        count[a.forging] -= 1;
        weight[b.forging] += b.weight;
        count[b.forging] += 1;
    };

    loop {
        let mut improved = false;
        for pos in 0..choice.len() {
            for to in 0..comp.options[pos].len() {
                let from = choice[pos];
                if to != from && delta(&weight, &count, pos, from, to) < -IMPROVE_EPS {
                    apply(&mut weight, &mut count, pos, from, to);
                    choice[pos] = to;
                    improved = true;
                }
            }
        }
        for k in 0..comp.forgings.len() {
            if count[k] == 0 || comp.base_count[k] > 0 {
                continue;
            }
            let mut moved: Vec<(usize, usize)> = Vec::new();
            let mut total = 0.0;
            let mut feasible = true;
            for pos in 0..choice.len() {
                let from = choice[pos];
                if comp.options[pos][from].forging != k {
                    continue;
                }
                let alt = (0..comp.options[pos].len())
                    .filter(|&to| to != from)
                    .map(|to| (delta(&weight, &count, pos, from, to), to))
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                match alt {
                    Some((d, to)) => {
                        apply(&mut weight, &mut count, pos, from, to);
                        choice[pos] = to;
                        moved.push((pos, from));
                        total += d;
                    }
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible && total < -IMPROVE_EPS {
                improved = true;
            } else {
                for &(pos, from) in moved.iter().rev() {
                    apply(&mut weight, &mut count, pos, choice[pos], from);
                    choice[pos] = from;
                }
            }
        }
        if !improved {
            break;
        }
    }
    comp.cost(choice)
}
