//! Exact branch-and-bound for the consolidation problem.
//!
//! The search branches on which option each part uses; selected forgings and
//! discount levels follow from the assignment. Independent components of the
//! part/forging graph are solved separately, each with a depth-first search
//! bounded by a Lagrangian relaxation of the assignment rows and seeded with a
//! locally improved baseline.
//!
//! [`solve`] runs components one after another and ignores the time limit
//! because the core crate has no clock. [`SearchPlan`] exposes the pieces so
//! callers with a clock and threads can schedule components themselves.

mod bound;
mod compiled;
mod search;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::cost::{evaluate_detailed, CostBreakdown};
use crate::error::Error;
use crate::instance::{Instance, Solution};
use crate::COST_TOLERANCE;

use compiled::Compiled;
use search::{Finish, Outcome};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Wall-clock budget in seconds.
    pub time_limit: Option<f64>,
    /// Stop once `(upper - lower) <= target_gap * upper`; 0 proves optimality.
    pub target_gap: f64,
    pub worker_count: usize,
    /// Breaks ties in the branching order.
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            time_limit: None,
            target_gap: 0.0,
            worker_count: 1,
            seed: 0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(0.0..1.0).contains(&self.target_gap) {
            return Err(Error::InvalidConfig("target gap must lie in [0, 1)"));
        }
        if self.worker_count == 0 {
            return Err(Error::InvalidConfig("worker count must be at least 1"));
        }
        if let Some(t) = self.time_limit {
            if t.is_nan() || t < 0.0 {
                return Err(Error::InvalidConfig("time limit must be non-negative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    GapLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapLimit => "gap-limit",
            SolveStatus::TimeLimit => "time-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: Solution,
    pub lower_bound: f64,
    pub status: SolveStatus,
    pub node_count: u64,
    /// Seconds, as reported by the clock the search ran with.
    pub wall_time: f64,
}

impl SolveResult {
    /// Relative gap between the solution cost and the lower bound.
    pub fn gap(&self) -> f64 {
        let total = self.solution.costs.total;
        (total - self.lower_bound).max(0.0) / total.abs().max(1.0)
    }
}

/// Source of elapsed time for time limits.
pub trait Clock: Sync {
    /// Seconds since the solve started.
    fn elapsed(&self) -> f64;
}

/// A clock that never advances.
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> f64 {
        0.0
    }
}

/// Result of searching one component.
#[derive(Debug, Clone)]
pub struct ComponentResult(Outcome);

impl ComponentResult {
    pub fn node_count(&self) -> u64 {
        self.0.nodes
    }
}

/// Preprocessed instance ready for component-wise search.
#[derive(Debug, Clone)]
pub struct SearchPlan {
    compiled: Compiled,
}

impl SearchPlan {
    pub fn new(instance: &Instance, config: &SolveConfig) -> Result<Self, Error> {
        config.validate()?;
        Ok(Self {
            compiled: Compiled::new(instance, config.seed)?,
        })
    }

    pub fn component_count(&self) -> usize {
        self.compiled.components.len()
    }

    /// Number of branching parts per component.
    pub fn component_sizes(&self) -> Vec<usize> {
        self.compiled
            .components
            .iter()
            .map(|c| c.branch_len())
            .collect()
    }

    pub fn solve_component(
        &self,
        index: usize,
        config: &SolveConfig,
        clock: &dyn Clock,
    ) -> ComponentResult {
        let stop = || match config.time_limit {
            Some(limit) => clock.elapsed() >= limit,
            None => false,
        };
        ComponentResult(search::solve_component(
            &self.compiled.components[index],
            config.target_gap,
            &stop,
        ))
    }

    /// Combines per-component results (in component order) into a solution.
    pub fn assemble(
        &self,
        instance: &Instance,
        results: &[ComponentResult],
        wall_time: f64,
    ) -> Result<SolveResult, Error> {
        assert_eq!(results.len(), self.compiled.components.len());
        let mut assignment = BTreeMap::new();
        for p in instance.parts() {
            if p.options.len() == 1 {
                assignment.insert(p.id, p.options[0].forging);
            }
        }
        let mut lower = self.compiled.constant;
        let mut upper = self.compiled.constant;
        let mut nodes = 0;
        let mut timed_out = false;
        for (comp, ComponentResult(out)) in self.compiled.components.iter().zip(results) {
            for (pos, &slot) in out.choice.iter().enumerate() {
                let part = &instance.parts()[comp.parts[pos]];
                let option = comp.options[pos][slot].option;
                assignment.insert(part.id, part.options[option].forging);
            }
            lower += out.lower;
            upper += out.upper;
            nodes += out.nodes;
            timed_out |= out.finish == Finish::Time;
        }
        let solution = Solution::from_assignment(instance, assignment)?;
        let total = solution.costs.total;
        debug_assert!(
            (total - upper).abs() <= 1e-6 * total.abs().max(1.0),
            "search cost {upper} disagrees with evaluation {total}"
        );
        let lower_bound = lower.min(total);
        let status = if total - lower_bound <= COST_TOLERANCE * lower_bound.abs().max(1.0) {
            SolveStatus::Optimal
        } else if timed_out {
            SolveStatus::TimeLimit
        } else {
            SolveStatus::GapLimit
        };
        Ok(SolveResult {
            solution,
            lower_bound,
            status,
            node_count: nodes.max(1),
            wall_time,
        })
    }
}

/// Solves to proven optimality (or `config.target_gap`), one component at a
/// time. Time limits need a clock; see [`solve_with_clock`].
pub fn solve(instance: &Instance, config: &SolveConfig) -> Result<SolveResult, Error> {
    solve_with_clock(instance, config, &NoClock)
}

pub fn solve_with_clock(
    instance: &Instance,
    config: &SolveConfig,
    clock: &dyn Clock,
) -> Result<SolveResult, Error> {
    let plan = SearchPlan::new(instance, config)?;
    let results: Vec<ComponentResult> = (0..plan.component_count())
        .map(|c| plan.solve_component(c, config, clock))
        .collect();
    plan.assemble(instance, &results, clock.elapsed())
}

/// Recomputes the costs of `solution` and checks every solution invariant.
pub fn verify(instance: &Instance, solution: &Solution) -> Result<CostBreakdown, Error> {
    let detail = evaluate_detailed(instance, &solution.selected, &solution.assignment)?;
    for k in &solution.selected {
        if !solution.assignment.values().any(|f| f == k) {
            return Err(Error::UnusedForging(*k));
        }
    }
    if solution.discount_level != detail.levels {
        let wrong = detail
            .levels
            .iter()
            .find(|(k, d)| solution.discount_level.get(k) != Some(d))
            .map(|(k, _)| *k)
            .or_else(|| {
                solution
                    .discount_level
                    .keys()
                    .find(|k| !detail.levels.contains_key(k))
                    .copied()
            })
            .expect("maps differ");
        return Err(Error::WrongDiscountLevel(wrong));
    }
    let stored = &solution.costs;
    let fresh = &detail.costs;
    for (component, s, r) in [
        ("machining", stored.machining, fresh.machining),
        ("forging", stored.forging, fresh.forging),
        ("inventory", stored.inventory, fresh.inventory),
        ("total", stored.total, fresh.total),
    ] {
        let diff = (s - r).abs();
        if diff.is_nan() || diff > COST_TOLERANCE {
            return Err(Error::CostMismatch {
                component,
                stored: s,
                recomputed: r,
            });
        }
    }
    Ok(detail.costs)
}
