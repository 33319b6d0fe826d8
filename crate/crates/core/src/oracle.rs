//! Exhaustive enumeration of every part-to-option assignment.
//!
//! Each assignment determines its selected set (the forgings it uses) and all
//! discount levels, so enumerating assignments covers every feasible point.
//! Only practical for small instances; used to check the solver.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::Error;
use crate::instance::{ForgingId, Instance, Solution};
use crate::solver::{SolveResult, SolveStatus};

pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Number of distinct assignments of `instance`, saturating.
pub fn assignment_count(instance: &Instance) -> u128 {
    instance
        .parts()
        .iter()
        .fold(1u128, |acc, p| acc.saturating_mul(p.options.len() as u128))
}

/// Returns the optimum over all assignments. Among equal-cost optima the
/// lexicographically smallest selected set wins, then the smallest assignment.
pub fn brute_force(instance: &Instance, limit: u128) -> Result<SolveResult, Error> {
    let needed = assignment_count(instance);
    if needed > limit {
        return Err(Error::EnumerationLimit { needed, limit });
    }
    let parts = instance.parts();
    let mut digits = alloc::vec![0usize; parts.len()];
    let mut best: Option<(Solution, Vec<ForgingId>, Vec<ForgingId>)> = None;
    let mut evaluations: u64 = 0;
    loop {
        let assignment: BTreeMap<_, _> = parts
            .iter()
            .zip(&digits)
            .map(|(p, &j)| (p.id, p.options[j].forging))
            .collect();
        let candidate = Solution::from_assignment(instance, assignment)?;
        evaluations += 1;
        let sel: Vec<ForgingId> = candidate.selected.iter().copied().collect();
        let asg: Vec<ForgingId> = candidate.assignment.values().copied().collect();
        let better = match &best {
            None => true,
            Some((b, bsel, basg)) => {
                let (c, t) = (candidate.costs.total, b.costs.total);
                c < t - 1e-9 || ((c - t).abs() <= 1e-9 && (&sel, &asg) < (bsel, basg))
            }
        };
        if better {
            best = Some((candidate, sel, asg));
        }

        // next mixed-radix digit vector
        let mut i = 0;
        loop {
            if i == digits.len() {
                let (solution, _, _) = best.expect("at least one assignment");
                return Ok(SolveResult {
                    lower_bound: solution.costs.total,
                    solution,
                    status: SolveStatus::Optimal,
                    node_count: evaluations,
                    wall_time: 0.0,
                });
            }
            digits[i] += 1;
            if digits[i] < parts[i].options.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}
