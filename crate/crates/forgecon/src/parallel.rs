//! Component-parallel solving.
//!
//! Components of an instance are independent, so each worker thread takes the
//! next unsolved component until none are left. Every component is searched
//! deterministically, which makes the result independent of the worker count
//! and of scheduling (time limits aside).

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use forgecon_core::solver::{Clock, ComponentResult, SearchPlan};
use forgecon_core::{Error, Instance, SolveConfig, SolveResult};

/// Seconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Solves `instance` with up to `config.worker_count` threads, honouring
/// `config.time_limit` against the wall clock.
pub fn solve(instance: &Instance, config: &SolveConfig) -> Result<SolveResult, Error> {
    let clock = WallClock::start();
    let plan = SearchPlan::new(instance, config)?;
    let count = plan.component_count();
    let workers = config.worker_count.clamp(1, count.max(1));

    let results: Vec<ComponentResult> = if workers == 1 {
        (0..count)
            .map(|c| plan.solve_component(c, config, &clock))
            .collect()
    } else {
        // largest components first so stragglers start early
        let mut order: Vec<usize> = (0..count).collect();
        let sizes = plan.component_sizes();
        order.sort_by_key(|&c| std::cmp::Reverse(sizes[c]));
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<ComponentResult>>> = Mutex::new(vec![None; count]);
        thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&c) = order.get(i) else { break };
                    let result = plan.solve_component(c, config, &clock);
                    slots.lock().expect("no worker panicked")[c] = Some(result);
                });
            }
        });
        slots
            .into_inner()
            .expect("no worker panicked")
            .into_iter()
            .map(|r| r.expect("every component solved"))
            .collect()
    };
    plan.assemble(instance, &results, clock.elapsed())
}
