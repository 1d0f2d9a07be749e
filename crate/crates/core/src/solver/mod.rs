//! Exact optimization of [`IlpModel`]s over binary variables.
//!
//! [`solve`] is a depth-first branch-and-bound with linear constraint
//! propagation. [`solve_bruteforce`] enumerates every assignment and serves
//! as the test oracle. [`lexicographic_solve`] optimizes the two criteria one
//! after the other.

mod brute;
mod engine;
mod lex;

pub use brute::{solve_bruteforce, TooManyVariables, BRUTEFORCE_MAX_VARS};
pub use lex::{lexicographic_solve, lexicographic_solve_with, LexOutcome};

pub use crate::model::Assignment;

use alloc::vec::Vec;
use core::time::Duration;

use crate::model::IlpModel;
use engine::{Engine, UNASSIGNED};

/// Monotonic time source used for deadlines.
pub trait Clock {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
}

/// A clock that never advances; deadlines never expire.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrozenClock;

impl Clock for FrozenClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}

/// Resource limits for one solve call.
#[derive(Clone, Copy)]
pub struct Budget<'a> {
    pub clock: &'a dyn Clock,
    pub timeout: Duration,
    /// Stop after this many search nodes, reported as a timeout.
    pub node_limit: Option<u64>,
}

impl<'a> Budget<'a> {
    pub fn new(clock: &'a dyn Clock, timeout: Duration) -> Self {
        Budget {
            clock,
            timeout,
            node_limit: None,
        }
    }

    pub fn unlimited() -> Budget<'static> {
        Budget {
            clock: &FrozenClock,
            timeout: Duration::MAX,
            node_limit: None,
        }
    }

    pub fn with_node_limit(mut self, nodes: u64) -> Self {
        self.node_limit = Some(nodes);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimedOut,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimedOut => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub assignment: Assignment,
    pub objective: i64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub propagations: u64,
    pub elapsed: Duration,
}

/// Result of a solve. `Optimal` always carries a solution, `Infeasible`
/// never does, and `TimedOut` carries the incumbent when one was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub best: Option<Solution>,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn infeasible(stats: SolveStats) -> Self {
        SolveOutcome {
            status: SolveStatus::Infeasible,
            best: None,
            stats,
        }
    }

    pub fn objective(&self) -> Option<i64> {
        self.best.as_ref().map(|s| s.objective)
    }
}

/// Result of [`propagate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    /// The fixpoint: an extension of the input partial assignment.
    Consistent(Vec<Option<bool>>),
    Conflict,
}

/// Runs constraint propagation from a partial assignment (one entry per model
/// variable, `None` for unassigned) until nothing more is forced.
pub fn propagate(model: &IlpModel, partial: &[Option<bool>]) -> Propagation {
    assert_eq!(partial.len(), model.num_vars(), "partial assignment size");
    if model.is_marked_infeasible() {
        return Propagation::Conflict;
    }
    let mut engine = Engine::new(model);
    for (var, value) in partial.iter().enumerate() {
        if let Some(value) = *value {
            engine.assign(var as u32, value);
        }
    }
    if engine.check_all().and_then(|_| engine.propagate()).is_err() {
        return Propagation::Conflict;
    }
    Propagation::Consistent(
        engine
            .values
            .iter()
            .map(|&v| (v != UNASSIGNED).then_some(v == 1))
            .collect(),
    )
}

struct Decision {
    var: u32,
    /// Position of `var` in the branching order.
    pos: usize,
    trail_len: usize,
    flipped: bool,
    /// Levels that made the first value fail, once flipped.
    blamed: Vec<u32>,
}

/// Static branching order: largest absolute objective coefficient first, then
/// most constraint occurrences, then variable index.
fn branching_order(engine: &Engine) -> Vec<u32> {
    let mut order: Vec<u32> = (0..engine.num_vars() as u32).collect();
    order.sort_by(|&a, &b| {
        engine
            .cost(b)
            .unsigned_abs()
            .cmp(&engine.cost(a).unsigned_abs())
            .then(engine.occurrences(b).cmp(&engine.occurrences(a)))
            .then(a.cmp(&b))
    });
    order
}

/// Value that does not increase the objective: 1 for negative costs, else 0.
fn preferred(engine: &Engine, var: u32) -> bool {
    engine.cost(var) < 0
}

/// Minimizes the model's objective by depth-first branch-and-bound.
///
/// The objective is a propagated constraint bounded by the incumbent, so a
/// node is pruned as soon as the assigned part plus every negative cost still
/// open cannot beat it. After a failure the search jumps back to the deepest
/// decision the failure depends on, skipping decisions that played no part.
/// On a deadline the incumbent, if any, is returned with
/// [`SolveStatus::TimedOut`].
pub fn solve(model: &IlpModel, budget: &Budget<'_>) -> SolveOutcome {
    let start = budget.clock.now();
    let mut stats = SolveStats::default();
    let finish = |mut stats: SolveStats, status, best| {
        stats.elapsed = budget.clock.now().saturating_sub(start);
        SolveOutcome { status, best, stats }
    };
    if model.is_marked_infeasible() {
        return finish(stats, SolveStatus::Infeasible, None);
    }

    let mut engine = Engine::new(model);
    if engine.check_all().and_then(|_| engine.propagate()).is_err() {
        return finish(stats, SolveStatus::Infeasible, None);
    }
    let order = branching_order(&engine);
    let mut next_pos = 0usize;
    let mut stack: Vec<Decision> = Vec::new();
    let mut best: Option<Solution> = None;

    loop {
        stats.nodes += 1;
        if stats.nodes % 256 == 0 || budget.node_limit.is_some() {
            let out_of_time = budget.clock.now().saturating_sub(start) >= budget.timeout;
            let out_of_nodes = budget.node_limit.is_some_and(|n| stats.nodes > n);
            if out_of_time || out_of_nodes {
                stats.propagations = engine.propagations;
                return finish(stats, SolveStatus::TimedOut, best);
            }
        }

        let mut blamed = match engine.propagate() {
            Err(conflict) => engine.explain(conflict),
            Ok(()) => {
                while next_pos < order.len() && engine.is_assigned(order[next_pos]) {
                    next_pos += 1;
                }
                if next_pos < order.len() {
                    let var = order[next_pos];
                    stack.push(Decision {
                        var,
                        pos: next_pos,
                        trail_len: engine.trail.len(),
                        flipped: false,
                        blamed: Vec::new(),
                    });
                    engine.set_level(stack.len() as u32);
                    engine.assign(var, preferred(&engine, var));
                    continue;
                }
                let objective = engine.lower_bound;
                best = Some(Solution {
                    assignment: Assignment {
                        values: engine.values.iter().map(|&v| v == 1).collect(),
                    },
                    objective,
                });
                engine.restrict_objective(objective - 1);
                let conflict = engine
                    .check_objective()
                    .expect_err("a solution cannot beat its own objective");
                engine.explain(conflict)
            }
        };

        // Jump back to the deepest blamed decision; exhausted decisions pass
        // the blame for both of their values further up.
        loop {
            let Some(level) = blamed.pop() else {
                stats.propagations = engine.propagations;
                let status = if best.is_some() {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Infeasible
                };
                return finish(stats, status, best);
            };
            stack.truncate(level as usize);
            let d = stack.last_mut().expect("blamed levels are on the stack");
            if d.flipped {
                blamed.append(&mut d.blamed);
                blamed.sort_unstable();
                blamed.dedup();
                stack.pop();
                continue;
            }
            d.flipped = true;
            d.blamed = blamed;
            let (var, pos, len) = (d.var, d.pos, d.trail_len);
            engine.backtrack_to(len);
            engine.set_level(level);
            engine.assign(var, !preferred(&engine, var));
            next_pos = pos;
            break;
        }
    }
}
