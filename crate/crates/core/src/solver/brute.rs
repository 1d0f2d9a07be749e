use crate::model::{Assignment, IlpModel};

use super::{Solution, SolveOutcome, SolveStats, SolveStatus};

pub const BRUTEFORCE_MAX_VARS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("{0} variables exceed the exhaustive search cap of {BRUTEFORCE_MAX_VARS}")]
pub struct TooManyVariables(pub usize);

/// Exhaustive minimization over all `2^n` assignments.
///
/// Assignments are visited in lexicographic order of the variable vector
/// (variable 0 most significant) and only strict improvements replace the
/// incumbent, so ties resolve to the lexicographically smallest assignment.
pub fn solve_bruteforce(model: &IlpModel) -> Result<SolveOutcome, TooManyVariables> {
    let n = model.num_vars();
    if n > BRUTEFORCE_MAX_VARS {
        return Err(TooManyVariables(n));
    }
    let mut stats = SolveStats::default();
    if model.is_marked_infeasible() {
        return Ok(SolveOutcome::infeasible(stats));
    }
    let bit = |mask: u32, var: crate::model::Var| mask >> (n - 1 - var.index()) & 1 == 1;
    let mut best: Option<(u32, i64)> = None;
    for mask in 0..(1u32 << n) {
        stats.nodes += 1;
        if !model.constraints.iter().all(|c| c.is_satisfied(|v| bit(mask, v))) {
            continue;
        }
        let value = model.objective.evaluate(|v| bit(mask, v));
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((mask, value));
        }
    }
    Ok(match best {
        None => SolveOutcome::infeasible(stats),
        Some((mask, objective)) => {
            let mut assignment = Assignment::zeros(n);
            for (i, slot) in assignment.values.iter_mut().enumerate() {
                *slot = mask >> (n - 1 - i) & 1 == 1;
            }
            SolveOutcome {
                status: SolveStatus::Optimal,
                best: Some(Solution { assignment, objective }),
                stats,
            }
        }
    })
}
