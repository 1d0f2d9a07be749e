use core::convert::Infallible;

use crate::cudf::{Configuration, Request, Universe};
use crate::encoder::{build_model, build_objective, CriteriaMode, Weighting};
use crate::model::{IlpModel, LinearConstraint, Sense};

use super::{solve, Budget, SolveOutcome, SolveStatus};

/// Outcome of the two-stage solve, with the optimal `(criterion 1,
/// criterion 2)` pair when both stages finished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexOutcome {
    pub outcome: SolveOutcome,
    pub values: Option<(i64, i64)>,
}

/// Minimizes removed functionalities, then, with that value pinned by an
/// equality constraint, minimizes modifications. Each stage gets its own
/// budget.
pub fn lexicographic_solve(u: &Universe, init: &Configuration, r: &Request, budget: &Budget<'_>) -> LexOutcome {
    match lexicographic_solve_with(u, init, r, |m| Ok::<_, Infallible>(solve(m, budget))) {
        Ok(out) => out,
        Err(never) => match never {},
    }
}

/// [`lexicographic_solve`] with a caller-supplied solve function for both
/// stages, e.g. an external solver.
pub fn lexicographic_solve_with<E>(
    u: &Universe,
    init: &Configuration,
    r: &Request,
    mut solve_stage: impl FnMut(&IlpModel) -> Result<SolveOutcome, E>,
) -> Result<LexOutcome, E> {
    let mut model = build_model(u, init, r, CriteriaMode::Criterion1, Weighting::Strict);
    let first = solve_stage(&model)?;
    let z1 = match (first.status, first.objective()) {
        (SolveStatus::Optimal, Some(z1)) => z1,
        _ => {
            return Ok(LexOutcome {
                outcome: first,
                values: None,
            })
        }
    };
    let pin = LinearConstraint::new(model.objective.terms.iter().copied(), Sense::Eq, z1);
    model.push(pin);
    model.objective = build_objective(u, init, CriteriaMode::Criterion2, Weighting::Strict);
    let mut second = solve_stage(&model)?;
    second.stats.nodes += first.stats.nodes;
    second.stats.propagations += first.stats.propagations;
    second.stats.elapsed += first.stats.elapsed;
    let values = match (second.status, second.objective()) {
        (SolveStatus::Optimal, Some(z2)) => Some((z1, z2)),
        _ => None,
    };
    Ok(LexOutcome {
        outcome: second,
        values,
    })
}
