//! Parse, encode, solve and check one problem.

use std::time::Duration;

use pkgilp_core::cudf::{Configuration, Request, Universe};
use pkgilp_core::encoder::{build_model, CriteriaMode, Weighting};
use pkgilp_core::solver::{lexicographic_solve_with, solve, Budget, SolveOutcome, SolveStatus};
use pkgilp_core::validator::{check_consistency, check_request, diff_configurations, Diff, Violation};
use pkgilp_core::IlpModel;

use crate::external::{run_external, ExternalError, ExternalSolverSpec};
use crate::StdClock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Criteria {
    #[default]
    Aggregate,
    Lexicographic,
    RemovedOnly,
    ChangesOnly,
}

impl Criteria {
    fn single_mode(self) -> Option<CriteriaMode> {
        match self {
            Criteria::Aggregate => Some(CriteriaMode::Aggregate),
            Criteria::RemovedOnly => Some(CriteriaMode::Criterion1),
            Criteria::ChangesOnly => Some(CriteriaMode::Criterion2),
            Criteria::Lexicographic => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Builtin,
    External(ExternalSolverSpec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub criteria: Criteria,
    pub weighting: Weighting,
    pub backend: Backend,
    pub timeout: Duration,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            criteria: Criteria::default(),
            weighting: Weighting::default(),
            backend: Backend::default(),
            timeout: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    External(#[from] ExternalError),
    #[error("internal inconsistency: the solver's answer violates the problem: {0}")]
    Rejected(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: SolveOutcome,
    /// Best configuration found, already checked by the validator.
    pub configuration: Option<Configuration>,
    pub diff: Option<Diff>,
}

impl SolveReport {
    pub fn status(&self) -> SolveStatus {
        self.outcome.status
    }
}

/// Solves one model with the chosen backend.
pub fn solve_model(model: &IlpModel, backend: &Backend, timeout: Duration) -> Result<SolveOutcome, ExternalError> {
    match backend {
        Backend::Builtin => {
            let clock = StdClock::new();
            Ok(solve(model, &Budget::new(&clock, timeout)))
        }
        Backend::External(spec) => run_external(spec, model, timeout),
    }
}

/// Encodes and solves, then validates the answer directly against the
/// universe. A rejected answer is an error, never a result.
pub fn solve_problem(u: &Universe, r: &Request, opts: &SolveOptions) -> Result<SolveReport, PipelineError> {
    let init = u.initial_configuration();
    let (outcome, model) = match opts.criteria.single_mode() {
        Some(mode) => {
            let model = build_model(u, &init, r, mode, opts.weighting);
            (solve_model(&model, &opts.backend, opts.timeout)?, model)
        }
        None => {
            let lex = lexicographic_solve_with(u, &init, r, |m| solve_model(m, &opts.backend, opts.timeout))?;
            // Both stages share the variable layout of this model.
            let model = build_model(u, &init, r, CriteriaMode::Criterion1, Weighting::Strict);
            (lex.outcome, model)
        }
    };
    let configuration = outcome.best.as_ref().map(|s| model.decode(&s.assignment));
    if let Some(c) = &configuration {
        let mut violations: Vec<Violation> = check_consistency(u, c);
        violations.extend(check_request(u, &init, r, c));
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(PipelineError::Rejected(text.join("; ")));
        }
    }
    let diff = configuration.as_ref().map(|c| diff_configurations(&init, c, u));
    Ok(SolveReport {
        outcome,
        configuration,
        diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pkgilp_core::cudf::parse_document;

    const CAR: &str = include_str!("../../core/tests/data/car.cudf");

    #[test]
    fn car_aggregate_and_lex_agree() {
        let (u, r) = parse_document(CAR).unwrap();
        let agg = solve_problem(&u, &r, &SolveOptions::default()).unwrap();
        let lex = solve_problem(
            &u,
            &r,
            &SolveOptions {
                criteria: Criteria::Lexicographic,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(agg.status(), SolveStatus::Optimal);
        assert_eq!(lex.status(), SolveStatus::Optimal);
        assert_eq!(agg.diff, lex.diff);
        let c = agg.configuration.unwrap();
        assert!(c.contains("bicycle", 7));
        assert!(c.contains("electric-engine", 1));
        assert!(c.contains("door", 1));
    }

    #[test]
    fn providerless_install_is_infeasible() {
        let (u, _) = parse_document(CAR).unwrap();
        let r = Request {
            install: vec![pkgilp_core::Atom::any("ghost")],
            ..Request::default()
        };
        let rep = solve_problem(&u, &r, &SolveOptions::default()).unwrap();
        assert_eq!(rep.status(), SolveStatus::Infeasible);
        assert!(rep.configuration.is_none());
    }
}
