use alloc::string::String;
use core::fmt;

use super::parse_var_token;
use crate::model::{Assignment, IlpModel, Var};
use crate::solver::{Solution, SolveOutcome, SolveStats, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnswerStatus {
    /// An assignment proved optimal.
    Optimal,
    /// An assignment without an optimality proof.
    Feasible,
    Infeasible,
    Unknown,
}

/// An external solver's answer, before any checking against the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub status: AnswerStatus,
    /// Present exactly when the status is `Optimal` or `Feasible`.
    pub assignment: Option<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerError {
    Malformed {
        line: usize,
        message: String,
    },
    MissingStatus,
    MissingAssignment,
    UnknownVariable(String),
    /// The reported assignment breaks this many model constraints.
    Violated(usize),
}

impl fmt::Display for AnswerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnswerError::Malformed { line, message } => write!(f, "answer line {line}: {message}"),
            AnswerError::MissingStatus => f.write_str("answer has no status line"),
            AnswerError::MissingAssignment => f.write_str("answer reports a solution without values"),
            AnswerError::UnknownVariable(v) => write!(f, "answer mentions unknown variable `{v}`"),
            AnswerError::Violated(n) => write!(f, "answer violates {n} model constraints"),
        }
    }
}

fn finish(status: Option<AnswerStatus>, assignment: Assignment, saw_values: bool) -> Result<Answer, AnswerError> {
    let status = status.ok_or(AnswerError::MissingStatus)?;
    match status {
        AnswerStatus::Optimal | AnswerStatus::Feasible if !saw_values => Err(AnswerError::MissingAssignment),
        AnswerStatus::Optimal | AnswerStatus::Feasible => Ok(Answer {
            status,
            assignment: Some(assignment),
        }),
        _ => Ok(Answer {
            status,
            assignment: None,
        }),
    }
}

/// Parses the competition output format: an `s` status line and `v` lines of
/// literals `x<i>` / `-x<i>`. Unlisted variables are 0; `c` and `o` lines are
/// ignored.
pub fn parse_opb_answer(text: &str, num_vars: usize) -> Result<Answer, AnswerError> {
    let mut status = None;
    let mut assignment = Assignment::zeros(num_vars);
    let mut saw_values = false;
    for (i, line) in text.lines().enumerate() {
        let malformed = |message: String| AnswerError::Malformed { line: i + 1, message };
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            status = Some(match rest.trim() {
                "OPTIMUM FOUND" => AnswerStatus::Optimal,
                "SATISFIABLE" => AnswerStatus::Feasible,
                "UNSATISFIABLE" | "UNSAT" => AnswerStatus::Infeasible,
                "UNKNOWN" => AnswerStatus::Unknown,
                other => return Err(malformed(alloc::format!("unknown status `{other}`"))),
            });
        } else if let Some(rest) = line.strip_prefix("v ").or_else(|| (line == "v").then_some("")) {
            saw_values = true;
            for lit in rest.split_whitespace() {
                let (value, name) = match lit.strip_prefix('-').or_else(|| lit.strip_prefix('~')) {
                    Some(name) => (false, name),
                    None => (true, lit),
                };
                let v = name
                    .strip_prefix('x')
                    .and_then(|n| n.parse::<usize>().ok())
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| malformed(alloc::format!("bad literal `{lit}`")))?;
                if v > num_vars {
                    return Err(AnswerError::UnknownVariable(String::from(name)));
                }
                assignment.values[v - 1] = value;
            }
        } else if line.is_empty() || line.starts_with('c') || line.starts_with('o') {
            continue;
        } else if line == "UNSAT" || line == "UNSATISFIABLE" {
            status = Some(AnswerStatus::Infeasible);
        } else {
            return Err(malformed(alloc::format!("unexpected line `{line}`")));
        }
    }
    finish(status, assignment, saw_values)
}

/// Parses the neutral solution format used for LP-based solvers: a first
/// line `optimal`, `feasible`, `infeasible` or `unknown`, then one
/// `<variable> <value>` line per variable, with the LP names. Values above
/// one half count as 1; unlisted variables are 0. `#` starts a comment.
pub fn parse_lp_answer(text: &str, model: &IlpModel) -> Result<Answer, AnswerError> {
    let mut status = None;
    let mut assignment = Assignment::zeros(model.num_vars());
    let mut saw_values = false;
    for (i, raw) in text.lines().enumerate() {
        let malformed = |message: String| AnswerError::Malformed { line: i + 1, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if status.is_none() {
            status = Some(match line.to_ascii_lowercase().as_str() {
                "optimal" => AnswerStatus::Optimal,
                "feasible" => AnswerStatus::Feasible,
                "infeasible" => AnswerStatus::Infeasible,
                "unknown" => AnswerStatus::Unknown,
                _ => return Err(malformed(alloc::format!("expected a status, found `{line}`"))),
            });
            continue;
        }
        let mut words = line.split_whitespace();
        let (Some(name), Some(value), None) = (words.next(), words.next(), words.next()) else {
            return Err(malformed(String::from("expected `<variable> <value>`")));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| malformed(alloc::format!("bad value `{value}`")))?;
        saw_values = true;
        if name == "_empty" {
            continue;
        }
        let var = parse_var_token(name)
            .and_then(|id| model.var(&id))
            .ok_or_else(|| AnswerError::UnknownVariable(String::from(name)))?;
        assignment.set(var, value > 0.5);
    }
    if status.is_some_and(|s| matches!(s, AnswerStatus::Optimal | AnswerStatus::Feasible))
        && !saw_values
        && model.num_vars() == 0
    {
        saw_values = true;
    }
    finish(status, assignment, saw_values)
}

/// Checks an answer against `model` and converts it. Objective values are
/// always recomputed here; an assignment that breaks a constraint is an
/// error. A feasible answer without proof counts as optimal only when the
/// objective is empty.
pub fn outcome_from_answer(model: &IlpModel, answer: &Answer) -> Result<SolveOutcome, AnswerError> {
    let stats = SolveStats::default();
    let assignment = match (answer.status, &answer.assignment) {
        (AnswerStatus::Infeasible, _) => return Ok(SolveOutcome::infeasible(stats)),
        (AnswerStatus::Unknown, _) => {
            return Ok(SolveOutcome {
                status: SolveStatus::TimedOut,
                best: None,
                stats,
            })
        }
        (_, None) => return Err(AnswerError::MissingAssignment),
        (_, Some(a)) => a,
    };
    if assignment.len() != model.num_vars() {
        return Err(AnswerError::MissingAssignment);
    }
    let broken = model
        .constraints
        .iter()
        .filter(|c| !c.is_satisfied(|v: Var| assignment.get(v)))
        .count();
    if broken > 0 || model.is_marked_infeasible() {
        return Err(AnswerError::Violated(broken.max(1)));
    }
    let proved = answer.status == AnswerStatus::Optimal || model.objective.terms.is_empty();
    Ok(SolveOutcome {
        status: if proved {
            SolveStatus::Optimal
        } else {
            SolveStatus::TimedOut
        },
        best: Some(Solution {
            assignment: assignment.clone(),
            objective: model.evaluate(assignment),
        }),
        stats,
    })
}
