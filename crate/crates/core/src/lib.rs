//! Package upgradeability problems as 0-1 integer linear programs.
//!
//! The crate is `no_std` (it only needs `alloc`) and covers the pure part of
//! the pipeline:
//!
//! - [`cudf`]: the CUDF data model, a parser for CUDF documents and a writer
//!   for configurations.
//! - [`encoder`]: translation of a universe, initial configuration and request
//!   into an [`model::IlpModel`] with the stability criteria as objective.
//! - [`solver`]: exact branch-and-bound over binary variables with linear
//!   constraint propagation, a brute-force oracle and a lexicographic driver.
//! - [`emit`]: CPLEX LP and OPB interchange formats and external answer parsing.
//! - [`validator`]: direct CUDF semantics checks that never look at a model.
//!
//! Anything touching the operating system (clocks, files, processes) lives in
//! the companion `pkgilp` crate. Solver deadlines are expressed through the
//! [`solver::Clock`] trait so the search itself stays portable.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cudf;
pub mod emit;
pub mod encoder;
pub mod model;
pub mod solver;
pub mod validator;

pub use cudf::{
    parse_document, Atom, Configuration, DependsFormula, PackageUnit, ParseError, Relation, Request, UnitKey, Universe,
    VersionConstraint,
};
pub use encoder::{build_model, CriteriaMode, Weighting};
pub use model::{IlpModel, LinearConstraint, Objective, Sense, Var, VarId};
pub use solver::{solve, solve_bruteforce, Assignment, Budget, SolveOutcome, SolveStatus};
