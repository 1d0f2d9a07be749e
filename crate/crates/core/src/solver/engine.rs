//! Incremental propagation over normalized `Σ a_i x_i >= b` constraints.
//!
//! Each constraint keeps its slack: the best achievable left-hand side under
//! the current partial assignment, minus the right-hand side. Assigning a
//! variable to the value that does not maximize its term lowers the slack by
//! `|a_i|`. Negative slack is a conflict; an unassigned term with
//! `|a_i| > slack` is forced to its maximizing value.
//!
//! The objective is kept as one more row, `Σ -c_i x_i >= -bound`, whose
//! bound is tightened whenever a better solution is found. Every assignment
//! records its decision level and the row that forced it, so conflicts can
//! be traced back to the decisions that caused them.

use alloc::vec;
use alloc::vec::Vec;

use crate::model::{IlpModel, LinearConstraint, Sense};

pub(crate) const UNASSIGNED: i8 = -1;
const NO_REASON: u32 = u32::MAX;
/// Right-hand side of the objective row before any solution is known.
const OPEN_BOUND: i64 = i64::MIN / 4;

struct Row {
    /// Sorted by decreasing `|coef|`.
    terms: Vec<(i64, u32)>,
    slack: i64,
}

pub(crate) struct Engine {
    rows: Vec<Row>,
    objective_row: usize,
    objective_rhs: i64,
    occ: Vec<Vec<(u32, i64)>>,
    pub(crate) values: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    position: Vec<u32>,
    pub(crate) trail: Vec<u32>,
    qhead: usize,
    current_level: u32,
    cost: Vec<i64>,
    /// Objective value of assigned variables plus the most negative value the
    /// unassigned ones could still contribute.
    pub(crate) lower_bound: i64,
    pub(crate) propagations: u64,
    seen: Vec<u32>,
    stamp: u32,
}

/// A violated row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Conflict(pub(crate) u32);

fn normalized(c: &LinearConstraint) -> impl Iterator<Item = (Vec<(i64, u32)>, i64)> + '_ {
    let pos = || c.terms.iter().map(|&(a, v)| (a, v.0)).collect::<Vec<_>>();
    let neg = || c.terms.iter().map(|&(a, v)| (-a, v.0)).collect::<Vec<_>>();
    let rows = match c.sense {
        Sense::Geq => vec![(pos(), c.rhs)],
        Sense::Leq => vec![(neg(), -c.rhs)],
        Sense::Eq => vec![(pos(), c.rhs), (neg(), -c.rhs)],
    };
    rows.into_iter()
}

impl Engine {
    pub(crate) fn new(model: &IlpModel) -> Self {
        let n = model.num_vars();
        let mut cost = vec![0i64; n];
        for &(c, v) in &model.objective.terms {
            cost[v.index()] += c;
        }
        let objective: Vec<(i64, u32)> = cost
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(v, &c)| (-c, v as u32))
            .collect();

        let mut engine = Engine {
            rows: Vec::with_capacity(model.constraints.len() + 1),
            objective_row: 0,
            objective_rhs: OPEN_BOUND,
            occ: vec![Vec::new(); n],
            values: vec![UNASSIGNED; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            position: vec![0; n],
            trail: Vec::with_capacity(n),
            qhead: 0,
            current_level: 0,
            lower_bound: cost.iter().map(|&c| c.min(0)).sum(),
            cost,
            propagations: 0,
            seen: vec![0; n],
            stamp: 0,
        };
        for c in &model.constraints {
            for (terms, rhs) in normalized(c) {
                engine.add_row(terms, rhs);
            }
        }
        engine.objective_row = engine.rows.len();
        engine.add_row(objective, OPEN_BOUND);
        engine
    }

    fn add_row(&mut self, mut terms: Vec<(i64, u32)>, rhs: i64) {
        terms.sort_by_key(|t| core::cmp::Reverse(t.0.unsigned_abs()));
        let best: i64 = terms.iter().map(|&(a, _)| a.max(0)).sum();
        let id = self.rows.len() as u32;
        for &(a, v) in &terms {
            self.occ[v as usize].push((id, a));
        }
        self.rows.push(Row {
            terms,
            slack: best - rhs,
        });
    }

    pub(crate) fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn cost(&self, var: u32) -> i64 {
        self.cost[var as usize]
    }

    pub(crate) fn occurrences(&self, var: u32) -> usize {
        self.occ[var as usize].len()
    }

    pub(crate) fn is_assigned(&self, var: u32) -> bool {
        self.values[var as usize] != UNASSIGNED
    }

    pub(crate) fn set_level(&mut self, level: u32) {
        self.current_level = level;
    }

    /// Requires every further solution to have objective at most `bound`.
    /// The caller must examine [`Engine::check_objective`] afterwards.
    pub(crate) fn restrict_objective(&mut self, bound: i64) {
        let rhs = -bound;
        self.rows[self.objective_row].slack += self.objective_rhs - rhs;
        self.objective_rhs = rhs;
    }

    pub(crate) fn check_objective(&mut self) -> Result<(), Conflict> {
        self.check_row(self.objective_row)
    }

    /// Assigns an unassigned variable at the current level and updates slacks
    /// eagerly; consequences are examined by [`Engine::propagate`].
    pub(crate) fn assign(&mut self, var: u32, value: bool) {
        self.assign_because(var, value, NO_REASON);
    }

    fn assign_because(&mut self, var: u32, value: bool, reason: u32) {
        debug_assert!(!self.is_assigned(var));
        let v = var as usize;
        self.values[v] = value as i8;
        self.level[v] = self.current_level;
        self.reason[v] = reason;
        self.position[v] = self.trail.len() as u32;
        self.trail.push(var);
        let c = self.cost[v];
        self.lower_bound += if value { c } else { 0 } - c.min(0);
        for &(row, a) in &self.occ[v] {
            if (a > 0) != value {
                self.rows[row as usize].slack -= a.abs();
            }
        }
    }

    /// Unassigns everything above trail position `len`.
    pub(crate) fn backtrack_to(&mut self, len: usize) {
        while self.trail.len() > len {
            let var = self.trail.pop().expect("non-empty trail");
            let v = var as usize;
            let value = self.values[v] == 1;
            self.values[v] = UNASSIGNED;
            let c = self.cost[v];
            self.lower_bound -= if value { c } else { 0 } - c.min(0);
            for &(row, a) in &self.occ[v] {
                if (a > 0) != value {
                    self.rows[row as usize].slack += a.abs();
                }
            }
        }
        self.qhead = self.qhead.min(len);
    }

    fn check_row(&mut self, row: usize) -> Result<(), Conflict> {
        let slack = self.rows[row].slack;
        if slack < 0 {
            return Err(Conflict(row as u32));
        }
        let mut i = 0;
        while i < self.rows[row].terms.len() {
            let (a, var) = self.rows[row].terms[i];
            if a.abs() <= slack {
                break;
            }
            if !self.is_assigned(var) {
                self.assign_because(var, a > 0, row as u32);
                self.propagations += 1;
            }
            i += 1;
        }
        Ok(())
    }

    /// Examines every constraint once, e.g. at the root or after seeding a
    /// partial assignment.
    pub(crate) fn check_all(&mut self) -> Result<(), Conflict> {
        for row in 0..self.rows.len() {
            self.check_row(row)?;
        }
        Ok(())
    }

    /// Unit propagation to fixpoint over the pending trail entries.
    pub(crate) fn propagate(&mut self) -> Result<(), Conflict> {
        while self.qhead < self.trail.len() {
            let var = self.trail[self.qhead] as usize;
            self.qhead += 1;
            let value = self.values[var] == 1;
            let mut k = 0;
            while k < self.occ[var].len() {
                let (row, a) = self.occ[var][k];
                k += 1;
                if (a > 0) != value {
                    self.check_row(row as usize)?;
                }
            }
        }
        Ok(())
    }

    fn is_bad(&self, a: i64, var: u32) -> bool {
        let value = self.values[var as usize];
        value != UNASSIGNED && (a > 0) != (value == 1)
    }

    /// Decision levels responsible for a conflict: the levels of the
    /// decisions reached by walking back from the row's slack-reducing
    /// assignments through the rows that forced them. Sorted, without 0.
    pub(crate) fn explain(&mut self, conflict: Conflict) -> Vec<u32> {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        let mut levels = Vec::new();
        let mut stack: Vec<u32> = self.rows[conflict.0 as usize]
            .terms
            .iter()
            .filter(|&&(a, v)| self.is_bad(a, v))
            .map(|&(_, v)| v)
            .collect();
        while let Some(var) = stack.pop() {
            let v = var as usize;
            if self.seen[v] == self.stamp {
                continue;
            }
            self.seen[v] = self.stamp;
            if self.level[v] == 0 {
                continue;
            }
            match self.reason[v] {
                NO_REASON => levels.push(self.level[v]),
                row => {
                    let before = self.position[v];
                    for &(a, u) in &self.rows[row as usize].terms {
                        if self.is_bad(a, u)
                            && self.position[u as usize] < before
                            && self.seen[u as usize] != self.stamp
                        {
                            stack.push(u);
                        }
                    }
                }
            }
        }
        levels.sort_unstable();
        levels.dedup();
        levels
    }
}
