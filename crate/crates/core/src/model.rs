//! 0-1 integer linear programs over package variables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cudf::{Configuration, UnitKey};

/// What a binary variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarId {
    /// Installation status of one `(name, version)` unit.
    Unit(UnitKey),
    /// "Some version of this package is installed".
    Feature(String),
}

impl VarId {
    pub fn unit(name: impl Into<String>, version: u64) -> Self {
        VarId::Unit(UnitKey::new(name, version))
    }

    pub fn feature(name: impl Into<String>) -> Self {
        VarId::Feature(name.into())
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Unit(k) => write!(f, "{}_{}", k.name, k.version),
            VarId::Feature(name) => f.write_str(name),
        }
    }
}

/// Dense index of a variable inside one [`IlpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Geq,
    Leq,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Geq => ">=",
            Sense::Leq => "<=",
            Sense::Eq => "=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Sense::Geq => lhs >= rhs,
            Sense::Leq => lhs <= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// `Σ coef·var (sense) rhs`, with distinct variables and non-zero
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearConstraint {
    pub terms: Vec<(i64, Var)>,
    pub sense: Sense,
    pub rhs: i64,
}

impl LinearConstraint {
    /// Builds a constraint, merging repeated variables (first occurrence keeps
    /// its position) and dropping zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (i64, Var)>, sense: Sense, rhs: i64) -> Self {
        let mut merged: Vec<(i64, Var)> = Vec::new();
        let mut slot: BTreeMap<Var, usize> = BTreeMap::new();
        for (c, v) in terms {
            match slot.get(&v) {
                Some(&i) => merged[i].0 += c,
                None => {
                    slot.insert(v, merged.len());
                    merged.push((c, v));
                }
            }
        }
        merged.retain(|&(c, _)| c != 0);
        LinearConstraint {
            terms: merged,
            sense,
            rhs,
        }
    }

    pub fn lhs(&self, value: impl Fn(Var) -> bool) -> i64 {
        self.terms.iter().filter(|&&(_, v)| value(v)).map(|&(c, _)| c).sum()
    }

    pub fn is_satisfied(&self, value: impl Fn(Var) -> bool) -> bool {
        self.sense.holds(self.lhs(value), self.rhs)
    }

    /// True when every 0-1 assignment satisfies the constraint.
    pub fn is_tautology(&self) -> bool {
        let min: i64 = self.terms.iter().map(|&(c, _)| c.min(0)).sum();
        let max: i64 = self.terms.iter().map(|&(c, _)| c.max(0)).sum();
        match self.sense {
            Sense::Geq => min >= self.rhs,
            Sense::Leq => max <= self.rhs,
            Sense::Eq => min == self.rhs && max == self.rhs,
        }
    }
}

/// Linear objective, always minimized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Objective {
    pub terms: Vec<(i64, Var)>,
}

impl Objective {
    pub fn evaluate(&self, value: impl Fn(Var) -> bool) -> i64 {
        self.terms.iter().filter(|&&(_, v)| value(v)).map(|&(c, _)| c).sum()
    }
}

/// A total 0-1 assignment, indexed by [`Var`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Assignment {
    pub values: Vec<bool>,
}

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment {
            values: alloc::vec![false; n],
        }
    }

    pub fn get(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values[v.index()] = value;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct IlpModel {
    variables: Vec<VarId>,
    index: BTreeMap<VarId, Var>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Objective,
    infeasible: Vec<String>,
}

impl IlpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable, returning the existing index if already present.
    pub fn add_var(&mut self, id: VarId) -> Var {
        if let Some(&v) = self.index.get(&id) {
            return v;
        }
        let v = Var(u32::try_from(self.variables.len()).expect("more than u32::MAX variables"));
        self.index.insert(id.clone(), v);
        self.variables.push(id);
        v
    }

    pub fn var(&self, id: &VarId) -> Option<Var> {
        self.index.get(id).copied()
    }

    pub fn var_id(&self, v: Var) -> &VarId {
        &self.variables[v.index()]
    }

    pub fn variables(&self) -> &[VarId] {
        &self.variables
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    /// Appends a constraint. Panics if it references an undeclared variable.
    pub fn push(&mut self, c: LinearConstraint) {
        assert!(
            c.terms.iter().all(|&(_, v)| v.index() < self.variables.len()),
            "constraint references an undeclared variable"
        );
        self.constraints.push(c);
    }

    /// Marks the model as infeasible by construction, with a reason.
    pub fn mark_infeasible(&mut self, reason: impl Into<String>) {
        self.infeasible.push(reason.into());
    }

    pub fn is_marked_infeasible(&self) -> bool {
        !self.infeasible.is_empty()
    }

    pub fn infeasibility_reasons(&self) -> &[String] {
        &self.infeasible
    }

    pub fn is_feasible(&self, a: &Assignment) -> bool {
        !self.is_marked_infeasible() && self.constraints.iter().all(|c| c.is_satisfied(|v| a.get(v)))
    }

    pub fn evaluate(&self, a: &Assignment) -> i64 {
        self.objective.evaluate(|v| a.get(v))
    }

    /// Installed units of an assignment.
    pub fn decode(&self, a: &Assignment) -> Configuration {
        self.variables
            .iter()
            .zip(&a.values)
            .filter_map(|(id, &on)| match id {
                VarId::Unit(k) if on => Some(k.clone()),
                _ => None,
            })
            .collect()
    }

    /// Renders a constraint the way it is usually written by hand, e.g.
    /// `- gasoline-engine_1 + turbo_1 >= 0`.
    pub fn display_constraint<'a>(&'a self, c: &'a LinearConstraint) -> impl fmt::Display + 'a {
        DisplayConstraint { model: self, c }
    }
}

struct DisplayConstraint<'a> {
    model: &'a IlpModel,
    c: &'a LinearConstraint,
}

impl fmt::Display for DisplayConstraint<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.c.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, &(coef, v)) in self.c.terms.iter().enumerate() {
            let name = self.model.var_id(v);
            let mag = coef.unsigned_abs();
            match (i, coef < 0) {
                (0, false) => {}
                (0, true) => f.write_str("- ")?,
                (_, false) => f.write_str(" + ")?,
                (_, true) => f.write_str(" - ")?,
            }
            if mag != 1 {
                write!(f, "{mag} ")?;
            }
            write!(f, "{name}")?;
        }
        write!(f, " {} {}", self.c.sense.symbol(), self.c.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn new_merges_and_drops_zeros() {
        let c = LinearConstraint::new([(-1, Var(0)), (1, Var(1)), (1, Var(0)), (2, Var(2))], Sense::Geq, 0);
        assert_eq!(c.terms, vec![(1, Var(1)), (2, Var(2))]);
    }

    #[test]
    fn tautology_detection() {
        assert!(LinearConstraint::new([(1, Var(0))], Sense::Geq, 0).is_tautology());
        assert!(!LinearConstraint::new([(-1, Var(0))], Sense::Geq, 0).is_tautology());
        assert!(!LinearConstraint::new([], Sense::Geq, 1).is_tautology());
        assert!(LinearConstraint::new([], Sense::Eq, 0).is_tautology());
    }

    #[test]
    fn display_matches_hand_notation() {
        let mut m = IlpModel::new();
        let g = m.add_var(VarId::unit("gasoline-engine", 1));
        let t = m.add_var(VarId::unit("turbo", 1));
        let c = LinearConstraint::new([(-1, g), (1, t)], Sense::Geq, 0);
        assert_eq!(
            m.display_constraint(&c).to_string(),
            "- gasoline-engine_1 + turbo_1 >= 0"
        );
        let c = LinearConstraint::new([(3, g), (1, t)], Sense::Leq, 3);
        assert_eq!(
            m.display_constraint(&c).to_string(),
            "3 gasoline-engine_1 + turbo_1 <= 3"
        );
    }

    #[test]
    fn add_var_is_idempotent() {
        let mut m = IlpModel::new();
        let a = m.add_var(VarId::feature("a"));
        assert_eq!(m.add_var(VarId::feature("a")), a);
        assert_eq!(m.num_vars(), 1);
    }
}
