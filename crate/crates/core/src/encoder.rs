//! Translation of an upgradeability problem into an [`IlpModel`].
//!
//! Variable layout is fixed: unit `i` of the universe is `Var(i)`, and when
//! the criteria need them, the feature variable of the `k`-th package name
//! (in name order) is `Var(units + k)`.
//!
//! Constraint forms, for a unit variable `p`:
//!
//! - dependencies whose clause expands to a single unit are batched into
//!   `-n·p + Σ q_i >= 0`; every other clause becomes `-p + Σ q_jk >= 0`, and a
//!   clause with no candidate at all becomes `-p >= 0`;
//! - conflicts become `n'·p + Σ c <= n'` over the conflict expansion
//!   without `p` itself;
//! - feature variables `F` are tied to their versions by
//!   `-F + Σ p_v >= 0` and `n''·F - Σ p_v >= 0`.

use alloc::format;
use alloc::vec::Vec;

use crate::cudf::{Atom, Configuration, Universe};
use crate::model::{IlpModel, LinearConstraint, Objective, Sense, Var, VarId};

/// Which objective to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CriteriaMode {
    /// Removed functionalities first, then modifications, as one weighted sum.
    #[default]
    Aggregate,
    /// Removed functionalities only.
    Criterion1,
    /// Modifications only.
    Criterion2,
}

impl CriteriaMode {
    pub fn needs_features(self) -> bool {
        !matches!(self, CriteriaMode::Criterion2)
    }
}

/// Weight applied to the first criterion in aggregate mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// `|P| + 1`: strictly dominates any change in the second criterion.
    #[default]
    Strict,
    /// `|P|`. Can tie across first-criterion values.
    Cardinality,
}

impl Weighting {
    pub fn weight(self, units: usize) -> i64 {
        let p = units as i64;
        match self {
            Weighting::Strict => p + 1,
            Weighting::Cardinality => p,
        }
    }
}

pub fn unit_var(idx: usize) -> Var {
    Var(idx as u32)
}

/// Feature variable of the `rank`-th package name.
pub fn feature_var(u: &Universe, rank: usize) -> Var {
    Var((u.len() + rank) as u32)
}

fn union_expansion<'a>(u: &Universe, atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<usize> {
    let mut out: Vec<usize> = atoms.into_iter().flat_map(|a| u.expand_atom(a)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Dependency constraints of one unit.
pub fn encode_depends(u: &Universe, idx: usize) -> Vec<LinearConstraint> {
    let p = unit_var(idx);
    let mut singles: Vec<usize> = Vec::new();
    let mut others = Vec::new();
    for clause in &u.unit(idx).depends.clauses {
        let targets = union_expansion(u, clause);
        match targets.as_slice() {
            [] => others.push(LinearConstraint::new([(-1, p)], Sense::Geq, 0)),
            &[single] => {
                if !singles.contains(&single) {
                    singles.push(single);
                }
            }
            many => others.push(LinearConstraint::new(
                core::iter::once((-1, p)).chain(many.iter().map(|&t| (1, unit_var(t)))),
                Sense::Geq,
                0,
            )),
        }
    }
    let mut out = Vec::with_capacity(others.len() + 1);
    if !singles.is_empty() {
        let n = singles.len() as i64;
        out.push(LinearConstraint::new(
            core::iter::once((-n, p)).chain(singles.iter().map(|&t| (1, unit_var(t)))),
            Sense::Geq,
            0,
        ));
    }
    out.extend(others);
    out.retain(|c| !c.is_tautology());
    out
}

/// Conflict constraint of one unit, if it conflicts with anything besides
/// itself.
pub fn encode_conflicts(u: &Universe, idx: usize) -> Vec<LinearConstraint> {
    let mut targets = union_expansion(u, &u.unit(idx).conflicts);
    targets.retain(|&t| t != idx);
    if targets.is_empty() {
        return Vec::new();
    }
    let n = targets.len() as i64;
    alloc::vec![LinearConstraint::new(
        core::iter::once((n, unit_var(idx))).chain(targets.iter().map(|&t| (1, unit_var(t)))),
        Sense::Leq,
        n,
    )]
}

/// Request constraints plus the reasons the request is unsatisfiable by
/// construction (empty when it is not).
#[derive(Debug, Clone, Default)]
pub struct RequestEncoding {
    pub constraints: Vec<LinearConstraint>,
    pub infeasible: Vec<alloc::string::String>,
}

impl RequestEncoding {
    fn unsatisfiable(&mut self, reason: alloc::string::String) {
        self.constraints.push(LinearConstraint::new([], Sense::Geq, 1));
        self.infeasible.push(reason);
    }
}

fn sum_of(units: &[usize], sense: Sense, rhs: i64) -> LinearConstraint {
    LinearConstraint::new(units.iter().map(|&t| (1, unit_var(t))), sense, rhs)
}

pub fn encode_request(u: &Universe, init: &Configuration, r: &crate::cudf::Request) -> RequestEncoding {
    let mut enc = RequestEncoding::default();
    for atom in &r.install {
        let targets = u.expand_atom(atom);
        match targets.len() {
            0 => enc.unsatisfiable(format!("install `{atom}`: no package satisfies it")),
            1 => enc.constraints.push(sum_of(&targets, Sense::Eq, 1)),
            _ => enc.constraints.push(sum_of(&targets, Sense::Geq, 1)),
        }
    }
    for atom in &r.remove {
        let targets = u.expand_atom(atom);
        if !targets.is_empty() {
            enc.constraints.push(sum_of(&targets, Sense::Eq, 0));
        }
    }
    for atom in &r.upgrade {
        let versions = u.versions(&atom.name);
        if versions.is_empty() {
            enc.unsatisfiable(format!("upgrade `{atom}`: no such package"));
            continue;
        }
        let floor = init.versions_of(&atom.name).max().unwrap_or(0);
        let (keep, drop): (Vec<_>, Vec<_>) = versions
            .iter()
            .partition(|&&(v, _)| v >= floor && atom.constraint.matches(v));
        let drop: Vec<usize> = drop.into_iter().map(|&(_, i)| i).collect();
        let keep: Vec<usize> = keep.into_iter().map(|&(_, i)| i).collect();
        if !drop.is_empty() {
            enc.constraints.push(sum_of(&drop, Sense::Eq, 0));
        }
        if keep.is_empty() {
            enc.unsatisfiable(format!("upgrade `{atom}`: no version at or above the installed one"));
        } else {
            enc.constraints.push(sum_of(&keep, Sense::Eq, 1));
        }
    }
    enc
}

/// Links each package's feature variable to its versions.
pub fn encode_feature_links(u: &Universe) -> Vec<LinearConstraint> {
    let mut out = Vec::with_capacity(2 * u.name_count());
    for (rank, name) in u.names().enumerate() {
        let f = feature_var(u, rank);
        let versions = u.versions(name);
        let n = versions.len() as i64;
        out.push(LinearConstraint::new(
            core::iter::once((-1, f)).chain(versions.iter().map(|&(_, i)| (1, unit_var(i)))),
            Sense::Geq,
            0,
        ));
        out.push(LinearConstraint::new(
            core::iter::once((n, f)).chain(versions.iter().map(|&(_, i)| (-1, unit_var(i)))),
            Sense::Geq,
            0,
        ));
    }
    out
}

/// Feature variables of names with an installed version in `init`.
fn installed_features(u: &Universe, init: &Configuration) -> Vec<Var> {
    u.names()
        .enumerate()
        .filter(|(_, name)| init.versions_of(name).any(|v| u.unit_index(name, v).is_some()))
        .map(|(rank, _)| feature_var(u, rank))
        .collect()
}

pub fn build_objective(u: &Universe, init: &Configuration, mode: CriteriaMode, weighting: Weighting) -> Objective {
    let mut terms = Vec::new();
    let w = match mode {
        CriteriaMode::Aggregate => Some(weighting.weight(u.len())),
        CriteriaMode::Criterion1 => Some(1),
        CriteriaMode::Criterion2 => None,
    };
    if let Some(w) = w {
        terms.extend(installed_features(u, init).into_iter().map(|f| (-w, f)));
    }
    if mode != CriteriaMode::Criterion1 {
        for (idx, unit) in u.units().iter().enumerate() {
            let c = if init.contains(&unit.name, unit.version) { -1 } else { 1 };
            terms.push((c, unit_var(idx)));
        }
    }
    terms.retain(|&(c, _)| c != 0);
    Objective { terms }
}

/// Builds the full model. Infeasibility of the request is recorded on the
/// model rather than reported as an error.
pub fn build_model(
    u: &Universe,
    init: &Configuration,
    r: &crate::cudf::Request,
    mode: CriteriaMode,
    weighting: Weighting,
) -> IlpModel {
    let mut model = IlpModel::new();
    for unit in u.units() {
        model.add_var(VarId::Unit(unit.key()));
    }
    if mode.needs_features() {
        for name in u.names() {
            model.add_var(VarId::feature(name));
        }
    }
    for idx in 0..u.len() {
        for c in encode_depends(u, idx) {
            model.push(c);
        }
        for c in encode_conflicts(u, idx) {
            model.push(c);
        }
    }
    let request = encode_request(u, init, r);
    for c in request.constraints {
        model.push(c);
    }
    for reason in request.infeasible {
        model.mark_infeasible(reason);
    }
    if mode.needs_features() {
        for c in encode_feature_links(u) {
            model.push(c);
        }
    }
    model.objective = build_objective(u, init, mode, weighting);
    model
}

/// Values of the two criteria for a final configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CriteriaValues {
    /// `-(installed names still having some version installed)`.
    pub removed_functionalities: i64,
    /// `-(kept units) + (newly installed units)`.
    pub modifications: i64,
}

impl CriteriaValues {
    pub fn aggregate(&self, weight: i64) -> i64 {
        weight * self.removed_functionalities + self.modifications
    }
}

/// Evaluates both criteria on a configuration by counting, without a model.
pub fn criteria_values(u: &Universe, init: &Configuration, fin: &Configuration) -> CriteriaValues {
    let mut c1 = 0;
    for name in u.names() {
        let was = init.versions_of(name).any(|v| u.unit_index(name, v).is_some());
        if was && fin.versions_of(name).next().is_some() {
            c1 -= 1;
        }
    }
    let mut c2 = 0;
    for unit in u.units() {
        match (
            init.contains(&unit.name, unit.version),
            fin.contains(&unit.name, unit.version),
        ) {
            (true, true) => c2 -= 1,
            (false, true) => c2 += 1,
            _ => {}
        }
    }
    CriteriaValues {
        removed_functionalities: c1,
        modifications: c2,
    }
}
