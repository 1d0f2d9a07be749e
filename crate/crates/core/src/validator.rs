//! Direct checks of configurations against CUDF semantics.
//!
//! Nothing here looks at an [`crate::IlpModel`]; atom expansion is shared with
//! the encoder but constraint logic is not, so the validator can certify
//! encoder output and external answers.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cudf::{Atom, Configuration, Request, UnitKey, Universe, Version};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// The configuration names a unit the universe does not contain.
    UnknownUnit(UnitKey),
    /// No installed unit satisfies this dependency clause.
    MissingDependency {
        unit: UnitKey,
        clause: Vec<Atom>,
    },
    /// `unit` is installed together with `other`, which it conflicts with.
    Conflict {
        unit: UnitKey,
        other: UnitKey,
    },
    InstallNotSatisfied(Atom),
    RemoveNotSatisfied {
        atom: Atom,
        installed: UnitKey,
    },
    UpgradeUnknown(Atom),
    /// An upgraded package must end up with exactly one installed version.
    UpgradeNotUnique {
        atom: Atom,
        installed: usize,
    },
    /// The remaining version is older than one installed initially.
    UpgradeDowngrade {
        atom: Atom,
        version: Version,
        floor: Version,
    },
    UpgradeConstraint {
        atom: Atom,
        version: Version,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownUnit(k) => write!(f, "unknown unit {k}"),
            Violation::MissingDependency { unit, clause } => {
                write!(f, "{unit}: unsatisfied dependency `")?;
                for (i, a) in clause.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("`")
            }
            Violation::Conflict { unit, other } => write!(f, "{unit} conflicts with {other}"),
            Violation::InstallNotSatisfied(a) => write!(f, "install `{a}` not satisfied"),
            Violation::RemoveNotSatisfied { atom, installed } => {
                write!(f, "remove `{atom}` not satisfied: {installed} installed")
            }
            Violation::UpgradeUnknown(a) => write!(f, "upgrade `{a}`: no such package"),
            Violation::UpgradeNotUnique { atom, installed } => {
                write!(f, "upgrade `{atom}`: {installed} versions installed, expected 1")
            }
            Violation::UpgradeDowngrade { atom, version, floor } => write!(
                f,
                "upgrade `{atom}`: version {version} is below initially installed {floor}"
            ),
            Violation::UpgradeConstraint { atom, version } => {
                write!(f, "upgrade `{atom}`: version {version} does not match")
            }
        }
    }
}

struct Installed {
    flags: Vec<bool>,
}

impl Installed {
    fn new(u: &Universe, c: &Configuration) -> (Self, Vec<Violation>) {
        let mut flags = vec![false; u.len()];
        let mut unknown = Vec::new();
        for key in &c.installed {
            match u.unit_index(&key.name, key.version) {
                Some(i) => flags[i] = true,
                None => unknown.push(Violation::UnknownUnit(key.clone())),
            }
        }
        (Installed { flags }, unknown)
    }

    fn satisfying(&self, u: &Universe, atom: &Atom) -> Option<usize> {
        u.expand_atom(atom).into_iter().find(|&i| self.flags[i])
    }
}

/// Every dependency clause of every installed unit has an installed
/// candidate, and no installed unit shares the configuration with something
/// it conflicts with (other than itself).
pub fn check_consistency(u: &Universe, c: &Configuration) -> Vec<Violation> {
    let (installed, mut out) = Installed::new(u, c);
    for (idx, unit) in u.units().iter().enumerate() {
        if !installed.flags[idx] {
            continue;
        }
        for clause in &unit.depends.clauses {
            if !clause.iter().any(|a| installed.satisfying(u, a).is_some()) {
                out.push(Violation::MissingDependency {
                    unit: unit.key(),
                    clause: clause.clone(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        for atom in &unit.conflicts {
            for other in u.expand_atom(atom) {
                if other != idx && installed.flags[other] && seen.insert(other) {
                    out.push(Violation::Conflict {
                        unit: unit.key(),
                        other: u.unit(other).key(),
                    });
                }
            }
        }
    }
    out
}

/// Install atoms are satisfied, remove atoms are not, and every upgraded
/// package has exactly one installed version, no older than any version
/// installed in `init` and matching the atom's constraint.
pub fn check_request(u: &Universe, init: &Configuration, r: &Request, c: &Configuration) -> Vec<Violation> {
    let (installed, _) = Installed::new(u, c);
    let mut out = Vec::new();
    for atom in &r.install {
        if installed.satisfying(u, atom).is_none() {
            out.push(Violation::InstallNotSatisfied(atom.clone()));
        }
    }
    for atom in &r.remove {
        if let Some(i) = installed.satisfying(u, atom) {
            out.push(Violation::RemoveNotSatisfied {
                atom: atom.clone(),
                installed: u.unit(i).key(),
            });
        }
    }
    for atom in &r.upgrade {
        let versions = u.versions(&atom.name);
        if versions.is_empty() {
            out.push(Violation::UpgradeUnknown(atom.clone()));
            continue;
        }
        let now: Vec<Version> = versions
            .iter()
            .filter(|&&(_, i)| installed.flags[i])
            .map(|&(v, _)| v)
            .collect();
        if now.len() != 1 {
            out.push(Violation::UpgradeNotUnique {
                atom: atom.clone(),
                installed: now.len(),
            });
            continue;
        }
        let version = now[0];
        if let Some(floor) = init.versions_of(&atom.name).max() {
            if version < floor {
                out.push(Violation::UpgradeDowngrade {
                    atom: atom.clone(),
                    version,
                    floor,
                });
            }
        }
        if !atom.constraint.matches(version) {
            out.push(Violation::UpgradeConstraint {
                atom: atom.clone(),
                version,
            });
        }
    }
    out
}

/// Counts of what changed between two configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Diff {
    /// Names with a version installed initially and none at the end.
    pub removed_functionalities: usize,
    /// Units whose installed status differs.
    pub changed_units: usize,
}

pub fn diff_configurations(init: &Configuration, fin: &Configuration, _u: &Universe) -> Diff {
    let names: BTreeSet<&str> = init.installed.iter().map(|k| k.name.as_str()).collect();
    let removed_functionalities = names
        .into_iter()
        .filter(|name| fin.versions_of(name).next().is_none())
        .count();
    let changed_units = init.installed.symmetric_difference(&fin.installed).count();
    Diff {
        removed_functionalities,
        changed_units,
    }
}
