use alloc::string::String;
use core::fmt::Write;

use super::{Atom, Configuration, PackageUnit, Request, Universe};

/// Single-line answer emitted when a problem has no solution.
pub const FAIL_MARKER: &str = "FAIL";

/// One `package`/`version`/`installed: true` stanza per installed unit,
/// blank-line separated, in `(name, version)` order.
pub fn write_configuration(c: &Configuration) -> String {
    let mut out = String::new();
    for (i, key) in c.installed.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = write!(
            out,
            "package: {}\nversion: {}\ninstalled: true\n",
            key.name, key.version
        );
    }
    out
}

pub fn write_failure() -> String {
    let mut out = String::from(FAIL_MARKER);
    out.push('\n');
    out
}

fn join_atoms<'a>(out: &mut String, atoms: impl IntoIterator<Item = &'a Atom>, sep: &str) {
    for (i, a) in atoms.into_iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        let _ = write!(out, "{a}");
    }
}

fn write_unit(out: &mut String, unit: &PackageUnit) {
    let _ = write!(out, "package: {}\nversion: {}\n", unit.name, unit.version);
    if !unit.depends.is_empty() {
        out.push_str("depends: ");
        for (i, clause) in unit.depends.clauses.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            join_atoms(out, clause, " | ");
        }
        out.push('\n');
    }
    if !unit.conflicts.is_empty() {
        out.push_str("conflicts: ");
        join_atoms(out, &unit.conflicts, ", ");
        out.push('\n');
    }
    if !unit.provides.is_empty() {
        out.push_str("provides: ");
        for (i, p) in unit.provides.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&p.feature);
            if let Some(v) = p.version {
                let _ = write!(out, " = {v}");
            }
        }
        out.push('\n');
    }
    if unit.installed {
        out.push_str("installed: true\n");
    }
}

/// Serializes a full document: every unit stanza in universe order, then the
/// request stanza.
pub fn write_document(universe: &Universe, request: &Request) -> String {
    let mut out = String::new();
    for unit in universe.units() {
        write_unit(&mut out, unit);
        out.push('\n');
    }
    out.push_str("request: \n");
    for (key, atoms) in [
        ("install", &request.install),
        ("remove", &request.remove),
        ("upgrade", &request.upgrade),
    ] {
        if !atoms.is_empty() {
            let _ = write!(out, "{key}: ");
            join_atoms(&mut out, atoms, ", ");
            out.push('\n');
        }
    }
    out
}
