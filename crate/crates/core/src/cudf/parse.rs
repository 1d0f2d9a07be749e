use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{
    Atom, Configuration, DependsFormula, PackageUnit, Provide, Relation, Request, Universe, Version, VersionConstraint,
    FAIL_MARKER,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected `key: value`")]
    MissingColon,
    #[error("package stanza has no name")]
    MissingName,
    #[error("package `{0}` has no version")]
    MissingVersion(String),
    #[error("invalid version `{0}`")]
    InvalidVersion(String),
    #[error("malformed atom `{0}`")]
    MalformedAtom(String),
    #[error("unknown relation `{0}`")]
    BadRelation(String),
    #[error("provides only accept `=` versions, got `{0}`")]
    BadProvide(String),
    #[error("invalid boolean `{0}`")]
    InvalidBool(String),
    #[error("duplicate package {0} version {1}")]
    Duplicate(String, Version),
    #[error("unexpected stanza `{0}`")]
    UnexpectedStanza(String),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

struct Field<'a> {
    line: usize,
    key: &'a str,
    value: String,
}

/// Splits the document into stanzas of `key: value` fields. Blank lines end
/// a stanza, `#` lines are comments, and lines starting with whitespace
/// continue the previous value.
fn stanzas(text: &str) -> Result<Vec<Vec<Field<'_>>>, ParseError> {
    let mut out = Vec::new();
    let mut current: Vec<Field<'_>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            if !current.is_empty() {
                out.push(core::mem::take(&mut current));
            }
            continue;
        }
        if raw.starts_with('#') {
            continue;
        }
        if raw.starts_with([' ', '\t']) {
            if let Some(last) = current.last_mut() {
                last.value.push(' ');
                last.value.push_str(raw.trim());
                continue;
            }
        }
        let (key, value) = raw
            .split_once(':')
            .ok_or_else(|| err(line, ParseErrorKind::MissingColon))?;
        current.push(Field {
            line,
            key: key.trim(),
            value: value.trim().to_string(),
        });
    }
    if !current.is_empty() {
        out.push(current);
    }
    Ok(out)
}

fn is_name_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, ',' | '|' | '=' | '!' | '<' | '>'))
}

pub(crate) fn parse_atom(text: &str, line: usize) -> Result<Atom, ParseError> {
    let text = text.trim();
    let name_end = text.find(|c| !is_name_char(c)).unwrap_or(text.len());
    let name = &text[..name_end];
    if name.is_empty() {
        return Err(err(line, ParseErrorKind::MalformedAtom(text.to_string())));
    }
    let rest = text[name_end..].trim_start();
    if rest.is_empty() {
        return Ok(Atom::any(name));
    }
    let op_end = rest.find(|c| !matches!(c, '=' | '!' | '<' | '>')).unwrap_or(rest.len());
    if op_end == 0 {
        return Err(err(line, ParseErrorKind::MalformedAtom(text.to_string())));
    }
    let rel = Relation::from_symbol(&rest[..op_end])
        .ok_or_else(|| err(line, ParseErrorKind::BadRelation(rest[..op_end].to_string())))?;
    let version = parse_version(rest[op_end..].trim(), line)?;
    Ok(Atom {
        name: name.to_string(),
        constraint: VersionConstraint::Rel(rel, version),
    })
}

fn parse_version(text: &str, line: usize) -> Result<Version, ParseError> {
    match text.parse::<Version>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(err(line, ParseErrorKind::InvalidVersion(text.to_string()))),
    }
}

fn parse_atom_list(value: &str, line: usize) -> Result<Vec<Atom>, ParseError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|a| parse_atom(a, line)).collect()
}

fn parse_depends(value: &str, line: usize) -> Result<DependsFormula, ParseError> {
    if value.trim().is_empty() {
        return Ok(DependsFormula::default());
    }
    let clauses = value
        .split(',')
        .map(|clause| clause.split('|').map(|a| parse_atom(a, line)).collect())
        .collect::<Result<Vec<Vec<Atom>>, _>>()?;
    Ok(DependsFormula { clauses })
}

fn parse_provides(value: &str, line: usize) -> Result<Vec<Provide>, ParseError> {
    parse_atom_list(value, line)?
        .into_iter()
        .map(|atom| match atom.constraint {
            VersionConstraint::Any => Ok(Provide {
                feature: atom.name,
                version: None,
            }),
            VersionConstraint::Rel(Relation::Eq, v) => Ok(Provide {
                feature: atom.name,
                version: Some(v),
            }),
            _ => Err(err(line, ParseErrorKind::BadProvide(atom.to_string()))),
        })
        .collect()
}

fn parse_bool(value: &str, line: usize) -> Result<bool, ParseError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(err(line, ParseErrorKind::InvalidBool(other.to_string()))),
    }
}

fn parse_package(fields: &[Field<'_>]) -> Result<PackageUnit, ParseError> {
    let head = &fields[0];
    if head.value.is_empty() {
        return Err(err(head.line, ParseErrorKind::MissingName));
    }
    let mut unit = PackageUnit::new(head.value.clone(), 0);
    let mut has_version = false;
    for f in &fields[1..] {
        match f.key {
            "version" => {
                unit.version = parse_version(&f.value, f.line)?;
                has_version = true;
            }
            "depends" => unit.depends = parse_depends(&f.value, f.line)?,
            "conflicts" => unit.conflicts = parse_atom_list(&f.value, f.line)?,
            "provides" => unit.provides = parse_provides(&f.value, f.line)?,
            "installed" => unit.installed = parse_bool(&f.value, f.line)?,
            _ => {}
        }
    }
    if !has_version {
        return Err(err(head.line, ParseErrorKind::MissingVersion(unit.name)));
    }
    Ok(unit)
}

fn parse_request(fields: &[Field<'_>], request: &mut Request) -> Result<(), ParseError> {
    for f in &fields[1..] {
        let target = match f.key {
            "install" => &mut request.install,
            "remove" => &mut request.remove,
            "upgrade" => &mut request.upgrade,
            _ => continue,
        };
        target.extend(parse_atom_list(&f.value, f.line)?);
    }
    Ok(())
}

/// Parses a CUDF document into its universe and request.
///
/// A leading `preamble:` stanza is skipped, unknown keys are ignored and a
/// missing `installed` field means `false`.
pub fn parse_document(text: &str) -> Result<(Universe, Request), ParseError> {
    let mut units = Vec::new();
    let mut seen: BTreeSet<(String, Version)> = BTreeSet::new();
    let mut request = Request::default();
    for stanza in stanzas(text)? {
        match stanza[0].key {
            "package" => {
                let unit = parse_package(&stanza)?;
                if !seen.insert((unit.name.clone(), unit.version)) {
                    return Err(err(stanza[0].line, ParseErrorKind::Duplicate(unit.name, unit.version)));
                }
                units.push(unit);
            }
            "request" => parse_request(&stanza, &mut request)?,
            "preamble" => {}
            other => return Err(err(stanza[0].line, ParseErrorKind::UnexpectedStanza(other.to_string()))),
        }
    }
    let universe = Universe::new(units).map_err(|dup| err(0, ParseErrorKind::Duplicate(dup.name, dup.version)))?;
    Ok((universe, request))
}

/// Parses a solver answer: either the `FAIL` marker (returns `None`) or
/// package stanzas, of which those flagged `installed: true` form the
/// configuration.
pub fn parse_configuration(text: &str) -> Result<Option<Configuration>, ParseError> {
    if text.trim() == FAIL_MARKER {
        return Ok(None);
    }
    let (universe, _) = parse_document(text)?;
    Ok(Some(universe.initial_configuration()))
}
