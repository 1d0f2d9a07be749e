//! CUDF data model: package units, version constraints, requests and the
//! indexed [`Universe`] with its provider map.

mod parse;
mod write;

pub use parse::{parse_configuration, parse_document, ParseError, ParseErrorKind};
pub use write::{write_configuration, write_document, write_failure, FAIL_MARKER};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Package versions are positive integers ordered numerically.
pub type Version = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Eq,
    Neq,
    Geq,
    Leq,
    Gt,
    Lt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Neq => "!=",
            Relation::Geq => ">=",
            Relation::Leq => "<=",
            Relation::Gt => ">",
            Relation::Lt => "<",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Self> {
        Some(match s {
            "=" => Relation::Eq,
            "!=" => Relation::Neq,
            ">=" => Relation::Geq,
            "<=" => Relation::Leq,
            ">" => Relation::Gt,
            "<" => Relation::Lt,
            _ => return None,
        })
    }
}

/// A filter on versions. `Any` carries no version; every other relation
/// carries a version `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VersionConstraint {
    Any,
    Rel(Relation, Version),
}

impl VersionConstraint {
    pub fn matches(&self, v: Version) -> bool {
        match *self {
            VersionConstraint::Any => true,
            VersionConstraint::Rel(rel, k) => match rel {
                Relation::Eq => v == k,
                Relation::Neq => v != k,
                Relation::Geq => v >= k,
                Relation::Leq => v <= k,
                Relation::Gt => v > k,
                Relation::Lt => v < k,
            },
        }
    }

    pub fn is_any(&self) -> bool {
        matches!(self, VersionConstraint::Any)
    }
}

impl fmt::Display for VersionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VersionConstraint::Any => Ok(()),
            VersionConstraint::Rel(rel, v) => write!(f, "{} {}", rel.symbol(), v),
        }
    }
}

/// A package or feature name, optionally filtered by a version constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub name: String,
    pub constraint: VersionConstraint,
}

impl Atom {
    pub fn any(name: impl Into<String>) -> Self {
        Atom {
            name: name.into(),
            constraint: VersionConstraint::Any,
        }
    }

    pub fn with(name: impl Into<String>, rel: Relation, version: Version) -> Self {
        Atom {
            name: name.into(),
            constraint: VersionConstraint::Rel(rel, version),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.constraint {
            VersionConstraint::Any => f.write_str(&self.name),
            c => write!(f, "{} {}", self.name, c),
        }
    }
}

/// Dependencies in conjunctive normal form. An empty clause list is always
/// satisfied; individual clauses are never empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependsFormula {
    pub clauses: Vec<Vec<Atom>>,
}

impl DependsFormula {
    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// A `provides` entry: a feature name with an optional feature version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provide {
    pub feature: String,
    pub version: Option<Version>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageUnit {
    pub name: String,
    pub version: Version,
    pub depends: DependsFormula,
    pub conflicts: Vec<Atom>,
    pub provides: Vec<Provide>,
    pub installed: bool,
}

impl PackageUnit {
    pub fn new(name: impl Into<String>, version: Version) -> Self {
        PackageUnit {
            name: name.into(),
            version,
            depends: DependsFormula::default(),
            conflicts: Vec::new(),
            provides: Vec::new(),
            installed: false,
        }
    }

    pub fn key(&self) -> UnitKey {
        UnitKey::new(self.name.clone(), self.version)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Request {
    pub install: Vec<Atom>,
    pub remove: Vec<Atom>,
    pub upgrade: Vec<Atom>,
}

impl Request {
    pub fn is_empty(&self) -> bool {
        self.install.is_empty() && self.remove.is_empty() && self.upgrade.is_empty()
    }
}

/// A `(name, version)` pair, ordered by name then version.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitKey {
    pub name: String,
    pub version: Version,
}

impl UnitKey {
    pub fn new(name: impl Into<String>, version: Version) -> Self {
        UnitKey {
            name: name.into(),
            version,
        }
    }
}

impl fmt::Display for UnitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.name, self.version)
    }
}

/// A set of installed units.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Configuration {
    pub installed: BTreeSet<UnitKey>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, name: &str, version: Version) -> bool {
        // BTreeSet<UnitKey> cannot be probed with borrowed parts, so scan the
        // name's range instead of allocating a key.
        self.versions_of(name).any(|v| v == version)
    }

    /// Installed versions of `name`, ascending.
    pub fn versions_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = Version> + 'a {
        let start = UnitKey::new(name, 0);
        self.installed
            .range(start..)
            .take_while(move |k| k.name == name)
            .map(|k| k.version)
    }

    pub fn len(&self) -> usize {
        self.installed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.installed.is_empty()
    }
}

impl FromIterator<UnitKey> for Configuration {
    fn from_iter<I: IntoIterator<Item = UnitKey>>(iter: I) -> Self {
        Configuration {
            installed: iter.into_iter().collect(),
        }
    }
}

/// One entry of the provider map: unit `unit` provides the feature, with the
/// given feature version (`None` for an unversioned provide).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provider {
    pub unit: usize,
    pub feature_version: Option<Version>,
}

/// Returned when two stanzas describe the same `(name, version)`.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("duplicate package {name} version {version}")]
pub struct DuplicateUnit {
    pub name: String,
    pub version: Version,
}

/// Indexed package universe.
///
/// Every unit is registered in `providers` under its own name with its real
/// version, and under each feature of its `provides` list.
#[derive(Debug, Clone, Default)]
pub struct Universe {
    units: Vec<PackageUnit>,
    by_name: BTreeMap<String, Vec<(Version, usize)>>,
    providers: BTreeMap<String, Vec<Provider>>,
}

impl Universe {
    pub fn new(units: Vec<PackageUnit>) -> Result<Self, DuplicateUnit> {
        let mut by_name: BTreeMap<String, Vec<(Version, usize)>> = BTreeMap::new();
        let mut providers: BTreeMap<String, Vec<Provider>> = BTreeMap::new();
        for (idx, unit) in units.iter().enumerate() {
            let versions = by_name.entry(unit.name.clone()).or_default();
            match versions.binary_search_by_key(&unit.version, |&(v, _)| v) {
                Ok(_) => {
                    return Err(DuplicateUnit {
                        name: unit.name.clone(),
                        version: unit.version,
                    })
                }
                Err(pos) => versions.insert(pos, (unit.version, idx)),
            }
            providers.entry(unit.name.clone()).or_default().push(Provider {
                unit: idx,
                feature_version: Some(unit.version),
            });
            for p in &unit.provides {
                providers.entry(p.feature.clone()).or_default().push(Provider {
                    unit: idx,
                    feature_version: p.version,
                });
            }
        }
        Ok(Universe {
            units,
            by_name,
            providers,
        })
    }

    pub fn units(&self) -> &[PackageUnit] {
        &self.units
    }

    pub fn unit(&self, idx: usize) -> &PackageUnit {
        &self.units[idx]
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Package names that have at least one real unit, in name order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.by_name.keys().map(String::as_str)
    }

    pub fn name_count(&self) -> usize {
        self.by_name.len()
    }

    /// `(version, unit index)` pairs of a package name, strictly increasing
    /// by version. Empty for unknown or purely virtual names.
    pub fn versions(&self, name: &str) -> &[(Version, usize)] {
        self.by_name.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn unit_index(&self, name: &str, version: Version) -> Option<usize> {
        let versions = self.versions(name);
        versions
            .binary_search_by_key(&version, |&(v, _)| v)
            .ok()
            .map(|pos| versions[pos].1)
    }

    pub fn providers(&self, feature: &str) -> &[Provider] {
        self.providers.get(feature).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn provider_map(&self) -> impl Iterator<Item = (&str, &[Provider])> {
        self.providers.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// All units that satisfy `atom`, as ascending unit indices.
    ///
    /// A unit matches when it carries the atom's name with a matching version,
    /// or provides the feature with a matching feature version. Unversioned
    /// provides only satisfy unconstrained atoms.
    pub fn expand_atom(&self, atom: &Atom) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .providers(&atom.name)
            .iter()
            .filter(|p| match p.feature_version {
                Some(v) => atom.constraint.matches(v),
                None => atom.constraint.is_any(),
            })
            .map(|p| p.unit)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Configuration made of every unit flagged `installed`.
    pub fn initial_configuration(&self) -> Configuration {
        self.units
            .iter()
            .filter(|u| u.installed)
            .map(PackageUnit::key)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn unit(name: &str, version: Version) -> PackageUnit {
        PackageUnit::new(name, version)
    }

    #[test]
    fn match_examples() {
        assert!(VersionConstraint::Rel(Relation::Eq, 1).matches(1));
        assert!(!VersionConstraint::Rel(Relation::Geq, 2).matches(1));
        assert!(VersionConstraint::Any.matches(7));
        assert!(VersionConstraint::Rel(Relation::Neq, 3).matches(4));
        assert!(!VersionConstraint::Rel(Relation::Lt, 3).matches(3));
        assert!(VersionConstraint::Rel(Relation::Leq, 3).matches(3));
        assert!(VersionConstraint::Rel(Relation::Gt, 3).matches(4));
    }

    #[test]
    fn duplicate_units_rejected() {
        let err = Universe::new(vec![unit("a", 1), unit("a", 1)]).unwrap_err();
        assert_eq!(err.name, "a");
        assert_eq!(err.version, 1);
    }

    #[test]
    fn versions_sorted_even_when_declared_out_of_order() {
        let u = Universe::new(vec![unit("a", 9), unit("a", 2), unit("a", 5)]).unwrap();
        let vs: Vec<Version> = u.versions("a").iter().map(|&(v, _)| v).collect();
        assert_eq!(vs, vec![2, 5, 9]);
        assert_eq!(u.unit_index("a", 5), Some(2));
        assert_eq!(u.unit_index("a", 3), None);
    }

    #[test]
    fn versioned_and_unversioned_provides() {
        let mut a = unit("a", 1);
        a.provides.push(Provide {
            feature: "f".into(),
            version: Some(3),
        });
        let mut b = unit("b", 1);
        b.provides.push(Provide {
            feature: "f".into(),
            version: None,
        });
        let u = Universe::new(vec![a, b]).unwrap();
        assert_eq!(u.expand_atom(&Atom::any("f")), vec![0, 1]);
        assert_eq!(u.expand_atom(&Atom::with("f", Relation::Geq, 2)), vec![0]);
        assert_eq!(u.expand_atom(&Atom::with("f", Relation::Eq, 1)), Vec::<usize>::new());
        assert!(u.expand_atom(&Atom::any("nonexistent-pkg")).is_empty());
    }

    #[test]
    fn self_provide_deduplicated() {
        let mut a = unit("a", 1);
        a.provides.push(Provide {
            feature: "a".into(),
            version: None,
        });
        let u = Universe::new(vec![a]).unwrap();
        assert_eq!(u.expand_atom(&Atom::any("a")), vec![0]);
    }

    #[test]
    fn configuration_versions_of() {
        let c: Configuration = [UnitKey::new("a", 3), UnitKey::new("ab", 1), UnitKey::new("a", 1)]
            .into_iter()
            .collect();
        assert_eq!(c.versions_of("a").collect::<Vec<_>>(), vec![1, 3]);
        assert!(c.contains("ab", 1));
        assert!(!c.contains("ab", 2));
    }

    fn relation() -> impl Strategy<Value = Relation> {
        prop_oneof![
            Just(Relation::Eq),
            Just(Relation::Neq),
            Just(Relation::Geq),
            Just(Relation::Leq),
            Just(Relation::Gt),
            Just(Relation::Lt),
        ]
    }

    proptest! {
        #[test]
        fn geq_is_upward_closed(k in 1u64..50, v in 1u64..50, w in 1u64..50) {
            let c = VersionConstraint::Rel(Relation::Geq, k);
            if c.matches(v) && w >= v {
                prop_assert!(c.matches(w));
            }
        }

        #[test]
        fn every_unit_expands_under_its_own_name(versions in proptest::collection::btree_set(1u64..20, 1..6)) {
            let units: Vec<PackageUnit> = versions.iter().map(|&v| unit("p", v)).collect();
            let u = Universe::new(units).unwrap();
            let all = u.expand_atom(&Atom::any("p"));
            for (idx, _) in u.units().iter().enumerate() {
                prop_assert!(all.contains(&idx));
            }
        }

        #[test]
        fn expansion_agrees_with_direct_filter(
            versions in proptest::collection::btree_set(1u64..20, 1..6),
            rel in relation(),
            k in 1u64..20,
        ) {
            let units: Vec<PackageUnit> = versions.iter().map(|&v| unit("p", v)).collect();
            let u = Universe::new(units).unwrap();
            let c = VersionConstraint::Rel(rel, k);
            let got = u.expand_atom(&Atom { name: "p".into(), constraint: c });
            let want: Vec<usize> = u.units().iter().enumerate()
                .filter(|(_, x)| c.matches(x.version)).map(|(i, _)| i).collect();
            prop_assert_eq!(got, want);
        }
    }
}
