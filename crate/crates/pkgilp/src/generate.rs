//! Seeded instance generators: random requests over a fixed base, synthetic
//! large universes and tiny universes for exhaustive cross-checks.

use std::collections::{BTreeSet, VecDeque};

use pkgilp_core::cudf::{
    Atom, Configuration, DependsFormula, PackageUnit, Provide, Relation, Request, Universe, Version,
};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("asked for {wanted} {what} but only {available} candidates exist")]
    InsufficientCandidates {
        what: &'static str,
        wanted: usize,
        available: usize,
    },
}

fn sample<'a>(
    rng: &mut ChaCha8Rng,
    candidates: &[&'a str],
    n: usize,
    what: &'static str,
) -> Result<Vec<&'a str>, GenError> {
    if n > candidates.len() {
        return Err(GenError::InsufficientCandidates {
            what,
            wanted: n,
            available: candidates.len(),
        });
    }
    let mut picked: Vec<&str> = index::sample(rng, candidates.len(), n)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Samples `n_install` distinct names with no installed version as
/// unversioned install atoms and `n_upgrade` distinct installed names as
/// upgrade atoms, without replacement. Deterministic in `seed`.
pub fn gen_random(
    universe: &Universe,
    init: &Configuration,
    n_install: usize,
    n_upgrade: usize,
    seed: u64,
) -> Result<Request, GenError> {
    let (installed, uninstalled): (Vec<&str>, Vec<&str>) = universe
        .names()
        .partition(|name| init.versions_of(name).next().is_some());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let install = sample(&mut rng, &uninstalled, n_install, "install targets")?;
    let upgrade = sample(&mut rng, &installed, n_upgrade, "upgrade targets")?;
    Ok(Request {
        install: install.into_iter().map(Atom::any).collect(),
        remove: Vec::new(),
        upgrade: upgrade.into_iter().map(Atom::any).collect(),
    })
}

/// Shape of a synthetic universe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthParams {
    /// Lower bound on the number of units; names are added until reached.
    pub units: usize,
    pub max_versions: u64,
    /// Upper bound on depends clauses per unit.
    pub max_depends: usize,
    /// Probability that a name is an installation root.
    pub root_fraction: f64,
    /// Number of virtual features offered through `provides`.
    pub features: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            units: 1000,
            max_versions: 4,
            max_depends: 3,
            root_fraction: 0.02,
            features: 50,
        }
    }
}

fn pkg_name(i: usize) -> String {
    format!("pkg{i:05}")
}

/// A large universe with distribution-like structure: dependencies only
/// point to later names (so they never cycle), every other name conflicts
/// with itself, a few units break older versions of other packages and some
/// provide virtual features. The installed set is the newest version of a
/// random set of roots closed under dependencies, which is consistent.
pub fn synth_universe(params: &SynthParams, seed: u64) -> Universe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_versions = params.max_versions.max(1);
    let mut counts: Vec<Version> = Vec::new();
    let mut total = 0usize;
    while total < params.units.max(1) {
        let k = rng.gen_range(1..=max_versions);
        counts.push(k);
        total += k as usize;
    }
    let n = counts.len();
    let window = 200.min(n);
    let mut units: Vec<PackageUnit> = Vec::with_capacity(total);
    for (i, &k) in counts.iter().enumerate() {
        let self_conflict = rng.gen_bool(0.5);
        for v in 1..=k {
            let mut unit = PackageUnit::new(pkg_name(i), v);
            if i + 1 < n {
                let later = (i + 1)..(i + 1 + window).min(n);
                for _ in 0..rng.gen_range(0..=params.max_depends) {
                    let j = rng.gen_range(later.clone());
                    let atom = if rng.gen_bool(0.3) {
                        Atom::with(pkg_name(j), Relation::Geq, rng.gen_range(1..=counts[j]))
                    } else {
                        Atom::any(pkg_name(j))
                    };
                    let mut clause = vec![atom];
                    if params.features > 0 && rng.gen_bool(0.1) {
                        clause.push(Atom::any(format!("feature{}", rng.gen_range(0..params.features))));
                    }
                    unit.depends.clauses.push(clause);
                }
            }
            if self_conflict {
                unit.conflicts.push(Atom::any(pkg_name(i)));
            }
            if rng.gen_bool(0.05) {
                let j = rng.gen_range(0..n);
                if j != i && counts[j] > 1 {
                    unit.conflicts.push(Atom::with(pkg_name(j), Relation::Lt, counts[j]));
                }
            }
            if params.features > 0 && rng.gen_bool(0.05) {
                unit.provides.push(Provide {
                    feature: format!("feature{}", rng.gen_range(0..params.features)),
                    version: None,
                });
            }
            units.push(unit);
        }
    }

    // Newest version of each name sits at offset[i] + counts[i] - 1.
    let mut offset = Vec::with_capacity(n);
    let mut acc = 0usize;
    for &k in &counts {
        offset.push(acc);
        acc += k as usize;
    }
    let newest = |i: usize| offset[i] + counts[i] as usize - 1;
    let mut installed: BTreeSet<usize> = BTreeSet::new();
    let mut queue: VecDeque<usize> = (0..n).filter(|_| rng.gen_bool(params.root_fraction)).collect();
    while let Some(i) = queue.pop_front() {
        if !installed.insert(i) {
            continue;
        }
        for clause in &units[newest(i)].depends.clauses {
            let target: usize = clause[0].name[3..].parse().expect("generated name");
            queue.push_back(target);
        }
    }
    for i in installed {
        units[newest(i)].installed = true;
    }
    Universe::new(units).expect("generated names and versions are unique")
}

const SMALL_NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn small_atom(rng: &mut ChaCha8Rng, names: &[&str]) -> Atom {
    let name = match rng.gen_range(0..10) {
        0 => "v",
        1 if rng.gen_bool(0.2) => "ghost",
        _ => names.choose(rng).copied().unwrap_or("a"),
    };
    if rng.gen_bool(0.5) {
        return Atom::any(name);
    }
    let rel = *[
        Relation::Eq,
        Relation::Neq,
        Relation::Geq,
        Relation::Leq,
        Relation::Gt,
        Relation::Lt,
    ]
    .choose(rng)
    .expect("non-empty");
    Atom::with(name, rel, rng.gen_range(1..=3))
}

/// A tiny random problem whose full model (one variable per unit plus one
/// per package name) has at most `max_vars` variables. Atoms may mention the
/// virtual feature `v` and the unknown name `ghost`.
pub fn small_instance(seed: u64, max_vars: usize) -> (Universe, Request) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_names = rng.gen_range(1..=SMALL_NAMES.len());
    let names = &SMALL_NAMES[..n_names];
    let mut budget = max_vars.saturating_sub(n_names);
    let mut units = Vec::new();
    for (i, name) in names.iter().enumerate() {
        // Leave room for one unit per remaining name.
        let room = budget.saturating_sub(n_names - i - 1).max(1);
        let k = rng.gen_range(1..=3usize.min(room));
        budget = budget.saturating_sub(k);
        for v in 1..=k as Version {
            let mut unit = PackageUnit::new(*name, v);
            let clauses = (0..rng.gen_range(0..=2))
                .map(|_| (0..rng.gen_range(1..=2)).map(|_| small_atom(&mut rng, names)).collect())
                .collect();
            unit.depends = DependsFormula { clauses };
            unit.conflicts = (0..rng.gen_range(0..=2)).map(|_| small_atom(&mut rng, names)).collect();
            if rng.gen_bool(0.25) {
                unit.provides.push(Provide {
                    feature: "v".into(),
                    version: rng.gen_bool(0.5).then(|| rng.gen_range(1..=2)),
                });
            }
            if rng.gen_bool(0.1) {
                let other = names.choose(&mut rng).copied().unwrap_or("a");
                if other != *name {
                    unit.provides.push(Provide {
                        feature: other.into(),
                        version: Some(rng.gen_range(1..=3)),
                    });
                }
            }
            unit.installed = rng.gen_bool(0.4);
            units.push(unit);
        }
    }
    let request = Request {
        install: (0..rng.gen_range(0..=2)).map(|_| small_atom(&mut rng, names)).collect(),
        remove: (0..rng.gen_range(0..=1)).map(|_| small_atom(&mut rng, names)).collect(),
        upgrade: (0..rng.gen_range(0..=1))
            .map(|_| {
                let mut a = small_atom(&mut rng, names);
                if rng.gen_bool(0.7) {
                    a.constraint = pkgilp_core::VersionConstraint::Any;
                }
                a
            })
            .collect(),
    };
    (Universe::new(units).expect("distinct versions per name"), request)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pkgilp_core::validator::check_consistency;

    #[test]
    fn gen_random_is_seeded_and_disjoint() {
        let u = synth_universe(&SynthParams::default(), 7);
        let init = u.initial_configuration();
        let r = gen_random(&u, &init, 10, 3, 1).unwrap();
        assert_eq!(r, gen_random(&u, &init, 10, 3, 1).unwrap());
        assert_ne!(r, gen_random(&u, &init, 10, 3, 2).unwrap());
        assert_eq!(r.install.len(), 10);
        assert_eq!(r.upgrade.len(), 3);
        for a in &r.install {
            assert!(init.versions_of(&a.name).next().is_none());
        }
        for a in &r.upgrade {
            assert!(init.versions_of(&a.name).next().is_some());
        }
        let names: BTreeSet<_> = r.install.iter().map(|a| &a.name).collect();
        assert_eq!(names.len(), 10);
    }

    #[test]
    fn gen_random_empty_and_insufficient() {
        let u = synth_universe(&SynthParams::default(), 7);
        let init = u.initial_configuration();
        assert!(gen_random(&u, &init, 0, 0, 5).unwrap().is_empty());
        let err = gen_random(&u, &init, 0, 100_000, 5).unwrap_err();
        assert!(matches!(err, GenError::InsufficientCandidates { wanted: 100_000, .. }));
    }

    #[test]
    fn synthetic_initial_configuration_is_consistent() {
        for seed in 0..5 {
            let u = synth_universe(&SynthParams::default(), seed);
            assert!(u.len() >= 1000);
            let init = u.initial_configuration();
            assert!(!init.is_empty());
            assert!(check_consistency(&u, &init).is_empty());
        }
    }

    #[test]
    fn small_instances_respect_the_variable_cap() {
        for seed in 0..500 {
            let (u, _) = small_instance(seed, 16);
            assert!(u.len() + u.name_count() <= 16, "seed {seed}");
            assert_eq!(small_instance(seed, 16).0.units(), u.units());
        }
    }
}
