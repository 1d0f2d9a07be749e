//! Interchange formats for external solvers.
//!
//! [`emit_lp`] writes CPLEX LP text with readable variable names and
//! [`emit_opb`] writes OPB with positional names `x1..xN` plus a separate
//! name map. Answers come back through [`parse_opb_answer`] or
//! [`parse_lp_answer`] and are turned into a [`crate::SolveOutcome`] by
//! [`outcome_from_answer`], which recomputes feasibility and objective on the
//! model instead of trusting the solver's report.

mod answer;
mod lp;
mod opb;

pub use answer::{outcome_from_answer, parse_lp_answer, parse_opb_answer, Answer, AnswerError, AnswerStatus};
pub use lp::{emit_lp, read_lp, LpReadError};
pub use opb::{emit_opb, emit_opb_names, read_opb, OpbProblem, OpbReadError};

use alloc::string::String;
use core::fmt::Write;

use crate::model::VarId;

/// Percent-escapes everything outside `[A-Za-z0-9]`, byte by byte, plus a
/// leading digit. The result never contains `_`, which keeps
/// [`var_token`] injective.
pub fn escape_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for (i, b) in name.bytes().enumerate() {
        if b.is_ascii_alphabetic() || (b.is_ascii_digit() && i > 0) {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

pub fn unescape_name(token: &str) -> Option<String> {
    let bytes = token.as_bytes();
    let mut out = alloc::vec::Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = token.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else if bytes[i].is_ascii_alphanumeric() {
            out.push(bytes[i]);
            i += 1;
        } else {
            return None;
        }
    }
    String::from_utf8(out).ok()
}

/// `<name>_<version>` for units, `F_<name>` for package-level variables,
/// names escaped with [`escape_name`].
pub fn var_token(id: &VarId) -> String {
    match id {
        VarId::Unit(k) => alloc::format!("{}_{}", escape_name(&k.name), k.version),
        VarId::Feature(name) => alloc::format!("F_{}", escape_name(name)),
    }
}

/// Inverse of [`var_token`].
pub fn parse_var_token(token: &str) -> Option<VarId> {
    let (head, tail) = token.split_once('_')?;
    if head == "F" && !tail.is_empty() && !tail.starts_with(|c: char| c.is_ascii_digit()) {
        return Some(VarId::Feature(unescape_name(tail)?));
    }
    if tail.is_empty() || !tail.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let version = tail.parse().ok().filter(|&v| v > 0)?;
    Some(VarId::unit(unescape_name(head)?, version))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn escaping_examples() {
        assert_eq!(escape_name("gasoline-engine"), "gasoline%2Dengine");
        assert_eq!(escape_name("lib_c"), "lib%5Fc");
        assert_eq!(escape_name("7zip"), "%37zip");
        assert_eq!(escape_name("a7"), "a7");
        assert_eq!(var_token(&VarId::unit("turbo", 1)), "turbo_1");
        assert_eq!(var_token(&VarId::feature("car")), "F_car");
        assert_eq!(var_token(&VarId::feature("3")), "F_%33");
    }

    #[test]
    fn feature_named_like_a_unit_prefix() {
        // A unit named "F" and a feature must not collide.
        let unit = VarId::unit("F", 3);
        assert_eq!(var_token(&unit), "F_3");
        assert_eq!(parse_var_token("F_3"), Some(unit));
        assert_eq!(parse_var_token("F_%33"), Some(VarId::feature("3")));
    }

    #[test]
    fn malformed_tokens() {
        for t in ["", "F_", "abc", "a_0", "a_x", "a_1_2", "a%2_1", "a%ZZ_1", "-a_1"] {
            assert_eq!(parse_var_token(t), None, "{t}");
        }
    }

    fn var_id() -> impl Strategy<Value = VarId> {
        prop_oneof![
            ("\\PC{1,8}", 1u64..1000).prop_map(|(n, v)| VarId::unit(n, v)),
            "\\PC{1,8}".prop_map(VarId::feature),
        ]
    }

    proptest! {
        #[test]
        fn tokens_round_trip(id in var_id()) {
            let t = var_token(&id);
            prop_assert!(t.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'%'));
            prop_assert_eq!(parse_var_token(&t), Some(id));
        }

        #[test]
        fn tokens_are_injective(a in var_id(), b in var_id()) {
            prop_assert_eq!(a == b, var_token(&a) == var_token(&b));
        }
    }
}
