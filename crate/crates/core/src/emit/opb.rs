use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::var_token;
use crate::model::{IlpModel, LinearConstraint, Objective, Sense, Var};

fn write_terms(out: &mut String, terms: impl IntoIterator<Item = (i64, Var)>) {
    for (coef, v) in terms {
        let _ = write!(out, "{coef:+} x{} ", v.index() + 1);
    }
}

/// OPB text for `model`. Variable `x<i>` is model variable `i - 1`; `<=`
/// rows are negated into `>=`, equalities stay `=`. A model with an empty
/// objective is written as a satisfaction problem.
pub fn emit_opb(model: &IlpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "* #variable= {} #constraint= {}",
        model.num_vars(),
        model.constraints.len()
    );
    if !model.objective.terms.is_empty() {
        out.push_str("min: ");
        write_terms(&mut out, model.objective.terms.iter().copied());
        out.push_str(";\n");
    }
    for c in &model.constraints {
        let (sign, op) = match c.sense {
            Sense::Geq => (1, ">="),
            Sense::Leq => (-1, ">="),
            Sense::Eq => (1, "="),
        };
        write_terms(&mut out, c.terms.iter().map(|&(a, v)| (sign * a, v)));
        let _ = writeln!(out, "{op} {} ;", sign * c.rhs);
    }
    out
}

/// Sidecar for [`emit_opb`]: one `x<i> <token>` line per variable, tokens as
/// in the LP output.
pub fn emit_opb_names(model: &IlpModel) -> String {
    let mut out = String::new();
    for (i, id) in model.variables().iter().enumerate() {
        let _ = writeln!(out, "x{} {}", i + 1, var_token(id));
    }
    out
}

/// A parsed OPB instance. Variable `x<i>` maps to `Var(i - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpbProblem {
    pub num_vars: usize,
    pub objective: Objective,
    pub constraints: Vec<LinearConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpbReadError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for OpbReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn parse_var(t: &str) -> Option<Var> {
    let i: u32 = t.strip_prefix('x')?.parse().ok()?;
    i.checked_sub(1).map(Var)
}

/// Reads linear OPB: the `* #variable=` header, an optional `min:` line and
/// `>=`/`=` constraints, one per line.
pub fn read_opb(text: &str) -> Result<OpbProblem, OpbReadError> {
    let mut num_vars = None;
    let mut objective = Objective::default();
    let mut constraints = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |message: String| OpbReadError { line: i + 1, message };
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('*') {
            if num_vars.is_none() {
                let mut words = comment.split_whitespace();
                while let Some(w) = words.next() {
                    if w == "#variable=" {
                        num_vars = words.next().and_then(|n| n.parse().ok());
                    }
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let body = line.strip_suffix(';').ok_or_else(|| err(String::from("missing `;`")))?;
        let (is_objective, body) = match body.trim_start().strip_prefix("min:") {
            Some(rest) => (true, rest),
            None => (false, body),
        };
        let mut terms = Vec::new();
        let mut relation = None;
        let mut tokens = body.split_whitespace();
        while let Some(t) = tokens.next() {
            if t == ">=" || t == "=" {
                let rhs = tokens
                    .next()
                    .and_then(|r| r.parse::<i64>().ok())
                    .ok_or_else(|| err(String::from("bad right-hand side")))?;
                let sense = if t == ">=" { Sense::Geq } else { Sense::Eq };
                relation = Some((sense, rhs));
                if tokens.next().is_some() {
                    return Err(err(String::from("trailing tokens")));
                }
                break;
            }
            let coef: i64 = t.parse().map_err(|_| err(alloc::format!("bad coefficient `{t}`")))?;
            let v = tokens
                .next()
                .and_then(parse_var)
                .ok_or_else(|| err(String::from("expected a variable")))?;
            terms.push((coef, v));
        }
        match (is_objective, relation) {
            (true, None) => objective.terms = terms,
            (false, Some((sense, rhs))) => constraints.push(LinearConstraint::new(terms, sense, rhs)),
            _ => return Err(err(String::from("malformed line"))),
        }
    }
    let num_vars = num_vars.ok_or(OpbReadError {
        line: 1,
        message: String::from("missing `* #variable=` header"),
    })?;
    let in_range = |terms: &[(i64, Var)]| terms.iter().all(|&(_, v)| v.index() < num_vars);
    if !in_range(&objective.terms) || !constraints.iter().all(|c: &LinearConstraint| in_range(&c.terms)) {
        return Err(OpbReadError {
            line: 1,
            message: String::from("variable index exceeds the header count"),
        });
    }
    Ok(OpbProblem {
        num_vars,
        objective,
        constraints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VarId;

    fn two_vars() -> IlpModel {
        let mut m = IlpModel::new();
        m.add_var(VarId::feature("a"));
        m.add_var(VarId::unit("b", 2));
        m
    }

    #[test]
    fn leq_is_negated() {
        let mut m = two_vars();
        m.push(LinearConstraint::new([(2, Var(0)), (1, Var(1))], Sense::Leq, 1));
        let opb = emit_opb(&m);
        assert_eq!(opb, "* #variable= 2 #constraint= 1\n-2 x1 -1 x2 >= -1 ;\n");
    }

    #[test]
    fn objective_and_equalities() {
        let mut m = two_vars();
        m.push(LinearConstraint::new([(1, Var(0)), (1, Var(1))], Sense::Eq, 1));
        m.push(LinearConstraint::new([(-1, Var(0))], Sense::Geq, 0));
        m.objective.terms = alloc::vec![(-3, Var(0)), (1, Var(1))];
        let opb = emit_opb(&m);
        assert_eq!(
            opb,
            "* #variable= 2 #constraint= 2\nmin: -3 x1 +1 x2 ;\n+1 x1 +1 x2 = 1 ;\n-1 x1 >= 0 ;\n"
        );
        let p = read_opb(&opb).unwrap();
        assert_eq!(p.num_vars, 2);
        assert_eq!(p.objective, m.objective);
        assert_eq!(p.constraints, m.constraints);
        assert_eq!(emit_opb_names(&m), "x1 F_a\nx2 b_2\n");
    }

    #[test]
    fn empty_model_and_empty_row() {
        assert_eq!(emit_opb(&IlpModel::new()), "* #variable= 0 #constraint= 0\n");
        let mut m = IlpModel::new();
        m.push(LinearConstraint::new([], Sense::Geq, 1));
        let opb = emit_opb(&m);
        assert_eq!(opb, "* #variable= 0 #constraint= 1\n>= 1 ;\n");
        assert_eq!(read_opb(&opb).unwrap().constraints, m.constraints);
    }

    #[test]
    fn reader_errors() {
        assert!(read_opb("+1 x1 >= 1 ;\n").is_err());
        let e = read_opb("* #variable= 1 #constraint= 1\n+1 x1 >= 1\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(read_opb("* #variable= 1 #constraint= 1\n+1 x2 >= 1 ;\n").is_err());
        assert!(read_opb("* #variable= 1 #constraint= 1\n+1 y1 >= 1 ;\n").is_err());
    }
}
