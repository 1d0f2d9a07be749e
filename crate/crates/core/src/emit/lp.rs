use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{parse_var_token, var_token};
use crate::model::{IlpModel, LinearConstraint, Objective, Sense, Var};

/// Placeholder variable for expressions without terms; LP has no syntax for
/// an empty left-hand side.
const EMPTY_VAR: &str = "_empty";
const TERMS_PER_LINE: usize = 10;

fn write_terms(out: &mut String, terms: &[(i64, Var)], names: &[String]) -> bool {
    if terms.is_empty() {
        let _ = write!(out, "0 {EMPTY_VAR}");
        return true;
    }
    for (i, &(coef, v)) in terms.iter().enumerate() {
        if i > 0 && i % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let mag = coef.unsigned_abs();
        match (i, coef < 0) {
            (0, false) => {}
            (0, true) => out.push_str("- "),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(&names[v.index()]);
    }
    false
}

/// CPLEX LP text for `model`: objective, constraints in model order, every
/// variable declared binary.
pub fn emit_lp(model: &IlpModel) -> String {
    let names: Vec<String> = model.variables().iter().map(var_token).collect();
    let mut out = String::from("Minimize\n obj: ");
    let mut uses_empty = write_terms(&mut out, &model.objective.terms, &names);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        out.push(' ');
        uses_empty |= write_terms(&mut out, &c.terms, &names);
        let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
    }
    out.push_str("Binary\n");
    for name in &names {
        let _ = writeln!(out, " {name}");
    }
    if uses_empty {
        let _ = writeln!(out, " {EMPTY_VAR}");
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpReadError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LpReadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Binary,
    End,
}

type RawTerms = Vec<(i64, String)>;

struct Reader<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        let mut tokens = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('\\').next().unwrap_or("");
            tokens.extend(line.split_whitespace().map(|t| (i + 1, t)));
        }
        Reader { tokens, pos: 0 }
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|&(_, t)| t)
    }

    fn line(&self) -> usize {
        self.tokens.get(self.pos).or(self.tokens.last()).map_or(0, |&(l, _)| l)
    }

    fn err(&self, message: impl Into<String>) -> LpReadError {
        LpReadError {
            line: self.line(),
            message: message.into(),
        }
    }

    fn section_keyword(&self) -> Option<(Section, usize)> {
        let t = self.peek()?.to_ascii_lowercase();
        let next = self.tokens.get(self.pos + 1).map(|&(_, t)| t.to_ascii_lowercase());
        match t.as_str() {
            "minimize" | "minimise" | "min" => Some((Section::Objective, 1)),
            "subject" if next.as_deref() == Some("to") => Some((Section::Constraints, 2)),
            "st" | "s.t." => Some((Section::Constraints, 1)),
            "binary" | "binaries" | "bin" => Some((Section::Binary, 1)),
            "end" => Some((Section::End, 1)),
            _ => None,
        }
    }

    fn skip_label(&mut self) {
        if let Some(t) = self.peek() {
            if t.ends_with(':') {
                self.pos += 1;
            }
        }
    }

    /// Reads `[sign] [coef] name` terms until a sense token or a section
    /// keyword.
    fn terms(&mut self) -> Result<RawTerms, LpReadError> {
        let mut terms = Vec::new();
        while let Some(t) = self.peek() {
            if is_sense(t) || self.section_keyword().is_some() {
                break;
            }
            let mut sign = 1i64;
            let mut tok = t;
            if tok == "+" || tok == "-" {
                if tok == "-" {
                    sign = -1;
                }
                self.pos += 1;
                tok = self.peek().ok_or_else(|| self.err("dangling sign"))?;
            }
            let mut coef = 1i64;
            if let Ok(c) = tok.parse::<i64>() {
                coef = c;
                self.pos += 1;
                tok = self.peek().ok_or_else(|| self.err("coefficient without variable"))?;
                if self.section_keyword().is_some() {
                    return Err(self.err("coefficient without variable"));
                }
            }
            if is_sense(tok) || tok.parse::<i64>().is_ok() {
                return Err(self.err(alloc::format!("expected a variable, found `{tok}`")));
            }
            terms.push((sign * coef, tok.to_string()));
            self.pos += 1;
        }
        Ok(terms)
    }

    fn rhs(&mut self) -> Result<i64, LpReadError> {
        let mut sign = 1;
        let mut t = self.peek().ok_or_else(|| self.err("missing right-hand side"))?;
        if t == "-" || t == "+" {
            if t == "-" {
                sign = -1;
            }
            self.pos += 1;
            t = self.peek().ok_or_else(|| self.err("missing right-hand side"))?;
        }
        let v: i64 = t
            .parse()
            .map_err(|_| self.err(alloc::format!("bad right-hand side `{t}`")))?;
        self.pos += 1;
        Ok(sign * v)
    }
}

fn is_sense(t: &str) -> bool {
    matches!(t, ">=" | "=>" | "<=" | "=<" | "=" | ">" | "<")
}

fn sense_of(t: &str) -> Sense {
    match t {
        ">=" | "=>" | ">" => Sense::Geq,
        "<=" | "=<" | "<" => Sense::Leq,
        _ => Sense::Eq,
    }
}

/// Reads the LP subset written by [`emit_lp`]: a minimization objective,
/// integer coefficients, unnamed or named constraints and a `Binary` section
/// whose order defines the variable indices.
pub fn read_lp(text: &str) -> Result<IlpModel, LpReadError> {
    let mut r = Reader::new(text);
    let mut section = Section::Start;
    let mut objective: RawTerms = Vec::new();
    let mut constraints: Vec<(usize, RawTerms, Sense, i64)> = Vec::new();
    let mut binaries: Vec<(usize, &str)> = Vec::new();

    while r.peek().is_some() {
        if let Some((s, len)) = r.section_keyword() {
            if s == Section::End {
                section = s;
                r.pos += len;
                break;
            }
            section = s;
            r.pos += len;
            if s == Section::Objective {
                r.skip_label();
                objective = r.terms()?;
            }
            continue;
        }
        match section {
            Section::Constraints => {
                let line = r.line();
                r.skip_label();
                let terms = r.terms()?;
                let sense = r
                    .peek()
                    .filter(|t| is_sense(t))
                    .ok_or_else(|| r.err("expected a relation"))?;
                r.pos += 1;
                let rhs = r.rhs()?;
                constraints.push((line, terms, sense_of(sense), rhs));
            }
            Section::Binary => {
                binaries.push((r.line(), r.peek().unwrap_or_default()));
                r.pos += 1;
            }
            _ => return Err(r.err(alloc::format!("unexpected `{}`", r.peek().unwrap_or_default()))),
        }
    }
    if section != Section::End {
        return Err(r.err("missing End"));
    }

    let mut model = IlpModel::new();
    let mut vars: BTreeMap<&str, Var> = BTreeMap::new();
    for &(line, name) in &binaries {
        if name == EMPTY_VAR {
            continue;
        }
        let id = parse_var_token(name).ok_or_else(|| LpReadError {
            line,
            message: alloc::format!("bad variable name `{name}`"),
        })?;
        vars.insert(name, model.add_var(id));
    }
    let resolve = |line: usize, terms: &RawTerms| -> Result<Vec<(i64, Var)>, LpReadError> {
        let mut out = Vec::with_capacity(terms.len());
        for (c, name) in terms {
            if name == EMPTY_VAR {
                continue;
            }
            let v = vars.get(name.as_str()).ok_or_else(|| LpReadError {
                line,
                message: alloc::format!("variable `{name}` is not declared binary"),
            })?;
            out.push((*c, *v));
        }
        Ok(out)
    };
    model.objective = Objective {
        terms: resolve(0, &objective)?,
    };
    for (line, terms, sense, rhs) in &constraints {
        let c = LinearConstraint::new(resolve(*line, terms)?, *sense, *rhs);
        model.push(c);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cudf::{parse_document, Atom, Request};
    use crate::encoder::{build_model, CriteriaMode, Weighting};
    use crate::model::VarId;

    const CAR: &str = include_str!("../../tests/data/car.cudf");

    fn same(a: &IlpModel, b: &IlpModel) -> bool {
        a.variables() == b.variables() && a.constraints == b.constraints && a.objective == b.objective
    }

    #[test]
    fn car_contains_worked_constraints() {
        let (u, r) = parse_document(CAR).unwrap();
        let m = build_model(
            &u,
            &u.initial_configuration(),
            &r,
            CriteriaMode::Aggregate,
            Weighting::Strict,
        );
        let lp = emit_lp(&m);
        assert!(lp.lines().any(|l| l == " - gasoline%2Dengine_1 + turbo_1 >= 0"), "{lp}");
        assert!(lp.starts_with("Minimize\n obj: "));
        assert!(lp.ends_with("End\n"));
        assert!(same(&read_lp(&lp).unwrap(), &m));
    }

    #[test]
    fn empty_model() {
        let m = IlpModel::new();
        let lp = emit_lp(&m);
        assert_eq!(lp, "Minimize\n obj: 0 _empty\nSubject To\nBinary\n _empty\nEnd\n");
        assert!(same(&read_lp(&lp).unwrap(), &m));
    }

    #[test]
    fn empty_constraint_round_trips() {
        let (u, _) = parse_document(CAR).unwrap();
        let r = Request {
            install: alloc::vec![Atom::any("ghost")],
            ..Request::default()
        };
        let m = build_model(
            &u,
            &u.initial_configuration(),
            &r,
            CriteriaMode::Criterion2,
            Weighting::Strict,
        );
        let lp = emit_lp(&m);
        assert!(lp.contains("\n 0 _empty >= 1\n"));
        assert!(same(&read_lp(&lp).unwrap(), &m));
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = IlpModel::new();
        let vars: Vec<Var> = (0..25)
            .map(|i| m.add_var(VarId::feature(alloc::format!("p{i}"))))
            .collect();
        m.push(LinearConstraint::new(vars.iter().map(|&v| (2, v)), Sense::Leq, 7));
        let lp = emit_lp(&m);
        let body: Vec<&str> = lp.lines().skip(3).take(3).collect();
        assert!(body[0].starts_with(" 2 F_p0 + 2 F_p1"));
        assert!(body[1].starts_with("    + 2 F_p10"));
        assert!(body[2].ends_with("+ 2 F_p24 <= 7"));
        assert!(same(&read_lp(&lp).unwrap(), &m));
    }

    #[test]
    fn reader_accepts_labels_and_comments() {
        let text = "\\ comment\nminimize\n cost: 3 F_a - F_b\nst\n c1: F_a + F_b >= 1\n c2: - 2 F_a <= - 1\nbinaries\n F_a F_b\nend\n";
        let m = read_lp(text).unwrap();
        assert_eq!(m.num_vars(), 2);
        assert_eq!(m.objective.terms, alloc::vec![(3, Var(0)), (-1, Var(1))]);
        assert_eq!(m.constraints[1], LinearConstraint::new([(-2, Var(0))], Sense::Leq, -1));
    }

    #[test]
    fn reader_errors() {
        let e = read_lp("Minimize\n obj: F_a\nSubject To\n F_a >= 1\nEnd\n").unwrap_err();
        assert!(e.message.contains("not declared"), "{e}");
        let e = read_lp("Minimize\n obj: F_a\nSubject To\n F_a >= x\nBinary\n F_a\nEnd\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(read_lp("Minimize\n obj: F_a\nBinary\n F_a\n").is_err());
    }
}
