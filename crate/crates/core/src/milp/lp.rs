use std::fmt::Write as _;

use thiserror::Error;

use super::{Constraint, MilpModel, Sense, VarKind};

const WIDTH: usize = 78;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("variable `{0}` is not declared in the Bounds section")]
    UnknownVariable(String),
}

/// Appends tokens to `out`, breaking lines before `WIDTH` columns.
struct Wrapper<'a> {
    out: &'a mut String,
    column: usize,
}

impl<'a> Wrapper<'a> {
    fn start(out: &'a mut String, head: &str) -> Self {
        out.push_str(head);
        let column = head.len();
        Self { out, column }
    }

    fn token(&mut self, token: &str) {
        if self.column + 1 + token.len() > WIDTH && self.column > 4 {
            self.out.push_str("\n   ");
            self.column = 3;
        }
        self.out.push(' ');
        self.out.push_str(token);
        self.column += 1 + token.len();
    }

    fn end(self) {
        self.out.push('\n');
    }
}

fn term_tokens(model: &MilpModel, terms: &[(usize, i64)]) -> Vec<String> {
    let mut tokens = Vec::new();
    for &(var, coef) in terms.iter().filter(|t| t.1 != 0) {
        let name = &model.variable(var).name;
        let sign = if coef < 0 { "-" } else { "+" };
        let magnitude = coef.unsigned_abs();
        let body = if magnitude == 1 { name.clone() } else { format!("{magnitude} {name}") };
        if tokens.is_empty() && coef > 0 {
            tokens.push(body);
        } else {
            tokens.push(format!("{sign} {body}"));
        }
    }
    tokens
}

/// Writes `model` in CPLEX LP format. The output depends only on the model.
pub fn emit_lp(model: &MilpModel) -> String {
    let mut out = String::from("Minimize\n");
    let mut w = Wrapper::start(&mut out, " obj:");
    let objective = term_tokens(model, model.objective());
    if objective.is_empty() {
        w.token("0");
    }
    for t in &objective {
        w.token(t);
    }
    w.end();

    out.push_str("Subject To\n");
    for c in model.constraints() {
        let mut w = Wrapper::start(&mut out, &format!(" {}:", c.name));
        let terms = term_tokens(model, &c.terms);
        if terms.is_empty() {
            w.token("0");
            if let Some(first) = model.variables().first() {
                w.token(&first.name);
            }
        }
        for t in &terms {
            w.token(t);
        }
        w.token(&c.sense.to_string());
        w.token(&c.rhs.to_string());
        w.end();
    }

    if !model.variables().is_empty() {
        out.push_str("Bounds\n");
        for v in model.variables() {
            match v.upper {
                Some(u) => writeln!(out, " {} <= {} <= {}", v.lower, v.name, u),
                None => writeln!(out, " {} >= {}", v.name, v.lower),
            }
            .expect("write to string");
        }
    }

    let generals: Vec<&str> =
        model.variables().iter().filter(|v| v.kind == VarKind::Integer).map(|v| v.name.as_str()).collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        let mut w = Wrapper::start(&mut out, "");
        for g in generals {
            w.token(g);
        }
        w.end();
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    Generals,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" => Some(Section::Bounds),
        "generals" | "general" | "integers" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn syntax(line: usize, message: impl Into<String>) -> LpParseError {
    LpParseError::Syntax { line, message: message.into() }
}

fn parse_int(token: &str, line: usize) -> Result<i64, LpParseError> {
    token.parse().map_err(|_| syntax(line, format!("expected an integer, found `{token}`")))
}

/// Parses `[+|-] [coef] name ...` into terms, resolving names with `lookup`.
fn parse_terms(
    tokens: &[&str],
    line: usize,
    lookup: &dyn Fn(&str) -> Option<usize>,
) -> Result<Vec<(usize, i64)>, LpParseError> {
    let mut terms = Vec::new();
    let mut sign = 1i64;
    let mut coef: Option<i64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1,
            "-" => sign = -1,
            _ if tok.chars().next().is_some_and(|c| c.is_ascii_digit()) => coef = Some(parse_int(tok, line)?),
            name => {
                let var = lookup(name).ok_or_else(|| LpParseError::UnknownVariable(name.to_string()))?;
                let value = sign * coef.unwrap_or(1);
                if value != 0 {
                    terms.push((var, value));
                }
                sign = 1;
                coef = None;
            }
        }
    }
    Ok(terms)
}

/// Reads LP text produced by [`emit_lp`] back into a model.
pub fn parse_lp(text: &str) -> Result<MilpModel, LpParseError> {
    let mut objective: Vec<(usize, &str)> = Vec::new();
    let mut constraints: Vec<(usize, &str)> = Vec::new();
    let mut bounds: Vec<(usize, &str)> = Vec::new();
    let mut generals: Vec<(usize, &str)> = Vec::new();
    let mut section = Section::Preamble;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            section = s;
            continue;
        }
        let target = match section {
            Section::Objective => &mut objective,
            Section::Constraints => &mut constraints,
            Section::Bounds => &mut bounds,
            Section::Generals => &mut generals,
            Section::Preamble | Section::End => return Err(syntax(i + 1, "text outside a section")),
        };
        target.extend(line.split_whitespace().map(|t| (i + 1, t)));
    }

    let mut model = MilpModel::new();
    let integer: std::collections::HashSet<&str> = generals.iter().map(|&(_, t)| t).collect();
    let mut k = 0;
    while k < bounds.len() {
        let (line, first) = bounds[k];
        let kind_of = |name: &str| if integer.contains(name) { VarKind::Integer } else { VarKind::Continuous };
        if let Ok(lower) = first.parse::<i64>() {
            let tokens: Vec<&str> = bounds.get(k + 1..k + 5).ok_or_else(|| syntax(line, "truncated bound"))?
                .iter()
                .map(|t| t.1)
                .collect();
            let [le1, name, le2, upper] = tokens[..] else { unreachable!() };
            if le1 != "<=" || le2 != "<=" {
                return Err(syntax(line, "expected `lower <= name <= upper`"));
            }
            model.add_variable(name, kind_of(name), lower, Some(parse_int(upper, line)?));
            k += 5;
        } else {
            let tokens: Vec<&str> = bounds.get(k + 1..k + 3).ok_or_else(|| syntax(line, "truncated bound"))?
                .iter()
                .map(|t| t.1)
                .collect();
            if tokens[0] != ">=" {
                return Err(syntax(line, "expected `name >= lower`"));
            }
            model.add_variable(first, kind_of(first), parse_int(tokens[1], line)?, None);
            k += 3;
        }
    }
    for &(line, name) in &generals {
        if model.var(name).is_none() {
            return Err(syntax(line, format!("integer variable `{name}` has no bound")));
        }
    }

    let lookup = |name: &str| model.var(name);
    let objective_tokens: Vec<&str> = objective.iter().map(|t| t.1).collect();
    let objective_terms = match objective_tokens.split_first() {
        Some((&"obj:", rest)) => parse_terms(rest, objective.first().map_or(0, |t| t.0), &lookup)?,
        Some(_) => parse_terms(&objective_tokens, objective[0].0, &lookup)?,
        None => Vec::new(),
    };

    let mut rows: Vec<Constraint> = Vec::new();
    let mut start = 0;
    let mut k = 0;
    while k < constraints.len() {
        let tok = constraints[k].1;
        if matches!(tok, "<=" | ">=" | "=") {
            let line = constraints[start].0;
            let head = constraints[start].1;
            let name = head.strip_suffix(':').ok_or_else(|| syntax(line, "constraint without a name"))?;
            let body: Vec<&str> = constraints[start + 1..k].iter().map(|t| t.1).collect();
            let rhs = constraints.get(k + 1).ok_or_else(|| syntax(line, "missing right-hand side"))?;
            let sense = match tok {
                "<=" => Sense::Le,
                ">=" => Sense::Ge,
                _ => Sense::Eq,
            };
            rows.push(Constraint {
                name: name.to_string(),
                terms: parse_terms(&body, line, &lookup)?,
                sense,
                rhs: parse_int(rhs.1, rhs.0)?,
            });
            k += 2;
            start = k;
        } else {
            k += 1;
        }
    }
    if start < constraints.len() {
        return Err(syntax(constraints[start].0, "constraint without a sense"));
    }

    model.set_objective(objective_terms);
    for row in rows {
        model.add_constraint(row.name, row.terms, row.sense, row.rhs);
    }
    Ok(model)
}
