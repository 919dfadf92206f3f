//! Rule inventories: syntactic rules, gloss rules and the gloss lexicon.
//!
//! All three files use the same S-expression notation:
//!
//! ```text
//! ((NP -> S NP)
//!  ((X0 gloss op1) = (X2 gloss))
//!  ((X0 gloss op2) = (*OR* "which" "that")))
//!
//! ((N -> "kaisha")
//!  ((x0 gloss) = (*OR* "company" "firm")))
//! ```
//!
//! The syntax file may also declare start categories with `(*START* S ...)`;
//! without a declaration the left-hand side of the first rule is used.
//! Category, variable and feature symbols are case-insensitive and stored in
//! lower case. Atom values keep their case.

mod eval;
mod validate;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::featstruct::{Feature, FeaturePath, Fs, Path};
use crate::sexpr::{self, Pos, Sexp, SexpError};

pub use eval::{apply_constraints, apply_xor, EvalError, XorMode};
pub use validate::{validate, Diagnostic};

/// Category assigned to tokens with no lexicon entry.
pub const UNKNOWN_CATEGORY: &str = "unk";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("{file}: {source}")]
    Syntax {
        file: &'static str,
        #[source]
        source: SexpError,
    },
    #[error("{file}:{pos}: {msg}")]
    Invalid { file: &'static str, pos: Pos, msg: String },
    #[error("{file}:{pos}: x{var} exceeds rule arity {arity}")]
    Arity {
        file: &'static str,
        pos: Pos,
        var: usize,
        arity: usize,
    },
    #[error("{file}:{pos}: unknown constraint operator {op}")]
    UnknownOperator { file: &'static str, pos: Pos, op: String },
    #[error("gloss:{pos}: second gloss rule for shape ({lhs} -> {rhs})")]
    DuplicateGlossRule { pos: Pos, lhs: String, rhs: String },
    #[error("lexicon:{pos}: duplicate entry ({category} -> {surface:?})")]
    DuplicateLexEntry { pos: Pos, category: String, surface: String },
}

/// Right-hand side of an `=` equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Path(Path),
    Value(Fs),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `(path = rhs)`
    Equation { lhs: Path, rhs: Rhs },
    /// `(path =c value)`: the path must already hold a compatible value.
    Check { path: Path, value: Fs },
    /// `(*XOR* (c ...) (c ...))`: ordered alternatives.
    Xor(Vec<Vec<Constraint>>),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Equation { lhs, rhs: Rhs::Path(p) } => write!(f, "({lhs} = {p})"),
            Constraint::Equation { lhs, rhs: Rhs::Value(v) } => write!(f, "({lhs} = {v})"),
            Constraint::Check { path, value } => write!(f, "({path} =c {value})"),
            Constraint::Xor(branches) => {
                f.write_str("(*XOR*")?;
                for b in branches {
                    f.write_str(" (")?;
                    for (i, c) in b.iter().enumerate() {
                        if i > 0 {
                            f.write_str(" ")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str(")")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A context-free production with its unification constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl Rule {
    pub fn arity(&self) -> usize {
        self.rhs.len()
    }

    pub fn shape(&self) -> (String, Vec<String>) {
        (self.lhs.clone(), self.rhs.clone())
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, constraints: &[Constraint]) -> fmt::Result {
    for c in constraints {
        write!(f, "\n {c}")?;
    }
    f.write_str(")")
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({} -> {})", self.lhs, self.rhs.join(" "))?;
        write_body(f, &self.constraints)
    }
}

/// A terminal entry: category, source token and constraints on `x0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub category: String,
    pub surface: String,
    pub constraints: Vec<Constraint>,
}

impl fmt::Display for LexEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({} -> {})", self.category, sexpr::quote(&self.surface))?;
        write_body(f, &self.constraints)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Grammar {
    pub rules: Vec<Rule>,
    pub gloss_rules: Vec<Rule>,
    pub lexicon: Vec<LexEntry>,
    pub start: Vec<String>,
    gloss_index: HashMap<(String, Vec<String>), usize>,
    lex_index: HashMap<String, Vec<usize>>,
}

impl Grammar {
    /// Gloss rule for a syntactic shape, if one exists.
    pub fn gloss_rule(&self, lhs: &str, rhs: &[String]) -> Option<&Rule> {
        self.gloss_index
            .get(&(lhs.to_string(), rhs.to_vec()))
            .map(|&i| &self.gloss_rules[i])
    }

    /// Lexicon entries for a surface token, in declaration order.
    pub fn lookup(&self, surface: &str) -> impl Iterator<Item = &LexEntry> {
        self.lex_index
            .get(surface)
            .into_iter()
            .flatten()
            .map(|&i| &self.lexicon[i])
    }

    pub fn lookup_indexed(&self, surface: &str) -> impl Iterator<Item = (usize, &LexEntry)> {
        self.lex_index
            .get(surface)
            .into_iter()
            .flatten()
            .map(|&i| (i, &self.lexicon[i]))
    }

    pub fn lex_entry(&self, category: &str, surface: &str) -> Option<&LexEntry> {
        self.lookup(surface).find(|e| e.category == category)
    }

    pub fn is_start(&self, category: &str) -> bool {
        self.start.iter().any(|s| s == category)
    }

    /// Render the three inventories in the loader's format.
    pub fn print(&self) -> (String, String, String) {
        let mut syntax = String::new();
        if !self.start.is_empty() {
            syntax.push_str(&format!("(*START* {})\n", self.start.join(" ")));
        }
        for r in &self.rules {
            syntax.push_str(&format!("{r}\n"));
        }
        let gloss = self.gloss_rules.iter().map(|r| format!("{r}\n")).collect();
        let lexicon = self.lexicon.iter().map(|e| format!("{e}\n")).collect();
        (syntax, gloss, lexicon)
    }
}

/// Parse and validate the three rule files.
pub fn load_grammar(rule_text: &str, gloss_text: &str, lexicon_text: &str) -> Result<Grammar, GrammarError> {
    let mut g = Grammar::default();

    for form in read("syntax", rule_text)? {
        if let Some(start) = start_directive(&form)? {
            g.start.extend(start);
            continue;
        }
        g.rules.push(parse_rule("syntax", &form)?);
    }
    if g.start.is_empty() {
        if let Some(first) = g.rules.first() {
            g.start.push(first.lhs.clone());
        }
    }

    for form in read("gloss", gloss_text)? {
        let rule = parse_rule("gloss", &form)?;
        let shape = rule.shape();
        if g.gloss_index.contains_key(&shape) {
            return Err(GrammarError::DuplicateGlossRule {
                pos: form.pos(),
                lhs: shape.0,
                rhs: shape.1.join(" "),
            });
        }
        g.gloss_index.insert(shape, g.gloss_rules.len());
        g.gloss_rules.push(rule);
    }

    for form in read("lexicon", lexicon_text)? {
        let entry = parse_lex_entry(&form)?;
        if g.lex_entry(&entry.category, &entry.surface).is_some() {
            return Err(GrammarError::DuplicateLexEntry {
                pos: form.pos(),
                category: entry.category,
                surface: entry.surface,
            });
        }
        g.lex_index.entry(entry.surface.clone()).or_default().push(g.lexicon.len());
        g.lexicon.push(entry);
    }
    Ok(g)
}

fn read(file: &'static str, text: &str) -> Result<Vec<Sexp>, GrammarError> {
    sexpr::read_all(text).map_err(|source| GrammarError::Syntax { file, source })
}

fn invalid(file: &'static str, e: &Sexp, msg: impl Into<String>) -> GrammarError {
    GrammarError::Invalid {
        file,
        pos: e.pos(),
        msg: msg.into(),
    }
}

fn start_directive(form: &Sexp) -> Result<Option<Vec<String>>, GrammarError> {
    let Some(items) = form.as_list() else {
        return Ok(None);
    };
    match items.first().and_then(Sexp::as_symbol) {
        Some(s) if s.eq_ignore_ascii_case("*start*") => {
            let cats = items[1..]
                .iter()
                .map(|c| {
                    c.as_symbol()
                        .map(str::to_lowercase)
                        .ok_or_else(|| invalid("syntax", c, "start category must be a symbol"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if cats.is_empty() {
                return Err(invalid("syntax", form, "empty *START* declaration"));
            }
            Ok(Some(cats))
        }
        _ => Ok(None),
    }
}

/// Split `((LHS -> ...) constraint...)` into header items and constraints.
fn split_rule<'a>(file: &'static str, form: &'a Sexp) -> Result<(&'a Sexp, &'a [Sexp], &'a [Sexp]), GrammarError> {
    let items = form
        .as_list()
        .filter(|i| !i.is_empty())
        .ok_or_else(|| invalid(file, form, "expected ((LHS -> RHS ...) constraint ...)"))?;
    let header = items[0]
        .as_list()
        .filter(|h| h.len() >= 3 && h[1].as_symbol() == Some("->"))
        .ok_or_else(|| invalid(file, &items[0], "expected (LHS -> RHS ...)"))?;
    Ok((&header[0], &header[2..], &items[1..]))
}

fn category(file: &'static str, e: &Sexp) -> Result<String, GrammarError> {
    e.as_symbol()
        .map(str::to_lowercase)
        .ok_or_else(|| invalid(file, e, "category must be a symbol"))
}

fn parse_rule(file: &'static str, form: &Sexp) -> Result<Rule, GrammarError> {
    let (lhs, rhs, body) = split_rule(file, form)?;
    let lhs = category(file, lhs)?;
    let rhs = rhs.iter().map(|c| category(file, c)).collect::<Result<Vec<_>, _>>()?;
    let constraints = parse_constraints(file, body, rhs.len())?;
    Ok(Rule { lhs, rhs, constraints })
}

fn parse_lex_entry(form: &Sexp) -> Result<LexEntry, GrammarError> {
    let (lhs, rhs, body) = split_rule("lexicon", form)?;
    let category = category("lexicon", lhs)?;
    let surface = match rhs {
        [Sexp::Str(s, _)] if !s.is_empty() => s.clone(),
        _ => return Err(invalid("lexicon", form, "lexical entry needs one non-empty quoted surface form")),
    };
    let constraints = parse_constraints("lexicon", body, 0)?;
    Ok(LexEntry {
        category,
        surface,
        constraints,
    })
}

fn parse_constraints(file: &'static str, body: &[Sexp], arity: usize) -> Result<Vec<Constraint>, GrammarError> {
    body.iter().map(|c| parse_constraint(file, c, arity)).collect()
}

fn parse_constraint(file: &'static str, e: &Sexp, arity: usize) -> Result<Constraint, GrammarError> {
    let items = e
        .as_list()
        .filter(|i| !i.is_empty())
        .ok_or_else(|| invalid(file, e, "expected a constraint"))?;

    if let Some(op) = items[0].as_symbol() {
        if op.eq_ignore_ascii_case("*xor*") {
            if items.len() < 2 {
                return Err(invalid(file, e, "*XOR* needs at least one branch"));
            }
            let branches = items[1..]
                .iter()
                .map(|b| {
                    let cs = b
                        .as_list()
                        .filter(|cs| !cs.is_empty())
                        .ok_or_else(|| invalid(file, b, "*XOR* branch must be a non-empty constraint list"))?;
                    parse_constraints(file, cs, arity)
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Constraint::Xor(branches));
        }
        return Err(GrammarError::UnknownOperator {
            file,
            pos: items[0].pos(),
            op: op.to_string(),
        });
    }

    let op_at = |i: usize| items.get(i).and_then(Sexp::as_symbol);
    let constraint = match (items.len(), op_at(1), op_at(2)) {
        (3, Some("="), _) => Constraint::Equation {
            lhs: parse_path(file, &items[0], arity)?,
            rhs: parse_rhs(file, &items[2], arity)?,
        },
        // `=c`, also accepted with a space as `= c`
        (3, Some(op), _) if op.eq_ignore_ascii_case("=c") => parse_check(file, items, &items[2], arity)?,
        (4, Some("="), Some(c)) if c.eq_ignore_ascii_case("c") => parse_check(file, items, &items[3], arity)?,
        (_, Some(op), _) if items.len() >= 3 => {
            return Err(GrammarError::UnknownOperator {
                file,
                pos: items[1].pos(),
                op: op.to_string(),
            })
        }
        _ => return Err(invalid(file, e, "expected (path = value), (path =c value) or (*XOR* ...)")),
    };
    Ok(constraint)
}

fn parse_check(file: &'static str, items: &[Sexp], value: &Sexp, arity: usize) -> Result<Constraint, GrammarError> {
    let path = parse_path(file, &items[0], arity)?;
    match parse_rhs(file, value, arity)? {
        Rhs::Value(value) => Ok(Constraint::Check { path, value }),
        Rhs::Path(_) => Err(invalid(file, value, "=c compares against a value, not a path")),
    }
}

fn var_index(s: &str) -> Option<usize> {
    let digits = s.strip_prefix('x').or_else(|| s.strip_prefix('X'))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn looks_like_path(e: &Sexp) -> bool {
    match e.as_list() {
        Some(items) => items.first().and_then(Sexp::as_symbol).and_then(var_index).is_some(),
        None => false,
    }
}

fn parse_path(file: &'static str, e: &Sexp, arity: usize) -> Result<Path, GrammarError> {
    let items = e
        .as_list()
        .filter(|_| looks_like_path(e))
        .ok_or_else(|| invalid(file, e, "expected a path such as (x0 gloss)"))?;
    let var = var_index(items[0].as_symbol().unwrap()).unwrap();
    if var > arity {
        return Err(GrammarError::Arity {
            file,
            pos: e.pos(),
            var,
            arity,
        });
    }
    let features = items[1..]
        .iter()
        .map(|f| {
            f.as_symbol()
                .map(Feature::new)
                .ok_or_else(|| invalid(file, f, "feature name must be a symbol"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let features = FeaturePath::new(features).map_err(|_| invalid(file, e, "path needs at least one feature"))?;
    Ok(Path::new(var, features))
}

fn parse_rhs(file: &'static str, e: &Sexp, arity: usize) -> Result<Rhs, GrammarError> {
    if looks_like_path(e) {
        return Ok(Rhs::Path(parse_path(file, e, arity)?));
    }
    Fs::from_sexp(e).map(Rhs::Value).map_err(|err| invalid(file, e, err.to_string()))
}
