use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use super::Grammar;

/// Non-fatal findings about a loaded grammar.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Diagnostic {
    /// Category that cannot be reached from any start category.
    UnreachableCategory(String),
    /// Syntactic rule with no gloss rule; glossing falls back to concatenation.
    MissingGlossRule { lhs: String, rhs: Vec<String> },
    /// Gloss rule whose shape matches no syntactic rule.
    OrphanGlossRule { lhs: String, rhs: Vec<String> },
    /// Lexicon category that no syntactic rule mentions.
    LexCategoryNotInSyntax(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnreachableCategory(c) => write!(f, "category {c} is unreachable from the start categories"),
            Diagnostic::MissingGlossRule { lhs, rhs } => {
                write!(f, "no gloss rule for ({lhs} -> {}); children will be concatenated", rhs.join(" "))
            }
            Diagnostic::OrphanGlossRule { lhs, rhs } => {
                write!(f, "gloss rule ({lhs} -> {}) matches no syntactic rule", rhs.join(" "))
            }
            Diagnostic::LexCategoryNotInSyntax(c) => write!(f, "lexicon category {c} does not occur in any syntactic rule"),
        }
    }
}

/// Report unreachable categories, rule shapes without gloss rules, gloss
/// rules without syntax, and lexicon categories the syntax never uses.
pub fn validate(g: &Grammar) -> Vec<Diagnostic> {
    let mut out = BTreeSet::new();

    let mut syntax_cats = BTreeSet::new();
    for r in &g.rules {
        syntax_cats.insert(r.lhs.as_str());
        syntax_cats.extend(r.rhs.iter().map(String::as_str));
    }
    let lex_cats: BTreeSet<&str> = g.lexicon.iter().map(|e| e.category.as_str()).collect();

    let mut reachable: BTreeSet<&str> = g.start.iter().map(String::as_str).collect();
    let mut queue: VecDeque<&str> = reachable.iter().copied().collect();
    while let Some(cat) = queue.pop_front() {
        for r in g.rules.iter().filter(|r| r.lhs == cat) {
            for c in &r.rhs {
                if reachable.insert(c.as_str()) {
                    queue.push_back(c.as_str());
                }
            }
        }
    }
    for c in syntax_cats.iter().chain(&lex_cats) {
        if !reachable.contains(c) {
            out.insert(Diagnostic::UnreachableCategory(c.to_string()));
        }
    }

    let mut shapes = BTreeSet::new();
    for r in &g.rules {
        shapes.insert(r.shape());
        if g.gloss_rule(&r.lhs, &r.rhs).is_none() {
            out.insert(Diagnostic::MissingGlossRule {
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
            });
        }
    }
    for r in &g.gloss_rules {
        if !shapes.contains(&r.shape()) {
            out.insert(Diagnostic::OrphanGlossRule {
                lhs: r.lhs.clone(),
                rhs: r.rhs.clone(),
            });
        }
    }

    for c in lex_cats {
        if !syntax_cats.contains(c) && !g.is_start(c) {
            out.insert(Diagnostic::LexCategoryNotInSyntax(c.to_string()));
        }
    }
    out.into_iter().collect()
}
