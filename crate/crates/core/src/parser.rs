//! Bottom-up chart parsing of pre-segmented tokens with the
//! unification-augmented grammar, plus the fragment-cover fallback used when
//! no full parse exists.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::featstruct::Fs;
use crate::grammar::{apply_constraints, Grammar, Rule, XorMode, UNKNOWN_CATEGORY};
use crate::sexpr;

/// Default number of trees kept per (category, span).
pub const DEFAULT_AMBIGUITY_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("cannot parse an empty token sequence")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// A token. `entry` indexes the grammar's lexicon; `None` for unknown words.
    Leaf { token: String, entry: Option<usize> },
    /// A rule application; `rule` indexes the syntactic rules.
    Internal { rule: usize, children: Vec<Arc<ParseTree>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseTree {
    pub category: String,
    /// Token span `[start, end)`.
    pub start: usize,
    pub end: usize,
    pub node: Node,
    /// `X0` after the matched rule's (or lexical entry's) constraints; the
    /// syntactic features live under `syn`.
    pub fs: Fs,
    rule_apps: usize,
}

impl ParseTree {
    fn leaf(token: &str, pos: usize, category: &str, entry: Option<usize>, fs: Fs) -> Self {
        ParseTree {
            category: category.to_string(),
            start: pos,
            end: pos + 1,
            node: Node::Leaf {
                token: token.to_string(),
                entry,
            },
            fs,
            rule_apps: 0,
        }
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self.node, Node::Leaf { entry: None, .. })
    }

    pub fn syn(&self) -> Option<&Fs> {
        self.fs.feature("syn")
    }

    pub fn children(&self) -> &[Arc<ParseTree>] {
        match &self.node {
            Node::Internal { children, .. } => children,
            Node::Leaf { .. } => &[],
        }
    }

    /// Number of rule applications (internal nodes).
    pub fn rule_applications(&self) -> usize {
        self.rule_apps
    }

    fn rule_sequence(&self, out: &mut Vec<usize>) {
        if let Node::Internal { rule, children } = &self.node {
            out.push(*rule);
            for c in children {
                c.rule_sequence(out);
            }
        }
    }

    /// Preference among competing trees: fewer rule applications, then
    /// earlier rules in preorder.
    pub fn preference(&self, other: &ParseTree) -> Ordering {
        self.rule_apps.cmp(&other.rule_apps).then_with(|| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            self.rule_sequence(&mut a);
            other.rule_sequence(&mut b);
            a.cmp(&b)
        })
    }
}

impl fmt::Display for ParseTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Leaf { token, .. } => {
                if token.contains(['(', ')', '"', ';']) {
                    write!(f, "({} {})", self.category, sexpr::quote(token))
                } else {
                    write!(f, "({} {token})", self.category)
                }
            }
            Node::Internal { children, .. } => {
                write!(f, "({}", self.category)?;
                for c in children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Ordered, disjoint trees jointly covering every token.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentCover {
    pub fragments: Vec<Arc<ParseTree>>,
}

impl fmt::Display for FragmentCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.fragments.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// What [`Chart::best_cover`] returns.
#[derive(Debug, Clone, PartialEq)]
pub enum Cover {
    Full(Arc<ParseTree>),
    Fragments(FragmentCover),
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    pub ambiguity_cap: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            ambiguity_cap: DEFAULT_AMBIGUITY_CAP,
        }
    }
}

/// Completed chart for one sentence.
#[derive(Debug)]
pub struct Chart<'g> {
    grammar: &'g Grammar,
    n: usize,
    // cells[start][len - 1]
    cells: Vec<Vec<Vec<Arc<ParseTree>>>>,
}

impl<'g> Chart<'g> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Every tree over `[start, end)`, in derivation order.
    pub fn cell(&self, start: usize, end: usize) -> &[Arc<ParseTree>] {
        &self.cells[start][end - start - 1]
    }

    /// Trees spanning the whole input with a start category, most preferred
    /// first.
    pub fn full_parses(&self) -> Vec<Arc<ParseTree>> {
        let mut out: Vec<Arc<ParseTree>> = self
            .cell(0, self.n)
            .iter()
            .filter(|t| self.grammar.is_start(&t.category))
            .cloned()
            .collect();
        out.sort_by(|a, b| a.preference(b));
        out
    }

    /// A full parse when one exists, otherwise the cover with the fewest
    /// fragments, preferring longer fragments from the left.
    pub fn best_cover(&self) -> Cover {
        if let Some(best) = self.full_parses().into_iter().next() {
            return Cover::Full(best);
        }
        // best[i] = (fragment count, first fragment end) for covering [i, n)
        let mut best: Vec<Option<(usize, usize)>> = vec![None; self.n + 1];
        best[self.n] = Some((0, self.n));
        for i in (0..self.n).rev() {
            for j in (i + 1..=self.n).rev() {
                if self.cell(i, j).is_empty() {
                    continue;
                }
                let Some((rest, _)) = best[j] else { continue };
                if best[i].map_or(true, |(c, _)| rest + 1 < c) {
                    best[i] = Some((rest + 1, j));
                }
            }
        }
        let mut fragments = Vec::new();
        let mut i = 0;
        while i < self.n {
            let (_, j) = best[i].expect("every position has a leaf");
            fragments.push(self.maximal_tree(i, j));
            i = j;
        }
        Cover::Fragments(FragmentCover { fragments })
    }

    /// Representative tree for a fragment span: one not wrapped by a unary
    /// rule within the same span, start categories first, then by
    /// [`ParseTree::preference`].
    fn maximal_tree(&self, i: usize, j: usize) -> Arc<ParseTree> {
        let cell = self.cell(i, j);
        let wrapped = |t: &Arc<ParseTree>| {
            cell.iter()
                .any(|u| matches!(u.children(), [only] if Arc::ptr_eq(only, t)))
        };
        cell.iter()
            .filter(|t| !wrapped(t))
            .min_by(|a, b| {
                let sa = !self.grammar.is_start(&a.category);
                let sb = !self.grammar.is_start(&b.category);
                sa.cmp(&sb).then_with(|| a.preference(b))
            })
            .or_else(|| cell.first())
            .expect("non-empty cell")
            .clone()
    }
}

pub struct Parser<'g> {
    grammar: &'g Grammar,
    options: ParseOptions,
}

impl<'g> Parser<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Self::with_options(grammar, ParseOptions::default())
    }

    pub fn with_options(grammar: &'g Grammar, options: ParseOptions) -> Self {
        Parser { grammar, options }
    }

    pub fn chart<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Chart<'g>, ParseError> {
        let n = tokens.len();
        if n == 0 {
            return Err(ParseError::EmptyInput);
        }
        let mut chart = Chart {
            grammar: self.grammar,
            n,
            cells: (0..n).map(|i| vec![Vec::new(); n - i]).collect(),
        };

        for (i, tok) in tokens.iter().enumerate() {
            let tok = tok.as_ref();
            let mut cell = Vec::new();
            for (idx, entry) in self.grammar.lookup_indexed(tok) {
                let bound = apply_constraints(&entry.constraints, &[Fs::empty()], XorMode::Ordered)
                    .ok()
                    .flatten();
                if let Some(mut b) = bound {
                    let fs = b.swap_remove(0);
                    self.push(&mut cell, ParseTree::leaf(tok, i, &entry.category, Some(idx), fs));
                }
            }
            if cell.is_empty() {
                cell.push(Arc::new(ParseTree::leaf(tok, i, UNKNOWN_CATEGORY, None, Fs::empty())));
            }
            self.close_unary(&mut cell);
            chart.cells[i][0] = cell;
        }

        for len in 2..=n {
            for i in 0..=n - len {
                let j = i + len;
                let mut cell = Vec::new();
                for (ri, rule) in self.grammar.rules.iter().enumerate() {
                    if rule.arity() >= 2 && rule.arity() <= len {
                        let mut children = Vec::with_capacity(rule.arity());
                        self.combine(&chart, ri, rule, i, j, &mut children, &mut cell);
                    }
                }
                self.close_unary(&mut cell);
                chart.cells[i][len - 1] = cell;
            }
        }
        Ok(chart)
    }

    /// All complete parses with a start category, most preferred first.
    pub fn parse<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<Arc<ParseTree>>, ParseError> {
        Ok(self.chart(tokens)?.full_parses())
    }

    pub fn best_cover<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Cover, ParseError> {
        Ok(self.chart(tokens)?.best_cover())
    }

    #[allow(clippy::too_many_arguments)]
    fn combine(
        &self,
        chart: &Chart<'_>,
        ri: usize,
        rule: &Rule,
        pos: usize,
        end: usize,
        children: &mut Vec<Arc<ParseTree>>,
        cell: &mut Vec<Arc<ParseTree>>,
    ) {
        let k = children.len();
        if k == rule.arity() {
            if pos == end {
                if let Some(t) = self.build(ri, rule, children.clone()) {
                    self.push(cell, t);
                }
            }
            return;
        }
        let remaining = rule.arity() - k - 1;
        if end - pos < remaining + 1 {
            return;
        }
        for stop in pos + 1..=end - remaining {
            for t in chart.cell(pos, stop) {
                if t.category == rule.rhs[k] {
                    children.push(t.clone());
                    self.combine(chart, ri, rule, stop, end, children, cell);
                    children.pop();
                }
            }
        }
    }

    fn build(&self, ri: usize, rule: &Rule, children: Vec<Arc<ParseTree>>) -> Option<ParseTree> {
        let mut bindings = Vec::with_capacity(children.len() + 1);
        bindings.push(Fs::empty());
        bindings.extend(children.iter().map(|c| c.fs.clone()));
        let mut bound = apply_constraints(&rule.constraints, &bindings, XorMode::Ordered).ok()??;
        let rule_apps = 1 + children.iter().map(|c| c.rule_apps).sum::<usize>();
        Some(ParseTree {
            category: rule.lhs.clone(),
            start: children[0].start,
            end: children[children.len() - 1].end,
            node: Node::Internal { rule: ri, children },
            fs: bound.swap_remove(0),
            rule_apps,
        })
    }

    fn push(&self, cell: &mut Vec<Arc<ParseTree>>, tree: ParseTree) {
        let same = cell.iter().filter(|t| t.category == tree.category).count();
        if same < self.options.ambiguity_cap {
            cell.push(Arc::new(tree));
        }
    }

    fn close_unary(&self, cell: &mut Vec<Arc<ParseTree>>) {
        let mut k = 0;
        while k < cell.len() {
            let child = cell[k].clone();
            for (ri, rule) in self.grammar.rules.iter().enumerate() {
                if rule.arity() == 1 && rule.rhs[0] == child.category {
                    if let Some(t) = self.build(ri, rule, vec![child.clone()]) {
                        self.push(cell, t);
                    }
                }
            }
            k += 1;
        }
    }
}

/// Convenience wrapper: all full parses under default options.
pub fn parse<S: AsRef<str>>(tokens: &[S], grammar: &Grammar) -> Result<Vec<Arc<ParseTree>>, ParseError> {
    Parser::new(grammar).parse(tokens)
}

/// Convenience wrapper: [`Chart::best_cover`] under default options.
pub fn best_cover<S: AsRef<str>>(tokens: &[S], grammar: &Grammar) -> Result<Cover, ParseError> {
    Parser::new(grammar).best_cover(tokens)
}
