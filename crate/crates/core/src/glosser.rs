//! Bottom-up glossing of parse trees.
//!
//! Each node gets a feature structure with three top-level features:
//! `gloss` (lattice content), `tmp` (abstract features awaiting spell-out)
//! and `syn` (syntactic features, readable by gloss rules). Leaves take
//! their gloss from the lexicon; internal nodes apply the gloss rule for
//! their syntactic shape. A node whose rule is missing or fails is glossed
//! by concatenating its children, so glossing never fails on parser output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use log::warn;
use thiserror::Error;

use crate::featstruct::Fs;
use crate::grammar::{apply_constraints, EvalError, Grammar, XorMode};
use crate::parser::{FragmentCover, Node, ParseTree};

pub use crate::grammar::apply_xor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GlossError {
    #[error("{category} over [{start}, {end}): {source}")]
    Rule {
        category: String,
        start: usize,
        end: usize,
        #[source]
        source: EvalError,
    },
}

/// Feature structure attached to a glossed node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossNode {
    fs: Fs,
}

impl GlossNode {
    /// A node carrying only a gloss.
    pub fn from_gloss(gloss: Fs) -> Self {
        GlossNode {
            fs: Fs::complex([("gloss", gloss)]),
        }
    }

    fn from_fs(fs: Fs) -> Option<Self> {
        fs.feature("gloss")?;
        Some(GlossNode { fs })
    }

    pub fn gloss(&self) -> &Fs {
        self.fs.feature("gloss").expect("glossed node")
    }

    pub fn tmp(&self) -> Option<&Fs> {
        self.fs.feature("tmp")
    }

    pub fn syn(&self) -> Option<&Fs> {
        self.fs.feature("syn")
    }

    /// The full structure including `syn`.
    pub fn as_fs(&self) -> &Fs {
        &self.fs
    }

    /// The `gloss`/`tmp` part, as printed in debug dumps.
    pub fn structure(&self) -> Fs {
        self.fs.without("syn")
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GlossOptions {
    pub xor_mode: XorMode,
}

/// What the parser handed over for one sentence.
#[derive(Debug, Clone, Copy)]
pub enum GlossInput<'a> {
    Parses(&'a [Arc<ParseTree>]),
    Cover(&'a FragmentCover),
}

pub struct Glosser<'g> {
    grammar: &'g Grammar,
    options: GlossOptions,
}

type Memo = HashMap<*const ParseTree, GlossNode>;

impl<'g> Glosser<'g> {
    pub fn new(grammar: &'g Grammar) -> Self {
        Self::with_options(grammar, GlossOptions::default())
    }

    pub fn with_options(grammar: &'g Grammar, options: GlossOptions) -> Self {
        Glosser { grammar, options }
    }

    /// Gloss one tree bottom-up.
    pub fn gloss_tree(&self, tree: &ParseTree) -> Result<GlossNode, GlossError> {
        self.gloss_memo(tree, &mut Memo::new())
    }

    /// Gloss a sentence: several full parses become a top-level `*OR*`,
    /// a fragment cover becomes an op-sequence. `tmp` features left at the
    /// root are dropped.
    pub fn gloss_input(&self, input: GlossInput<'_>) -> Result<GlossNode, GlossError> {
        let mut memo = Memo::new();
        let roots: Vec<GlossNode> = match input {
            GlossInput::Parses(trees) => trees
                .iter()
                .map(|t| self.gloss_memo(t, &mut memo))
                .collect::<Result<_, _>>()?,
            GlossInput::Cover(cover) => cover
                .fragments
                .iter()
                .map(|t| self.gloss_memo(t, &mut memo))
                .collect::<Result<_, _>>()?,
        };
        for r in &roots {
            if let Some(tmp) = r.tmp() {
                warn!("dropping unspelled tmp features at the root: {tmp}");
            }
        }
        let glosses = roots.iter().map(|r| r.gloss().clone());
        let gloss = match input {
            GlossInput::Parses(_) => Fs::or(glosses).unwrap_or_else(|| Fs::text(crate::featstruct::EMPTY_LITERAL)),
            GlossInput::Cover(_) => {
                let items: Vec<Fs> = glosses.collect();
                if items.len() == 1 {
                    items.into_iter().next().unwrap()
                } else {
                    Fs::sequence(items)
                }
            }
        };
        Ok(GlossNode::from_gloss(gloss))
    }

    /// Tree annotated with each node's `gloss`/`tmp` structure, one node
    /// per line.
    pub fn annotate(&self, tree: &ParseTree) -> Result<String, GlossError> {
        let mut memo = Memo::new();
        self.gloss_memo(tree, &mut memo)?;
        let mut out = String::new();
        annotate_into(tree, &memo, 0, &mut out);
        Ok(out)
    }

    fn gloss_memo(&self, tree: &ParseTree, memo: &mut Memo) -> Result<GlossNode, GlossError> {
        let key = tree as *const ParseTree;
        if let Some(done) = memo.get(&key) {
            return Ok(done.clone());
        }
        let node = match &tree.node {
            Node::Leaf { token, entry: None } => GlossNode::from_gloss(Fs::text(token.clone())),
            Node::Leaf { token, entry: Some(idx) } => {
                let entry = &self.grammar.lexicon[*idx];
                let bound = self.apply(tree, &entry.constraints, vec![Fs::empty()])?;
                match bound.and_then(GlossNode::from_fs) {
                    Some(n) => n,
                    None => {
                        warn!("lexicon entry ({} -> {token:?}) yields no gloss; using the token", entry.category);
                        GlossNode::from_gloss(Fs::text(token.clone()))
                    }
                }
            }
            Node::Internal { rule, children } => {
                let kids = children
                    .iter()
                    .map(|c| self.gloss_memo(c, memo))
                    .collect::<Result<Vec<_>, _>>()?;
                let rule = &self.grammar.rules[*rule];
                let x0 = match tree.syn() {
                    Some(syn) => Fs::complex([("syn", syn.clone())]),
                    None => Fs::empty(),
                };
                let glossed = match self.grammar.gloss_rule(&rule.lhs, &rule.rhs) {
                    Some(gr) => {
                        let mut bindings = vec![x0.clone()];
                        bindings.extend(kids.iter().map(|k| k.fs.clone()));
                        self.apply(tree, &gr.constraints, bindings)?.and_then(GlossNode::from_fs)
                    }
                    None => None,
                };
                glossed.unwrap_or_else(|| concatenate(tree, x0, &kids))
            }
        };
        memo.insert(key, node.clone());
        Ok(node)
    }

    fn apply(&self, tree: &ParseTree, constraints: &[crate::grammar::Constraint], bindings: Vec<Fs>) -> Result<Option<Fs>, GlossError> {
        let bound = apply_constraints(constraints, &bindings, self.options.xor_mode).map_err(|source| GlossError::Rule {
            category: tree.category.clone(),
            start: tree.start,
            end: tree.end,
            source,
        })?;
        Ok(bound.map(|mut b| b.swap_remove(0)))
    }
}

fn concatenate(tree: &ParseTree, x0: Fs, kids: &[GlossNode]) -> GlossNode {
    if kids.iter().any(|k| k.tmp().is_some()) {
        warn!(
            "{} over [{}, {}): gloss rule missing or failed; dropping child tmp features",
            tree.category, tree.start, tree.end
        );
    }
    let gloss = Fs::sequence(kids.iter().map(|k| k.gloss().clone()));
    let fs = crate::featstruct::unify(&x0, &Fs::complex([("gloss", gloss.clone())]))
        .unwrap_or_else(|| Fs::complex([("gloss", gloss)]));
    GlossNode { fs }
}

fn annotate_into(tree: &ParseTree, memo: &Memo, depth: usize, out: &mut String) {
    let node = &memo[&(tree as *const ParseTree)];
    let indent = "  ".repeat(depth);
    match &tree.node {
        Node::Leaf { token, .. } => {
            let _ = writeln!(out, "{indent}{} {token} {}", tree.category, node.structure());
        }
        Node::Internal { children, .. } => {
            let _ = writeln!(out, "{indent}{} {}", tree.category, node.structure());
            for c in children {
                annotate_into(c, memo, depth + 1, out);
            }
        }
    }
}

/// Gloss one tree with default options.
pub fn gloss_tree(tree: &ParseTree, grammar: &Grammar) -> Result<GlossNode, GlossError> {
    Glosser::new(grammar).gloss_tree(tree)
}

/// Gloss parser output with default options.
pub fn gloss_input(input: GlossInput<'_>, grammar: &Grammar) -> Result<GlossNode, GlossError> {
    Glosser::new(grammar).gloss_input(input)
}
