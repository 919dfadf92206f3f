//! Sentence-level composition: parse, gloss, compile, decode.

use thiserror::Error;

use crate::decoder::{nbest, DecodeError, DecoderConfig, Scored};
use crate::featstruct::{Fs, EMPTY_LITERAL};
use crate::glosser::{GlossError, GlossInput, GlossNode, GlossOptions, Glosser};
use crate::grammar::Grammar;
use crate::lattice::{compile, LatticeError, WordLattice};
use crate::lm::NGramModel;
use crate::parser::{Cover, ParseOptions, Parser};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Gloss(#[from] GlossError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// A grammar with parser and glosser settings.
pub struct Pipeline<'g> {
    parser: Parser<'g>,
    glosser: Glosser<'g>,
}

impl<'g> Pipeline<'g> {
    pub fn new(grammar: &'g Grammar, parse: ParseOptions, gloss: GlossOptions) -> Self {
        Pipeline {
            parser: Parser::with_options(grammar, parse),
            glosser: Glosser::with_options(grammar, gloss),
        }
    }

    /// Gloss a tokenized sentence: every full parse (as alternatives, most
    /// preferred first) if there is one, the best fragment cover otherwise.
    /// An empty sentence glosses to nothing.
    pub fn gloss<S: AsRef<str>>(&self, tokens: &[S]) -> Result<GlossNode, PipelineError> {
        if tokens.is_empty() {
            return Ok(GlossNode::from_gloss(Fs::text(EMPTY_LITERAL)));
        }
        let chart = self.parser.chart(tokens).expect("non-empty input");
        let parses = chart.full_parses();
        let node = if parses.is_empty() {
            match chart.best_cover() {
                Cover::Fragments(f) => self.glosser.gloss_input(GlossInput::Cover(&f))?,
                Cover::Full(t) => self.glosser.gloss_input(GlossInput::Parses(&[t]))?,
            }
        } else {
            self.glosser.gloss_input(GlossInput::Parses(&parses))?
        };
        Ok(node)
    }

    /// Gloss and compile, morphology included.
    pub fn lattice<S: AsRef<str>>(&self, tokens: &[S]) -> Result<WordLattice, PipelineError> {
        Ok(compile(&self.gloss(tokens)?)?)
    }

    /// The whole chain for one sentence.
    pub fn translate<S: AsRef<str>>(&self, tokens: &[S], model: &NGramModel, cfg: &DecoderConfig) -> Result<Vec<Scored>, PipelineError> {
        Ok(nbest(&self.lattice(tokens)?, model, cfg)?)
    }
}

/// Whitespace tokenization of one input line.
pub fn tokenize(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}
