//! Glossing machine translation.
//!
//! Source tokens are parsed with a unification-augmented context-free
//! grammar, each parse is glossed bottom-up into a disjunctive feature
//! structure, the structure is compiled into a target-language word lattice,
//! and an n-gram language model picks the most fluent paths with an N-best
//! beam search.

pub mod decoder;
pub mod featstruct;
pub mod glosser;
pub mod grammar;
pub mod lattice;
pub mod lm;
pub mod parser;
pub mod pipeline;
pub mod sexpr;

pub use featstruct::{Feature, FeaturePath, Fs, FsError, Path};
pub use decoder::{nbest, DecoderConfig, Scored};
pub use glosser::{GlossNode, Glosser};
pub use grammar::{load_grammar, Grammar};
pub use lattice::{compile, count_paths, WordLattice};
pub use lm::{build_model, load_model, save_model, LmConfig, NGramModel};
pub use num_bigint::BigUint;
pub use parser::{ParseOptions, ParseTree, Parser};
pub use pipeline::{tokenize, Pipeline};
