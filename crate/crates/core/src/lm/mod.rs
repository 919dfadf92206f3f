//! Class-based n-gram language models with binned Good-Turing estimation.

mod classify;
mod counts;
mod gt;
mod io;
mod model;

use thiserror::Error;

pub use classify::{classify, map_token, TokenClass, BOS, EOS, MONEY_TOKEN, NUM_TOKEN, PROPER_TOKEN};
pub use counts::{count_corpus, map_sentence, pad, CountTable, Ngram};
pub use gt::{fit_log_linear, gt_estimate, gt_table, gt_table_positive, Estimator, FreqOfFreq, GtTable, LogLinear};
pub use io::{load_model, save_model, FORMAT_VERSION};
pub use model::{build_model, Bin, Binning, EmptyBins, Level, LmConfig, NGramModel, UNKNOWN};

#[derive(Debug, Error)]
pub enum LmError {
    #[error("unsupported model order {0} (expected 2 or 3)")]
    Order(usize),
    #[error("no evidence for r = {0}")]
    NoEvidence(u64),
    #[error("{n}-gram bins: grid cell {cell} lies between occupied cells but holds no n-gram; use fewer bins per decade")]
    EmptyBin { n: usize, cell: i64 },
    #[error("corpus has no sentences")]
    EmptyCorpus,
    #[error("history `{history}` sums to {sum}")]
    Normalization { history: String, sum: f64 },
    #[error("model file line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
