//! Versioned text format for [`NGramModel`].
//!
//! A header of `key<TAB>value` lines is followed by sections introduced by
//! `\name` lines. Section lines are `value<TAB>key`, sorted by key. Floats
//! use the shortest representation that reads back to the same bits.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::gt::Estimator;
use super::model::{Bin, Binning, EmptyBins, Level, LmConfig, NGramModel};
use super::LmError;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "glossmt-lm";

fn binning_str(b: Binning) -> String {
    match b {
        Binning::Plain => "plain".into(),
        Binning::Single => "single".into(),
        Binning::PerDecade(k) => format!("decade:{k}"),
    }
}

fn parse_binning(s: &str) -> Option<Binning> {
    match s {
        "plain" => Some(Binning::Plain),
        "single" => Some(Binning::Single),
        _ => s.strip_prefix("decade:")?.parse().ok().map(Binning::PerDecade),
    }
}

fn estimator_str(e: Estimator) -> &'static str {
    match e {
        Estimator::Mle => "mle",
        Estimator::Turing => "turing",
        Estimator::SimpleGoodTuring => "sgt",
    }
}

fn parse_estimator(s: &str) -> Option<Estimator> {
    match s {
        "mle" => Some(Estimator::Mle),
        "turing" => Some(Estimator::Turing),
        "sgt" => Some(Estimator::SimpleGoodTuring),
        _ => None,
    }
}

fn write_section(out: &mut String, name: &str, mut rows: Vec<(String, f64)>) {
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    let _ = writeln!(out, "\\{name}");
    for (k, v) in rows {
        let _ = writeln!(out, "{v}\t{k}");
    }
}

/// Serialize a model.
pub fn save_model(m: &NGramModel) -> String {
    let c = &m.config;
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}\t{FORMAT_VERSION}");
    let _ = writeln!(out, "order\t{}", c.order);
    let _ = writeln!(out, "unseen-slots\t{}", c.unseen_slots);
    let _ = writeln!(out, "estimator\t{}", estimator_str(c.estimator));
    let _ = writeln!(out, "bins-bigram\t{}", binning_str(c.bigram_bins));
    let _ = writeln!(out, "bins-trigram\t{}", binning_str(c.trigram_bins));
    let empty = match c.empty_bins {
        EmptyBins::Merge => "merge",
        EmptyBins::Fault => "fault",
    };
    let _ = writeln!(out, "empty-bins\t{empty}");
    let _ = writeln!(out, "corpus-sha256\t{}", m.corpus_digest);
    let _ = writeln!(out, "vocab-size\t{}", m.vocab.len());
    let _ = writeln!(out, "unknown\t{}", m.unknown_ln);
    let _ = writeln!(out, "keep\t{}", m.keep_ln);

    write_section(
        &mut out,
        "unigrams",
        m.vocab.iter().zip(&m.unigram_ln).map(|(w, v)| (w.clone(), *v)).collect(),
    );
    for lvl in &m.levels {
        let _ = writeln!(out, "\\bins-{}", lvl.n);
        for b in &lvl.bins {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", b.unseen_ln, b.cell, b.types, b.tokens, b.n0, b.n1);
        }
    }
    let rows = |map: &HashMap<[u32; 3], f64>| -> Vec<(String, f64)> { map.iter().map(|(k, v)| (m.key_tokens(k), *v)).collect() };
    if m.config.order == 3 {
        write_section(&mut out, "joint-2", rows(&m.joint2));
    }
    let n = m.config.order;
    write_section(&mut out, &format!("history-{n}"), rows(&m.scale));
    write_section(&mut out, &format!("conditional-{n}"), rows(&m.cond));
    out.push_str("\\end\n");
    out
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Reader<'a> {
    fn err(line: usize, msg: impl Into<String>) -> LmError {
        LmError::Format { line, msg: msg.into() }
    }

    fn next(&mut self) -> Result<(usize, &'a str), LmError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Self::err(0, "unexpected end of file"))
    }

    fn header(&mut self, key: &str) -> Result<(usize, &'a str), LmError> {
        let (n, l) = self.next()?;
        match l.split_once('\t') {
            Some((k, v)) if k == key => Ok((n, v)),
            _ => Err(Self::err(n, format!("expected `{key}`"))),
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, LmError> {
        let (n, v) = self.header(key)?;
        v.parse().map_err(|_| Self::err(n, format!("bad value for `{key}`")))
    }

    fn section(&mut self, name: &str) -> Result<(), LmError> {
        let (n, l) = self.next()?;
        if l.strip_prefix('\\') == Some(name) {
            Ok(())
        } else {
            Err(Self::err(n, format!("expected section \\{name}")))
        }
    }

    /// Rows up to the next section header.
    fn rows(&mut self) -> Result<Vec<(usize, f64, &'a str)>, LmError> {
        let mut out = Vec::new();
        while let Some(&(_, l)) = self.lines.peek() {
            if l.starts_with('\\') {
                break;
            }
            let (n, l) = self.next()?;
            let (v, k) = l.split_once('\t').ok_or_else(|| Self::err(n, "expected `value<TAB>key`"))?;
            let v: f64 = v.parse().map_err(|_| Self::err(n, "bad float"))?;
            out.push((n, v, k));
        }
        Ok(out)
    }
}

/// Parse a model written by [`save_model`].
pub fn load_model(text: &str) -> Result<NGramModel, LmError> {
    let mut r = Reader {
        lines: text.lines().enumerate().peekable(),
    };
    let version: u32 = r.parsed(MAGIC)?;
    if version != FORMAT_VERSION {
        return Err(Reader::err(1, format!("unsupported format version {version}")));
    }
    let order: usize = r.parsed("order")?;
    super::counts::check_order(order)?;
    let unseen_slots: u64 = r.parsed("unseen-slots")?;
    let (n, e) = r.header("estimator")?;
    let estimator = parse_estimator(e).ok_or_else(|| Reader::err(n, "unknown estimator"))?;
    let (n, b) = r.header("bins-bigram")?;
    let bigram_bins = parse_binning(b).ok_or_else(|| Reader::err(n, "bad binning"))?;
    let (n, b) = r.header("bins-trigram")?;
    let trigram_bins = parse_binning(b).ok_or_else(|| Reader::err(n, "bad binning"))?;
    let (n, e) = r.header("empty-bins")?;
    let empty_bins = match e {
        "merge" => EmptyBins::Merge,
        "fault" => EmptyBins::Fault,
        _ => return Err(Reader::err(n, "bad empty-bins policy")),
    };
    let (_, digest) = r.header("corpus-sha256")?;
    let vocab_size: usize = r.parsed("vocab-size")?;
    let unknown_ln: f64 = r.parsed("unknown")?;
    let keep_ln: f64 = r.parsed("keep")?;
    let config = LmConfig {
        order,
        unseen_slots,
        bigram_bins,
        trigram_bins,
        estimator,
        empty_bins,
    };

    r.section("unigrams")?;
    let uni = r.rows()?;
    if uni.len() != vocab_size {
        return Err(Reader::err(0, format!("expected {vocab_size} unigrams, found {}", uni.len())));
    }
    let vocab: Vec<String> = uni.iter().map(|(_, _, k)| k.to_string()).collect();
    let unigram_ln: Vec<f64> = uni.iter().map(|(_, v, _)| *v).collect();

    let mut levels = Vec::new();
    for lvl in 2..=order {
        r.section(&format!("bins-{lvl}"))?;
        let mut bins: Vec<Bin> = Vec::new();
        while let Some(&(_, l)) = r.lines.peek() {
            if l.starts_with('\\') {
                break;
            }
            let (n, l) = r.next()?;
            let f: Vec<&str> = l.split('\t').collect();
            let bad = || Reader::err(n, "bad bin line");
            let [v, cell, types, tokens, n0, n1] = f[..] else {
                return Err(bad());
            };
            bins.push(Bin {
                cell: cell.parse().map_err(|_| bad())?,
                hi: i64::MAX,
                unseen_ln: v.parse().map_err(|_| bad())?,
                types: types.parse().map_err(|_| bad())?,
                tokens: tokens.parse().map_err(|_| bad())?,
                n0: n0.parse().map_err(|_| bad())?,
                n1: n1.parse().map_err(|_| bad())?,
            });
        }
        for i in 0..bins.len().saturating_sub(1) {
            bins[i].hi = (bins[i].cell + bins[i + 1].cell).div_euclid(2);
        }
        levels.push(Level {
            n: lvl,
            binning: if lvl == 2 { bigram_bins } else { trigram_bins },
            bins,
        });
    }

    // placeholder model to resolve token keys
    let probe = NGramModel::assemble(
        config.clone(),
        digest.to_string(),
        vocab.clone(),
        unigram_ln.clone(),
        unknown_ln,
        keep_ln,
        Vec::new(),
        HashMap::new(),
        HashMap::new(),
        HashMap::new(),
    );
    let keyed = |r: &mut Reader<'_>, name: &str| -> Result<HashMap<[u32; 3], f64>, LmError> {
        r.section(name)?;
        r.rows()?
            .into_iter()
            .map(|(n, v, k)| {
                probe
                    .tokens_key(k)
                    .map(|key| (key, v))
                    .ok_or_else(|| Reader::err(n, format!("unknown n-gram `{k}`")))
            })
            .collect()
    };
    let joint2 = if order == 3 { keyed(&mut r, "joint-2")? } else { HashMap::new() };
    let scale = keyed(&mut r, &format!("history-{order}"))?;
    let cond = keyed(&mut r, &format!("conditional-{order}"))?;
    r.section("end")?;

    Ok(NGramModel::assemble(
        config,
        digest.to_string(),
        vocab,
        unigram_ln,
        unknown_ln,
        keep_ln,
        levels,
        joint2,
        cond,
        scale,
    ))
}
