use std::collections::BTreeMap;
use std::io::BufRead;

use sha2::{Digest, Sha256};

use super::classify::{map_token, BOS, EOS};
use super::LmError;

pub type Ngram = Vec<String>;

/// n-gram counts over class-mapped, boundary-padded sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    order: usize,
    /// `grams[n - 1]` holds n-gram counts.
    grams: Vec<BTreeMap<Ngram, u64>>,
    sentences: u64,
    digest: [u8; 32],
}

pub fn check_order(order: usize) -> Result<(), LmError> {
    if (2..=3).contains(&order) {
        Ok(())
    } else {
        Err(LmError::Order(order))
    }
}

/// Class-map one whitespace-tokenized sentence.
pub fn map_sentence<S: AsRef<str>>(words: &[S]) -> Vec<String> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| map_token(w.as_ref(), i == 0))
        .collect()
}

/// `order - 1` start tokens, the sentence, one end token.
pub fn pad(order: usize, mapped: &[String]) -> Vec<String> {
    let mut out = vec![BOS.to_string(); order - 1];
    out.extend(mapped.iter().cloned());
    out.push(EOS.to_string());
    out
}

impl CountTable {
    pub fn new(order: usize) -> Result<Self, LmError> {
        check_order(order)?;
        Ok(CountTable {
            order,
            grams: vec![BTreeMap::new(); order],
            sentences: 0,
            digest: Sha256::digest(b"").into(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn sentences(&self) -> u64 {
        self.sentences
    }

    /// Counts of n-grams of length `n` (1-based).
    pub fn grams(&self, n: usize) -> &BTreeMap<Ngram, u64> {
        &self.grams[n - 1]
    }

    pub fn count(&self, gram: &[&str]) -> u64 {
        let key: Ngram = gram.iter().map(|s| s.to_string()).collect();
        self.grams[gram.len() - 1].get(&key).copied().unwrap_or(0)
    }

    /// Total tokens of order `n`.
    pub fn total(&self, n: usize) -> u64 {
        self.grams[n - 1].values().sum()
    }

    /// Hex SHA-256 of the lines counted (and of merged tables' digests).
    pub fn digest_hex(&self) -> String {
        self.digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Count one sentence. Blank lines are skipped.
    pub fn add_sentence(&mut self, line: &str) {
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            return;
        }
        let mut h = Sha256::new();
        h.update(self.digest);
        h.update(words.join(" ").as_bytes());
        self.digest = h.finalize().into();
        self.sentences += 1;
        let padded = pad(self.order, &map_sentence(&words));
        for n in 1..=self.order {
            for w in padded.windows(n) {
                *self.grams[n - 1].entry(w.to_vec()).or_insert(0) += 1;
            }
        }
    }

    /// Pointwise sum.
    pub fn merge(&mut self, other: &CountTable) -> Result<(), LmError> {
        if other.order != self.order {
            return Err(LmError::Order(other.order));
        }
        for (mine, theirs) in self.grams.iter_mut().zip(&other.grams) {
            for (k, v) in theirs {
                *mine.entry(k.clone()).or_insert(0) += v;
            }
        }
        let mut h = Sha256::new();
        h.update(self.digest);
        h.update(other.digest);
        self.digest = h.finalize().into();
        self.sentences += other.sentences;
        Ok(())
    }
}

/// Count a corpus with one sentence per line.
pub fn count_corpus<R: BufRead>(input: R, order: usize) -> Result<CountTable, LmError> {
    let mut t = CountTable::new(order)?;
    for line in input.lines() {
        t.add_sentence(&line?);
    }
    Ok(t)
}
