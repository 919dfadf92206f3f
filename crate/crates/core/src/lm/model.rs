use std::collections::{BTreeMap, HashMap};
use std::f64::consts::LN_10;

use super::classify::{BOS, EOS};
use super::counts::{check_order, map_sentence, CountTable};
use super::gt::{gt_table_positive, Estimator, FreqOfFreq};
use super::LmError;

/// Id for tokens outside the vocabulary.
pub const UNKNOWN: u32 = u32::MAX - 1;
const PAD: u32 = u32::MAX;

type Key = [u32; 3];

fn key(ids: &[u32]) -> Key {
    let mut k = [PAD; 3];
    k[..ids.len()].copy_from_slice(ids);
    k
}

/// How n-grams are grouped before Good-Turing is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Binning {
    /// No secondary predictor: one table over the whole event space.
    Plain,
    /// Binned code path with every n-gram in one bin.
    Single,
    /// `k` bins per order of magnitude of the predictor.
    PerDecade(u32),
}

impl Binning {
    /// Grid cell of a natural-log predictor value.
    pub fn cell(self, predictor_ln: f64) -> i64 {
        match self {
            Binning::Plain | Binning::Single => 0,
            Binning::PerDecade(k) => (predictor_ln / LN_10 * k as f64).floor() as i64,
        }
    }
}

/// What to do with grid cells between occupied ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmptyBins {
    /// Each empty cell joins the nearest occupied cell (the lower one on ties).
    #[default]
    Merge,
    /// An empty cell between occupied cells is an error.
    Fault,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmConfig {
    pub order: usize,
    pub unseen_slots: u64,
    pub bigram_bins: Binning,
    pub trigram_bins: Binning,
    pub estimator: Estimator,
    pub empty_bins: EmptyBins,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            order: 2,
            unseen_slots: 130_000,
            bigram_bins: Binning::PerDecade(3),
            trigram_bins: Binning::PerDecade(2),
            estimator: Estimator::SimpleGoodTuring,
            empty_bins: EmptyBins::Merge,
        }
    }
}

/// One Good-Turing bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    /// The occupied grid cell.
    pub cell: i64,
    /// Last grid cell mapped here (`i64::MAX` for the top bin).
    pub hi: i64,
    /// ln of the joint probability of one unseen n-gram in this bin.
    pub unseen_ln: f64,
    pub types: u64,
    pub tokens: u64,
    pub n0: u64,
    pub n1: u64,
}

/// Bins for n-grams of one length.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub n: usize,
    pub binning: Binning,
    pub bins: Vec<Bin>,
}

impl Level {
    fn bin_of(&self, cell: i64) -> usize {
        self.bins.partition_point(|b| b.hi < cell)
    }

    /// Bin index for predictor `h_ln + w_ln`.
    fn bin_for(&self, h_ln: f64, w_ln: f64) -> usize {
        self.bin_of(self.binning.cell(h_ln + w_ln))
    }

    /// How many continuations (sorted ln unigram values) land in each bin
    /// for a history with predictor part `h_ln`.
    fn counts_per_bin(&self, h_ln: f64, sorted_ln: &[f64]) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.bins.len());
        let mut prev = 0;
        for b in &self.bins {
            let upto = if b.hi == i64::MAX {
                sorted_ln.len()
            } else {
                sorted_ln.partition_point(|&w| self.binning.cell(h_ln + w) <= b.hi)
            };
            out.push((upto - prev) as u64);
            prev = upto;
        }
        out
    }

    /// Total unseen-pair mass for a history, given how many seen
    /// continuations it has per bin.
    fn unseen_sum(&self, h_ln: f64, sorted_ln: &[f64], seen_per_bin: &[u64]) -> f64 {
        self.counts_per_bin(h_ln, sorted_ln)
            .iter()
            .zip(&self.bins)
            .enumerate()
            .map(|(i, (&c, b))| {
                let unseen = c - seen_per_bin.get(i).copied().unwrap_or(0);
                if unseen == 0 {
                    0.0
                } else {
                    unseen as f64 * b.unseen_ln.exp()
                }
            })
            .sum()
    }
}

/// Smoothed n-gram model over class-mapped tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    pub(super) config: LmConfig,
    pub(super) corpus_digest: String,
    pub(super) vocab: Vec<String>,
    pub(super) index: HashMap<String, u32>,
    pub(super) unigram_ln: Vec<f64>,
    pub(super) unknown_ln: f64,
    /// ln of the probability mass left to in-vocabulary continuations.
    pub(super) keep_ln: f64,
    /// Sorted ln unigram probabilities of every possible continuation.
    pub(super) predicted_ln: Vec<f64>,
    pub(super) levels: Vec<Level>,
    /// ln joint probabilities of seen bigrams (trigram models only).
    pub(super) joint2: HashMap<Key, f64>,
    /// ln conditional probabilities of seen top-order n-grams.
    pub(super) cond: HashMap<Key, f64>,
    /// Per seen history: ln factor turning an unseen joint into a
    /// conditional.
    pub(super) scale: HashMap<Key, f64>,
}

fn ln(x: f64) -> f64 {
    x.ln()
}

struct LevelBuild {
    level: Level,
    /// ln joint of each seen n-gram.
    joint: BTreeMap<Vec<u32>, f64>,
}

impl NGramModel {
    pub fn order(&self) -> usize {
        self.config.order
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    pub fn corpus_digest(&self) -> &str {
        &self.corpus_digest
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Vocabulary id, or [`UNKNOWN`].
    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNKNOWN)
    }

    pub fn bos(&self) -> u32 {
        self.id(BOS)
    }

    pub fn eos(&self) -> u32 {
        self.id(EOS)
    }

    /// Probability mass given to out-of-vocabulary words.
    pub fn unseen_mass(&self) -> f64 {
        -self.keep_ln.exp_m1()
    }

    /// ln probability of one unknown word.
    pub fn unknown_logprob(&self) -> f64 {
        self.unknown_ln
    }

    fn uni(&self, id: u32) -> f64 {
        if id == UNKNOWN {
            self.unknown_ln
        } else {
            self.unigram_ln[id as usize]
        }
    }

    /// ln of the first factor of the predictor for a history.
    fn history_ln(&self, hist: &[u32]) -> f64 {
        match hist {
            [a] => self.uni(*a),
            [a, b] => match self.joint2.get(&key(hist)) {
                Some(v) => *v,
                None => {
                    let lvl = &self.levels[0];
                    lvl.bins[lvl.bin_for(self.uni(*a), self.uni(*b))].unseen_ln
                }
            },
            _ => unreachable!("history length is order - 1"),
        }
    }

    fn top(&self) -> &Level {
        self.levels.last().unwrap()
    }

    /// ln P(word | history) over vocabulary ids. A short history is padded
    /// on the left with `<s>`.
    pub fn logprob_ids(&self, history: &[u32], word: u32) -> f64 {
        let n = self.config.order;
        let mut hist = vec![self.bos(); (n - 1).saturating_sub(history.len())];
        hist.extend_from_slice(&history[history.len().saturating_sub(n - 1)..]);
        if word == UNKNOWN || word == self.bos() {
            return self.unknown_ln;
        }
        let mut full = hist.clone();
        full.push(word);
        if let Some(v) = self.cond.get(&key(&full)) {
            return *v;
        }
        let h_ln = self.history_ln(&hist);
        let top = self.top();
        let unseen_ln = top.bins[top.bin_for(h_ln, self.uni(word))].unseen_ln;
        if let Some(s) = self.scale.get(&key(&hist)) {
            return s + unseen_ln;
        }
        let z = top.unseen_sum(h_ln, &self.predicted_ln, &[]);
        if z > 0.0 {
            self.keep_ln - z.ln() + unseen_ln
        } else {
            self.keep_ln - (self.predicted_ln.len() as f64).ln()
        }
    }

    /// ln P(word | history) over class-mapped tokens.
    pub fn logprob(&self, word: &str, history: &[&str]) -> f64 {
        let h: Vec<u32> = history.iter().map(|t| self.id(t)).collect();
        self.logprob_ids(&h, self.id(word))
    }

    /// Class-map `words`, score them between boundary tokens, and add
    /// `bonus` per word.
    pub fn sentence_ll<S: AsRef<str>>(&self, words: &[S], bonus: f64) -> f64 {
        let mapped = map_sentence(words);
        let mut hist = vec![self.bos(); self.config.order - 1];
        let mut ll = 0.0;
        for w in mapped.iter().map(|t| self.id(t)).chain([self.eos()]) {
            ll += self.logprob_ids(&hist, w);
            hist.remove(0);
            hist.push(w);
        }
        ll + bonus * words.len() as f64
    }

    /// Every token that can follow a history (the vocabulary minus `<s>`).
    pub fn continuations(&self) -> impl Iterator<Item = u32> + '_ {
        let bos = self.bos();
        (0..self.vocab.len() as u32).filter(move |&i| i != bos)
    }

    /// Histories with at least one seen continuation, sorted.
    pub fn seen_histories(&self) -> Vec<Vec<u32>> {
        let mut hs: Vec<Vec<u32>> = self
            .scale
            .keys()
            .map(|k| k.iter().copied().filter(|&x| x != PAD).collect())
            .collect();
        hs.sort();
        hs
    }

    /// Σ_w P(w | history) over in-vocabulary continuations plus the unknown
    /// mass.
    pub fn history_sum(&self, history: &[u32]) -> f64 {
        let seen: f64 = self.continuations().map(|w| self.logprob_ids(history, w).exp()).sum();
        seen + self.unseen_mass()
    }

    /// Check that every seen history, and one unseen history, sums to one.
    pub fn check_normalization(&self, tol: f64) -> Result<(), LmError> {
        let mut hs = self.seen_histories();
        hs.push(vec![UNKNOWN; self.config.order - 1]);
        for h in hs {
            let sum = self.history_sum(&h);
            if !((sum - 1.0).abs() <= tol) {
                let history = h
                    .iter()
                    .map(|&i| if i == UNKNOWN { "<unk>" } else { self.vocab[i as usize].as_str() })
                    .collect::<Vec<_>>()
                    .join(" ");
                return Err(LmError::Normalization { history, sum });
            }
        }
        Ok(())
    }

    /// Recompute derived lookup structures after fields are set.
    pub(super) fn assemble(
        config: LmConfig,
        corpus_digest: String,
        vocab: Vec<String>,
        unigram_ln: Vec<f64>,
        unknown_ln: f64,
        keep_ln: f64,
        levels: Vec<Level>,
        joint2: HashMap<Key, f64>,
        cond: HashMap<Key, f64>,
        scale: HashMap<Key, f64>,
    ) -> Self {
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect::<HashMap<_, _>>();
        let bos = index.get(BOS).copied();
        let mut predicted_ln: Vec<f64> = (0..vocab.len())
            .filter(|&i| Some(i as u32) != bos)
            .map(|i| unigram_ln[i])
            .collect();
        predicted_ln.sort_by(f64::total_cmp);
        NGramModel {
            config,
            corpus_digest,
            vocab,
            index,
            unigram_ln,
            unknown_ln,
            keep_ln,
            predicted_ln,
            levels,
            joint2,
            cond,
            scale,
        }
    }

    pub(super) fn key_tokens(&self, k: &Key) -> String {
        k.iter()
            .filter(|&&x| x != PAD)
            .map(|&x| self.vocab[x as usize].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub(super) fn tokens_key(&self, toks: &str) -> Option<Key> {
        let ids: Vec<u32> = toks.split(' ').map(|t| self.index.get(t).copied()).collect::<Option<_>>()?;
        (1..=3).contains(&ids.len()).then(|| key(&ids))
    }
}

fn build_bins(n: usize, cells: impl Iterator<Item = i64>, policy: EmptyBins) -> Result<Vec<Bin>, LmError> {
    let mut occupied: Vec<i64> = cells.collect();
    occupied.sort_unstable();
    occupied.dedup();
    if policy == EmptyBins::Fault {
        if let Some(w) = occupied.windows(2).find(|w| w[1] != w[0] + 1) {
            return Err(LmError::EmptyBin { n, cell: w[0] + 1 });
        }
    }
    Ok(occupied
        .iter()
        .enumerate()
        .map(|(i, &cell)| Bin {
            cell,
            hi: match occupied.get(i + 1) {
                Some(&next) => (cell + next).div_euclid(2),
                None => i64::MAX,
            },
            unseen_ln: f64::NEG_INFINITY,
            types: 0,
            tokens: 0,
            n0: 0,
            n1: 0,
        })
        .collect())
}

/// Estimate one n-gram level. `histories` is the event space's history
/// set with each history's predictor part; `seen` maps (history ++ word)
/// to counts.
fn build_level(
    n: usize,
    binning: Binning,
    policy: EmptyBins,
    estimator: Estimator,
    histories: &[(Vec<u32>, f64)],
    seen: &BTreeMap<Vec<u32>, u64>,
    hist_ln: &dyn Fn(&[u32]) -> f64,
    uni: &[f64],
    predicted_ln: &[f64],
    in_space: &dyn Fn(&[u32]) -> bool,
) -> Result<LevelBuild, LmError> {
    let total: u64 = seen.values().sum();
    let cell_of = |g: &[u32]| binning.cell(hist_ln(&g[..n - 1]) + uni[g[n - 1] as usize]);
    let bins = build_bins(n, seen.keys().map(|g| cell_of(g)), policy)?;
    let mut level = Level { n, binning, bins };

    let mut members: Vec<Vec<u64>> = vec![Vec::new(); level.bins.len()];
    let mut seen_in_space = vec![0u64; level.bins.len()];
    let mut bin_of_gram = BTreeMap::new();
    for (g, &c) in seen {
        let b = level.bin_of(cell_of(g));
        members[b].push(c);
        if in_space(g) {
            seen_in_space[b] += 1;
        }
        bin_of_gram.insert(g.clone(), b);
    }
    let mut space = vec![0u64; level.bins.len()];
    for (_, h_ln) in histories {
        for (s, c) in space.iter_mut().zip(level.counts_per_bin(*h_ln, predicted_ln)) {
            *s += c;
        }
    }
    let mut tables = Vec::with_capacity(level.bins.len());
    for (i, bin) in level.bins.iter_mut().enumerate() {
        let fof = FreqOfFreq::from_counts(members[i].iter().copied(), space[i] - seen_in_space[i]);
        let table = gt_table_positive(&fof, estimator)?;
        bin.types = fof.types();
        bin.tokens = fof.total();
        bin.n0 = fof.unseen;
        bin.n1 = fof.get(1);
        bin.unseen_ln = ln(table.unseen_per_item) - ln(total as f64);
        tables.push(table);
    }
    let joint = seen
        .iter()
        .map(|(g, &c)| (g.clone(), ln(tables[bin_of_gram[g]].get(c)) - ln(total as f64)))
        .collect();
    Ok(LevelBuild { level, joint })
}

/// Estimate a model from counts.
pub fn build_model(counts: &CountTable, config: &LmConfig) -> Result<NGramModel, LmError> {
    check_order(config.order)?;
    if counts.order() != config.order {
        return Err(LmError::Order(counts.order()));
    }
    if counts.sentences() == 0 {
        return Err(LmError::EmptyCorpus);
    }
    let vocab: Vec<String> = counts.grams(1).keys().map(|g| g[0].clone()).collect();
    let index: HashMap<&str, u32> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();
    let ids = |g: &Vec<String>| -> Vec<u32> { g.iter().map(|t| index[t.as_str()]).collect() };
    let bos = index[BOS];
    let eos = index[EOS];

    // unigrams: Good-Turing with U unseen slots, normalized over all mass
    let uni_counts: Vec<u64> = counts.grams(1).values().copied().collect();
    let fof = FreqOfFreq::from_counts(uni_counts.iter().copied(), config.unseen_slots);
    let table = gt_table_positive(&fof, config.estimator)?;
    let seen_mass: f64 = uni_counts.iter().map(|&c| table.get(c)).sum();
    let unseen_mass = table.unseen_mass(&fof);
    let z = seen_mass + unseen_mass;
    let unigram_ln: Vec<f64> = uni_counts.iter().map(|&c| ln(table.get(c)) - ln(z)).collect();
    let unknown_ln = ln(table.unseen_per_item) - ln(z);
    let keep_ln = ln(seen_mass) - ln(z);

    let mut predicted_ln: Vec<f64> = (0..vocab.len() as u32).filter(|&i| i != bos).map(|i| unigram_ln[i as usize]).collect();
    predicted_ln.sort_by(f64::total_cmp);

    let uni = |id: u32| unigram_ln[id as usize];

    // bigram level
    let seen2: BTreeMap<Vec<u32>, u64> = counts.grams(2).iter().map(|(g, &c)| (ids(g), c)).collect();
    let hist2: Vec<(Vec<u32>, f64)> = (0..vocab.len() as u32).filter(|&a| a != eos).map(|a| (vec![a], uni(a))).collect();
    let l2 = build_level(
        2,
        config.bigram_bins,
        config.empty_bins,
        config.estimator,
        &hist2,
        &seen2,
        &|h: &[u32]| uni(h[0]),
        &unigram_ln,
        &predicted_ln,
        &|g: &[u32]| g[0] != eos && g[1] != bos,
    )?;

    let mut levels = vec![l2.level];
    let mut joint2 = HashMap::new();
    let (top_joint, top_hist): (BTreeMap<Vec<u32>, f64>, Vec<(Vec<u32>, f64)>) = if config.order == 2 {
        (l2.joint, hist2)
    } else {
        let j2 = l2.joint;
        let seen3: BTreeMap<Vec<u32>, u64> = counts.grams(3).iter().map(|(g, &c)| (ids(g), c)).collect();
        let hist3: Vec<(Vec<u32>, f64)> = j2.iter().filter(|(g, _)| g[1] != eos).map(|(g, &v)| (g.clone(), v)).collect();
        let l3 = build_level(
            3,
            config.trigram_bins,
            config.empty_bins,
            config.estimator,
            &hist3,
            &seen3,
            &|h: &[u32]| j2[h],
            &unigram_ln,
            &predicted_ln,
            &|g: &[u32]| g[2] != bos,
        )?;
        joint2 = j2.iter().map(|(g, &v)| (key(g), v)).collect();
        levels.push(l3.level);
        (l3.joint, hist3)
    };

    // conditionals: joint / Σ over continuations of the history, scaled to
    // the in-vocabulary mass
    let top = levels.last().unwrap();
    let hist_ln: HashMap<&[u32], f64> = top_hist.iter().map(|(h, v)| (h.as_slice(), *v)).collect();
    let n = config.order;
    let mut by_history: BTreeMap<&[u32], Vec<(&Vec<u32>, f64)>> = BTreeMap::new();
    for (g, &j) in &top_joint {
        by_history.entry(&g[..n - 1]).or_default().push((g, j));
    }
    let mut cond = HashMap::new();
    let mut scale = HashMap::new();
    for (h, grams) in by_history {
        let h_ln = hist_ln[h];
        let mut seen_per_bin = vec![0u64; top.bins.len()];
        let mut z = 0.0;
        for (g, j) in &grams {
            seen_per_bin[top.bin_for(h_ln, uni(g[n - 1]))] += 1;
            z += j.exp();
        }
        z += top.unseen_sum(h_ln, &predicted_ln, &seen_per_bin);
        let s = keep_ln - z.ln();
        for (g, j) in grams {
            cond.insert(key(g), s + j);
        }
        scale.insert(key(h), s);
    }

    Ok(NGramModel::assemble(
        config.clone(),
        counts.digest_hex(),
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
