//! Oracle checks behind the acceptance criteria. Each returns a report
//! with the violations found; test targets decide how many cases to run.

use std::time::{Duration, Instant};

use glossmt_core::decoder::{nbest, DecoderConfig, Scored};
use glossmt_core::featstruct::{check_constraint, expand_disjunctions, unify, FeaturePath, Fs};
use glossmt_core::glosser::{GlossNode, GlossOptions, Glosser};
use glossmt_core::lattice::{compile, count_paths, WordLattice};
use glossmt_core::lm::{
    build_model, count_corpus, gt_estimate, gt_table, gt_table_positive, Binning, Estimator, FreqOfFreq, LmConfig, NGramModel,
    UNKNOWN,
};
use glossmt_core::parser::{parse, ParseOptions, ParseTree};
use glossmt_core::pipeline::Pipeline;
use glossmt_core::BigUint;

use super::flatten;
use super::gen::{self, Rng8};

#[derive(Debug)]
pub struct Report {
    pub cases: usize,
    pub violations: Vec<String>,
    pub elapsed: Duration,
    pub note: String,
}

impl Report {
    fn new() -> Self {
        Report {
            cases: 0,
            violations: Vec::new(),
            elapsed: Duration::ZERO,
            note: String::new(),
        }
    }

    fn fail(&mut self, msg: String) {
        if self.violations.len() < 20 {
            self.violations.push(msg);
        } else if self.violations.len() == 20 {
            self.violations.push("...".into());
        }
    }

    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn canonical_set(items: impl IntoIterator<Item = Fs>) -> Vec<Fs> {
    let mut v: Vec<Fs> = items.into_iter().map(|f| f.canonical()).collect();
    v.sort();
    v.dedup();
    v
}

fn expansion_set(fs: &Option<Fs>) -> Vec<Fs> {
    match fs {
        Some(f) => canonical_set(expand_disjunctions(f).unwrap()),
        None => Vec::new(),
    }
}

/// Unify every pair of expansions; the reference for disjunctive unify.
fn pairwise(a: &Fs, b: &Fs) -> Vec<Fs> {
    let ea = expand_disjunctions(a).unwrap();
    let eb = expand_disjunctions(b).unwrap();
    canonical_set(ea.iter().flat_map(|x| eb.iter().filter_map(move |y| unify(x, y))))
}

fn some_path(rng: &mut Rng8, fs: &Fs) -> FeaturePath {
    use rand::seq::SliceRandom;
    use rand::Rng;
    let mut names = Vec::new();
    let mut cur = fs;
    while let Fs::Complex(m) = cur {
        if m.is_empty() || (!names.is_empty() && rng.gen_bool(0.4)) {
            break;
        }
        let keys: Vec<_> = m.keys().collect();
        let k = *keys.choose(rng).unwrap();
        names.push(k.clone());
        cur = &m[k];
    }
    if names.is_empty() || rng.gen_bool(0.2) {
        names.push("a".into());
    }
    FeaturePath::new(names).unwrap()
}

/// Idempotence, commutativity, associativity, `=c` purity and the
/// expansion-set law on `n` random triples.
pub fn unification_algebra(seed: u64, n: usize, cap: u64) -> Report {
    let t0 = Instant::now();
    let mut rng = gen::rng(seed);
    let mut r = Report::new();
    for i in 0..n {
        let a = gen::feature_structure(&mut rng, cap);
        let b = gen::relative(&mut rng, &a, cap);
        let c = gen::relative(&mut rng, &a, cap);
        r.cases += 1;

        if unify(&a, &a) != a.normalize() {
            r.fail(format!("#{i} idempotence: {a}"));
        }
        let ab = unify(&a, &b);
        let ba = unify(&b, &a);
        if ab.as_ref().map(Fs::canonical) != ba.as_ref().map(Fs::canonical) {
            r.fail(format!("#{i} commutativity: {a} / {b}"));
        }
        if expansion_set(&ab) != pairwise(&a, &b) {
            r.fail(format!("#{i} expansion law: {a} / {b}"));
        }
        let left = ab.as_ref().and_then(|x| unify(x, &c));
        let right = unify(&b, &c).and_then(|x| unify(&a, &x));
        let disjunction_free = !(a.has_disjunction() || b.has_disjunction() || c.has_disjunction());
        let assoc = if disjunction_free {
            left.as_ref().map(Fs::canonical) == right.as_ref().map(Fs::canonical)
        } else {
            expansion_set(&left) == expansion_set(&right)
        };
        if !assoc {
            r.fail(format!("#{i} associativity: {a} / {b} / {c}"));
        }
        let before = a.clone();
        for v in [&b, &c] {
            let path = some_path(&mut rng, &a);
            let _ = check_constraint(&a, &path, v);
        }
        if a != before {
            r.fail(format!("#{i} =c mutated its input"));
        }
    }
    r.elapsed = t0.elapsed();
    r
}

/// Word sequences of every start-to-final path, by depth-first search
/// over arcs in index order.
pub fn enumerate_paths(lat: &WordLattice) -> Vec<Vec<String>> {
    fn go(lat: &WordLattice, s: usize, words: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if s == lat.final_state() {
            out.push(words.clone());
            return;
        }
        for a in lat.arcs().iter().filter(|a| a.from == s) {
            let pushed = a.label.word().map(|w| words.push(w.to_string())).is_some();
            go(lat, a.to, words, out);
            if pushed {
                words.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(lat, lat.start(), &mut Vec::new(), &mut out);
    out
}

/// Compile random glosses and compare path counts and path multisets with
/// the disjunction expansion.
pub fn lattice_oracle(seed: u64, n: usize, cap: u64) -> Report {
    let t0 = Instant::now();
    let mut rng = gen::rng(seed);
    let mut r = Report::new();
    for i in 0..n {
        let g = gen::gloss(&mut rng, cap, &gen::WORDS);
        r.cases += 1;
        let lat = match compile(&GlossNode::from_gloss(g.clone())) {
            Ok(l) => l,
            Err(e) => {
                r.fail(format!("#{i} compile failed on {g}: {e}"));
                continue;
            }
        };
        let mut expected: Vec<Vec<String>> = expand_disjunctions(&g).unwrap().iter().map(flatten).collect();
        if count_paths(&lat) != BigUint::from(expected.len()) {
            r.fail(format!("#{i} count {} vs {} expansions for {g}", count_paths(&lat), expected.len()));
            continue;
        }
        let mut got = enumerate_paths(&lat);
        expected.sort();
        got.sort();
        if got != expected {
            r.fail(format!("#{i} path multiset differs for {g}"));
        }
    }
    r.elapsed = t0.elapsed();
    r
}

/// Chain of `slots` two-way choices.
pub fn binary_chain(slots: usize) -> Fs {
    Fs::sequence((0..slots).map(|i| Fs::or([Fs::text(format!("a{i}")), Fs::text(format!("b{i}"))]).unwrap()))
}

/// A model over `vocab` trained on a seeded random corpus.
pub fn random_model(seed: u64, order: usize, vocab: &[&str], config: LmConfig) -> NGramModel {
    let mut rng = gen::rng(seed);
    let text = gen::corpus(&mut rng, 300, vocab);
    build_model(&count_corpus(text.as_bytes(), order).unwrap(), &LmConfig { order, ..config }).unwrap()
}

/// Exhaustive Σ_w P(w | h) + unknown mass for every seen history and a
/// few unseen ones. Returns the largest deviation from one.
pub fn normalization(model: &NGramModel) -> (usize, f64, String) {
    let n = model.order();
    let vocab = model.vocab();
    let mut histories: Vec<Vec<u32>> = model.seen_histories();
    histories.push(vec![UNKNOWN; n - 1]);
    let ids: Vec<u32> = (0..vocab.len() as u32).collect();
    // unseen in-vocabulary histories
    for &w in ids.iter().rev().take(3) {
        histories.push(vec![w; n - 1]);
    }
    let unknown_mass = model.unknown_logprob().exp() * model.config().unseen_slots as f64;
    let mut worst = (0.0, String::new());
    for h in &histories {
        let mut sum = unknown_mass;
        for &w in &ids {
            if vocab[w as usize] == "<s>" {
                continue;
            }
            sum += model.logprob_ids(h, w).exp();
        }
        let dev = (sum - 1.0).abs();
        if dev > worst.0 {
            worst = (dev, format!("{h:?} sums to {sum}"));
        }
    }
    (histories.len(), worst.0, worst.1)
}

/// Reference N-best: enumerate, score with the sentence scorer, stable
/// sort by score, keep the first of each word sequence.
pub fn brute_nbest(lat: &WordLattice, model: &NGramModel, k: usize, bonus: f64) -> Vec<Scored> {
    let mut all: Vec<Scored> = enumerate_paths(lat)
        .into_iter()
        .map(|words| Scored {
            score: model.sentence_ll(&words, bonus),
            words,
        })
        .collect();
    all.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut out: Vec<Scored> = Vec::new();
    for s in all {
        if !out.iter().any(|o| o.words == s.words) {
            out.push(s);
        }
    }
    out.truncate(k);
    out
}

fn decoder_lattice(rng: &mut Rng8, i: usize, vocab: &[&str]) -> WordLattice {
    if i % 2 == 0 {
        gen::raw_lattice(rng, 10_000, vocab)
    } else {
        compile(&GlossNode::from_gloss(gen::gloss(rng, 10_000, vocab))).unwrap()
    }
}

/// The lattice vocabulary mixes model words with unseen ones.
pub const LATTICE_WORDS: [&str; 14] = [
    "the", "a", "company", "firm", "american", "rice", "shrine", "rose", "fell", "he", "ate", "it", "zebra", "1994",
];

/// Decoder with an unbounded beam against the brute-force reference.
pub fn decoder_exactness(seed: u64, n: usize) -> Report {
    let t0 = Instant::now();
    let mut rng = gen::rng(seed);
    let mut r = Report::new();
    let models = [
        random_model(seed, 2, &gen::WORDS, LmConfig::default()),
        random_model(seed, 3, &gen::WORDS, LmConfig::default()),
    ];
    for i in 0..n {
        let lat = decoder_lattice(&mut rng, i, &LATTICE_WORDS);
        let model = &models[i % 2];
        let paths = u64::try_from(&count_paths(&lat)).unwrap() as usize;
        let k = 10;
        let cfg = DecoderConfig {
            beam: paths.max(k),
            nbest: k,
            ..DecoderConfig::default()
        };
        r.cases += 1;
        let got = nbest(&lat, model, &cfg).unwrap();
        let want = brute_nbest(&lat, model, k, cfg.bonus);
        let same = got.len() == want.len()
            && got.iter().zip(&want).all(|(g, w)| g.words == w.words && (g.score - w.score).abs() <= 1e-9);
        if !same {
            r.fail(format!("#{i} ({paths} paths, order {}): got {:?} want {:?}", model.order(), summary(&got), summary(&want)));
        }
    }
    r.elapsed = t0.elapsed();
    r
}

fn summary(v: &[Scored]) -> Vec<(String, f64)> {
    v.iter().map(|s| (s.sentence(), s.score)).collect()
}

/// Rank-1 score for increasing beams must not go down.
pub fn beam_monotonicity(seed: u64, n: usize) -> Report {
    let t0 = Instant::now();
    let mut rng = gen::rng(seed);
    let mut r = Report::new();
    let models = [
        random_model(seed, 2, &gen::WORDS, LmConfig::default()),
        random_model(seed, 3, &gen::WORDS, LmConfig::default()),
    ];
    for i in 0..n {
        let lat = decoder_lattice(&mut rng, i, &LATTICE_WORDS);
        let model = &models[i % 2];
        let full = u64::try_from(&count_paths(&lat)).unwrap() as usize;
        r.cases += 1;
        let mut prev: Option<(usize, f64)> = None;
        for beam in [1, 4, 16, 64, full.max(64)] {
            let cfg = DecoderConfig {
                beam,
                nbest: 1,
                ..DecoderConfig::default()
            };
            let best = nbest(&lat, model, &cfg).unwrap()[0].score;
            if let Some((pb, ps)) = prev {
                if best < ps {
                    r.fail(format!("#{i}: beam {beam} scores {best} < {ps} at beam {pb}"));
                }
            }
            prev = Some((beam, best));
        }
    }
    r.elapsed = t0.elapsed();
    r
}

fn fof(pairs: &[(u64, u64)], unseen: u64) -> FreqOfFreq {
    FreqOfFreq {
        n: pairs.iter().copied().collect(),
        unseen,
    }
}

/// Hand-built frequency-of-frequency tables. The last two have gaps in r.
pub const GT_TABLES: [&[(u64, u64)]; 5] = [
    &[(1, 10), (2, 5)],
    &[(1, 120), (2, 40), (3, 24), (4, 13), (5, 7), (6, 2), (7, 1)],
    &[(1, 3), (2, 2), (3, 1)],
    &[(1, 1000), (2, 10), (3, 8), (4, 6), (5, 5)],
    &[(1, 7), (2, 3), (4, 1)],
];

fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Raw Turing estimates against the closed form, and conservation of
/// total count on tables without gaps.
pub fn good_turing() -> Report {
    let t0 = Instant::now();
    let mut r = Report::new();
    let first = gt_estimate(&fof(GT_TABLES[0], 100), 1, Estimator::Turing).unwrap();
    if first != 1.0 {
        r.fail(format!("N1=10, N2=5: r*(1) = {first}, want 1.0"));
    }
    for (ti, pairs) in GT_TABLES.iter().enumerate() {
        let f = fof(pairs, 1000);
        let t = gt_table(&f, Estimator::Turing).unwrap();
        for &(rr, nr) in pairs.iter() {
            r.cases += 1;
            let next = pairs.iter().find(|p| p.0 == rr + 1).map_or(0, |p| p.1);
            let want = (rr + 1) as f64 * next as f64 / nr as f64;
            if relative_error(t.get(rr), want) > 1e-12 {
                r.fail(format!("table {ti}: r*({rr}) = {} want {want}", t.get(rr)));
            }
        }
        let n1 = pairs.iter().find(|p| p.0 == 1).map_or(0, |p| p.1);
        if relative_error(t.get(0), n1 as f64 / 1000.0) > 1e-12 {
            r.fail(format!("table {ti}: r*(0) = {}", t.get(0)));
        }
        let contiguous = pairs.iter().enumerate().all(|(i, p)| p.0 == i as u64 + 1);
        if contiguous {
            let total: f64 = pairs.iter().map(|&(rr, nr)| (rr * nr) as f64).sum();
            let kept: f64 = pairs.iter().map(|&(rr, nr)| t.get(rr) * nr as f64).sum();
            let reserved = t.unseen_mass(&f);
            if relative_error(kept + reserved, total) > 1e-9 {
                r.fail(format!("table {ti}: {kept} + {reserved} != {total}"));
            }
        }
    }
    r.elapsed = t0.elapsed();
    r
}

/// The binned code path with a single bin against the unbinned one, bit
/// for bit, plus both against a from-scratch bigram estimate.
pub fn single_bin_equals_plain(seed: u64) -> Report {
    let t0 = Instant::now();
    let mut r = Report::new();
    let mut rng = gen::rng(seed);
    let text = gen::corpus(&mut rng, 300, &gen::WORDS);
    for estimator in [Estimator::SimpleGoodTuring, Estimator::Turing] {
        let counts = count_corpus(text.as_bytes(), 2).unwrap();
        let config = |b| LmConfig {
            order: 2,
            bigram_bins: b,
            estimator,
            unseen_slots: 50,
            ..LmConfig::default()
        };
        let plain = build_model(&counts, &config(Binning::Plain)).unwrap();
        let single = build_model(&counts, &config(Binning::Single)).unwrap();

        // reference: one Good-Turing table over every bigram
        let vocab = plain.vocab();
        let hs: Vec<&String> = vocab.iter().filter(|w| *w != "</s>").collect();
        let ps: Vec<&String> = vocab.iter().filter(|w| *w != "<s>").collect();
        let grams = counts.grams(2);
        let space = (hs.len() * ps.len()) as u64 - grams.len() as u64;
        let t = gt_table_positive(&FreqOfFreq::from_counts(grams.values().copied(), space), estimator).unwrap();
        let keep = 1.0 - plain.unseen_mass();
        for h in &hs {
            let seen: Vec<(&String, u64)> =
                ps.iter().map(|w| (*w, counts.count(&[h.as_str(), w.as_str()]))).filter(|p| p.1 > 0).collect();
            let z = seen.iter().map(|p| t.get(p.1)).sum::<f64>() + t.get(0) * (ps.len() - seen.len()) as f64;
            for w in &ps {
                r.cases += 1;
                let a = plain.logprob(w, &[h]);
                let b = single.logprob(w, &[h]);
                if a.to_bits() != b.to_bits() {
                    r.fail(format!("{estimator:?} P({w}|{h}): plain {a} single {b}"));
                }
                if seen.is_empty() {
                    continue;
                }
                let c = counts.count(&[h.as_str(), w.as_str()]);
                let want = (keep * t.get(c) / z).ln();
                if (a - want).abs() > 1e-12 {
                    r.fail(format!("{estimator:?} P({w}|{h}) = {a}, reference {want}"));
                }
            }
        }
    }
    r.elapsed = t0.elapsed();
    r
}

/// Normalization on random corpora of growing size, both orders and
/// several binnings.
pub fn normalization_suite(seed: u64, max_lines: usize) -> Report {
    let t0 = Instant::now();
    let mut r = Report::new();
    let big: Vec<String> = (0..150).map(|i| format!("w{i}")).collect();
    let big: Vec<&str> = big.iter().map(String::as_str).collect();
    let mut rng = gen::rng(seed);
    let mut lines = 20;
    let mut largest = 0;
    while lines <= max_lines {
        for vocab in [&gen::WORDS[..], &big[..]] {
            let text = gen::corpus(&mut rng, lines, vocab);
            for order in [2, 3] {
                for bins in [Binning::PerDecade(3), Binning::PerDecade(1), Binning::Single] {
                    let counts = count_corpus(text.as_bytes(), order).unwrap();
                    if counts.grams(2).len() > 10_000 {
                        continue;
                    }
                    let config = LmConfig {
                        order,
                        bigram_bins: bins,
                        trigram_bins: bins,
                        ..LmConfig::default()
                    };
                    largest = largest.max(counts.grams(2).len());
                    let m = build_model(&counts, &config).unwrap();
                    let (n, worst, at) = normalization(&m);
                    r.cases += n;
                    if worst > 1e-6 {
                        r.fail(format!("{lines} lines, order {order}, {bins:?}: {at}"));
                    }
                }
            }
        }
        lines *= 2;
    }
    r.note = format!("largest model has {largest} bigram types");
    r.elapsed = t0.elapsed();
    r
}

fn lowest<'t>(tree: &'t ParseTree, category: &str) -> Option<&'t ParseTree> {
    tree.children()
        .iter()
        .find_map(|c| lowest(c, category))
        .or_else(|| (tree.category == category).then_some(tree))
}

/// The causative sentence: the lowest S node's structure, and the
/// expected translation among the readings of the whole sentence.
pub fn causative_example() -> Report {
    let t0 = Instant::now();
    let mut r = Report::new();
    let g = super::grammar("causative");
    let p = Pipeline::new(&g, ParseOptions::default(), GlossOptions::default());
    let tokens = ["john", "ga", "bill", "ni", "tabesase", "ta"];
    let expected: Fs = r#"((gloss (*OR* "eat" "ingest")) (tmp ((force +) (past +))))"#.parse().unwrap();
    r.cases = 2;
    let trees = parse(&tokens, &g).unwrap();
    match trees.first().and_then(|t| lowest(t, "s")) {
        None => r.fail("no parse with an S node".into()),
        Some(s) => {
            let got = Glosser::new(&g).gloss_tree(s).unwrap().structure();
            if got.to_string() != expected.to_string() {
                r.fail(format!("lowest S is {got}"));
            }
        }
    }
    let node = p.gloss(&tokens).unwrap();
    let readings: Vec<String> =
        expand_disjunctions(node.gloss()).unwrap().iter().map(|e| flatten(e).join(" ")).collect();
    if !readings.iter().any(|s| s == "john forced bill to eat") {
        r.fail(format!("readings are {readings:?}"));
    }
    r.elapsed = t0.elapsed();
    r
}

/// Compile and count the chain of thirty binary slots.
pub fn chain_count() -> (BigUint, Duration) {
    let g = binary_chain(30);
    let t0 = Instant::now();
    let lat = compile(&GlossNode::from_gloss(g)).unwrap();
    let n = count_paths(&lat);
    (n, t0.elapsed())
}

/// The bei sha example: the reference ranking first, then the decoder.
pub fn disambiguation() -> Report {
    let t0 = Instant::now();
    let mut r = Report::new();
    let g = super::grammar("np");
    let counts = count_corpus(super::read("np", "corpus.txt").as_bytes(), 2).unwrap();
    let model = build_model(&counts, &LmConfig::default()).unwrap();
    let p = Pipeline::new(&g, ParseOptions::default(), GlossOptions::default());
    let lat = p.lattice(&["bei", "sha"]).unwrap();
    let reference = brute_nbest(&lat, &model, 4, 0.5);
    r.cases = reference.len();
    if reference.len() != 4 {
        r.fail(format!("expected four readings, got {}", summary(&reference).len()));
    }
    if reference[0].sentence() != "american company" {
        r.fail(format!("reference winner is {:?}", reference[0].sentence()));
    }
    let got = nbest(&lat, &model, &DecoderConfig::default()).unwrap();
    if got[0].sentence() != reference[0].sentence() || (got[0].score - reference[0].score).abs() > 1e-9 {
        r.fail(format!("decoder chose {:?}", summary(&got)));
    }
    r.elapsed = t0.elapsed();
    r
}
