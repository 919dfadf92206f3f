//! Seeded generators for random feature structures, glosses, corpora and
//! lattices.

use glossmt_core::featstruct::expansion_count;
use glossmt_core::featstruct::Fs;
use glossmt_core::lattice::{count_paths, Edge, Label, WordLattice};
use glossmt_core::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

const FEATURES: [&str; 4] = ["a", "b", "c", "d"];
const ATOMS: [&str; 4] = ["+", "-", "x", "y"];
const TEXTS: [&str; 2] = ["p", "q"];

fn scalar(rng: &mut Rng8) -> Fs {
    if rng.gen_bool(0.7) {
        Fs::atom(*ATOMS.choose(rng).unwrap())
    } else {
        Fs::text(*TEXTS.choose(rng).unwrap())
    }
}

fn complex(rng: &mut Rng8, depth: u32) -> Fs {
    let k = rng.gen_range(1..=3);
    let feats: Vec<&str> = FEATURES.choose_multiple(rng, k).copied().collect();
    Fs::complex(feats.into_iter().map(|f| (f, value(rng, depth - 1))))
}

/// Disjunction whose alternatives pairwise fail to unify: distinct
/// scalars, or complexes told apart by the atom under `k`.
fn disjoint_or(rng: &mut Rng8, depth: u32) -> Fs {
    let n = rng.gen_range(2..=3);
    if rng.gen_bool(0.4) {
        let mut pool: Vec<Fs> = ATOMS.iter().map(|a| Fs::atom(*a)).chain(TEXTS.iter().map(|t| Fs::text(*t))).collect();
        pool.shuffle(rng);
        return Fs::or(pool.into_iter().take(n)).unwrap();
    }
    let tags: Vec<&str> = ATOMS.choose_multiple(rng, n).copied().collect();
    Fs::or(tags.into_iter().map(|t| {
        let mut alt = complex(rng, depth);
        if let Fs::Complex(m) = &mut alt {
            m.insert("k".into(), Fs::atom(t));
        }
        alt
    }))
    .unwrap()
}

fn value(rng: &mut Rng8, depth: u32) -> Fs {
    let roll = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..8) };
    match roll {
        0 | 1 => scalar(rng),
        2 => Fs::not((0..rng.gen_range(1..=2)).map(|_| scalar(rng))).unwrap(),
        3 => Fs::empty(),
        4..=5 => complex(rng, depth),
        _ => disjoint_or(rng, depth),
    }
}

/// A random structure whose expansion has at most `cap` members.
pub fn feature_structure(rng: &mut Rng8, cap: u64) -> Fs {
    loop {
        let fs = if rng.gen_bool(0.8) { complex(rng, 3) } else { value(rng, 3) };
        if expansion_count(&fs) <= BigUint::from(cap) {
            return fs;
        }
    }
}

/// Drop some features of `fs` and perturb others, so that unification
/// against the original often succeeds.
pub fn relative(rng: &mut Rng8, fs: &Fs, cap: u64) -> Fs {
    if rng.gen_bool(0.3) {
        return feature_structure(rng, cap);
    }
    match fs {
        Fs::Complex(m) => {
            let mut kept = std::collections::BTreeMap::new();
            for (k, v) in m {
                if rng.gen_bool(0.7) {
                    let v = if rng.gen_bool(0.2) { value(rng, 1) } else { relative(rng, v, cap) };
                    kept.insert(k.clone(), v);
                }
            }
            let out = Fs::Complex(kept);
            if expansion_count(&out) <= BigUint::from(cap) {
                out
            } else {
                Fs::empty()
            }
        }
        other => other.clone(),
    }
}

pub const WORDS: [&str; 12] = [
    "the", "a", "company", "firm", "american", "rice", "shrine", "rose", "fell", "he", "ate", "it",
];

fn gloss_text(rng: &mut Rng8, vocab: &[&str]) -> Fs {
    match rng.gen_range(0..10) {
        0 => Fs::text("*empty*"),
        1 => Fs::text(format!("{} {}", vocab.choose(rng).unwrap(), vocab.choose(rng).unwrap())),
        _ => Fs::text(*vocab.choose(rng).unwrap()),
    }
}

fn gloss_inner(rng: &mut Rng8, depth: u32, vocab: &[&str]) -> Fs {
    if depth == 0 {
        return gloss_text(rng, vocab);
    }
    match rng.gen_range(0..10) {
        0..=2 => gloss_text(rng, vocab),
        3 => Fs::empty(),
        4..=6 => Fs::sequence((0..rng.gen_range(1..=3)).map(|_| gloss_inner(rng, depth - 1, vocab))),
        _ => Fs::or((0..rng.gen_range(2..=3)).map(|_| gloss_inner(rng, depth - 1, vocab))).unwrap(),
    }
}

/// A random gloss value (texts, op-sequences and disjunctions) with at
/// most `cap` readings.
pub fn gloss(rng: &mut Rng8, cap: u64, vocab: &[&str]) -> Fs {
    loop {
        let g = gloss_inner(rng, 4, vocab);
        if expansion_count(&g) <= BigUint::from(cap) {
            return g;
        }
    }
}

/// Random sentences over `vocab`.
pub fn corpus(rng: &mut Rng8, lines: usize, vocab: &[&str]) -> String {
    let mut out = String::new();
    for _ in 0..lines {
        let n = rng.gen_range(1..=8);
        let words: Vec<&str> = (0..n).map(|_| *vocab.choose(rng).unwrap()).collect();
        out.push_str(&words.join(" "));
        out.push('\n');
    }
    out
}

/// A random acyclic lattice built directly from arcs: a backbone chain
/// through every state plus forward shortcuts, some epsilon.
pub fn raw_lattice(rng: &mut Rng8, max_paths: u64, vocab: &[&str]) -> WordLattice {
    loop {
        let inner = rng.gen_range(0..10);
        // visiting order: start (0), inner states 2.., final (1)
        let order: Vec<usize> = std::iter::once(0).chain(2..2 + inner).chain([1]).collect();
        let label = |rng: &mut Rng8| {
            if rng.gen_bool(0.15) {
                Label::Epsilon
            } else {
                Label::Word(vocab.choose(rng).unwrap().to_string())
            }
        };
        let mut arcs = Vec::new();
        for w in order.windows(2) {
            for _ in 0..rng.gen_range(1..=2) {
                arcs.push(Edge { from: w[0], to: w[1], label: label(rng) });
            }
        }
        for _ in 0..rng.gen_range(0..=inner + 1) {
            let i = rng.gen_range(0..order.len() - 1);
            let j = rng.gen_range(i + 1..order.len());
            arcs.push(Edge { from: order[i], to: order[j], label: label(rng) });
        }
        arcs.shuffle(rng);
        let lat = WordLattice::new(inner + 2, 0, 1, arcs).expect("backbone makes every state useful");
        if count_paths(&lat) <= BigUint::from(max_paths) {
            return lat;
        }
    }
}
