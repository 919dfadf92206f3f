//! One pass/fail line per acceptance criterion. Exits non-zero if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::checks::{self, Report};
use glossmt_core::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

const UNIFICATION_CASES: usize = 10_000;
const UNIFICATION_EXPANSION_CAP: u64 = 1_000;
const UNIFICATION_TIME_LIMIT: Duration = Duration::from_secs(60);
const LATTICE_CASES: usize = 1_000;
const LATTICE_EXPANSION_CAP: u64 = 10_000;
const CHAIN_PATHS: u64 = 1 << 30;
const CHAIN_TIME_LIMIT: Duration = Duration::from_millis(10);
const DECODER_LATTICES: usize = 200;
const FUZZ_SENTENCES: usize = 500;
const SEED: u64 = 1994;

fn glossmt() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_glossmt"));
    c.env_remove("GLOSSMT_CONFIG");
    c
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_report(r: Report, extra: &str) -> Outcome {
    let mut detail = format!("{} cases, {} violations, {:.2?}{extra}", r.cases, r.violations.len(), r.elapsed);
    if !r.note.is_empty() {
        detail.push_str(&format!(", {}", r.note));
    }
    if let Some(v) = r.violations.first() {
        detail.push_str(&format!("; first: {v}"));
    }
    Outcome { pass: r.ok(), detail }
}

fn unification() -> Outcome {
    let r = checks::unification_algebra(SEED, UNIFICATION_CASES, UNIFICATION_EXPANSION_CAP);
    let in_time = r.elapsed < UNIFICATION_TIME_LIMIT;
    let mut o = from_report(r, "");
    o.pass &= in_time;
    o
}

fn chain() -> Outcome {
    let (n, t) = checks::chain_count();
    Outcome {
        pass: n == BigUint::from(CHAIN_PATHS) && t < CHAIN_TIME_LIMIT,
        detail: format!("{n} paths in {t:.2?}"),
    }
}

fn good_turing() -> Outcome {
    let a = checks::good_turing();
    let b = checks::single_bin_equals_plain(SEED);
    let pass = a.ok() && b.ok();
    let first = a.violations.iter().chain(&b.violations).next().cloned().unwrap_or_default();
    Outcome {
        pass,
        detail: format!("{} table entries, {} single-bin comparisons {first}", a.cases, b.cases),
    }
}

/// Random token lines: grammar words, unknown words, numbers, symbols and
/// the odd empty line.
fn fuzz_corpus(n: usize) -> String {
    let known = ["john", "ga", "bill", "ni", "tabesase", "tabe", "sase", "ta"];
    let odd = ["xyzzy", "1994", "$5", "Tokyo", "(", "\"", "*empty*", "<s>", "</s>", "ünï", "x0", ";"];
    let mut rng = common::gen::rng(SEED);
    let mut out = String::new();
    for _ in 0..n {
        let len = rng.gen_range(0..10);
        let toks: Vec<&str> = (0..len)
            .map(|_| if rng.gen_bool(0.7) { *known.choose(&mut rng).unwrap() } else { *odd.choose(&mut rng).unwrap() })
            .collect();
        out.push_str(&toks.join(" "));
        out.push('\n');
    }
    out
}

fn train(dir: &Path, corpus: &Path, out: &str) -> std::process::Output {
    glossmt()
        .args(["train", corpus.to_str().unwrap(), "-o", dir.join(out).to_str().unwrap()])
        .output()
        .unwrap()
}

fn translate(dir: &Path, model: &str, input: &Path, extra: &[&str]) -> std::process::Output {
    let grammar = common::data_dir("causative");
    glossmt()
        .args(["translate", input.to_str().unwrap(), "--grammar", grammar.to_str().unwrap()])
        .args(["--model", dir.join(model).to_str().unwrap(), "--nbest", "3"])
        .args(extra)
        .output()
        .unwrap()
}

fn throughput() -> Outcome {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("fuzz.txt");
    std::fs::write(&input, fuzz_corpus(FUZZ_SENTENCES)).unwrap();
    let trained = train(dir.path(), &common::data_dir("causative").join("corpus.txt"), "m.lm");
    if !trained.status.success() {
        return Outcome { pass: false, detail: "training failed".into() };
    }
    let mut failures = 0;
    let mut blocks = Vec::new();
    for jobs in ["1", "4"] {
        let out = translate(dir.path(), "m.lm", &input, &["--jobs", jobs]);
        failures += usize::from(!out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        blocks.push(text.lines().filter(|l| l.starts_with("1\t")).count());
    }
    Outcome {
        pass: failures == 0 && blocks.iter().all(|&b| b == FUZZ_SENTENCES),
        detail: format!("{failures} failed runs, output blocks {blocks:?} for {FUZZ_SENTENCES} lines, {:.2?}", t0.elapsed()),
    }
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::data_dir("causative").join("corpus.txt");
    let input = dir.path().join("in.txt");
    std::fs::write(&input, fuzz_corpus(50)).unwrap();
    let runs: Vec<(Vec<u8>, Vec<u8>)> = ["a.lm", "b.lm"]
        .iter()
        .map(|m| {
            train(dir.path(), &corpus, m);
            let model = std::fs::read(dir.path().join(m)).unwrap();
            (model, translate(dir.path(), m, &input, &[]).stdout)
        })
        .collect();
    let same_model = runs[0].0 == runs[1].0;
    let same_output = runs[0].1 == runs[1].1;
    Outcome {
        pass: same_model && same_output && !runs[0].0.is_empty() && !runs[0].1.is_empty(),
        detail: format!("model files identical: {same_model}, translations identical: {same_output}"),
    }
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("unification algebra", Box::new(unification)),
        ("causative worked example", Box::new(|| from_report(checks::causative_example(), ""))),
        (
            "lattice vs expansion",
            Box::new(|| from_report(checks::lattice_oracle(SEED, LATTICE_CASES, LATTICE_EXPANSION_CAP), "")),
        ),
        ("30 binary slots", Box::new(chain)),
        ("Good-Turing", Box::new(good_turing)),
        ("model normalization", Box::new(|| from_report(checks::normalization_suite(SEED, 5_120), ""))),
        (
            "decoder vs brute force",
            Box::new(|| from_report(checks::decoder_exactness(SEED, DECODER_LATTICES), "")),
        ),
        (
            "beam monotonicity",
            Box::new(|| from_report(checks::beam_monotonicity(SEED, DECODER_LATTICES), "")),
        ),
        ("throughput", Box::new(throughput)),
        ("bei sha disambiguation", Box::new(|| from_report(checks::disambiguation(), ""))),
        ("reproducibility", Box::new(reproducibility)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
