//! `glossmt`: train language models, gloss and translate source sentences,
//! and decode word lattices.

mod config;

use std::fmt::Write as _;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{ArgAction, Args, Parser, Subcommand};
use glossmt_core::decoder::{nbest, DecodeError, DecoderConfig, Scored};
use glossmt_core::featstruct::{Fs, EMPTY_LITERAL};
use glossmt_core::glosser::GlossNode;
use glossmt_core::grammar::{load_grammar, validate, Grammar};
use glossmt_core::lattice::{compile, count_paths, read_lattices, WordLattice};
use glossmt_core::lm::{build_model, count_corpus, load_model, save_model, CountTable, NGramModel};
use glossmt_core::pipeline::{tokenize, Pipeline};
use log::{info, warn};
use rayon::prelude::*;

use config::{Layer, Settings, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "glossmt", version, about = "Glossing machine translation with an n-gram language model")]
struct Cli {
    /// TOML config file; flags override it.
    #[arg(long, global = true, env = CONFIG_ENV, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count a corpus and write an n-gram model.
    Train(TrainArgs),
    /// Translate sentences: parse, gloss, compile, decode.
    Translate(TranslateArgs),
    /// Print gloss structures, lattices or path counts.
    Gloss(GlossArgs),
    /// Decode lattices in the text format.
    Nbest(NbestArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Training text, one sentence per line ("-" for stdin).
    corpus: PathBuf,
    /// Where to write the model.
    #[arg(short, long, value_name = "FILE")]
    output: PathBuf,
    #[command(flatten)]
    lm: LmArgs,
}

#[derive(Args)]
struct TranslateArgs {
    /// Source sentences, one per line, tokens separated by spaces ("-" for stdin).
    #[arg(default_value = "-")]
    input: PathBuf,
    #[command(flatten)]
    grammar: GrammarArgs,
    #[command(flatten)]
    decode: DecodeArgs,
    /// Sentences translated in parallel. Output stays in input order.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct GlossArgs {
    /// Source sentences, one per line ("-" for stdin).
    #[arg(default_value = "-")]
    input: PathBuf,
    #[command(flatten)]
    grammar: GrammarArgs,
    /// Print lattices in the text format instead of gloss structures.
    #[arg(long, conflicts_with = "count_only")]
    lattice: bool,
    /// Print only the number of lattice paths, one per line.
    #[arg(long)]
    count_only: bool,
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct NbestArgs {
    /// Lattices in the text format, separated by blank lines ("-" for stdin).
    #[arg(default_value = "-")]
    input: PathBuf,
    #[command(flatten)]
    decode: DecodeArgs,
}

#[derive(Args)]
struct GrammarArgs {
    /// Directory holding syntax.gr, gloss.gr and lexicon.gr.
    #[arg(long, value_name = "DIR")]
    grammar: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    syntax: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    gloss_rules: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Trees kept per category and span.
    #[arg(long, value_name = "R")]
    max_parses: Option<usize>,
    /// Treat an *XOR* block with several satisfiable branches as an error.
    #[arg(long)]
    strict_xor: bool,
}

#[derive(Args)]
struct DecodeArgs {
    /// Model written by `glossmt train`.
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Hypotheses kept per lattice state.
    #[arg(long, value_name = "N")]
    beam: Option<usize>,
    /// Outputs per sentence.
    #[arg(long, value_name = "K")]
    nbest: Option<usize>,
    /// Score added per output word.
    #[arg(long, value_name = "F", allow_negative_numbers = true)]
    bonus: Option<f64>,
    /// Fail on words the model has never seen.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct LmArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=3))]
    order: Option<u64>,
    /// Bigram bins per decade of the predictor (0: a single bin).
    #[arg(long, value_name = "N")]
    bins_bigram: Option<u32>,
    /// Trigram bins per decade of the predictor (0: a single bin).
    #[arg(long, value_name = "N")]
    bins_trigram: Option<u32>,
    /// Vocabulary slots reserved for unseen words.
    #[arg(long, value_name = "U")]
    unseen: Option<u64>,
    /// mle, turing or sgt.
    #[arg(long)]
    estimator: Option<String>,
    /// merge or fault.
    #[arg(long)]
    empty_bins: Option<String>,
}

fn set(flag: bool) -> Option<bool> {
    flag.then_some(true)
}

impl GrammarArgs {
    fn layer(&self) -> Layer {
        Layer {
            grammar: self.grammar.clone(),
            syntax: self.syntax.clone(),
            gloss_rules: self.gloss_rules.clone(),
            lexicon: self.lexicon.clone(),
            max_parses: self.max_parses,
            strict_xor: set(self.strict_xor),
            ..Layer::default()
        }
    }
}

impl DecodeArgs {
    fn layer(&self) -> Layer {
        Layer {
            model: self.model.clone(),
            beam: self.beam,
            nbest: self.nbest,
            bonus: self.bonus,
            strict: set(self.strict),
            ..Layer::default()
        }
    }
}

impl LmArgs {
    fn layer(&self) -> Layer {
        Layer {
            order: self.order.map(|o| o as usize),
            bins_bigram: self.bins_bigram,
            bins_trigram: self.bins_trigram,
            unseen: self.unseen,
            estimator: self.estimator.clone(),
            empty_bins: self.empty_bins.clone(),
            ..Layer::default()
        }
    }
}

impl Command {
    fn layer(&self) -> Layer {
        match self {
            Command::Train(a) => a.lm.layer(),
            Command::Translate(a) => Layer {
                jobs: a.jobs,
                ..a.grammar.layer().over(a.decode.layer())
            },
            Command::Gloss(a) => Layer {
                jobs: a.jobs,
                ..a.grammar.layer()
            },
            Command::Nbest(a) => a.decode.layer(),
        }
    }
}

/// A fault caused by the invocation rather than by the data; exit code 2.
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: anyhow::Error) -> anyhow::Error {
    anyhow!(Usage(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("glossmt: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => Layer::from_file(p).map_err(usage)?,
        None => Layer::default(),
    };
    let settings = Settings::resolve(cli.command.layer().over(file)).map_err(usage)?;
    if cli.print_config {
        print!("{}", settings.to_toml());
        return Ok(());
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match &cli.command {
        Command::Train(a) => train(&a.corpus, &a.output, &settings, &mut out)?,
        Command::Translate(a) => translate(&a.input, &settings, &mut out)?,
        Command::Gloss(a) => gloss(a, &settings, &mut out)?,
        Command::Nbest(a) => decode_lattices(&a.input, &settings, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    let mut s = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
    } else {
        s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(s)
}

fn load_grammar_files(settings: &Settings) -> anyhow::Result<Grammar> {
    let [syntax, gloss, lexicon] = settings.grammar_files().map_err(usage)?;
    let read = |p: &PathBuf| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let g = load_grammar(&read(&syntax)?, &read(&gloss)?, &read(&lexicon)?)?;
    for d in validate(&g) {
        warn!("{d}");
    }
    Ok(g)
}

fn load_lm(settings: &Settings) -> anyhow::Result<NGramModel> {
    let path = settings
        .model
        .as_ref()
        .ok_or_else(|| usage(anyhow!("no model given (use --model FILE)")))?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_model(&text).with_context(|| format!("loading model {}", path.display()))
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

fn train(corpus: &Path, output: &Path, settings: &Settings, out: &mut impl Write) -> anyhow::Result<()> {
    let config = settings.lm();
    let counts = if corpus == Path::new("-") {
        count_corpus(io::stdin().lock(), config.order)?
    } else {
        let f = std::fs::File::open(corpus).with_context(|| format!("opening {}", corpus.display()))?;
        count_corpus(BufReader::new(f), config.order)?
    };
    let model = build_model(&counts, &config)?;
    std::fs::write(output, save_model(&model)).with_context(|| format!("writing {}", output.display()))?;
    out.write_all(train_summary(&counts, &model).as_bytes())?;
    writeln!(out, "model written to {}", output.display())?;
    Ok(())
}

fn train_summary(counts: &CountTable, model: &NGramModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "corpus sha256 {}", counts.digest_hex());
    let _ = writeln!(s, "sentences {}", counts.sentences());
    for n in 1..=counts.order() {
        let _ = writeln!(s, "{n}-grams: {} types, {} tokens", counts.grams(n).len(), counts.total(n));
    }
    let _ = writeln!(s, "unseen-word mass {:.6e}", model.unseen_mass());
    for level in model.levels() {
        let unseen: f64 = level.bins.iter().map(|b| b.unseen_ln.exp() * b.n0 as f64).sum();
        let _ = writeln!(s, "{}-gram bins: {} occupied, unseen mass {:.6e}", level.n, level.bins.len(), unseen);
        let _ = writeln!(s, "  cell\ttypes\ttokens\tn0\tn1");
        for b in &level.bins {
            let _ = writeln!(s, "  {}\t{}\t{}\t{}\t{}", b.cell, b.types, b.tokens, b.n0, b.n1);
        }
    }
    s
}

/// What a sentence glosses to when the grammar cannot gloss it: the
/// source tokens themselves.
fn echo_gloss(tokens: &[&str]) -> GlossNode {
    if tokens.is_empty() {
        GlossNode::from_gloss(Fs::text(EMPTY_LITERAL))
    } else {
        GlossNode::from_gloss(Fs::sequence(tokens.iter().map(|t| Fs::text(*t))))
    }
}

fn gloss_or_echo(p: &Pipeline<'_>, line_no: usize, tokens: &[&str]) -> GlossNode {
    match p.gloss(tokens) {
        Ok(node) => node,
        Err(e) => {
            warn!("line {line_no}: {e}; passing the tokens through");
            echo_gloss(tokens)
        }
    }
}

fn lattice_or_echo(p: &Pipeline<'_>, line_no: usize, tokens: &[&str]) -> WordLattice {
    let node = gloss_or_echo(p, line_no, tokens);
    match compile(&node) {
        Ok(lat) => lat,
        Err(e) => {
            warn!("line {line_no}: {e}; passing the tokens through");
            compile(&echo_gloss(tokens)).expect("plain text compiles")
        }
    }
}

fn write_block(out: &mut impl Write, results: &[Scored]) -> io::Result<()> {
    for (i, s) in results.iter().enumerate() {
        writeln!(out, "{}\t{:.6}\t{}", i + 1, s.score, s.sentence())?;
    }
    Ok(())
}

fn decode(lat: &WordLattice, model: &NGramModel, cfg: &DecoderConfig, line_no: usize) -> anyhow::Result<Vec<Scored>> {
    match nbest(lat, model, cfg) {
        Ok(r) => Ok(r),
        Err(e @ DecodeError::UnknownWord(_)) => Err(anyhow!(e).context(format!("line {line_no}"))),
        Err(e) => Err(usage(e.into())),
    }
}

fn translate(input: &Path, settings: &Settings, out: &mut impl Write) -> anyhow::Result<()> {
    let grammar = load_grammar_files(settings)?;
    let model = load_lm(settings)?;
    let text = read_input(input)?;
    let pipeline = Pipeline::new(&grammar, settings.parse_options(), settings.gloss_options());
    let cfg = settings.decoder();
    let lines: Vec<&str> = text.lines().collect();
    let results: Vec<anyhow::Result<Vec<Scored>>> = pool(settings.jobs)?.install(|| {
        lines
            .par_iter()
            .enumerate()
            .map(|(i, line)| {
                let lat = lattice_or_echo(&pipeline, i + 1, &tokenize(line));
                decode(&lat, &model, &cfg, i + 1)
            })
            .collect()
    });
    for r in results {
        write_block(out, &r?)?;
    }
    info!("translated {} sentences", lines.len());
    Ok(())
}

fn gloss(args: &GlossArgs, settings: &Settings, out: &mut impl Write) -> anyhow::Result<()> {
    let grammar = load_grammar_files(settings)?;
    let text = read_input(&args.input)?;
    let pipeline = Pipeline::new(&grammar, settings.parse_options(), settings.gloss_options());
    let lines: Vec<&str> = text.lines().collect();
    let blocks: Vec<String> = pool(settings.jobs)?.install(|| {
        lines
            .par_iter()
            .enumerate()
            .map(|(i, line)| {
                let tokens = tokenize(line);
                if args.lattice || args.count_only {
                    let lat = lattice_or_echo(&pipeline, i + 1, &tokens);
                    let paths = count_paths(&lat);
                    if args.count_only {
                        format!("{paths}\n")
                    } else {
                        format!("# line {}: {paths} paths\n{lat}\n", i + 1)
                    }
                } else {
                    let node = gloss_or_echo(&pipeline, i + 1, &tokens);
                    match compile(&node) {
                        Ok(lat) => info!("line {}: {} paths", i + 1, count_paths(&lat)),
                        Err(e) => warn!("line {}: {e}", i + 1),
                    }
                    format!("{}\n", node.as_fs())
                }
            })
            .collect()
    });
    for b in blocks {
        out.write_all(b.as_bytes())?;
    }
    Ok(())
}

fn decode_lattices(input: &Path, settings: &Settings, out: &mut impl Write) -> anyhow::Result<()> {
    let model = load_lm(settings)?;
    let text = read_input(input)?;
    let lattices = read_lattices(&text).with_context(|| format!("reading lattices from {}", input.display()))?;
    let cfg = settings.decoder();
    for (i, lat) in lattices.iter().enumerate() {
        eprintln!("lattice {}: {} paths", i + 1, count_paths(lat));
        write_block(out, &decode(lat, &model, &cfg, i + 1)?)?;
    }
    Ok(())
}
