//! Effective configuration: command-line flags over a TOML file over
//! built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use glossmt_core::decoder::DecoderConfig;
use glossmt_core::glosser::GlossOptions;
use glossmt_core::grammar::XorMode;
use glossmt_core::lm::{Binning, EmptyBins, Estimator, LmConfig};
use glossmt_core::parser::{ParseOptions, DEFAULT_AMBIGUITY_CAP};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "GLOSSMT_CONFIG";

/// Every setting, all optional. Both the config file and the flags of a
/// subcommand produce one of these.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Layer {
    pub grammar: Option<PathBuf>,
    pub syntax: Option<PathBuf>,
    pub gloss_rules: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub order: Option<usize>,
    pub beam: Option<usize>,
    pub nbest: Option<usize>,
    pub bonus: Option<f64>,
    pub bins_bigram: Option<u32>,
    pub bins_trigram: Option<u32>,
    pub unseen: Option<u64>,
    pub estimator: Option<String>,
    pub empty_bins: Option<String>,
    pub strict: Option<bool>,
    pub strict_xor: Option<bool>,
    pub max_parses: Option<usize>,
    pub jobs: Option<usize>,
}

macro_rules! overlay {
    ($top:expr, $base:expr, $($f:ident),*) => {
        Layer { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Layer {
    /// `self` wins wherever it is set.
    pub fn over(self, base: Layer) -> Layer {
        overlay!(
            self, base, grammar, syntax, gloss_rules, lexicon, model, order, beam, nbest, bonus, bins_bigram,
            bins_trigram, unseen, estimator, empty_bins, strict, strict_xor, max_parses, jobs
        )
    }

    /// Read a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: &Path) -> anyhow::Result<Layer> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut layer: Layer = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut layer.grammar,
            &mut layer.syntax,
            &mut layer.gloss_rules,
            &mut layer.lexicon,
            &mut layer.model,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(layer)
    }
}

/// The resolved configuration.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grammar: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub syntax: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gloss_rules: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    pub order: usize,
    pub beam: usize,
    pub nbest: usize,
    pub bonus: f64,
    pub bins_bigram: u32,
    pub bins_trigram: u32,
    pub unseen: u64,
    pub estimator: String,
    pub empty_bins: String,
    pub strict: bool,
    pub strict_xor: bool,
    pub max_parses: usize,
    pub jobs: usize,
}

impl Settings {
    pub fn resolve(layer: Layer) -> anyhow::Result<Settings> {
        let s = Settings {
            grammar: layer.grammar,
            syntax: layer.syntax,
            gloss_rules: layer.gloss_rules,
            lexicon: layer.lexicon,
            model: layer.model,
            order: layer.order.unwrap_or(2),
            beam: layer.beam.unwrap_or(1000),
            nbest: layer.nbest.unwrap_or(1),
            bonus: layer.bonus.unwrap_or(0.5),
            bins_bigram: layer.bins_bigram.unwrap_or(3),
            bins_trigram: layer.bins_trigram.unwrap_or(2),
            unseen: layer.unseen.unwrap_or(130_000),
            estimator: layer.estimator.unwrap_or_else(|| "sgt".into()),
            empty_bins: layer.empty_bins.unwrap_or_else(|| "merge".into()),
            strict: layer.strict.unwrap_or(false),
            strict_xor: layer.strict_xor.unwrap_or(false),
            max_parses: layer.max_parses.unwrap_or(DEFAULT_AMBIGUITY_CAP),
            jobs: layer.jobs.unwrap_or(1),
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> anyhow::Result<()> {
        if !(2..=3).contains(&self.order) {
            bail!("order must be 2 or 3, got {}", self.order);
        }
        if self.nbest == 0 || self.beam < self.nbest {
            bail!("need beam >= nbest >= 1 (beam {}, nbest {})", self.beam, self.nbest);
        }
        if !self.bonus.is_finite() {
            bail!("bonus must be finite");
        }
        if self.unseen == 0 {
            bail!("unseen must be positive");
        }
        if self.max_parses == 0 {
            bail!("max-parses must be positive");
        }
        if self.jobs == 0 {
            bail!("jobs must be positive");
        }
        self.estimator()?;
        self.empty_bins()?;
        Ok(())
    }

    fn estimator(&self) -> anyhow::Result<Estimator> {
        Ok(match self.estimator.as_str() {
            "mle" => Estimator::Mle,
            "turing" => Estimator::Turing,
            "sgt" => Estimator::SimpleGoodTuring,
            other => bail!("unknown estimator {other:?} (expected mle, turing or sgt)"),
        })
    }

    fn empty_bins(&self) -> anyhow::Result<EmptyBins> {
        Ok(match self.empty_bins.as_str() {
            "merge" => EmptyBins::Merge,
            "fault" => EmptyBins::Fault,
            other => bail!("unknown empty-bins policy {other:?} (expected merge or fault)"),
        })
    }

    pub fn lm(&self) -> LmConfig {
        // 0 bins per decade means a single bin
        let bins = |k: u32| if k == 0 { Binning::Single } else { Binning::PerDecade(k) };
        LmConfig {
            order: self.order,
            unseen_slots: self.unseen,
            bigram_bins: bins(self.bins_bigram),
            trigram_bins: bins(self.bins_trigram),
            estimator: self.estimator().expect("checked"),
            empty_bins: self.empty_bins().expect("checked"),
        }
    }

    pub fn decoder(&self) -> DecoderConfig {
        DecoderConfig {
            beam: self.beam,
            nbest: self.nbest,
            bonus: self.bonus,
            strict: self.strict,
        }
    }

    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            ambiguity_cap: self.max_parses,
        }
    }

    pub fn gloss_options(&self) -> GlossOptions {
        GlossOptions {
            xor_mode: if self.strict_xor { XorMode::Strict } else { XorMode::Ordered },
        }
    }

    /// The three grammar files: explicit paths first, then the standard
    /// names inside `grammar`.
    pub fn grammar_files(&self) -> anyhow::Result<[PathBuf; 3]> {
        let pick = |explicit: &Option<PathBuf>, name: &str| -> anyhow::Result<PathBuf> {
            match (explicit, &self.grammar) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(dir)) => Ok(dir.join(name)),
                (None, None) => bail!("no grammar given (use --grammar DIR or --syntax/--gloss-rules/--lexicon)"),
            }
        };
        Ok([
            pick(&self.syntax, "syntax.gr")?,
            pick(&self.gloss_rules, "gloss.gr")?,
            pick(&self.lexicon, "lexicon.gr")?,
        ])
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("settings serialize")
    }
}
