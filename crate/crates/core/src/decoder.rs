//! N-best beam search over word lattices.

use std::cmp::Ordering;

use thiserror::Error;

use crate::lattice::{topo_order, Label, WordLattice};
use crate::lm::{map_token, NGramModel, UNKNOWN};

#[derive(Debug, Clone, PartialEq)]
pub struct DecoderConfig {
    /// Hypotheses kept per state.
    pub beam: usize,
    /// Outputs returned.
    pub nbest: usize,
    /// Added per word.
    pub bonus: f64,
    /// Fail on words the model has never seen.
    pub strict: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam: 1000,
            nbest: 1,
            bonus: 0.5,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("need beam >= nbest >= 1 (beam {beam}, nbest {nbest})")]
    Config { beam: usize, nbest: usize },
    #[error("word {0:?} is not in the model vocabulary")]
    UnknownWord(String),
}

/// One ranked output.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub words: Vec<String>,
    pub score: f64,
}

impl Scored {
    pub fn sentence(&self) -> String {
        self.words.join(" ")
    }
}

/// A partial path ending at some state.
#[derive(Debug, Clone, Copy)]
struct Hyp {
    /// Index into the back-reference arena.
    node: u32,
    /// Last `order - 1` class-mapped token ids.
    ctx: [u32; 2],
    /// Log-likelihood so far, summed in path order.
    ll: f64,
    words: u32,
}

impl Hyp {
    fn score(&self, bonus: f64) -> f64 {
        self.ll + bonus * self.words as f64
    }
}

/// `(predecessor node, arc index)`; the root has none.
type Arena = Vec<Option<(u32, u32)>>;

fn arc_path(arena: &Arena, mut node: u32) -> Vec<u32> {
    let mut out = Vec::new();
    while let Some((prev, arc)) = arena[node as usize] {
        out.push(arc);
        node = prev;
    }
    out.reverse();
    out
}

/// Higher score first; equal scores go to the path whose arc indices
/// come first lexicographically (depth-first discovery order).
fn better(arena: &Arena, bonus: f64, a: &Hyp, b: &Hyp) -> Ordering {
    b.score(bonus)
        .total_cmp(&a.score(bonus))
        .then_with(|| arc_path(arena, a.node).cmp(&arc_path(arena, b.node)))
}

fn shift(ctx: [u32; 2], order: usize, w: u32) -> [u32; 2] {
    if order == 2 {
        [w, ctx[1]]
    } else {
        [ctx[1], w]
    }
}

fn history(ctx: &[u32; 2], order: usize) -> &[u32] {
    &ctx[..order - 1]
}

/// Keep the best `beam` hypotheses without sorting them.
fn prune(arena: &Arena, bonus: f64, mut cands: Vec<Hyp>, beam: usize) -> Vec<Hyp> {
    if cands.len() > beam {
        cands.select_nth_unstable_by(beam - 1, |a, b| better(arena, bonus, a, b));
        cands.truncate(beam);
    }
    cands
}

/// Top-K distinct word sequences through `lat`.
pub fn nbest(lat: &WordLattice, model: &NGramModel, cfg: &DecoderConfig) -> Result<Vec<Scored>, DecodeError> {
    if cfg.nbest == 0 || cfg.beam < cfg.nbest {
        return Err(DecodeError::Config {
            beam: cfg.beam,
            nbest: cfg.nbest,
        });
    }
    let order = model.order();
    let bonus = cfg.bonus;
    let incoming = lat.incoming();
    let mut arena: Arena = vec![None];
    let mut beams: Vec<Vec<Hyp>> = vec![Vec::new(); lat.num_states()];
    beams[lat.start()] = vec![Hyp {
        node: 0,
        ctx: [model.bos(); 2],
        ll: 0.0,
        words: 0,
    }];

    for s in topo_order(lat).expect("validated lattice is acyclic") {
        if s == lat.start() {
            continue;
        }
        let mut cands = Vec::new();
        for &ai in &incoming[s] {
            let arc = &lat.arcs()[ai];
            for h in &beams[arc.from] {
                arena.push(Some((h.node, ai as u32)));
                let node = (arena.len() - 1) as u32;
                let next = match &arc.label {
                    Label::Epsilon => Hyp { node, ..*h },
                    Label::Word(w) => {
                        let tok = map_token(w, h.words == 0);
                        let id = model.id(&tok);
                        if cfg.strict && id == UNKNOWN {
                            return Err(DecodeError::UnknownWord(w.clone()));
                        }
                        Hyp {
                            node,
                            ctx: shift(h.ctx, order, id),
                            ll: h.ll + model.logprob_ids(history(&h.ctx, order), id),
                            words: h.words + 1,
                        }
                    }
                };
                cands.push(next);
            }
        }
        if s == lat.final_state() {
            for h in cands.iter_mut() {
                h.ll += model.logprob_ids(history(&h.ctx, order), model.eos());
            }
        }
        beams[s] = prune(&arena, bonus, cands, cfg.beam);
    }

    let mut finals = std::mem::take(&mut beams[lat.final_state()]);
    finals.sort_by(|a, b| better(&arena, bonus, a, b));
    let mut out: Vec<Scored> = Vec::new();
    for h in finals {
        let words: Vec<String> = arc_path(&arena, h.node)
            .into_iter()
            .filter_map(|ai| lat.arcs()[ai as usize].label.word().map(str::to_string))
            .collect();
        if out.iter().any(|o| o.words == words) {
            continue;
        }
        out.push(Scored {
            words,
            score: h.score(bonus),
        });
        if out.len() == cfg.nbest {
            break;
        }
    }
    Ok(out)
}

/// Score a word sequence exactly as [`nbest`] scores a path.
pub fn score_sequence<S: AsRef<str>>(model: &NGramModel, words: &[S], cfg: &DecoderConfig) -> f64 {
    model.sentence_ll(words, cfg.bonus)
}
