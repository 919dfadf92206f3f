//! Word lattices compiled from gloss structures.

mod morph;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::featstruct::{Fs, EMPTY_LITERAL};
use crate::glosser::GlossNode;

pub use morph::{inflect, is_marker, rewrite_morphology, MARKERS};

pub type StateId = usize;

/// Label written for epsilon arcs in the text format.
pub const EPSILON_LABEL: &str = "<eps>";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Word(String),
    Epsilon,
}

impl Label {
    pub fn word(&self) -> Option<&str> {
        match self {
            Label::Word(w) => Some(w),
            Label::Epsilon => None,
        }
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, Label::Epsilon)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Word(w) => f.write_str(w),
            Label::Epsilon => f.write_str(EPSILON_LABEL),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: StateId,
    pub to: StateId,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("gloss is not lattice content: {0}")]
    NotLattice(String),
    #[error("state {0} is out of range")]
    StateOutOfRange(StateId),
    #[error("lattice has a cycle")]
    Cycle,
    #[error("state {0} is not on any start-to-final path")]
    Useless(StateId),
    #[error("invalid arc label {0:?}")]
    BadLabel(String),
    #[error("start and final state coincide")]
    DegenerateEnds,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Acyclic labeled digraph with a unique start and final state.
///
/// Arcs are kept in insertion order; arc indices are stable and the decoder
/// uses them to break score ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLattice {
    num_states: usize,
    start: StateId,
    final_state: StateId,
    arcs: Vec<Edge>,
}

impl WordLattice {
    /// Build and validate.
    pub fn new(num_states: usize, start: StateId, final_state: StateId, arcs: Vec<Edge>) -> Result<Self, LatticeError> {
        let lat = WordLattice {
            num_states,
            start,
            final_state,
            arcs,
        };
        lat.validate()?;
        Ok(lat)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn final_state(&self) -> StateId {
        self.final_state
    }

    pub fn arcs(&self) -> &[Edge] {
        &self.arcs
    }

    /// Arc indices leaving each state, in arc order.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_states];
        for (i, a) in self.arcs.iter().enumerate() {
            out[a.from].push(i);
        }
        out
    }

    /// Arc indices entering each state, in arc order.
    pub fn incoming(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.num_states];
        for (i, a) in self.arcs.iter().enumerate() {
            inc[a.to].push(i);
        }
        inc
    }

    fn validate(&self) -> Result<(), LatticeError> {
        for s in [self.start, self.final_state] {
            if s >= self.num_states {
                return Err(LatticeError::StateOutOfRange(s));
            }
        }
        if self.start == self.final_state {
            return Err(LatticeError::DegenerateEnds);
        }
        for a in &self.arcs {
            for s in [a.from, a.to] {
                if s >= self.num_states {
                    return Err(LatticeError::StateOutOfRange(s));
                }
            }
            if let Label::Word(w) = &a.label {
                if w.is_empty() || w.chars().any(char::is_whitespace) || w == EPSILON_LABEL {
                    return Err(LatticeError::BadLabel(w.clone()));
                }
            }
        }
        let order = topo_order(self)?;
        let mut fwd = vec![false; self.num_states];
        fwd[self.start] = true;
        let out = self.outgoing();
        for &s in &order {
            if fwd[s] {
                for &i in &out[s] {
                    fwd[self.arcs[i].to] = true;
                }
            }
        }
        let mut bwd = vec![false; self.num_states];
        bwd[self.final_state] = true;
        for &s in order.iter().rev() {
            if out[s].iter().any(|&i| bwd[self.arcs[i].to]) {
                bwd[s] = true;
            }
        }
        match (0..self.num_states).find(|&s| !(fwd[s] && bwd[s])) {
            Some(s) => Err(LatticeError::Useless(s)),
            None => Ok(()),
        }
    }

    /// Write in the text format: `start`, `final`, then one arc per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("start {}\nfinal {}\n", self.start, self.final_state);
        for a in &self.arcs {
            s.push_str(&format!("{} {} {}\n", a.from, a.to, a.label));
        }
        s
    }

    /// Parse one lattice in the text format. Lines starting with `#` are
    /// comments.
    pub fn from_text(text: &str) -> Result<Self, LatticeError> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        parse_block(&lines)
    }
}

impl fmt::Display for WordLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_block(lines: &[(usize, &str)]) -> Result<WordLattice, LatticeError> {
    let err = |line: usize, msg: &str| LatticeError::Parse {
        line,
        msg: msg.to_string(),
    };
    let header = |idx: usize, key: &str| -> Result<StateId, LatticeError> {
        let Some(&(line, l)) = lines.get(idx) else {
            return Err(err(lines.last().map_or(0, |x| x.0), &format!("missing `{key}` line")));
        };
        let mut parts = l.split_whitespace();
        match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(v), None) if k == key => v.parse().map_err(|_| err(line, "bad state id")),
            _ => Err(err(line, &format!("expected `{key} <id>`"))),
        }
    };
    let start = header(0, "start")?;
    let final_state = header(1, "final")?;
    let mut arcs = Vec::new();
    let mut max = start.max(final_state);
    for &(line, l) in &lines[2..] {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [from, to, label] = parts[..] else {
            return Err(err(line, "expected `from to label`"));
        };
        let from: StateId = from.parse().map_err(|_| err(line, "bad state id"))?;
        let to: StateId = to.parse().map_err(|_| err(line, "bad state id"))?;
        max = max.max(from).max(to);
        let label = if label == EPSILON_LABEL {
            Label::Epsilon
        } else {
            Label::Word(label.to_string())
        };
        arcs.push(Edge { from, to, label });
    }
    WordLattice::new(max + 1, start, final_state, arcs)
}

/// Parse a stream of lattices separated by blank lines.
pub fn read_lattices(text: &str) -> Result<Vec<WordLattice>, LatticeError> {
    let mut out = Vec::new();
    let mut block: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('#') {
            continue;
        }
        if l.is_empty() {
            if !block.is_empty() {
                out.push(parse_block(&block)?);
                block.clear();
            }
        } else {
            block.push((i + 1, l));
        }
    }
    if !block.is_empty() {
        out.push(parse_block(&block)?);
    }
    Ok(out)
}

/// Write lattices separated by blank lines.
pub fn write_lattices<'a>(lats: impl IntoIterator<Item = &'a WordLattice>) -> String {
    lats.into_iter().map(WordLattice::to_text).collect::<Vec<_>>().join("\n")
}

/// Compile a glossed node and apply morphology.
pub fn compile(g: &GlossNode) -> Result<WordLattice, LatticeError> {
    Ok(rewrite_morphology(&compile_gloss(g.gloss())?))
}

/// Compile a gloss structure without the morphology pass.
pub fn compile_gloss(gloss: &Fs) -> Result<WordLattice, LatticeError> {
    let mut b = Builder {
        num_states: 2,
        arcs: Vec::new(),
    };
    b.build(gloss, 0, 1)?;
    Ok(WordLattice {
        num_states: b.num_states,
        start: 0,
        final_state: 1,
        arcs: b.arcs,
    })
}

struct Builder {
    num_states: usize,
    arcs: Vec<Edge>,
}

impl Builder {
    fn fresh(&mut self) -> StateId {
        self.num_states += 1;
        self.num_states - 1
    }

    fn arc(&mut self, from: StateId, to: StateId, label: Label) {
        self.arcs.push(Edge { from, to, label });
    }

    fn chain<T>(&mut self, items: &[T], from: StateId, to: StateId, mut each: impl FnMut(&mut Self, &T, StateId, StateId) -> Result<(), LatticeError>) -> Result<(), LatticeError> {
        let mut cur = from;
        for (i, item) in items.iter().enumerate() {
            let next = if i + 1 == items.len() { to } else { self.fresh() };
            each(self, item, cur, next)?;
            cur = next;
        }
        Ok(())
    }

    fn build(&mut self, g: &Fs, from: StateId, to: StateId) -> Result<(), LatticeError> {
        match g {
            Fs::Text(t) if t == EMPTY_LITERAL => self.arc(from, to, Label::Epsilon),
            Fs::Text(t) => {
                let words: Vec<&str> = t.split_whitespace().collect();
                if words.is_empty() {
                    self.arc(from, to, Label::Epsilon);
                } else {
                    self.chain(&words, from, to, |b, w, f, t| {
                        b.arc(f, t, Label::Word(w.to_string()));
                        Ok(())
                    })?;
                }
            }
            Fs::Complex(m) if m.is_empty() => self.arc(from, to, Label::Epsilon),
            Fs::Complex(m) => {
                if !g.ops_contiguous() {
                    return Err(LatticeError::NotLattice(g.to_string()));
                }
                let parts: Vec<&Fs> = m.values().collect();
                self.chain(&parts, from, to, |b, part, f, t| b.build(part, f, t))?;
            }
            Fs::Or(alts) => {
                for alt in alts {
                    self.build(alt, from, to)?;
                }
            }
            Fs::Atom(_) | Fs::Not(_) => return Err(LatticeError::NotLattice(g.to_string())),
        }
        Ok(())
    }
}

/// States ordered so every arc goes forward. Ties go to the lower state id.
pub fn topo_order(lat: &WordLattice) -> Result<Vec<StateId>, LatticeError> {
    let mut indeg = vec![0usize; lat.num_states];
    let mut succ = vec![Vec::new(); lat.num_states];
    for a in &lat.arcs {
        indeg[a.to] += 1;
        succ[a.from].push(a.to);
    }
    let mut ready: BinaryHeap<Reverse<StateId>> = (0..lat.num_states).filter(|&s| indeg[s] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(lat.num_states);
    while let Some(Reverse(s)) = ready.pop() {
        order.push(s);
        for &t in &succ[s] {
            indeg[t] -= 1;
            if indeg[t] == 0 {
                ready.push(Reverse(t));
            }
        }
    }
    if order.len() == lat.num_states {
        Ok(order)
    } else {
        Err(LatticeError::Cycle)
    }
}

/// Number of distinct start-to-final paths.
pub fn count_paths(lat: &WordLattice) -> BigUint {
    let order = topo_order(lat).expect("validated lattice is acyclic");
    let out = lat.outgoing();
    let mut n = vec![BigUint::ZERO; lat.num_states];
    n[lat.start] = BigUint::from(1u32);
    for s in order {
        if n[s] == BigUint::ZERO {
            continue;
        }
        let here = n[s].clone();
        for &i in &out[s] {
            n[lat.arcs[i].to] += &here;
        }
    }
    std::mem::take(&mut n[lat.final_state])
}
