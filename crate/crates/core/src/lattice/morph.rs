//! Marker-token inflection (`+past`, `+pl`, `+3sg`).

use std::collections::HashMap;
use std::sync::OnceLock;

use log::warn;

use super::{topo_order, Edge, Label, StateId, WordLattice};

pub const MARKERS: [&str; 3] = ["+past", "+pl", "+3sg"];

const IRREGULAR: &str = include_str!("../../data/irregular.tsv");

pub fn is_marker(token: &str) -> bool {
    MARKERS.contains(&token)
}

fn irregular() -> &'static HashMap<(&'static str, &'static str), &'static str> {
    static TABLE: OnceLock<HashMap<(&str, &str), &str>> = OnceLock::new();
    TABLE.get_or_init(|| {
        IRREGULAR
            .lines()
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut f = l.split('\t');
                let (m, base, form) = (f.next().unwrap(), f.next().unwrap(), f.next().unwrap());
                ((m, base), form)
            })
            .collect()
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// One vowel group ending consonant-vowel-consonant: stop, plan, drop.
fn doubles_final(word: &str) -> bool {
    let cs: Vec<char> = word.chars().collect();
    let n = cs.len();
    if n < 3 || matches!(cs[n - 1], 'w' | 'x' | 'y') {
        return false;
    }
    if is_vowel(cs[n - 1]) || !is_vowel(cs[n - 2]) || is_vowel(cs[n - 3]) {
        return false;
    }
    let groups = cs
        .iter()
        .zip(std::iter::once(&' ').chain(cs.iter()))
        .filter(|(c, prev)| is_vowel(**c) && !is_vowel(**prev))
        .count();
    groups == 1
}

fn consonant_y(word: &str) -> bool {
    let mut it = word.chars().rev();
    matches!((it.next(), it.next()), (Some('y'), Some(c)) if !is_vowel(c))
}

/// Inflect `word` for `marker`: irregular table first, then regular rules.
pub fn inflect(word: &str, marker: &str) -> String {
    if let Some(form) = irregular().get(&(marker, word)) {
        return form.to_string();
    }
    match marker {
        "+past" => {
            if word.ends_with('e') {
                format!("{word}d")
            } else if consonant_y(word) {
                format!("{}ied", &word[..word.len() - 1])
            } else if doubles_final(word) {
                let last = word.chars().last().unwrap();
                format!("{word}{last}ed")
            } else {
                format!("{word}ed")
            }
        }
        "+pl" | "+3sg" => {
            if ["s", "x", "z", "ch", "sh"].iter().any(|s| word.ends_with(s)) {
                format!("{word}es")
            } else if consonant_y(word) {
                format!("{}ies", &word[..word.len() - 1])
            } else {
                format!("{word}s")
            }
        }
        _ => word.to_string(),
    }
}

fn marker_of(label: &Label) -> Option<&str> {
    label.word().filter(|w| is_marker(w))
}

/// Fuse each marker arc with every word arc entering its source state.
/// Paths reaching a marker through an epsilon arc or from the start lose
/// the marker. Path count never increases; no marker survives.
pub fn rewrite_morphology(lat: &WordLattice) -> WordLattice {
    if !lat.arcs.iter().any(|a| marker_of(&a.label).is_some()) {
        return lat.clone();
    }
    let order = topo_order(lat).expect("validated lattice is acyclic");
    let mut num_states = lat.num_states;
    let mut arcs: Vec<Option<Edge>> = lat.arcs.iter().cloned().map(Some).collect();

    for u in order {
        let live = |arcs: &[Option<Edge>]| -> Vec<usize> { (0..arcs.len()).filter(|&i| arcs[i].is_some()).collect() };
        let idx = live(&arcs);
        let markers: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| {
                let a = arcs[i].as_ref().unwrap();
                a.from == u && marker_of(&a.label).is_some()
            })
            .collect();
        if markers.is_empty() {
            continue;
        }
        let incoming: Vec<usize> = idx.iter().copied().filter(|&i| arcs[i].as_ref().unwrap().to == u).collect();
        let others: Vec<usize> = idx
            .iter()
            .copied()
            .filter(|&i| {
                let a = arcs[i].as_ref().unwrap();
                a.from == u && marker_of(&a.label).is_none()
            })
            .collect();

        let mut added = Vec::new();
        for &m in &markers {
            let marc = arcs[m].clone().unwrap();
            let marker = marker_of(&marc.label).unwrap();
            for &i in &incoming {
                let a = arcs[i].as_ref().unwrap();
                if let Label::Word(w) = &a.label {
                    added.push(Edge {
                        from: a.from,
                        to: marc.to,
                        label: Label::Word(inflect(w, marker)),
                    });
                }
            }
        }

        let eps_in: Vec<usize> = incoming.iter().copied().filter(|&i| arcs[i].as_ref().unwrap().label.is_epsilon()).collect();
        if u == lat.start || !eps_in.is_empty() {
            let marker_names: Vec<&str> = markers.iter().map(|&m| marker_of(&arcs[m].as_ref().unwrap().label).unwrap()).collect();
            warn!("marker {} follows no word at state {u}; dropped", marker_names.join(","));
        }
        if u == lat.start {
            for &m in &markers {
                let a = arcs[m].as_ref().unwrap();
                added.push(Edge {
                    from: a.from,
                    to: a.to,
                    label: Label::Epsilon,
                });
            }
        } else if !eps_in.is_empty() {
            let split: StateId = num_states;
            num_states += 1;
            for &i in &eps_in {
                arcs[i].as_mut().unwrap().to = split;
            }
            for &i in &others {
                let a = arcs[i].as_ref().unwrap();
                added.push(Edge {
                    from: split,
                    to: a.to,
                    label: a.label.clone(),
                });
            }
            for &m in &markers {
                added.push(Edge {
                    from: split,
                    to: arcs[m].as_ref().unwrap().to,
                    label: Label::Epsilon,
                });
            }
        }
        for &m in &markers {
            arcs[m] = None;
        }
        arcs.extend(added.into_iter().map(Some));
    }

    trim(num_states, lat.start, lat.final_state, arcs.into_iter().flatten().collect())
}

/// Drop states off every start-to-final path and renumber the rest,
/// keeping their relative order.
fn trim(num_states: usize, start: StateId, final_state: StateId, arcs: Vec<Edge>) -> WordLattice {
    let mut fwd = vec![false; num_states];
    let mut bwd = vec![false; num_states];
    fwd[start] = true;
    bwd[final_state] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for a in &arcs {
            if fwd[a.from] && !fwd[a.to] {
                fwd[a.to] = true;
                changed = true;
            }
            if bwd[a.to] && !bwd[a.from] {
                bwd[a.from] = true;
                changed = true;
            }
        }
    }
    let mut map = vec![usize::MAX; num_states];
    let mut next = 0;
    for s in 0..num_states {
        if fwd[s] && bwd[s] {
            map[s] = next;
            next += 1;
        }
    }
    let arcs = arcs
        .into_iter()
        .filter(|a| map[a.from] != usize::MAX && map[a.to] != usize::MAX)
        .map(|a| Edge {
            from: map[a.from],
            to: map[a.to],
            label: a.label,
        })
        .collect();
    WordLattice::new(next, map[start], map[final_state], arcs).expect("morphology keeps lattice invariants")
}
