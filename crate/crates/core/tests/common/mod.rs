#![allow(dead_code)]

use std::path::PathBuf;

use glossmt_core::featstruct::Fs;
use glossmt_core::grammar::{load_grammar, Grammar};

pub fn data_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

pub fn read(name: &str, file: &str) -> String {
    std::fs::read_to_string(data_dir(name).join(file)).unwrap()
}

pub fn grammar(name: &str) -> Grammar {
    load_grammar(&read(name, "syntax.gr"), &read(name, "gloss.gr"), &read(name, "lexicon.gr")).unwrap()
}

/// Words of a disjunction-free gloss: text splits on whitespace,
/// "*empty*" and () contribute nothing, op-sequences concatenate in op
/// order. Written without the lattice code.
pub fn flatten(fs: &Fs) -> Vec<String> {
    match fs {
        Fs::Text(t) if t == "*empty*" => Vec::new(),
        Fs::Text(t) => t.split_whitespace().map(str::to_string).collect(),
        Fs::Complex(m) => {
            let mut ops: Vec<(usize, &Fs)> = m
                .iter()
                .map(|(k, v)| (k.as_str().strip_prefix("op").unwrap().parse().unwrap(), v))
                .collect();
            ops.sort_by_key(|(i, _)| *i);
            ops.into_iter().flat_map(|(_, v)| flatten(v)).collect()
        }
        other => panic!("not a disjunction-free gloss: {other}"),
    }
}

pub mod checks;
pub mod gen;
