use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use super::{Feature, FeaturePath, Fs, FsError};

/// Largest expansion [`expand_disjunctions`] will materialize.
pub const DEFAULT_EXPANSION_CAP: u64 = 10_000_000;

/// Most general structure subsumed by both inputs, or `None` on failure.
///
/// Disjunctions keep every surviving alternative. The empty complex is the
/// identity. `*NOT*` passes any value outside its set.
pub fn unify(a: &Fs, b: &Fs) -> Option<Fs> {
    match (a, b) {
        (Fs::Or(alts), _) => Fs::or(alts.iter().filter_map(|x| unify(x, b))),
        (_, Fs::Or(alts)) => Fs::or(alts.iter().filter_map(|y| unify(a, y))),
        (Fs::Complex(m), _) if m.is_empty() => Some(b.clone()),
        (_, Fs::Complex(m)) if m.is_empty() => Some(a.clone()),
        (Fs::Complex(ma), Fs::Complex(mb)) => {
            let mut out = ma.clone();
            for (k, vb) in mb {
                let merged = match ma.get(k) {
                    Some(va) => unify(va, vb)?,
                    None => vb.clone(),
                };
                out.insert(k.clone(), merged);
            }
            Some(Fs::Complex(out))
        }
        (Fs::Not(x), Fs::Not(y)) => Fs::not(x.iter().chain(y).cloned()),
        (Fs::Not(set), v) | (v, Fs::Not(set)) => {
            if set.contains(v) {
                None
            } else {
                Some(v.clone())
            }
        }
        (Fs::Atom(x), Fs::Atom(y)) if x == y => Some(a.clone()),
        (Fs::Text(x), Fs::Text(y)) if x == y => Some(a.clone()),
        _ => None,
    }
}

/// Value at `path`, descending through complex levels and distributing over
/// disjunctions. `None` when the path is undefined.
pub fn get(fs: &Fs, path: &FeaturePath) -> Option<Fs> {
    get_in(fs, path.features())
}

fn get_in(fs: &Fs, path: &[Feature]) -> Option<Fs> {
    let Some((head, rest)) = path.split_first() else {
        return Some(fs.clone());
    };
    match fs {
        Fs::Complex(m) => get_in(m.get(head)?, rest),
        Fs::Or(alts) => Fs::or(alts.iter().filter_map(|a| get_in(a, path))),
        _ => None,
    }
}

fn nest(path: &[Feature], v: &Fs) -> Fs {
    path.iter()
        .rev()
        .fold(v.clone(), |acc, f| Fs::Complex(BTreeMap::from([(f.clone(), acc)])))
}

/// `fs` with `v` unified into the value at `path`, creating intermediate
/// levels as needed.
pub fn put(fs: &Fs, path: &FeaturePath, v: &Fs) -> Option<Fs> {
    unify(fs, &nest(path.features(), v))
}

/// `=c`: passes iff the path is already defined in `fs` and `v` unifies with
/// it without introducing any feature path not already present.
pub fn check_constraint(fs: &Fs, path: &FeaturePath, v: &Fs) -> bool {
    let Some(existing) = get(fs, path) else {
        return false;
    };
    let Some(merged) = unify(&existing, v) else {
        return false;
    };
    let mut before = BTreeSet::new();
    feature_paths(&existing, &mut Vec::new(), &mut before);
    let mut after = BTreeSet::new();
    feature_paths(&merged, &mut Vec::new(), &mut after);
    after.is_subset(&before)
}

fn feature_paths(fs: &Fs, prefix: &mut Vec<Feature>, out: &mut BTreeSet<Vec<Feature>>) {
    match fs {
        Fs::Complex(m) => {
            for (k, v) in m {
                prefix.push(k.clone());
                out.insert(prefix.clone());
                feature_paths(v, prefix, out);
                prefix.pop();
            }
        }
        Fs::Or(alts) => {
            for a in alts {
                feature_paths(a, prefix, out);
            }
        }
        _ => {}
    }
}

/// Number of disjunction-free structures `fs` expands to.
pub fn expansion_count(fs: &Fs) -> BigUint {
    match fs {
        Fs::Complex(m) => m.values().map(expansion_count).product(),
        Fs::Or(alts) => alts.iter().map(expansion_count).sum(),
        _ => BigUint::from(1u32),
    }
}

/// Full cross-product expansion, depth-first and left to right.
pub fn expand_disjunctions(fs: &Fs) -> Result<Vec<Fs>, FsError> {
    expand_disjunctions_capped(fs, DEFAULT_EXPANSION_CAP)
}

pub fn expand_disjunctions_capped(fs: &Fs, cap: u64) -> Result<Vec<Fs>, FsError> {
    let count = expansion_count(fs);
    if count > BigUint::from(cap) {
        return Err(FsError::ExpansionCap {
            count: count.to_string(),
            cap,
        });
    }
    Ok(expand(fs))
}

fn expand(fs: &Fs) -> Vec<Fs> {
    match fs {
        Fs::Or(alts) => alts.iter().flat_map(expand).collect(),
        Fs::Complex(m) => {
            let mut acc: Vec<BTreeMap<Feature, Fs>> = vec![BTreeMap::new()];
            for (k, v) in m {
                let options = expand(v);
                let mut next = Vec::with_capacity(acc.len() * options.len());
                for partial in &acc {
                    for o in &options {
                        let mut p = partial.clone();
                        p.insert(k.clone(), o.clone());
                        next.push(p);
                    }
                }
                acc = next;
            }
            acc.into_iter().map(Fs::Complex).collect()
        }
        other => vec![other.clone()],
    }
}
