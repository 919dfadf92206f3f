//! Feature structures with disjunction (`*OR*`) and exclusion (`*NOT*`).
//!
//! A [`Fs`] is the single value type used for syntactic features, glosses
//! and abstract `tmp` features. Values are immutable; every operation
//! returns a new structure. Reentrancy is not modelled: path equations copy
//! values instead of sharing them.

mod ops;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::sexpr::{self, Sexp, SexpError};

pub use ops::{
    check_constraint, expand_disjunctions, expand_disjunctions_capped, expansion_count, get, put,
    unify, DEFAULT_EXPANSION_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FsError {
    #[error(transparent)]
    Syntax(#[from] SexpError),
    #[error("{pos}: {msg}")]
    Malformed { pos: sexpr::Pos, msg: String },
    #[error("empty feature path")]
    EmptyPath,
    #[error("disjunction expands to {count} structures, above the cap of {cap}")]
    ExpansionCap { count: String, cap: u64 },
}

/// A feature name. Ordered naturally so that `op2 < op10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature(String);

impl Feature {
    /// Feature names are case-insensitive; the canonical form is lower case.
    pub fn new(name: &str) -> Self {
        Feature(name.to_lowercase())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The sequence index of an `opN` feature.
    pub fn op_index(&self) -> Option<usize> {
        let digits = self.0.strip_prefix("op")?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
            return None;
        }
        digits.parse().ok()
    }

    pub fn op(n: usize) -> Self {
        Feature(format!("op{n}"))
    }

    fn split_numeric(&self) -> (&str, Option<u64>) {
        let s = self.0.as_str();
        let cut = s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        if cut == s.len() {
            (s, None)
        } else {
            (&s[..cut], s[cut..].parse().ok())
        }
    }
}

impl Ord for Feature {
    fn cmp(&self, other: &Self) -> Ordering {
        let (pa, na) = self.split_numeric();
        let (pb, nb) = other.split_numeric();
        pa.cmp(pb)
            .then_with(|| na.cmp(&nb))
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Feature {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Feature {
    fn from(s: &str) -> Self {
        Feature::new(s)
    }
}

/// A non-empty sequence of feature names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeaturePath(Vec<Feature>);

impl FeaturePath {
    pub fn new(features: Vec<Feature>) -> Result<Self, FsError> {
        if features.is_empty() {
            return Err(FsError::EmptyPath);
        }
        Ok(FeaturePath(features))
    }

    /// Convenience constructor from space-separated names.
    pub fn parse(names: &str) -> Result<Self, FsError> {
        Self::new(names.split_whitespace().map(Feature::new).collect())
    }

    pub fn features(&self) -> &[Feature] {
        &self.0
    }
}

impl fmt::Display for FeaturePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, feat) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{feat}")?;
        }
        Ok(())
    }
}

/// A path rooted at a rule constituent: `X0` is the parent, `Xi` the i-th child.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub var: usize,
    pub features: FeaturePath,
}

impl Path {
    pub fn new(var: usize, features: FeaturePath) -> Self {
        Path { var, features }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x{} {})", self.var, self.features)
    }
}

/// Text literal that the lattice compiler reads as an empty transition.
pub const EMPTY_LITERAL: &str = "*empty*";

/// A feature structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fs {
    /// Bare symbol such as `+` or `rentai`.
    Atom(String),
    /// Double-quoted literal such as `"company"`.
    Text(String),
    /// Feature map. The empty map is the unconstrained structure.
    Complex(BTreeMap<Feature, Fs>),
    /// `*OR*`: at least two structurally distinct alternatives once normalized.
    Or(Vec<Fs>),
    /// `*NOT*`: sorted, de-duplicated atoms and literals the value must avoid.
    Not(Vec<Fs>),
}

impl Fs {
    pub fn empty() -> Self {
        Fs::Complex(BTreeMap::new())
    }

    pub fn atom(s: impl Into<String>) -> Self {
        Fs::Atom(s.into())
    }

    pub fn text(s: impl Into<String>) -> Self {
        Fs::Text(s.into())
    }

    /// Build a complex structure from `(feature, value)` pairs. Later
    /// duplicates overwrite earlier ones.
    pub fn complex<I, K>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, Fs)>,
        K: Into<Feature>,
    {
        Fs::Complex(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Op-sequence `((op1 a) (op2 b) ...)`.
    pub fn sequence(items: impl IntoIterator<Item = Fs>) -> Self {
        Fs::Complex(
            items
                .into_iter()
                .enumerate()
                .map(|(i, v)| (Feature::op(i + 1), v))
                .collect(),
        )
    }

    /// Normalized disjunction. Nested disjunctions are flattened, duplicates
    /// removed (first occurrence wins) and singletons collapsed. `None` when
    /// no alternative is given.
    pub fn or(alternatives: impl IntoIterator<Item = Fs>) -> Option<Fs> {
        let mut flat: Vec<Fs> = Vec::new();
        let mut seen: Vec<Fs> = Vec::new();
        for alt in alternatives {
            let alts = match alt {
                Fs::Or(inner) => inner,
                other => vec![other],
            };
            for a in alts {
                let key = a.canonical();
                if !seen.contains(&key) {
                    seen.push(key);
                    flat.push(a);
                }
            }
        }
        match flat.len() {
            0 => None,
            1 => flat.pop(),
            _ => Some(Fs::Or(flat)),
        }
    }

    /// `*NOT*` over atoms/literals. `None` when the set is empty or contains
    /// something else.
    pub fn not(values: impl IntoIterator<Item = Fs>) -> Option<Fs> {
        let mut set: Vec<Fs> = values.into_iter().collect();
        if set.is_empty() || !set.iter().all(Fs::is_scalar) {
            return None;
        }
        set.sort();
        set.dedup();
        Some(Fs::Not(set))
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Fs::Atom(_) | Fs::Text(_))
    }

    pub fn is_empty_complex(&self) -> bool {
        matches!(self, Fs::Complex(m) if m.is_empty())
    }

    pub fn as_complex(&self) -> Option<&BTreeMap<Feature, Fs>> {
        match self {
            Fs::Complex(m) => Some(m),
            _ => None,
        }
    }

    /// Direct child of a complex structure.
    pub fn feature(&self, name: &str) -> Option<&Fs> {
        self.as_complex()?.get(&Feature::new(name))
    }

    /// Copy of `self` without feature `name` at the top level.
    pub fn without(&self, name: &str) -> Fs {
        match self {
            Fs::Complex(m) => {
                let mut m = m.clone();
                m.remove(&Feature::new(name));
                Fs::Complex(m)
            }
            other => other.clone(),
        }
    }

    pub fn has_disjunction(&self) -> bool {
        match self {
            Fs::Or(_) => true,
            Fs::Complex(m) => m.values().any(Fs::has_disjunction),
            _ => false,
        }
    }

    /// Re-establish the normal form bottom-up.
    pub fn normalize(&self) -> Option<Fs> {
        match self {
            Fs::Atom(_) | Fs::Text(_) => Some(self.clone()),
            Fs::Not(v) => Fs::not(v.iter().cloned()),
            Fs::Complex(m) => {
                let mut out = BTreeMap::new();
                for (k, v) in m {
                    out.insert(k.clone(), v.normalize()?);
                }
                Some(Fs::Complex(out))
            }
            Fs::Or(alts) => Fs::or(alts.iter().filter_map(Fs::normalize)),
        }
    }

    /// Order-insensitive form: disjunction alternatives sorted. Two
    /// structures are equivalent iff their canonical forms are equal.
    pub fn canonical(&self) -> Fs {
        match self {
            Fs::Complex(m) => Fs::Complex(m.iter().map(|(k, v)| (k.clone(), v.canonical())).collect()),
            Fs::Or(alts) => {
                let mut alts: Vec<Fs> = alts.iter().map(Fs::canonical).collect();
                alts.sort();
                alts.dedup();
                if alts.len() == 1 {
                    alts.pop().unwrap()
                } else {
                    Fs::Or(alts)
                }
            }
            other => other.clone(),
        }
    }

    pub fn equivalent(&self, other: &Fs) -> bool {
        self.canonical() == other.canonical()
    }

    /// Check the `opN` contiguity invariant at every complex level.
    pub fn ops_contiguous(&self) -> bool {
        match self {
            Fs::Complex(m) => {
                let ops: Vec<usize> = m.keys().filter_map(Feature::op_index).collect();
                ops.iter().enumerate().all(|(i, &n)| n == i + 1) && m.values().all(Fs::ops_contiguous)
            }
            Fs::Or(alts) => alts.iter().all(Fs::ops_contiguous),
            _ => true,
        }
    }

    pub fn from_sexp(e: &Sexp) -> Result<Fs, FsError> {
        let malformed = |e: &Sexp, msg: &str| FsError::Malformed {
            pos: e.pos(),
            msg: msg.to_string(),
        };
        match e {
            Sexp::Symbol(s, _) => {
                if s.starts_with('*') && s.ends_with('*') && s.len() > 1 {
                    return Err(malformed(e, &format!("operator {s} used as a value")));
                }
                Ok(Fs::Atom(s.clone()))
            }
            Sexp::Str(s, _) => Ok(Fs::Text(s.clone())),
            Sexp::List(items, _) => {
                let head = items.first().and_then(Sexp::as_symbol).map(str::to_ascii_uppercase);
                match head.as_deref() {
                    Some("*OR*") => {
                        let alts = items[1..].iter().map(Fs::from_sexp).collect::<Result<Vec<_>, _>>()?;
                        Fs::or(alts).ok_or_else(|| malformed(e, "empty *OR*"))
                    }
                    Some("*NOT*") => {
                        let vals = items[1..].iter().map(Fs::from_sexp).collect::<Result<Vec<_>, _>>()?;
                        Fs::not(vals).ok_or_else(|| malformed(e, "*NOT* needs one or more atoms or literals"))
                    }
                    _ => {
                        let mut map = BTreeMap::new();
                        for item in items {
                            let pair = item
                                .as_list()
                                .filter(|p| p.len() == 2)
                                .ok_or_else(|| malformed(item, "expected (feature value)"))?;
                            let name = pair[0]
                                .as_symbol()
                                .ok_or_else(|| malformed(&pair[0], "feature name must be a symbol"))?;
                            let value = Fs::from_sexp(&pair[1])?;
                            if map.insert(Feature::new(name), value).is_some() {
                                return Err(malformed(item, &format!("duplicate feature {name}")));
                            }
                        }
                        Ok(Fs::Complex(map))
                    }
                }
            }
        }
    }
}

impl FromStr for Fs {
    type Err = FsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fs::from_sexp(&sexpr::read_one(s)?)
    }
}

impl fmt::Display for Fs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fs::Atom(s) => f.write_str(s),
            Fs::Text(s) => f.write_str(&sexpr::quote(s)),
            Fs::Complex(m) => {
                f.write_str("(")?;
                for (i, (k, v)) in m.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "({k} {v})")?;
                }
                f.write_str(")")
            }
            Fs::Or(alts) | Fs::Not(alts) => {
                f.write_str(if matches!(self, Fs::Or(_)) { "(*OR*" } else { "(*NOT*" })?;
                for a in alts {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
