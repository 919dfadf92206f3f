//! Execution of rule constraints against constituent bindings.

use thiserror::Error;

use super::{Constraint, Rhs};
use crate::featstruct::{check_constraint, get, put, unify, Fs, Path};

/// How `*XOR*` blocks choose a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XorMode {
    /// The first branch (in source order) whose constraints all succeed.
    #[default]
    Ordered,
    /// Exactly one branch may succeed; more than one is a fault.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("*XOR* block has {satisfiable} satisfiable branches in strict mode")]
    AmbiguousXor { satisfiable: usize },
}

/// Apply `constraints` in order to `bindings` (`bindings[i]` is `Xi`).
/// `Ok(None)` is ordinary unification failure.
pub fn apply_constraints(constraints: &[Constraint], bindings: &[Fs], mode: XorMode) -> Result<Option<Vec<Fs>>, EvalError> {
    let mut current = bindings.to_vec();
    for c in constraints {
        match apply_one(c, current, mode)? {
            Some(next) => current = next,
            None => return Ok(None),
        }
    }
    Ok(Some(current))
}

/// Run an `*XOR*` block. Branches are tried in source order and the first
/// that succeeds is committed.
pub fn apply_xor(branches: &[Vec<Constraint>], bindings: &[Fs], mode: XorMode) -> Result<Option<Vec<Fs>>, EvalError> {
    match mode {
        XorMode::Ordered => {
            for branch in branches {
                if let Some(done) = apply_constraints(branch, bindings, mode)? {
                    return Ok(Some(done));
                }
            }
            Ok(None)
        }
        XorMode::Strict => {
            let mut winners = Vec::new();
            for branch in branches {
                if let Some(done) = apply_constraints(branch, bindings, mode)? {
                    winners.push(done);
                }
            }
            if winners.len() > 1 {
                return Err(EvalError::AmbiguousXor {
                    satisfiable: winners.len(),
                });
            }
            Ok(winners.pop())
        }
    }
}

fn write(mut bindings: Vec<Fs>, path: &Path, v: &Fs) -> Option<Vec<Fs>> {
    let updated = put(&bindings[path.var], &path.features, v)?;
    bindings[path.var] = updated;
    Some(bindings)
}

fn apply_one(c: &Constraint, bindings: Vec<Fs>, mode: XorMode) -> Result<Option<Vec<Fs>>, EvalError> {
    Ok(match c {
        Constraint::Equation { lhs, rhs: Rhs::Value(v) } => write(bindings, lhs, v),
        Constraint::Equation { lhs, rhs: Rhs::Path(rhs) } => {
            let left = get(&bindings[lhs.var], &lhs.features);
            let right = get(&bindings[rhs.var], &rhs.features);
            match (left, right) {
                (None, None) => Some(bindings),
                (Some(v), None) => write(bindings, rhs, &v),
                (None, Some(v)) => write(bindings, lhs, &v),
                (Some(a), Some(b)) => unify(&a, &b).and_then(|v| write(write(bindings, lhs, &v)?, rhs, &v)),
            }
        }
        Constraint::Check { path, value } => {
            check_constraint(&bindings[path.var], &path.features, value).then_some(bindings)
        }
        Constraint::Xor(branches) => apply_xor(branches, &bindings, mode)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::load_grammar;

    fn fs(s: &str) -> Fs {
        s.parse().unwrap()
    }

    fn rule_constraints(text: &str) -> Vec<Constraint> {
        load_grammar(text, "", "").unwrap().rules.remove(0).constraints
    }

    const TA_RULE: &str = r#"((V -> V VSUF)
 ((x0 tmp) = (x1 tmp))
 (*XOR*
  (((x2 syn entry-form) = "sase") ((x0 gloss) = (x1 gloss)) ((x0 tmp force) = +))
  (((x2 syn entry-form) = "ta") ((x1 tmp force) =c +) ((x0 gloss) = (x1 gloss)) ((x0 tmp past) = +))
  (((x2 syn entry-form) = "ta") ((x0 gloss op1) = (x1 gloss)) ((x0 gloss op2) = "+past"))))"#;

    fn ta() -> Fs {
        fs(r#"((syn ((entry-form "ta"))) (gloss "*empty*"))"#)
    }

    #[test]
    fn equation_copies_between_constituents() {
        let cs = rule_constraints("((S -> V) ((x0 gloss) = (x1 gloss)) ((x0 tmp) = (x1 tmp)))");
        let child = fs(r#"((gloss (*OR* "eat" "ingest")) (tmp ((force +))))"#);
        let out = apply_constraints(&cs, &[Fs::empty(), child.clone()], XorMode::Ordered)
            .unwrap()
            .unwrap();
        assert_eq!(out[0], child);
    }

    #[test]
    fn absent_on_both_sides_is_a_no_op() {
        let cs = rule_constraints("((S -> V) ((x0 tmp) = (x1 tmp)))");
        let out = apply_constraints(&cs, &[Fs::empty(), Fs::empty()], XorMode::Ordered)
            .unwrap()
            .unwrap();
        assert_eq!(out, vec![Fs::empty(), Fs::empty()]);
    }

    #[test]
    fn equation_failure_prunes() {
        let cs = rule_constraints("((S -> V) ((x0 f) = a) ((x0 f) = (x1 f)))");
        let got = apply_constraints(&cs, &[Fs::empty(), fs("((f b))")], XorMode::Ordered).unwrap();
        assert_eq!(got, None);
    }

    #[test]
    fn xor_second_branch_when_force_present() {
        let cs = rule_constraints(TA_RULE);
        let verb = fs(r#"((gloss (*OR* "eat" "ingest")) (tmp ((force +))))"#);
        let out = apply_constraints(&cs, &[Fs::empty(), verb, ta()], XorMode::Ordered)
            .unwrap()
            .unwrap();
        assert_eq!(
            out[0],
            fs(r#"((gloss (*OR* "eat" "ingest")) (tmp ((force +) (past +))))"#)
        );
    }

    #[test]
    fn xor_third_branch_without_force() {
        let cs = rule_constraints(TA_RULE);
        let verb = fs(r#"((gloss (*OR* "eat" "ingest")))"#);
        let out = apply_constraints(&cs, &[Fs::empty(), verb, ta()], XorMode::Ordered)
            .unwrap()
            .unwrap();
        assert_eq!(
            out[0],
            fs(r#"((gloss ((op1 (*OR* "eat" "ingest")) (op2 "+past"))))"#)
        );
    }

    #[test]
    fn xor_without_satisfiable_branch_fails() {
        let cs = rule_constraints(TA_RULE);
        let suffix = fs(r#"((syn ((entry-form "masu"))))"#);
        let got = apply_constraints(&cs, &[Fs::empty(), fs(r#"((gloss "go"))"#), suffix], XorMode::Ordered).unwrap();
        assert_eq!(got, None);
    }

    #[test]
    fn strict_mode_rejects_overlapping_branches() {
        let cs = rule_constraints(TA_RULE);
        let verb = fs(r#"((gloss "eat") (tmp ((force +))))"#);
        let err = apply_constraints(&cs, &[Fs::empty(), verb, ta()], XorMode::Strict).unwrap_err();
        assert_eq!(err, EvalError::AmbiguousXor { satisfiable: 2 });
        // exactly one satisfiable branch is fine
        let verb = fs(r#"((gloss "eat"))"#);
        assert!(apply_constraints(&cs, &[Fs::empty(), verb, ta()], XorMode::Strict)
            .unwrap()
            .is_some());
    }

    #[test]
    fn not_filters() {
        let cs = rule_constraints("((NP -> S NP) ((x2 syn form) = (*NOT* rentaidome)))");
        let ok = apply_constraints(&cs, &[Fs::empty(), Fs::empty(), fs("((syn ((form kihon))))")], XorMode::Ordered);
        assert!(ok.unwrap().is_some());
        let bad = apply_constraints(&cs, &[Fs::empty(), Fs::empty(), fs("((syn ((form rentaidome))))")], XorMode::Ordered);
        assert!(bad.unwrap().is_none());
    }
}
