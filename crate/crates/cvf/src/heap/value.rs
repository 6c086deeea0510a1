//! Ghost values and ground evaluation of ghost expressions.

use crate::syntax::ast::{GhostExpr, GhostInstr, GhostInstrKind, InnerGhost};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

/// Ghost values: integers, pairs, unit, finite sets, predicate values and
/// lemma values.
///
/// `FinSet` uses a `BTreeSet`, which keeps elements sorted and duplicate
/// free under the derived total structural order, so equality and hashing
/// are deterministic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GhostValue {
    Int(i64),
    Pair(Box<GhostValue>, Box<GhostValue>),
    Unit,
    FinSet(BTreeSet<GhostValue>),
    PredVal(String, Vec<GhostValue>),
    LemVal(Box<LemVal>),
}

impl GhostValue {
    pub fn pair(a: GhostValue, b: GhostValue) -> Self {
        GhostValue::Pair(Box::new(a), Box::new(b))
    }

    pub fn set<I: IntoIterator<Item = GhostValue>>(items: I) -> Self {
        GhostValue::FinSet(items.into_iter().collect())
    }
}

/// A closed lemma value: parameter list plus an inner ghost command body.
///
/// Lemma values are canonicalized at construction: free occurrences are
/// replaced by their captured values and every binder is renamed to a
/// positional name, so the derived structural equality coincides with
/// equality up to bound-variable renaming.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LemVal {
    pub params: Vec<String>,
    pub body: InnerGhost,
}

impl LemVal {
    /// Builds a lemma value, closing the body over `env` and renaming
    /// binders canonically.
    pub fn close(params: &[String], body: &InnerGhost, env: &GroundEnv) -> Self {
        let mut counter = 0usize;
        let mut renaming: HashMap<String, String> = HashMap::new();
        let canon_params: Vec<String> = params
            .iter()
            .map(|p| {
                let n = format!("${counter}");
                counter += 1;
                renaming.insert(p.clone(), n.clone());
                n
            })
            .collect();
        let body = canon_inner(body, env, &mut renaming, &mut counter);
        LemVal {
            params: canon_params,
            body,
        }
    }
}

fn canon_inner(
    g: &InnerGhost,
    env: &GroundEnv,
    renaming: &mut HashMap<String, String>,
    counter: &mut usize,
) -> InnerGhost {
    match g {
        InnerGhost::Instr(i) => InnerGhost::Instr(GhostInstr {
            span: i.span,
            kind: match &i.kind {
                GhostInstrKind::LemCall(f, args) => GhostInstrKind::LemCall(
                    canon_expr(f, env, renaming),
                    args.iter().map(|a| canon_expr(a, env, renaming)).collect(),
                ),
                GhostInstrKind::GCons(e) => GhostInstrKind::GCons(canon_expr(e, env, renaming)),
                GhostInstrKind::GAssign(l, r) => GhostInstrKind::GAssign(
                    canon_expr(l, env, renaming),
                    canon_expr(r, env, renaming),
                ),
                GhostInstrKind::OpenAtomicSpace(n, i2) => GhostInstrKind::OpenAtomicSpace(
                    canon_expr(n, env, renaming),
                    canon_expr(i2, env, renaming),
                ),
                GhostInstrKind::CloseAtomicSpace(n, i2) => GhostInstrKind::CloseAtomicSpace(
                    canon_expr(n, env, renaming),
                    canon_expr(i2, env, renaming),
                ),
                GhostInstrKind::HeapUpdate(l, r) => GhostInstrKind::HeapUpdate(
                    canon_expr(l, env, renaming),
                    canon_expr(r, env, renaming),
                ),
            },
        }),
        InnerGhost::GLet(x, rhs, rest) => {
            let rhs = canon_inner(rhs, env, renaming, counter);
            let n = format!("${counter}");
            *counter += 1;
            let shadowed = renaming.insert(x.clone(), n.clone());
            let rest = canon_inner(rest, env, renaming, counter);
            match shadowed {
                Some(old) => {
                    renaming.insert(x.clone(), old);
                }
                None => {
                    renaming.remove(x);
                }
            }
            InnerGhost::GLet(n, Box::new(rhs), Box::new(rest))
        }
    }
}

fn canon_expr(e: &GhostExpr, env: &GroundEnv, renaming: &HashMap<String, String>) -> GhostExpr {
    match e {
        GhostExpr::Value(_) | GhostExpr::Unit | GhostExpr::EmptySet => e.clone(),
        GhostExpr::ProgVar(x) => match env.prog.get(x) {
            Some(z) => GhostExpr::Value(GhostValue::Int(*z)),
            None => e.clone(),
        },
        GhostExpr::GhostVar(g) => {
            if let Some(n) = renaming.get(g) {
                GhostExpr::GhostVar(n.clone())
            } else if let Some(v) = env.ghost.get(g) {
                GhostExpr::Value(v.clone())
            } else {
                e.clone()
            }
        }
        GhostExpr::Add(a, b) => GhostExpr::Add(
            Box::new(canon_expr(a, env, renaming)),
            Box::new(canon_expr(b, env, renaming)),
        ),
        GhostExpr::PredCtorApp(p, args) => GhostExpr::PredCtorApp(
            p.clone(),
            args.iter().map(|a| canon_expr(a, env, renaming)).collect(),
        ),
        GhostExpr::Pair(a, b) => GhostExpr::Pair(
            Box::new(canon_expr(a, env, renaming)),
            Box::new(canon_expr(b, env, renaming)),
        ),
        GhostExpr::Singleton(a) => GhostExpr::Singleton(Box::new(canon_expr(a, env, renaming))),
        GhostExpr::Union(a, b) => GhostExpr::Union(
            Box::new(canon_expr(a, env, renaming)),
            Box::new(canon_expr(b, env, renaming)),
        ),
        GhostExpr::Diff(a, b) => GhostExpr::Diff(
            Box::new(canon_expr(a, env, renaming)),
            Box::new(canon_expr(b, env, renaming)),
        ),
    }
}

/// A ground environment: program variables hold integers, ghost variables
/// hold ghost values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundEnv {
    pub prog: BTreeMap<String, i64>,
    pub ghost: BTreeMap<String, GhostValue>,
}

impl GroundEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_ghost<I: IntoIterator<Item = (String, GhostValue)>>(items: I) -> Self {
        GroundEnv {
            prog: BTreeMap::new(),
            ghost: items.into_iter().collect(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound {ns} variable `{name}`")]
    Unbound { ns: &'static str, name: String },
    #[error("`+` applied to non-integer value")]
    AddNonInt,
    #[error("set operation applied to non-set value")]
    SetOpNonSet,
    #[error("integer overflow in ghost expression")]
    Overflow,
}

/// Evaluates a ghost expression to a ghost value under a ground environment.
pub fn eval_ghost_expr(e: &GhostExpr, env: &GroundEnv) -> Result<GhostValue, EvalError> {
    match e {
        GhostExpr::Value(v) => Ok(v.clone()),
        GhostExpr::ProgVar(x) => {
            env.prog
                .get(x)
                .map(|z| GhostValue::Int(*z))
                .ok_or_else(|| EvalError::Unbound {
                    ns: "program",
                    name: x.clone(),
                })
        }
        GhostExpr::GhostVar(g) => env.ghost.get(g).cloned().ok_or_else(|| EvalError::Unbound {
            ns: "ghost",
            name: g.clone(),
        }),
        GhostExpr::Add(a, b) => match (eval_ghost_expr(a, env)?, eval_ghost_expr(b, env)?) {
            (GhostValue::Int(x), GhostValue::Int(y)) => x
                .checked_add(y)
                .map(GhostValue::Int)
                .ok_or(EvalError::Overflow),
            _ => Err(EvalError::AddNonInt),
        },
        GhostExpr::PredCtorApp(p, args) => {
            let vals = args
                .iter()
                .map(|a| eval_ghost_expr(a, env))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(GhostValue::PredVal(p.clone(), vals))
        }
        GhostExpr::Pair(a, b) => Ok(GhostValue::pair(
            eval_ghost_expr(a, env)?,
            eval_ghost_expr(b, env)?,
        )),
        GhostExpr::Unit => Ok(GhostValue::Unit),
        GhostExpr::EmptySet => Ok(GhostValue::FinSet(BTreeSet::new())),
        GhostExpr::Singleton(a) => {
            let v = eval_ghost_expr(a, env)?;
            Ok(GhostValue::set([v]))
        }
        GhostExpr::Union(a, b) => {
            let (x, y) = (eval_ghost_expr(a, env)?, eval_ghost_expr(b, env)?);
            match (x, y) {
                (GhostValue::FinSet(mut s), GhostValue::FinSet(t)) => {
                    s.extend(t);
                    Ok(GhostValue::FinSet(s))
                }
                _ => Err(EvalError::SetOpNonSet),
            }
        }
        GhostExpr::Diff(a, b) => {
            let (x, y) = (eval_ghost_expr(a, env)?, eval_ghost_expr(b, env)?);
            match (x, y) {
                (GhostValue::FinSet(s), GhostValue::FinSet(t)) => {
                    Ok(GhostValue::FinSet(s.difference(&t).cloned().collect()))
                }
                _ => Err(EvalError::SetOpNonSet),
            }
        }
    }
}

impl fmt::Display for GhostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GhostValue::Int(z) => write!(f, "{z}"),
            GhostValue::Pair(a, b) => write!(f, "({a}, {b})"),
            GhostValue::Unit => write!(f, "()"),
            GhostValue::FinSet(s) => {
                write!(f, "{{")?;
                for (i, v) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
            GhostValue::PredVal(p, args) => {
                write!(f, "{p}(")?;
                for (i, v) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            GhostValue::LemVal(l) => {
                write!(f, "lem(")?;
                for (i, p) in l.params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "){{{}}}", l.body)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_evaluation_by_structural_equality() {
        // union({()}, {}) = {()}
        let e = GhostExpr::Union(
            Box::new(GhostExpr::Singleton(Box::new(GhostExpr::Unit))),
            Box::new(GhostExpr::EmptySet),
        );
        let v = eval_ghost_expr(&e, &GroundEnv::new()).unwrap();
        assert_eq!(v, GhostValue::set([GhostValue::Unit]));
    }

    #[test]
    fn add_over_bound_variables() {
        // v1 + v2 with v1 = v2 = 0 evaluates to 0
        let env = GroundEnv::with_ghost([
            ("v1".to_string(), GhostValue::Int(0)),
            ("v2".to_string(), GhostValue::Int(0)),
        ]);
        let e = GhostExpr::Add(
            Box::new(GhostExpr::GhostVar("v1".into())),
            Box::new(GhostExpr::GhostVar("v2".into())),
        );
        assert_eq!(eval_ghost_expr(&e, &env), Ok(GhostValue::Int(0)));
    }

    #[test]
    fn diff_of_equal_singletons_is_empty() {
        let pair = GhostExpr::Pair(Box::new(GhostExpr::Unit), Box::new(GhostExpr::int(7)));
        let single = GhostExpr::Singleton(Box::new(pair));
        let e = GhostExpr::Diff(Box::new(single.clone()), Box::new(single));
        assert_eq!(
            eval_ghost_expr(&e, &GroundEnv::new()),
            Ok(GhostValue::FinSet(BTreeSet::new()))
        );
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let e = GhostExpr::GhostVar("nope".into());
        assert!(matches!(
            eval_ghost_expr(&e, &GroundEnv::new()),
            Err(EvalError::Unbound { .. })
        ));
    }

    #[test]
    fn add_on_non_integers_is_an_error() {
        let e = GhostExpr::Add(Box::new(GhostExpr::Unit), Box::new(GhostExpr::int(1)));
        assert_eq!(
            eval_ghost_expr(&e, &GroundEnv::new()),
            Err(EvalError::AddNonInt)
        );
    }
}
