//! Ground satisfaction checking: does a logical heap satisfy an assertion?
//!
//! This realizes the inductive satisfaction judgment as an executable
//! procedure on small heaps. Predicate applications unfold their declared
//! bodies under a depth budget; existentials search a finite witness
//! universe; separating conjunctions search coefficient splits restricted
//! to sums of the leaf coefficients each conjunct can require.

use crate::heap::{eval_ghost_expr, Chunk, Fraction, GhostValue, GroundEnv, LogicalHeap};
use crate::syntax::ast::{Assertion, AssertionKind, Decls, GhostExpr};
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct SatConfig {
    /// Predicate unfolding budget; at least 1.
    pub unfold_depth_limit: usize,
    /// Extra existential witness candidates. Values occurring in the heap
    /// and the assertion, the integers -1..=3, the unit value and the
    /// empty set are always candidates.
    pub witness_universe: Vec<GhostValue>,
}

impl Default for SatConfig {
    fn default() -> Self {
        SatConfig {
            unfold_depth_limit: 64,
            witness_universe: Vec::new(),
        }
    }
}

/// Outcome of a satisfaction check.
///
/// `NotSatisfied` is a definite "no" within the split-search space;
/// the two limit outcomes are reported distinctly so that a bounded
/// search is never mistaken for a semantic refutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Satisfied,
    NotSatisfied,
    DepthExceeded,
    WitnessUniverseExhausted,
}

impl SatResult {
    pub fn is_satisfied(self) -> bool {
        self == SatResult::Satisfied
    }

    /// Merge rule for search alternatives: any success wins; otherwise the
    /// strongest caveat survives.
    fn join(self, other: SatResult) -> SatResult {
        use SatResult::*;
        match (self, other) {
            (Satisfied, _) | (_, Satisfied) => Satisfied,
            (DepthExceeded, _) | (_, DepthExceeded) => DepthExceeded,
            (WitnessUniverseExhausted, _) | (_, WitnessUniverseExhausted) => {
                WitnessUniverseExhausted
            }
            _ => NotSatisfied,
        }
    }
}

/// Checks `H |= a` under `env`.
pub fn satisfies(
    h: &LogicalHeap,
    a: &Assertion,
    env: &GroundEnv,
    decls: &Decls,
    cfg: &SatConfig,
) -> SatResult {
    let universe = witness_universe(h, a, env, cfg);
    sat_rec(h, a, env, decls, cfg.unfold_depth_limit.max(1), &universe)
}

/// Candidate witnesses: all values in the heap's chunks (recursively),
/// values mentioned in the assertion, small integers, unit, empty set,
/// plus the configured extras.
pub fn witness_universe(
    h: &LogicalHeap,
    a: &Assertion,
    env: &GroundEnv,
    cfg: &SatConfig,
) -> Vec<GhostValue> {
    let mut set: BTreeSet<GhostValue> = BTreeSet::new();
    for (c, _) in h.iter() {
        match c {
            Chunk::PointsTo(a1, a2) | Chunk::GhostPointsTo(a1, a2) | Chunk::AtomicSpace(a1, a2) => {
                collect_subvalues(a1, &mut set);
                collect_subvalues(a2, &mut set);
            }
            Chunk::LemType(v, _, args) => {
                collect_subvalues(v, &mut set);
                for x in args {
                    collect_subvalues(x, &mut set);
                }
            }
            Chunk::AtomicSpaces(s) | Chunk::Heap(s) => collect_subvalues(s, &mut set),
        }
    }
    collect_assertion_values(a, env, &mut set);
    for v in env.ghost.values() {
        collect_subvalues(v, &mut set);
    }
    for z in -1..=3 {
        set.insert(GhostValue::Int(z));
    }
    set.insert(GhostValue::Unit);
    set.insert(GhostValue::FinSet(BTreeSet::new()));
    set.extend(cfg.witness_universe.iter().cloned());
    set.into_iter().collect()
}

fn collect_subvalues(v: &GhostValue, out: &mut BTreeSet<GhostValue>) {
    out.insert(v.clone());
    match v {
        GhostValue::Pair(a, b) => {
            collect_subvalues(a, out);
            collect_subvalues(b, out);
        }
        GhostValue::FinSet(s) => {
            for x in s {
                collect_subvalues(x, out);
            }
        }
        GhostValue::PredVal(_, args) => {
            for x in args {
                collect_subvalues(x, out);
            }
        }
        _ => {}
    }
}

fn collect_assertion_values(a: &Assertion, env: &GroundEnv, out: &mut BTreeSet<GhostValue>) {
    fn expr(e: &GhostExpr, env: &GroundEnv, out: &mut BTreeSet<GhostValue>) {
        // closed subexpressions contribute their values
        if let Ok(v) = eval_ghost_expr(e, env) {
            collect_subvalues(&v, out);
        }
        match e {
            GhostExpr::Add(x, y)
            | GhostExpr::Pair(x, y)
            | GhostExpr::Union(x, y)
            | GhostExpr::Diff(x, y) => {
                expr(x, env, out);
                expr(y, env, out);
            }
            GhostExpr::Singleton(x) => expr(x, env, out),
            GhostExpr::PredCtorApp(_, args) => {
                for x in args {
                    expr(x, env, out);
                }
            }
            _ => {}
        }
    }
    match &a.kind {
        AssertionKind::PointsTo(_, l, r)
        | AssertionKind::GhostPointsTo(_, l, r)
        | AssertionKind::AtomicSpace(_, l, r)
        | AssertionKind::PureEq(l, r) => {
            expr(l, env, out);
            expr(r, env, out);
        }
        AssertionKind::PredApp(e)
        | AssertionKind::AtomicSpaces(e)
        | AssertionKind::HeapChunk(e) => expr(e, env, out),
        AssertionKind::LemType(e, _, args) => {
            expr(e, env, out);
            for x in args {
                expr(x, env, out);
            }
        }
        AssertionKind::Exists(_, body) => collect_assertion_values(body, env, out),
        AssertionKind::SepConj(l, r) => {
            collect_assertion_values(l, env, out);
            collect_assertion_values(r, env, out);
        }
        AssertionKind::Emp => {}
    }
}

fn sat_rec(
    h: &LogicalHeap,
    a: &Assertion,
    env: &GroundEnv,
    decls: &Decls,
    depth: usize,
    universe: &[GhostValue],
) -> SatResult {
    match &a.kind {
        AssertionKind::PointsTo(pi, l, r) => leaf(h, pi, || {
            Some(Chunk::PointsTo(
                eval_ghost_expr(l, env).ok()?,
                eval_ghost_expr(r, env).ok()?,
            ))
        }),
        AssertionKind::GhostPointsTo(pi, l, r) => leaf(h, pi, || {
            Some(Chunk::GhostPointsTo(
                eval_ghost_expr(l, env).ok()?,
                eval_ghost_expr(r, env).ok()?,
            ))
        }),
        AssertionKind::AtomicSpace(pi, n, i) => leaf(h, pi, || {
            Some(Chunk::AtomicSpace(
                eval_ghost_expr(n, env).ok()?,
                eval_ghost_expr(i, env).ok()?,
            ))
        }),
        AssertionKind::LemType(e, t, args) => leaf(h, &Fraction::one(), || {
            let v = eval_ghost_expr(e, env).ok()?;
            let args = args
                .iter()
                .map(|x| eval_ghost_expr(x, env).ok())
                .collect::<Option<Vec<_>>>()?;
            Some(Chunk::LemType(v, t.clone(), args))
        }),
        AssertionKind::AtomicSpaces(s) => leaf(h, &Fraction::one(), || {
            Some(Chunk::AtomicSpaces(eval_ghost_expr(s, env).ok()?))
        }),
        AssertionKind::HeapChunk(e) => leaf(h, &Fraction::one(), || {
            Some(Chunk::Heap(eval_ghost_expr(e, env).ok()?))
        }),
        AssertionKind::Emp => SatResult::Satisfied,
        AssertionKind::PureEq(l, r) => match (eval_ghost_expr(l, env), eval_ghost_expr(r, env)) {
            (Ok(a), Ok(b)) if a == b => SatResult::Satisfied,
            _ => SatResult::NotSatisfied,
        },
        AssertionKind::PredApp(e) => {
            let v = match eval_ghost_expr(e, env) {
                Ok(v) => v,
                Err(_) => return SatResult::NotSatisfied,
            };
            let GhostValue::PredVal(p, args) = v else {
                return SatResult::NotSatisfied;
            };
            let Some((params, body)) = decls.pred_ctor(&p) else {
                return SatResult::NotSatisfied;
            };
            if params.len() != args.len() {
                return SatResult::NotSatisfied;
            }
            if depth == 0 {
                return SatResult::DepthExceeded;
            }
            // declaration bodies are closed under their parameters
            let inner = GroundEnv::with_ghost(params.iter().cloned().zip(args.iter().cloned()));
            sat_rec(h, body, &inner, decls, depth - 1, universe)
        }
        AssertionKind::Exists(g, body) => {
            let mut acc = SatResult::WitnessUniverseExhausted;
            for w in universe {
                let mut inner = env.clone();
                inner.ghost.insert(g.clone(), w.clone());
                let r = sat_rec(h, body, &inner, decls, depth, universe);
                if r == SatResult::Satisfied {
                    return SatResult::Satisfied;
                }
                acc = acc.join(r);
            }
            // joining with WitnessUniverseExhausted keeps the caveat unless
            // a branch hit the depth limit
            acc.join(SatResult::WitnessUniverseExhausted)
        }
        AssertionKind::SepConj(a1, a2) => {
            let mut coeffs = Vec::new();
            let complete = collect_leaf_coeffs(a1, decls, depth, &mut coeffs);
            let splits = split_candidates(h, &coeffs, complete);
            let mut acc = SatResult::NotSatisfied;
            for h1 in splits {
                let h2 = match h.sub(&h1) {
                    Ok(h2) => h2,
                    Err(_) => continue,
                };
                let r1 = sat_rec(&h1, a1, env, decls, depth, universe);
                if r1 == SatResult::Satisfied {
                    let r2 = sat_rec(&h2, a2, env, decls, depth, universe);
                    if r2 == SatResult::Satisfied {
                        return SatResult::Satisfied;
                    }
                    acc = acc.join(r2);
                } else {
                    acc = acc.join(match r1 {
                        SatResult::NotSatisfied => SatResult::NotSatisfied,
                        other => other,
                    });
                }
            }
            acc
        }
    }
}

fn leaf<F: FnOnce() -> Option<Chunk>>(h: &LogicalHeap, pi: &Fraction, chunk: F) -> SatResult {
    match chunk() {
        Some(c) if h.coeff(&c) >= *pi => SatResult::Satisfied,
        _ => SatResult::NotSatisfied,
    }
}

/// Collects the multiset of leaf coefficients an assertion can require,
/// unfolding predicate constructor applications where the constructor is
/// syntactically known. Returns false when some application could not be
/// resolved (the split search then falls back to the extremes).
fn collect_leaf_coeffs(
    a: &Assertion,
    decls: &Decls,
    depth: usize,
    out: &mut Vec<Fraction>,
) -> bool {
    match &a.kind {
        AssertionKind::PointsTo(pi, _, _)
        | AssertionKind::GhostPointsTo(pi, _, _)
        | AssertionKind::AtomicSpace(pi, _, _) => {
            out.push(*pi);
            true
        }
        AssertionKind::LemType(_, _, _)
        | AssertionKind::AtomicSpaces(_)
        | AssertionKind::HeapChunk(_) => {
            out.push(Fraction::one());
            true
        }
        AssertionKind::Emp | AssertionKind::PureEq(_, _) => true,
        AssertionKind::PredApp(e) => {
            if depth == 0 {
                return false;
            }
            let name = match e {
                GhostExpr::PredCtorApp(p, _) => Some(p.clone()),
                GhostExpr::Value(GhostValue::PredVal(p, _)) => Some(p.clone()),
                _ => None,
            };
            match name.and_then(|p| decls.pred_ctor(&p)) {
                Some((_, body)) => collect_leaf_coeffs(body, decls, depth - 1, out),
                None => false,
            }
        }
        AssertionKind::Exists(_, body) => collect_leaf_coeffs(body, decls, depth, out),
        AssertionKind::SepConj(l, r) => {
            let a = collect_leaf_coeffs(l, decls, depth, out);
            let b = collect_leaf_coeffs(r, decls, depth, out);
            a && b
        }
    }
}

/// Enumerates candidate left-hand heaps for a split of `h`.
///
/// Per chunk, the left side receives a coefficient that is a subset sum of
/// the left conjunct's possible leaf coefficients (clamped to what is
/// available), or nothing, or everything. The remainder goes right.
fn split_candidates(h: &LogicalHeap, coeffs: &[Fraction], complete: bool) -> Vec<LogicalHeap> {
    // reachable subset sums
    let mut sums: BTreeSet<Fraction> = BTreeSet::new();
    sums.insert(Fraction::zero());
    if complete {
        for c in coeffs {
            let mut next = sums.clone();
            for s in &sums {
                next.insert(s.add(*c));
            }
            if next.len() > 256 {
                break;
            }
            sums = next;
        }
    }
    let chunks: Vec<(&Chunk, &Fraction)> = h.iter().collect();
    let per_chunk: Vec<Vec<Fraction>> = chunks
        .iter()
        .map(|(_, f)| {
            let mut opts: BTreeSet<Fraction> = BTreeSet::new();
            opts.insert(Fraction::zero());
            opts.insert(**f);
            for s in &sums {
                if *s <= **f {
                    opts.insert(*s);
                }
            }
            opts.into_iter().collect()
        })
        .collect();
    // cartesian product, capped
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_chunk.len()];
    const CAP: usize = 1 << 16;
    loop {
        let mut h1 = LogicalHeap::new();
        for (i, (c, _)) in chunks.iter().enumerate() {
            let coeff = per_chunk[i][idx[i]];
            h1.insert((*c).clone(), coeff);
        }
        out.push(h1);
        if out.len() >= CAP {
            break;
        }
        // odometer
        let mut k = 0;
        loop {
            if k == per_chunk.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < per_chunk[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_assertion_str;
    use crate::syntax::prelude_decls;

    fn cfg() -> SatConfig {
        SatConfig::default()
    }

    #[test]
    fn leaf_lower_bound() {
        // {x |-> 0 @ 1} |= [1/2] x |-> 0
        let decls = prelude_decls();
        let h = LogicalHeap::singleton(Chunk::points_to(0, 0), Fraction::one());
        let a = parse_assertion_str("[1/2] x |-> 0", &decls, &["x"], &[]).unwrap();
        let mut env = GroundEnv::new();
        env.prog.insert("x".into(), 0);
        assert_eq!(
            satisfies(&h, &a, &env, &decls, &cfg()),
            SatResult::Satisfied
        );
    }

    #[test]
    fn empty_heap_fails_points_to() {
        let decls = prelude_decls();
        let h = LogicalHeap::new();
        let a = parse_assertion_str("x |-> 0", &decls, &["x"], &[]).unwrap();
        let mut env = GroundEnv::new();
        env.prog.insert("x".into(), 0);
        assert_eq!(
            satisfies(&h, &a, &env, &decls, &cfg()),
            SatResult::NotSatisfied
        );
    }

    #[test]
    fn extra_chunks_are_absorbed() {
        // {x |-> 0, y |-> 1} |= x |-> 0 (upward closure at the leaf)
        let decls = prelude_decls();
        let mut h = LogicalHeap::new();
        h.insert(Chunk::points_to(0, 0), Fraction::one());
        h.insert(Chunk::points_to(1, 1), Fraction::one());
        let a = parse_assertion_str("x |-> 0", &decls, &["x"], &[]).unwrap();
        let mut env = GroundEnv::new();
        env.prog.insert("x".into(), 0);
        assert_eq!(
            satisfies(&h, &a, &env, &decls, &cfg()),
            SatResult::Satisfied
        );
    }

    #[test]
    fn sep_conj_splits_fractions() {
        let decls = prelude_decls();
        let h = LogicalHeap::singleton(Chunk::points_to(0, 0), Fraction::one());
        let a = parse_assertion_str("[1/2] x |-> 0 * [1/2] x |-> 0", &decls, &["x"], &[]).unwrap();
        let mut env = GroundEnv::new();
        env.prog.insert("x".into(), 0);
        assert_eq!(
            satisfies(&h, &a, &env, &decls, &cfg()),
            SatResult::Satisfied
        );
    }

    #[test]
    fn pure_equality() {
        let decls = prelude_decls();
        let h = LogicalHeap::new();
        let a = parse_assertion_str("1 + 2 == 3", &decls, &[], &[]).unwrap();
        assert_eq!(
            satisfies(&h, &a, &GroundEnv::new(), &decls, &cfg()),
            SatResult::Satisfied
        );
        let b = parse_assertion_str("1 == 2", &decls, &[], &[]).unwrap();
        assert_eq!(
            satisfies(&h, &b, &GroundEnv::new(), &decls, &cfg()),
            SatResult::NotSatisfied
        );
    }

    #[test]
    fn existential_witness_from_heap() {
        let decls = prelude_decls();
        let h = LogicalHeap::singleton(
            Chunk::ghost_points_to(7, GhostValue::Int(42)),
            Fraction::one(),
        );
        let a = parse_assertion_str("exists w. g |->g w", &decls, &[], &["g"]).unwrap();
        let env = GroundEnv::with_ghost([("g".to_string(), GhostValue::Int(7))]);
        // 42 is outside the default integer range but occurs in the heap
        assert_eq!(
            satisfies(&h, &a, &env, &decls, &cfg()),
            SatResult::Satisfied
        );
    }
}
