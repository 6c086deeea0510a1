//! Brute-force semantic checkers at desk scale: strong consistency,
//! heap/logical-heap consistency, bounded self-consistency, the exhaustive
//! split-enumeration satisfaction oracle, and the verifier-vs-explorer
//! soundness crosscheck.
//!
//! The definitions quantify existentially over unbounded structures, so
//! every "no" here is a `NoWithinUniverse`, never a semantic refutation.

use crate::explore::{explore, ExploreReport, ExploreVerdict};
use crate::heap::{eval_ghost_expr, Chunk, Fraction, GhostValue, GroundEnv, LemVal, LogicalHeap};
use crate::interp::{Configuration, PhysHeap};
use crate::syntax::ast::{Assertion, AssertionKind, Decls, GhostExpr, Program};
use crate::syntax::erase;
use crate::verify::{verify_program, Engine, SymEnv, SymTerm, VerifyConfig, VerifyReport};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Bounds for the existential searches.
#[derive(Clone, Debug)]
pub struct WitnessUniverse {
    pub addresses: std::ops::RangeInclusive<i64>,
    pub values: std::ops::RangeInclusive<i64>,
    pub denominators: Vec<i64>,
    pub max_bag: u32,
    pub max_stock: u32,
}

impl Default for WitnessUniverse {
    fn default() -> Self {
        WitnessUniverse {
            addresses: 0..=4,
            values: -1..=4,
            denominators: vec![1, 2],
            max_bag: 2,
            max_stock: 2,
        }
    }
}

/// A ghost heap: a finite partial map from integers to ghost values.
pub type GhostHeap = BTreeMap<i64, GhostValue>;

/// A found witness for `h ~ H` or `H ok_k`.
#[derive(Clone, Debug, Default)]
pub struct ConsistencyWitness {
    pub ghost_heap: GhostHeap,
    /// Atomic spaces bag: ((name, invariant), owned heap) with the owned
    /// heap satisfying the invariant.
    pub bag: Vec<((GhostValue, GhostValue), LogicalHeap)>,
    /// Stock of lemma type chunks, each semantically well typed.
    pub stock: Vec<(GhostValue, String, Vec<GhostValue>)>,
    /// The chosen heap (self-consistency only).
    pub heap2: Option<PhysHeap>,
    /// The chosen set of opened spaces (self-consistency only).
    pub opened: Option<BTreeSet<(GhostValue, GhostValue)>>,
}

#[derive(Clone, Debug)]
pub enum ConsistencyResult {
    Yes(Box<ConsistencyWitness>),
    NoWithinUniverse,
}

impl ConsistencyResult {
    pub fn is_yes(&self) -> bool {
        matches!(self, ConsistencyResult::Yes(_))
    }
}

/// Checks that every atomic-spaces-bag element's owned heap satisfies its
/// invariant. Bags are only built through this check.
pub fn valid_bag_element(
    decls: &Decls,
    inv: &GhostValue,
    owned: &LogicalHeap,
    u: &WitnessUniverse,
) -> bool {
    minimal_invariant_heaps(decls, inv, u)
        .iter()
        .any(|m| owned.geq(m))
}

// ===== strong consistency =====

/// Semantic lemma typing for a ground lemma value, via the verifier's
/// lemma body check.
pub fn check_ground_lemma_value(
    decls: &Decls,
    lem: &LemVal,
    lem_type: &str,
    type_args: &[GhostValue],
) -> bool {
    let cfg = VerifyConfig {
        trace_states: false,
        ..Default::default()
    };
    let mut eng = Engine::new(decls, cfg);
    let st = eng.fresh_state();
    let targs: Vec<SymTerm> = type_args.iter().cloned().map(SymTerm::Lit).collect();
    eng.check_lemma_value(
        &st,
        lem_type,
        &targs,
        &lem.params,
        &lem.body,
        &SymEnv::new(),
        Default::default(),
    )
    .is_ok()
}

/// Strong consistency: every lemma-type chunk with positive coefficient
/// holds a lemma value that semantically has its type.
pub fn sok(h: &LogicalHeap, decls: &Decls) -> bool {
    for (c, f) in h.iter() {
        if f.is_zero() {
            continue;
        }
        if let Chunk::LemType(v, t, args) = c {
            match v {
                GhostValue::LemVal(l) => {
                    if !check_ground_lemma_value(decls, l, t, args) {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}

// ===== heap value encoding =====

/// Encodes a physical heap as a finite set of (address, value) pairs.
pub fn encode_phys_heap(h: &PhysHeap) -> GhostValue {
    GhostValue::FinSet(
        h.iter()
            .map(|(a, v)| GhostValue::pair(GhostValue::Int(*a), GhostValue::Int(*v)))
            .collect(),
    )
}

fn decode_phys_heap(v: &GhostValue) -> Option<PhysHeap> {
    let GhostValue::FinSet(cells) = v else {
        return None;
    };
    let mut h = PhysHeap::new();
    for c in cells {
        let GhostValue::Pair(a, val) = c else {
            return None;
        };
        let (GhostValue::Int(a), GhostValue::Int(val)) = (&**a, &**val) else {
            return None;
        };
        if h.contains(*a) {
            return None;
        }
        h.set(*a, *val);
    }
    Some(h)
}

fn decode_pair_set(v: &GhostValue) -> Option<Vec<(GhostValue, GhostValue)>> {
    let GhostValue::FinSet(elems) = v else {
        return None;
    };
    elems
        .iter()
        .map(|e| match e {
            GhostValue::Pair(a, b) => Some(((**a).clone(), (**b).clone())),
            _ => None,
        })
        .collect()
}

fn phys_heap_chunks(h: &PhysHeap) -> LogicalHeap {
    h.iter()
        .map(|(a, v)| (Chunk::points_to(*a, *v), Fraction::one()))
        .collect()
}

// ===== the covering search =====

/// Splits `need` against `avail`: returns the uncovered deficit and the
/// unconsumed leftover supply.
fn split_need(need: &LogicalHeap, avail: &LogicalHeap) -> (LogicalHeap, LogicalHeap) {
    let mut deficit = LogicalHeap::new();
    let mut leftover = avail.clone();
    for (c, f) in need.iter() {
        let have = leftover.coeff(c);
        if have >= *f {
            leftover = leftover
                .sub(&LogicalHeap::singleton(c.clone(), *f))
                .expect("have >= f");
        } else {
            if !have.is_zero() {
                leftover = leftover
                    .sub(&LogicalHeap::singleton(c.clone(), have))
                    .expect("have available");
            }
            deficit.insert(c.clone(), f.sub(have).expect("f > have"));
        }
    }
    (deficit, leftover)
}

fn scale(h: &LogicalHeap, m: u32) -> LogicalHeap {
    let mut out = LogicalHeap::new();
    for _ in 0..m {
        out = out.add(h);
    }
    out
}

/// All minimal heaps satisfying `inv()` with existential witnesses drawn
/// from the universe. The assertion grammar has no disjunction, so every
/// satisfying heap dominates one of these.
fn minimal_invariant_heaps(
    decls: &Decls,
    inv: &GhostValue,
    u: &WitnessUniverse,
) -> Vec<LogicalHeap> {
    let GhostValue::PredVal(p, args) = inv else {
        return Vec::new();
    };
    let Some((params, body)) = decls.pred_ctor(p) else {
        return Vec::new();
    };
    if params.len() != args.len() {
        return Vec::new();
    }
    let env = GroundEnv::with_ghost(params.iter().cloned().zip(args.iter().cloned()));
    let mut witness_values: Vec<GhostValue> = u.values.clone().map(GhostValue::Int).collect();
    witness_values.push(GhostValue::Unit);
    witness_values.push(GhostValue::FinSet(BTreeSet::new()));
    minimal_heaps(body, &env, decls, &witness_values, 16)
}

fn minimal_heaps(
    a: &Assertion,
    env: &GroundEnv,
    decls: &Decls,
    witnesses: &[GhostValue],
    depth: usize,
) -> Vec<LogicalHeap> {
    const CAP: usize = 256;
    match &a.kind {
        AssertionKind::PointsTo(pi, l, r) => {
            match (eval_ghost_expr(l, env), eval_ghost_expr(r, env)) {
                (Ok(a1), Ok(a2)) => vec![LogicalHeap::singleton(Chunk::PointsTo(a1, a2), *pi)],
                _ => Vec::new(),
            }
        }
        AssertionKind::GhostPointsTo(pi, l, r) => {
            match (eval_ghost_expr(l, env), eval_ghost_expr(r, env)) {
                (Ok(a1), Ok(a2)) => {
                    vec![LogicalHeap::singleton(Chunk::GhostPointsTo(a1, a2), *pi)]
                }
                _ => Vec::new(),
            }
        }
        AssertionKind::AtomicSpace(pi, n, i) => {
            match (eval_ghost_expr(n, env), eval_ghost_expr(i, env)) {
                (Ok(a1), Ok(a2)) => {
                    vec![LogicalHeap::singleton(Chunk::AtomicSpace(a1, a2), *pi)]
                }
                _ => Vec::new(),
            }
        }
        AssertionKind::LemType(e, t, args) => {
            let Ok(v) = eval_ghost_expr(e, env) else {
                return Vec::new();
            };
            let Ok(args) = args
                .iter()
                .map(|x| eval_ghost_expr(x, env))
                .collect::<Result<Vec<_>, _>>()
            else {
                return Vec::new();
            };
            vec![LogicalHeap::singleton(
                Chunk::LemType(v, t.clone(), args),
                Fraction::one(),
            )]
        }
        AssertionKind::AtomicSpaces(s) => match eval_ghost_expr(s, env) {
            Ok(v) => vec![LogicalHeap::singleton(
                Chunk::AtomicSpaces(v),
                Fraction::one(),
            )],
            _ => Vec::new(),
        },
        AssertionKind::HeapChunk(e) => match eval_ghost_expr(e, env) {
            Ok(v) => vec![LogicalHeap::singleton(Chunk::Heap(v), Fraction::one())],
            _ => Vec::new(),
        },
        AssertionKind::Emp => vec![LogicalHeap::new()],
        AssertionKind::PureEq(l, r) => match (eval_ghost_expr(l, env), eval_ghost_expr(r, env)) {
            (Ok(a1), Ok(a2)) if a1 == a2 => vec![LogicalHeap::new()],
            _ => Vec::new(),
        },
        AssertionKind::PredApp(e) => {
            let Ok(GhostValue::PredVal(p, args)) = eval_ghost_expr(e, env) else {
                return Vec::new();
            };
            let Some((params, body)) = decls.pred_ctor(&p) else {
                return Vec::new();
            };
            if params.len() != args.len() || depth == 0 {
                return Vec::new();
            }
            let inner = GroundEnv::with_ghost(params.iter().cloned().zip(args));
            minimal_heaps(body, &inner, decls, witnesses, depth - 1)
        }
        AssertionKind::Exists(g, body) => {
            let mut out = Vec::new();
            for w in witnesses {
                let mut inner = env.clone();
                inner.ghost.insert(g.clone(), w.clone());
                out.extend(minimal_heaps(body, &inner, decls, witnesses, depth));
                if out.len() > CAP {
                    break;
                }
            }
            out
        }
        AssertionKind::SepConj(l, r) => {
            let ls = minimal_heaps(l, env, decls, witnesses, depth);
            let rs = minimal_heaps(r, env, decls, witnesses, depth);
            let mut out = Vec::new();
            for a in &ls {
                for b in &rs {
                    out.push(a.add(b));
                    if out.len() > CAP {
                        return out;
                    }
                }
            }
            out
        }
    }
}

/// Recursive deficit-covering search. The witness is extended on success.
fn cover(
    deficit: &LogicalHeap,
    leftover: &LogicalHeap,
    bag_left: u32,
    stock_left: u32,
    decls: &Decls,
    u: &WitnessUniverse,
    w: &mut ConsistencyWitness,
) -> bool {
    let Some((chunk, coeff)) = deficit.iter().next().map(|(c, f)| (c.clone(), *f)) else {
        return true;
    };
    let rest = deficit
        .sub(&LogicalHeap::singleton(chunk.clone(), coeff))
        .expect("entry present");
    match &chunk {
        Chunk::GhostPointsTo(addr, val) => {
            let GhostValue::Int(a) = addr else {
                return false;
            };
            if coeff > Fraction::one() {
                return false;
            }
            match w.ghost_heap.get(a) {
                Some(existing) if existing != val => return false,
                Some(_) => return false, // the single unit was already spent
                None => {}
            }
            w.ghost_heap.insert(*a, val.clone());
            if cover(&rest, leftover, bag_left, stock_left, decls, u, w) {
                true
            } else {
                w.ghost_heap.remove(a);
                false
            }
        }
        Chunk::LemType(v, t, args) => {
            let m = coeff.ceil_to_u32();
            if m > stock_left {
                return false;
            }
            let GhostValue::LemVal(l) = v else {
                return false;
            };
            if !check_ground_lemma_value(decls, l, t, args) {
                return false;
            }
            let mark = w.stock.len();
            for _ in 0..m {
                w.stock.push((v.clone(), t.clone(), args.clone()));
            }
            if cover(&rest, leftover, bag_left, stock_left - m, decls, u, w) {
                true
            } else {
                w.stock.truncate(mark);
                false
            }
        }
        Chunk::AtomicSpace(name, inv) => {
            let m = coeff.ceil_to_u32();
            if m > bag_left {
                return false;
            }
            for owned in minimal_invariant_heaps(decls, inv, u) {
                // each of the m bag elements owns a bundle satisfying the
                // invariant; that bundle is demanded in turn
                let (extra_deficit, leftover2) = split_need(&scale(&owned, m), leftover);
                let new_deficit = rest.add(&extra_deficit);
                let mark = w.bag.len();
                for _ in 0..m {
                    w.bag.push(((name.clone(), inv.clone()), owned.clone()));
                }
                if cover(
                    &new_deficit,
                    &leftover2,
                    bag_left - m,
                    stock_left,
                    decls,
                    u,
                    w,
                ) {
                    return true;
                }
                w.bag.truncate(mark);
            }
            false
        }
        // these forms have no chooseable supply
        Chunk::PointsTo(_, _) | Chunk::AtomicSpaces(_) | Chunk::Heap(_) => false,
    }
}

/// `h ~ H`: searches for a ghost heap, an atomic spaces bag, and a
/// consistent stock of lemma type chunks such that
/// `h + ghost-heap + chunks(bag) + stock >= heap(bag) + H`.
pub fn consistent(
    h: &PhysHeap,
    big_h: &LogicalHeap,
    decls: &Decls,
    u: &WitnessUniverse,
) -> ConsistencyResult {
    let avail = phys_heap_chunks(h);
    let (deficit, leftover) = split_need(big_h, &avail);
    let mut w = ConsistencyWitness::default();
    if cover(
        &deficit,
        &leftover,
        u.max_bag,
        u.max_stock,
        decls,
        u,
        &mut w,
    ) {
        ConsistencyResult::Yes(Box::new(w))
    } else {
        ConsistencyResult::NoWithinUniverse
    }
}

/// `H ok_k`: self-consistency with depth bound `k`. The chosen heap and
/// opened-set are pinned by the demanded `heap(..)` and `atomic_spaces(..)`
/// chunks when present.
pub fn ok_k(big_h: &LogicalHeap, k: u32, decls: &Decls, u: &WitnessUniverse) -> ConsistencyResult {
    // the single heap chunk supply pins h2
    let mut heap_demands: Vec<(&GhostValue, Fraction)> = Vec::new();
    let mut spaces_demands: Vec<(&GhostValue, Fraction)> = Vec::new();
    for (c, f) in big_h.iter() {
        match c {
            Chunk::Heap(v) => heap_demands.push((v, *f)),
            Chunk::AtomicSpaces(v) => spaces_demands.push((v, *f)),
            _ => {}
        }
    }
    if heap_demands.len() > 1 || spaces_demands.len() > 1 {
        return ConsistencyResult::NoWithinUniverse;
    }
    let h2 = match heap_demands.first() {
        Some((v, f)) => {
            if *f > Fraction::one() {
                return ConsistencyResult::NoWithinUniverse;
            }
            match decode_phys_heap(v) {
                Some(h) => h,
                None => return ConsistencyResult::NoWithinUniverse,
            }
        }
        None => {
            // free choice: cover the points-to demands directly
            let mut h = PhysHeap::new();
            for (c, f) in big_h.iter() {
                if let Chunk::PointsTo(a, v) = c {
                    let (GhostValue::Int(a), GhostValue::Int(v)) = (a, v) else {
                        return ConsistencyResult::NoWithinUniverse;
                    };
                    if *f > Fraction::one() || (h.contains(*a) && h.get(*a) != Some(*v)) {
                        return ConsistencyResult::NoWithinUniverse;
                    }
                    h.set(*a, *v);
                }
            }
            h
        }
    };
    let opened: Vec<(GhostValue, GhostValue)> = match spaces_demands.first() {
        Some((v, f)) => {
            if *f > Fraction::one() {
                return ConsistencyResult::NoWithinUniverse;
            }
            match decode_pair_set(v) {
                Some(s) => s,
                None => return ConsistencyResult::NoWithinUniverse,
            }
        }
        None => Vec::new(),
    };
    let mut avail = phys_heap_chunks(&h2);
    avail.insert(Chunk::Heap(encode_phys_heap(&h2)), Fraction::one());
    avail.insert(
        Chunk::AtomicSpaces(GhostValue::FinSet(
            opened
                .iter()
                .map(|(a, b)| GhostValue::pair(a.clone(), b.clone()))
                .collect(),
        )),
        Fraction::one(),
    );
    for (n, i) in &opened {
        avail.insert(Chunk::AtomicSpace(n.clone(), i.clone()), Fraction::one());
    }
    let (deficit, leftover) = split_need(big_h, &avail);
    let mut w = ConsistencyWitness {
        heap2: Some(h2),
        opened: Some(opened.into_iter().collect()),
        ..Default::default()
    };
    let stock_budget = k.min(u.max_stock);
    if cover(
        &deficit,
        &leftover,
        u.max_bag,
        stock_budget,
        decls,
        u,
        &mut w,
    ) {
        ConsistencyResult::Yes(Box::new(w))
    } else {
        ConsistencyResult::NoWithinUniverse
    }
}

// ===== exhaustive split-enumeration satisfaction oracle =====

/// Reference satisfaction checker: enumerates every coefficient split on a
/// grid fine enough for the heap and assertion at hand. Independent of the
/// restricted split search used by `sat::satisfies`.
pub fn exhaustive_satisfies(
    h: &LogicalHeap,
    a: &Assertion,
    env: &GroundEnv,
    decls: &Decls,
    witnesses: &[GhostValue],
    depth: usize,
) -> bool {
    let mut denoms: BTreeSet<i64> = h.iter().map(|(_, f)| f.denom()).collect();
    collect_denoms(a, decls, depth, &mut denoms);
    let l = denoms.into_iter().fold(1i64, lcm).min(64);
    ex_sat(h, a, env, decls, witnesses, depth, l)
}

fn lcm(a: i64, b: i64) -> i64 {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn collect_denoms(a: &Assertion, decls: &Decls, depth: usize, out: &mut BTreeSet<i64>) {
    match &a.kind {
        AssertionKind::PointsTo(pi, _, _)
        | AssertionKind::GhostPointsTo(pi, _, _)
        | AssertionKind::AtomicSpace(pi, _, _) => {
            out.insert(pi.denom());
        }
        AssertionKind::SepConj(l, r) => {
            collect_denoms(l, decls, depth, out);
            collect_denoms(r, decls, depth, out);
        }
        AssertionKind::Exists(_, b) => collect_denoms(b, decls, depth, out),
        AssertionKind::PredApp(e) if depth > 0 => {
            let name = match e {
                GhostExpr::PredCtorApp(p, _) => Some(p.as_str()),
                GhostExpr::Value(GhostValue::PredVal(p, _)) => Some(p.as_str()),
                _ => None,
            };
            if let Some((_, body)) = name.and_then(|p| decls.pred_ctor(p)) {
                collect_denoms(body, decls, depth - 1, out);
            }
        }
        _ => {}
    }
}

fn ex_sat(
    h: &LogicalHeap,
    a: &Assertion,
    env: &GroundEnv,
    decls: &Decls,
    witnesses: &[GhostValue],
    depth: usize,
    grid: i64,
) -> bool {
    match &a.kind {
        AssertionKind::PointsTo(pi, l, r) => {
            match (eval_ghost_expr(l, env), eval_ghost_expr(r, env)) {
                (Ok(a1), Ok(a2)) => h.coeff(&Chunk::PointsTo(a1, a2)) >= *pi,
                _ => false,
            }
        }
        AssertionKind::GhostPointsTo(pi, l, r) => {
            match (eval_ghost_expr(l, env), eval_ghost_expr(r, env)) {
                (Ok(a1), Ok(a2)) => h.coeff(&Chunk::GhostPointsTo(a1, a2)) >= *pi,
                _ => false,
            }
        }
        AssertionKind::AtomicSpace(pi, n, i) => {
            match (eval_ghost_expr(n, env), eval_ghost_expr(i, env)) {
                (Ok(a1), Ok(a2)) => h.coeff(&Chunk::AtomicSpace(a1, a2)) >= *pi,
                _ => false,
            }
        }
        AssertionKind::LemType(e, t, args) => {
            let Ok(v) = eval_ghost_expr(e, env) else {
                return false;
            };
            let Ok(args) = args
                .iter()
                .map(|x| eval_ghost_expr(x, env))
                .collect::<Result<Vec<_>, _>>()
            else {
                return false;
            };
            h.coeff(&Chunk::LemType(v, t.clone(), args)) >= Fraction::one()
        }
        AssertionKind::AtomicSpaces(s) => match eval_ghost_expr(s, env) {
            Ok(v) => h.coeff(&Chunk::AtomicSpaces(v)) >= Fraction::one(),
            _ => false,
        },
        AssertionKind::HeapChunk(e) => match eval_ghost_expr(e, env) {
            Ok(v) => h.coeff(&Chunk::Heap(v)) >= Fraction::one(),
            _ => false,
        },
        AssertionKind::Emp => true,
        AssertionKind::PureEq(l, r) => {
            matches!((eval_ghost_expr(l, env), eval_ghost_expr(r, env)),
                (Ok(a1), Ok(a2)) if a1 == a2)
        }
        AssertionKind::PredApp(e) => {
            let Ok(GhostValue::PredVal(p, args)) = eval_ghost_expr(e, env) else {
                return false;
            };
            let Some((params, body)) = decls.pred_ctor(&p) else {
                return false;
            };
            if params.len() != args.len() || depth == 0 {
                return false;
            }
            let inner = GroundEnv::with_ghost(params.iter().cloned().zip(args));
            let (body, inner) = (body.clone(), inner);
            ex_sat(h, &body, &inner, decls, witnesses, depth - 1, grid)
        }
        AssertionKind::Exists(g, body) => witnesses.iter().any(|w| {
            let mut inner = env.clone();
            inner.ghost.insert(g.clone(), w.clone());
            ex_sat(h, body, &inner, decls, witnesses, depth, grid)
        }),
        AssertionKind::SepConj(l, r) => {
            // enumerate every grid split of every chunk
            let chunks: Vec<(Chunk, Fraction)> = h.iter().map(|(c, f)| (c.clone(), *f)).collect();
            let options: Vec<Vec<Fraction>> = chunks
                .iter()
                .map(|(_, f)| {
                    let steps = (f.numer() * grid / f.denom()) as usize;
                    (0..=steps)
                        .map(|k| Fraction::new(k as i64, grid).expect("grid fraction"))
                        .collect()
                })
                .collect();
            let mut idx = vec![0usize; chunks.len()];
            loop {
                let mut h1 = LogicalHeap::new();
                for (i, (c, _)) in chunks.iter().enumerate() {
                    h1.insert(c.clone(), options[i][idx[i]]);
                }
                if let Ok(h2) = h.sub(&h1) {
                    if ex_sat(&h1, l, env, decls, witnesses, depth, grid)
                        && ex_sat(&h2, r, env, decls, witnesses, depth, grid)
                    {
                        return true;
                    }
                }
                let mut k = 0;
                loop {
                    if k == chunks.len() {
                        return false;
                    }
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
    }
}

// ===== soundness crosscheck =====

/// Outcome quadrant of running the verifier and the explorer on the same
/// program. `(Verified, NotOkay)` is fatal: it would witness unsoundness.
#[derive(Clone, Debug)]
pub struct CrosscheckReport {
    pub verify: VerifyReport,
    pub explore: ExploreReport,
    pub fatal: bool,
}

impl CrosscheckReport {
    pub fn quadrant(&self) -> (bool, bool) {
        (self.verify.is_verified(), self.explore.is_safe())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "verify": self.verify.to_json(),
            "explore": self.explore.to_json(),
            "fatal": self.fatal,
        })
    }
}

impl fmt::Display for CrosscheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (v, _) = self.quadrant();
        writeln!(
            f,
            "verifier: {}, explorer: {}",
            if v { "Verified" } else { "Failed" },
            match &self.explore.verdict {
                ExploreVerdict::SafeUpToDepth => "SafeUpToDepth",
                ExploreVerdict::NotOkay { .. } => "NotOkay",
                ExploreVerdict::ExhaustedBudget => "ExhaustedBudget",
            }
        )?;
        if self.fatal {
            writeln!(
                f,
                "FATAL: verified program reaches a not-okay configuration"
            )?;
        }
        Ok(())
    }
}

/// Runs the verifier on the annotated program and the explorer on its
/// erasure, and flags the fatal (Verified, NotOkay) combination.
pub fn soundness_crosscheck(p: &Program, depth: usize) -> CrosscheckReport {
    let verify = verify_program(p);
    let erased = erase(&p.main);
    let explore = explore(&Configuration::initial(erased), depth);
    let fatal = verify.is_verified() && matches!(explore.verdict, ExploreVerdict::NotOkay { .. });
    CrosscheckReport {
        verify,
        explore,
        fatal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::prelude_decls;

    #[test]
    fn empty_heap_consistent_with_empty_logical_heap() {
        let decls = prelude_decls();
        let u = WitnessUniverse::default();
        let r = consistent(&PhysHeap::new(), &LogicalHeap::new(), &decls, &u);
        assert!(r.is_yes());
        if let ConsistencyResult::Yes(w) = r {
            assert!(w.ghost_heap.is_empty());
            assert!(w.bag.is_empty());
            assert!(w.stock.is_empty());
        }
    }

    #[test]
    fn heap_covers_its_own_chunks() {
        let decls = prelude_decls();
        let u = WitnessUniverse::default();
        let h = PhysHeap::from_iter([(0, 2)]);
        let big_h = LogicalHeap::singleton(Chunk::points_to(0, 2), Fraction::one());
        assert!(consistent(&h, &big_h, &decls, &u).is_yes());
        // nothing supplies the chunk from an empty heap
        assert!(!consistent(&PhysHeap::new(), &big_h, &decls, &u).is_yes());
    }

    #[test]
    fn ghost_cells_are_found() {
        let decls = prelude_decls();
        let u = WitnessUniverse::default();
        let big_h = LogicalHeap::singleton(
            Chunk::ghost_points_to(3, GhostValue::Int(1)),
            Fraction::half(),
        );
        let r = consistent(&PhysHeap::new(), &big_h, &decls, &u);
        assert!(r.is_yes());
        if let ConsistencyResult::Yes(w) = r {
            assert_eq!(w.ghost_heap.get(&3), Some(&GhostValue::Int(1)));
        }
    }

    #[test]
    fn ok_k_of_heap_and_empty_spaces_chunks() {
        let decls = prelude_decls();
        let u = WitnessUniverse::default();
        let mut h = LogicalHeap::new();
        h.insert(
            Chunk::Heap(encode_phys_heap(&PhysHeap::new())),
            Fraction::one(),
        );
        h.insert(
            Chunk::AtomicSpaces(GhostValue::FinSet(Default::default())),
            Fraction::one(),
        );
        let r = ok_k(&h, 0, &decls, &u);
        assert!(r.is_yes());
        if let ConsistencyResult::Yes(w) = r {
            assert_eq!(w.heap2, Some(PhysHeap::new()));
            assert_eq!(w.opened, Some(BTreeSet::new()));
        }
    }

    #[test]
    fn ok_k_rejects_unsupplied_points_to() {
        let decls = prelude_decls();
        let u = WitnessUniverse::default();
        let mut h = LogicalHeap::new();
        // pinned empty heap cannot supply the points-to chunk
        h.insert(
            Chunk::Heap(encode_phys_heap(&PhysHeap::new())),
            Fraction::one(),
        );
        h.insert(Chunk::points_to(0, 2), Fraction::one());
        assert!(!ok_k(&h, 2, &decls, &u).is_yes());
    }
}
