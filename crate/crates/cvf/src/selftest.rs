//! Randomized property suites, runnable from the CLI (`selftest`) and
//! pinned by the acceptance tests. All randomness is seeded, so runs are
//! reproducible.

use crate::heap::{Chunk, Fraction, GhostValue, GroundEnv, LogicalHeap};
use crate::interp::PhysHeap;
use crate::oracle::{consistent, encode_phys_heap, exhaustive_satisfies, ok_k, WitnessUniverse};
use crate::sat::{satisfies, witness_universe, SatConfig, SatResult};
use crate::syntax::ast::{Assertion, Decls, GhostDecl};
use crate::syntax::{parse_assertion_str, parse_program};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fmt;

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "PASS {} ({} cases)", self.name, self.cases)
        } else {
            writeln!(
                f,
                "FAIL {} ({} cases, {} failures)",
                self.name,
                self.cases,
                self.failures.len()
            )?;
            for x in self.failures.iter().take(5) {
                writeln!(f, "  {x}")?;
            }
            Ok(())
        }
    }
}

fn random_value(rng: &mut ChaCha8Rng) -> GhostValue {
    match rng.gen_range(0..6) {
        0..=2 => GhostValue::Int(rng.gen_range(-1..=4)),
        3 => GhostValue::Unit,
        4 => GhostValue::FinSet(Default::default()),
        _ => GhostValue::pair(
            GhostValue::Int(rng.gen_range(0..=2)),
            GhostValue::Int(rng.gen_range(0..=2)),
        ),
    }
}

fn random_chunk(rng: &mut ChaCha8Rng) -> Chunk {
    match rng.gen_range(0..5) {
        0 => Chunk::points_to(rng.gen_range(0..=3), rng.gen_range(-1..=3)),
        1 => Chunk::ghost_points_to(rng.gen_range(0..=3), random_value(rng)),
        2 => Chunk::AtomicSpace(GhostValue::Unit, random_value(rng)),
        3 => Chunk::AtomicSpaces(GhostValue::FinSet(Default::default())),
        _ => Chunk::Heap(random_value(rng)),
    }
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Fraction {
    let denom = [1i64, 2, 4][rng.gen_range(0..3)];
    Fraction::new(rng.gen_range(1..=2 * denom), denom).expect("positive")
}

fn random_heap(rng: &mut ChaCha8Rng, max_chunks: usize) -> LogicalHeap {
    let n = rng.gen_range(0..=max_chunks);
    let mut h = LogicalHeap::new();
    for _ in 0..n {
        h.insert(random_chunk(rng), random_coeff(rng));
    }
    h
}

/// Heap algebra laws: commutativity, associativity and identity of
/// addition, the add/sub round trip, and the partial-order laws of `geq`.
pub fn heap_algebra_suite(trials: usize, seed: u64) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..trials {
        let a = random_heap(&mut rng, 4);
        let b = random_heap(&mut rng, 4);
        let c = random_heap(&mut rng, 4);
        if a.add(&b) != b.add(&a) {
            failures.push(format!("case {i}: add not commutative"));
        }
        if a.add(&b).add(&c) != a.add(&b.add(&c)) {
            failures.push(format!("case {i}: add not associative"));
        }
        if a.add(&LogicalHeap::new()) != a {
            failures.push(format!("case {i}: empty not an identity"));
        }
        match a.add(&b).sub(&b) {
            Ok(back) => {
                if back != a {
                    failures.push(format!("case {i}: sub(add(a,b),b) != a"));
                }
            }
            Err(e) => failures.push(format!("case {i}: sub(add(a,b),b) failed: {e}")),
        }
        // partial order laws
        if !a.geq(&a) {
            failures.push(format!("case {i}: geq not reflexive"));
        }
        if a.geq(&b) && b.geq(&a) && a != b {
            failures.push(format!("case {i}: geq not antisymmetric"));
        }
        if a.geq(&b) && b.geq(&c) && !a.geq(&c) {
            failures.push(format!("case {i}: geq not transitive"));
        }
        // support normalization after the operations
        for h in [&a.add(&b), &a.add(&b).sub(&b).unwrap_or_default()] {
            if !h.support_normalized() {
                failures.push(format!("case {i}: stored zero coefficient"));
            }
        }
    }
    SuiteReport {
        name: "heap-algebra".into(),
        cases: trials,
        failures,
    }
}

/// The corpus-shaped declarations used by the satisfaction suite.
fn sample_decls() -> Decls {
    let src = "\
pred_ctor Inv(x, g1, g2)() =
    exists v1, v2. [1/2]g1 |->g v1 * [1/2]g2 |->g v2 * x |-> v1 + v2

pred_ctor pre1(x, g1, g2)() =
    [1/2]atomic_space((), Inv(x, g1, g2)) * [1/2]g1 |->g 0

0
";
    parse_program(src).expect("sample declarations parse").decls
}

fn sample_assertions(decls: &Decls) -> Vec<(String, Assertion)> {
    let ghost = ["x", "g1", "g2", "P"];
    let texts = [
        "x |-> 0",
        "[1/2] g1 |->g 0",
        "[1/2] x |-> 0 * [1/2] x |-> 0",
        "exists v. x |-> v",
        "exists v1, v2. [1/2]g1 |->g v1 * [1/2]g2 |->g v2 * x |-> v1 + v2",
        "Inv(x, g1, g2)()",
        "pre1(x, g1, g2)()",
        "atomic_space((), Inv(x, g1, g2))",
        "emp",
        "x == 0 * g1 |->g 1",
        "atomic_spaces({})",
    ];
    texts
        .iter()
        .map(|t| {
            (
                t.to_string(),
                parse_assertion_str(t, decls, &[], &ghost).expect("suite assertion parses"),
            )
        })
        .collect()
}

fn sample_env() -> GroundEnv {
    GroundEnv::with_ghost([
        ("x".to_string(), GhostValue::Int(0)),
        ("g1".to_string(), GhostValue::Int(1)),
        ("g2".to_string(), GhostValue::Int(2)),
        ("P".to_string(), GhostValue::Int(9)),
    ])
}

/// Chunk templates for the satisfaction suite's heap enumeration.
fn sample_chunk_templates(decls: &Decls) -> Vec<Chunk> {
    let inv = GhostValue::PredVal(
        "Inv".into(),
        vec![GhostValue::Int(0), GhostValue::Int(1), GhostValue::Int(2)],
    );
    let mut out = vec![
        Chunk::points_to(0, 0),
        Chunk::points_to(0, 1),
        Chunk::points_to(0, 2),
        Chunk::ghost_points_to(1, GhostValue::Int(0)),
        Chunk::ghost_points_to(1, GhostValue::Int(1)),
        Chunk::ghost_points_to(2, GhostValue::Int(0)),
        Chunk::AtomicSpace(GhostValue::Unit, inv),
        Chunk::AtomicSpaces(GhostValue::FinSet(Default::default())),
    ];
    debug_assert!(decls.pred_ctor("Inv").is_some());
    out.dedup();
    out
}

/// Enumerates all heaps with at most `max_chunks` chunks over the given
/// templates with coefficients in {1/2, 1}.
fn enumerate_heaps(templates: &[Chunk], max_chunks: usize) -> Vec<LogicalHeap> {
    let coeffs = [Fraction::half(), Fraction::one()];
    let mut out = vec![LogicalHeap::new()];
    fn rec(
        templates: &[Chunk],
        coeffs: &[Fraction],
        start: usize,
        left: usize,
        cur: &LogicalHeap,
        out: &mut Vec<LogicalHeap>,
    ) {
        if left == 0 {
            return;
        }
        for i in start..templates.len() {
            for c in coeffs {
                let mut h = cur.clone();
                h.insert(templates[i].clone(), *c);
                out.push(h.clone());
                rec(templates, coeffs, i + 1, left - 1, &h, out);
            }
        }
    }
    let seed = LogicalHeap::new();
    rec(templates, &coeffs, 0, max_chunks, &seed, &mut out);
    out
}

/// Agreement of `satisfies` with the exhaustive split-enumeration oracle
/// over all small heaps, plus upward closure on random extensions.
pub fn satisfaction_suite(extension_trials: usize, seed: u64) -> SuiteReport {
    let decls = sample_decls();
    let env = sample_env();
    let cfg = SatConfig::default();
    let assertions = sample_assertions(&decls);
    let heaps = enumerate_heaps(&sample_chunk_templates(&decls), 3);
    let mut failures = Vec::new();
    let mut cases = 0usize;
    for h in &heaps {
        for (text, a) in &assertions {
            cases += 1;
            let mine = satisfies(h, a, &env, &decls, &cfg);
            let universe = witness_universe(h, a, &env, &cfg);
            let oracle = exhaustive_satisfies(h, a, &env, &decls, &universe, 16);
            let mine_sat = mine == SatResult::Satisfied;
            if mine_sat != oracle {
                failures.push(format!(
                    "disagreement on `{text}` over heap {{{}}}: satisfies={mine:?}, oracle={oracle}",
                    h.dump_lines().join(", ")
                ));
            }
        }
    }
    // upward closure: satisfies(H, a) implies satisfies(H + H', a)
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..extension_trials {
        cases += 1;
        let h = &heaps[rng.gen_range(0..heaps.len())];
        let (text, a) = &assertions[rng.gen_range(0..assertions.len())];
        if satisfies(h, a, &env, &decls, &cfg) == SatResult::Satisfied {
            let ext = random_heap(&mut rng, 2);
            let bigger = h.add(&ext);
            if satisfies(&bigger, a, &env, &decls, &cfg) != SatResult::Satisfied {
                failures.push(format!("case {i}: upward closure violated for `{text}`"));
            }
        }
    }
    SuiteReport {
        name: "satisfaction".into(),
        cases,
        failures,
    }
}

fn random_phys_heap(rng: &mut ChaCha8Rng, u: &WitnessUniverse) -> PhysHeap {
    let n = rng.gen_range(0..=3);
    let mut h = PhysHeap::new();
    for _ in 0..n {
        let a = rng.gen_range(u.addresses.clone());
        let v = rng.gen_range(u.values.clone());
        h.set(a, v);
    }
    h
}

fn random_demand_chunk(rng: &mut ChaCha8Rng, u: &WitnessUniverse, decls: &Decls) -> Chunk {
    let inv_name = decls
        .user()
        .iter()
        .find_map(|d| match d {
            GhostDecl::PredCtor { name, .. } => Some(name.clone()),
            _ => None,
        })
        .unwrap_or_else(|| "Inv".to_string());
    match rng.gen_range(0..8) {
        0..=2 => Chunk::points_to(
            rng.gen_range(u.addresses.clone()),
            rng.gen_range(u.values.clone()),
        ),
        3..=4 => Chunk::ghost_points_to(
            rng.gen_range(u.addresses.clone()),
            GhostValue::Int(rng.gen_range(u.values.clone())),
        ),
        5 => Chunk::AtomicSpace(
            GhostValue::Unit,
            GhostValue::PredVal(
                inv_name,
                vec![
                    GhostValue::Int(rng.gen_range(u.addresses.clone())),
                    GhostValue::Int(rng.gen_range(u.addresses.clone())),
                    GhostValue::Int(rng.gen_range(u.addresses.clone())),
                ],
            ),
        ),
        6 => Chunk::AtomicSpaces(GhostValue::FinSet(Default::default())),
        _ => Chunk::Heap(random_value(rng)),
    }
}

fn random_demand_coeff(rng: &mut ChaCha8Rng, u: &WitnessUniverse) -> Fraction {
    let d = u.denominators[rng.gen_range(0..u.denominators.len())];
    Fraction::new(rng.gen_range(1..=d), d).expect("positive")
}

/// The `consistent(h, H) <=> exists k <= 2. ok_k(H + {|heap(h),
/// atomic_spaces({})|})` biconditional on random pairs. `ok_k` is monotone
/// in `k`, so checking `k = 2` decides the bounded existential.
pub fn equivalence_suite(pairs: usize, seed: u64) -> SuiteReport {
    let decls = sample_decls();
    let u = WitnessUniverse::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for i in 0..pairs {
        let h = random_phys_heap(&mut rng, &u);
        let n = rng.gen_range(0..=3);
        let mut big_h = LogicalHeap::new();
        for _ in 0..n {
            big_h.insert(
                random_demand_chunk(&mut rng, &u, &decls),
                random_demand_coeff(&mut rng, &u),
            );
        }
        let lhs = consistent(&h, &big_h, &decls, &u).is_yes();
        let mut augmented = big_h.clone();
        augmented.insert(Chunk::Heap(encode_phys_heap(&h)), Fraction::one());
        augmented.insert(
            Chunk::AtomicSpaces(GhostValue::FinSet(Default::default())),
            Fraction::one(),
        );
        let rhs = ok_k(&augmented, 2, &decls, &u).is_yes();
        if lhs != rhs {
            failures.push(format!(
                "case {i}: consistent={lhs} but ok_2={rhs} for h={h} H={{{}}}",
                big_h.dump_lines().join(", ")
            ));
        }
    }
    SuiteReport {
        name: "consistency-equivalence".into(),
        cases: pairs,
        failures,
    }
}

/// Runs all suites with the acceptance trial counts.
pub fn run_all(seed: u64) -> Vec<SuiteReport> {
    vec![
        heap_algebra_suite(1000, seed),
        satisfaction_suite(1000, seed.wrapping_add(1)),
        equivalence_suite(500, seed.wrapping_add(2)),
    ]
}
