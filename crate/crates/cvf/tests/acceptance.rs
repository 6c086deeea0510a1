//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use cvf::explore::{count_interleavings, explore, ExploreVerdict};
use cvf::interp::Configuration;
use cvf::oracle::soundness_crosscheck;
use cvf::selftest;
use cvf::syntax::ast::{
    AnnotatedCommand, AnnotatedCommandKind, OuterGhost, OuterGhostKind, Program,
};
use cvf::syntax::{erase, parse_program};
use cvf::verify::{verify_program, Engine, SymEnv, VerifyConfig};
use std::path::PathBuf;
use std::time::Instant;

const SEED: u64 = 20_250_809;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

fn load(name: &str) -> Program {
    let text = std::fs::read_to_string(corpus(name)).expect("corpus file");
    parse_program(&text).unwrap_or_else(|e| panic!("{name} parses: {e}"))
}

fn corpus_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(corpus(""))
        .expect("corpus directory")
        .filter_map(|e| {
            let name = e.unwrap().file_name().to_string_lossy().into_owned();
            name.ends_with(".cvf").then_some(name)
        })
        .collect();
    names.extend(
        std::fs::read_dir(corpus("mutants"))
            .expect("mutants directory")
            .map(|e| format!("mutants/{}", e.unwrap().file_name().to_string_lossy())),
    );
    names.sort();
    names
}

fn is_lem_line(line: &str) -> bool {
    line.contains(" : FAA_ghop(")
}

/// Criterion 1: the golden example verifies in under a second, and the
/// state dump at each of the eight outer annotation points contains
/// exactly the outline's chunks (canonical-form string equality; lemma
/// type chunks carried beyond the outline are counted separately).
#[test]
fn criterion_1_golden_example_verifies_with_outline_states() {
    let program = load("faa_two_threads.cvf");
    let start = Instant::now();
    let report = verify_program(&program);
    let elapsed = start.elapsed();
    assert!(report.is_verified(), "golden program must verify: {report}");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "verification took {elapsed:?}, budget is 1 s"
    );

    let expect = |label: &str, nth: usize, non_lem: &[&str], lem_count: usize| {
        let snaps = report.snapshots_labeled(label);
        let snap = snaps
            .get(nth)
            .unwrap_or_else(|| panic!("snapshot `{label}` #{nth} exists"));
        let got: Vec<&String> = snap.chunks.iter().filter(|l| !is_lem_line(l)).collect();
        let want: Vec<String> = non_lem.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            got.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            want.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "chunks at `{label}`"
        );
        let lems = snap.chunks.iter().filter(|l| is_lem_line(l)).count();
        assert_eq!(lems, lem_count, "lemma chunk count at `{label}`");
    };

    // the eight outer annotation points of the proof outline
    expect("init", 0, &[], 0);
    expect(
        "before create_atomic_space((), Inv(x, g1, g2))",
        0,
        &["1 g1 |->g 0", "1 g2 |->g 0", "1 x |-> 0"],
        0,
    );
    expect(
        "before par",
        0,
        &[
            "1 atomic_space((), Inv(x, g1, g2))",
            "1/2 g1 |->g 0",
            "1/2 g2 |->g 0",
        ],
        0,
    );
    expect(
        "par branch 1 entry",
        0,
        &["1/2 atomic_space((), Inv(x, g1, g2))", "1/2 g1 |->g 0"],
        0,
    );
    expect(
        "par branch 1 end",
        0,
        &["1/2 atomic_space((), Inv(x, g1, g2))", "1/2 g1 |->g 1"],
        1,
    );
    expect(
        "par join",
        0,
        &[
            "1 atomic_space((), Inv(x, g1, g2))",
            "1/2 g1 |->g 1",
            "1/2 g2 |->g 1",
        ],
        2,
    );
    expect(
        "before let v = *x",
        0,
        &["1 g1 |->g 1", "1 g2 |->g 1", "1 x |-> 2"],
        2,
    );
    expect("end", 0, &["1 g1 |->g 1", "1 g2 |->g 1", "1 x |-> 2"], 2);

    println!("ACCEPTANCE 1 PASS: golden example verified in {elapsed:?} with the 8 outline states");
}

/// Criterion 2: erasure of the annotated program is structurally
/// identical to the plain program's AST. Exact match.
#[test]
fn criterion_2_erasure_fidelity() {
    let annotated = load("faa_two_threads.cvf");
    let plain = load("faa_two_threads_plain.cvf");
    let erased = erase(&annotated.main);
    let plain_cmd = erase(&plain.main);
    assert_eq!(
        erased, plain_cmd,
        "erasure must match the plain program node-for-node"
    );
    println!("ACCEPTANCE 2 PASS: erase(annotated) == parse(plain), exact");
}

/// Criterion 3: the explorer reports SafeUpToDepth for the erased golden
/// program in under a second; every terminal configuration has heap
/// {0: 2} and value 0; the par node admits exactly 2 schedule orders.
#[test]
fn criterion_3_concrete_end_state() {
    let program = load("faa_two_threads.cvf");
    let erased = erase(&program.main);
    let cfg = Configuration::initial(erased);
    let start = Instant::now();
    let report = explore(&cfg, 64);
    let elapsed = start.elapsed();
    assert!(report.is_safe(), "erased golden program must be safe");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "exploration took {elapsed:?}, budget is 1 s"
    );
    assert!(!report.terminals.is_empty());
    for t in &report.terminals {
        assert_eq!(t.heap.to_string(), "{0 -> 2}", "terminal heap");
        assert_eq!(t.cmd.value(), Some(0), "terminal value");
    }
    let schedules = count_interleavings(&cfg, 64);
    assert_eq!(
        schedules, 2,
        "the two FAA threads admit exactly 2 schedule orders"
    );
    println!(
        "ACCEPTANCE 3 PASS: SafeUpToDepth in {elapsed:?}, all terminals ({{0 -> 2}}, 0), {schedules} schedules"
    );
}

/// Criterion 4: across the whole corpus the fatal quadrant
/// (Verified, NotOkay) never occurs, within 30 seconds.
#[test]
fn criterion_4_no_unsoundness_sweep() {
    let names = corpus_names();
    assert!(names.len() >= 12, "corpus has at least 12 programs");
    let start = Instant::now();
    for name in &names {
        let program = load(name);
        let report = soundness_crosscheck(&program, 64);
        assert!(
            !report.fatal,
            "UNSOUNDNESS on {name}: verifier accepted a program whose erasure reaches a not-okay configuration"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "sweep took {elapsed:?}, budget is 30 s"
    );
    println!(
        "ACCEPTANCE 4 PASS: {} programs crosschecked in {elapsed:?}, (Verified, NotOkay) never occurred",
        names.len()
    );
}

/// Criterion 5: the assert-constant mutant is rejected by both tools; the
/// deleted-ghost-update mutant is rejected by the verifier while its
/// unchanged erasure stays safe.
#[test]
fn criterion_5_negative_determinism() {
    let three = load("mutants/assert_three.cvf");
    let report = verify_program(&three);
    assert!(!report.is_verified());
    assert!(
        report.diagnostic().unwrap().contains("unprovable equality"),
        "diagnostic: {:?}",
        report.diagnostic()
    );
    let explore_report = explore(&Configuration::initial(erase(&three.main)), 64);
    assert!(
        matches!(explore_report.verdict, ExploreVerdict::NotOkay { .. }),
        "the erased mutant reaches a stuck assert"
    );

    let update_deleted = load("mutants/ghost_update1_deleted.cvf");
    let report = verify_program(&update_deleted);
    assert!(!report.is_verified(), "deleted ghost update must fail");
    let explore_report = explore(&Configuration::initial(erase(&update_deleted.main)), 64);
    assert!(
        explore_report.is_safe(),
        "the unchanged erasure stays safe: incompleteness is allowed, unsoundness is not"
    );
    println!("ACCEPTANCE 5 PASS: assert_three (Failed, NotOkay); ghost_update1_deleted (Failed, SafeUpToDepth)");
}

/// Criterion 6: 1000 randomized trials of the heap algebra laws.
#[test]
fn criterion_6_heap_algebra_suite() {
    let report = selftest::heap_algebra_suite(1000, SEED);
    assert!(report.passed(), "{report}");
    println!("ACCEPTANCE 6 PASS: {report}");
}

/// Criterion 7: satisfaction agrees with the exhaustive split-enumeration
/// oracle on all small heaps and corpus assertion bodies, and upward
/// closure holds on 1000 random heap extensions.
#[test]
fn criterion_7_satisfaction_suite() {
    let report = selftest::satisfaction_suite(1000, SEED.wrapping_add(1));
    assert!(report.passed(), "{report}");
    println!("ACCEPTANCE 7 PASS: {report}");
}

/// Criterion 8: the consistency biconditional
/// `consistent(h, H) <=> exists k <= 2. ok_k(H + {|heap(h), atomic_spaces({})|})`
/// holds on 500 random pairs.
#[test]
fn criterion_8_consistency_equivalence() {
    let report = selftest::equivalence_suite(500, SEED.wrapping_add(2));
    assert!(report.passed(), "{report}");
    println!("ACCEPTANCE 8 PASS: {report}");
}

fn collect_produce_nodes<'p>(c: &'p AnnotatedCommand, out: &mut Vec<&'p OuterGhost>) {
    match &c.kind {
        AnnotatedCommandKind::Let(_, rhs, body) => {
            collect_produce_nodes(rhs, out);
            collect_produce_nodes(body, out);
        }
        AnnotatedCommandKind::Par { left, right, .. } => {
            collect_produce_nodes(left, out);
            collect_produce_nodes(right, out);
        }
        AnnotatedCommandKind::GLet(_, g, body) => {
            if matches!(g.kind, OuterGhostKind::ProduceLemPtrChunk { .. }) {
                out.push(g);
            }
            collect_produce_nodes(body, out);
        }
        _ => {}
    }
}

/// Drives `check_lemma_value` directly on every `produce_lem_ptr_chunk`
/// body of a program, under fresh symbols for the surrounding binders.
fn check_all_lemma_bodies(program: &Program) -> Vec<Result<(), (u32, u32, String)>> {
    let mut nodes = Vec::new();
    collect_produce_nodes(&program.main, &mut nodes);
    let cfg = VerifyConfig::default();
    nodes
        .iter()
        .map(|node| {
            let OuterGhostKind::ProduceLemPtrChunk {
                lem_type,
                type_args,
                params,
                body,
            } = &node.kind
            else {
                unreachable!()
            };
            let mut eng = Engine::new(&program.decls, cfg.clone());
            let mut st = eng.fresh_state();
            // bind the surrounding program in the simplest honest way:
            // x is an address symbol, g1/g2 are ghost cell symbols
            let mut env = SymEnv::new();
            env.prog.insert("x".into(), eng.fresh("x"));
            env.ghost.insert("g1".into(), eng.fresh("g1"));
            env.ghost.insert("g2".into(), eng.fresh("g2"));
            st.env = env.clone();
            let targs = type_args
                .iter()
                .map(|a| {
                    eng.eval(&st, &env, a, node.span)
                        .expect("type args evaluate")
                })
                .collect::<Vec<_>>();
            eng.check_lemma_value(&st, lem_type, &targs, params, body, &env, node.span)
                .map_err(|f| (f.span.line, f.span.col, f.message))
        })
        .collect()
}

/// Criterion 9: `check_lemma_value` accepts both golden lemma bodies and
/// rejects the body mutants with location-bearing diagnostics.
#[test]
fn criterion_9_lemma_typing() {
    let golden = load("faa_two_threads.cvf");
    let results = check_all_lemma_bodies(&golden);
    assert_eq!(results.len(), 2, "the golden program produces two lemmas");
    for r in &results {
        assert!(r.is_ok(), "golden lemma body rejected: {r:?}");
    }
    for mutant in [
        "mutants/ghost_update1_deleted.cvf",
        "mutants/double_op_call.cvf",
        "mutants/close1_deleted.cvf",
    ] {
        let program = load(mutant);
        let results = check_all_lemma_bodies(&program);
        let failed: Vec<_> = results.iter().filter_map(|r| r.as_ref().err()).collect();
        assert!(
            !failed.is_empty(),
            "{mutant} must have a rejected lemma body"
        );
        for (line, col, msg) in &failed {
            assert!(
                *line > 0 && *col > 0,
                "diagnostic carries a location: {msg}"
            );
        }
    }
    println!("ACCEPTANCE 9 PASS: both golden lemma bodies accepted; 3 body mutants rejected with locations");
}

/// Criterion 10: opening the same (name, invariant) pair twice without
/// closing fails with the (V, V') ∉ S side-condition diagnostic.
#[test]
fn criterion_10_double_open_rejection() {
    let program = load("mutants/double_open.cvf");
    let report = verify_program(&program);
    assert!(!report.is_verified());
    let diag = report.diagnostic().unwrap();
    assert!(
        diag.contains("(V, V') ∉ S"),
        "diagnostic must cite the side condition, got: {diag}"
    );
    println!("ACCEPTANCE 10 PASS: double open rejected with the (V, V') ∉ S diagnostic");
}
