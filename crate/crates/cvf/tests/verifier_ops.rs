//! Per-rule behavior of the symbolic execution engine: produce, consume,
//! command verification, and the instrumentation audits over the golden
//! proof run.

use cvf::syntax::ast::Program;
use cvf::syntax::{parse_assertion_str, parse_program, prelude_decls};
use cvf::verify::{verify_cmd, verify_program, ConsumeOut, Engine, SymTerm, Verdict, VerifyConfig};
use std::path::PathBuf;

fn load_corpus(name: &str) -> Program {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name);
    parse_program(&std::fs::read_to_string(p).expect("corpus file")).expect("corpus parses")
}

#[test]
fn produce_points_to() {
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("x".into(), eng.fresh("x"));
    let a = parse_assertion_str("x |-> 0", &decls, &["x"], &[]).unwrap();
    let env = st.env.clone();
    eng.produce(&mut st, &env, &a).unwrap();
    assert_eq!(st.heap.dump(&st.pc, &eng.syms), vec!["1 x |-> 0"]);
}

#[test]
fn produce_emp_leaves_the_state_unchanged() {
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    let a = parse_assertion_str("emp", &decls, &[], &[]).unwrap();
    let env = st.env.clone();
    eng.produce(&mut st, &env, &a).unwrap();
    assert!(st.heap.is_empty());
}

#[test]
fn produce_unfolds_predicate_with_fresh_existentials() {
    // producing Inv(x, g1, g2)() yields two fresh symbols and the three
    // chunks of the invariant body
    let program = load_corpus("faa_two_threads.cvf");
    let mut eng = Engine::new(&program.decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("x".into(), eng.fresh("x"));
    st.env.ghost.insert("g1".into(), eng.fresh("g1"));
    st.env.ghost.insert("g2".into(), eng.fresh("g2"));
    let a = parse_assertion_str("Inv(x, g1, g2)()", &program.decls, &["x"], &["g1", "g2"]).unwrap();
    let env = st.env.clone();
    eng.produce(&mut st, &env, &a).unwrap();
    assert_eq!(
        st.heap.dump(&st.pc, &eng.syms),
        vec!["1 x |-> v1 + v2", "1/2 g1 |->g v1", "1/2 g2 |->g v2"]
    );
}

#[test]
fn consume_leaf_subtracts_and_returns_witnesses() {
    // consume({x |-> 0 @ 1}, exists w. [1/2] x |-> w) leaves 1/2 and
    // binds w := 0
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("x".into(), eng.fresh("x"));
    let env = st.env.clone();
    let full = parse_assertion_str("x |-> 0", &decls, &["x"], &[]).unwrap();
    eng.produce(&mut st, &env, &full).unwrap();

    let pat = parse_assertion_str("exists w. [1/2] x |-> w", &decls, &["x"], &[]).unwrap();
    let mut out = ConsumeOut::default();
    eng.consume(&mut st, &env, &pat, &mut out).unwrap();
    assert_eq!(st.heap.dump(&st.pc, &eng.syms), vec!["1/2 x |-> 0"]);
    assert_eq!(out.witnesses.len(), 1);
    assert_eq!(out.witnesses[0].0, "w");
    assert_eq!(out.witnesses[0].1, SymTerm::int(0));
    // the taken sub-heap carries exactly what was removed
    assert_eq!(out.taken.dump(&st.pc, &eng.syms), vec!["1/2 x |-> 0"]);
}

#[test]
fn consume_from_empty_heap_fails() {
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("x".into(), eng.fresh("x"));
    let env = st.env.clone();
    let a = parse_assertion_str("x |-> 0", &decls, &["x"], &[]).unwrap();
    let mut out = ConsumeOut::default();
    let err = eng.consume(&mut st, &env, &a, &mut out).unwrap_err();
    assert!(err.message.contains("missing chunk"), "{}", err.message);
}

#[test]
fn produce_consume_round_trip_on_corpus_assertions() {
    // for every existential-free corpus assertion body, consuming right
    // after producing leaves an empty heap
    let program = load_corpus("faa_two_threads.cvf");
    let texts = [
        "[1/2]atomic_space((), Inv(x, g1, g2)) * [1/2]g1 |->g 0",
        "[1/2]atomic_space((), Inv(x, g1, g2)) * [1/2]g1 |->g 1",
        "[1/2]atomic_space((), Inv(x, g1, g2)) * [1/2]g2 |->g 0",
        "pre1(x, g1, g2)()",
        "post2(x, g1, g2)()",
        "atomic_spaces({}) * g1 |->g 0",
    ];
    for text in texts {
        let mut eng = Engine::new(&program.decls, VerifyConfig::default());
        let mut st = eng.fresh_state();
        st.env.prog.insert("x".into(), eng.fresh("x"));
        st.env.ghost.insert("g1".into(), eng.fresh("g1"));
        st.env.ghost.insert("g2".into(), eng.fresh("g2"));
        let env = st.env.clone();
        let a = parse_assertion_str(text, &program.decls, &["x"], &["g1", "g2"]).unwrap();
        eng.produce(&mut st, &env, &a).unwrap();
        let mut out = ConsumeOut::default();
        eng.consume(&mut st, &env, &a, &mut out)
            .unwrap_or_else(|f| panic!("`{text}`: {}", f.message));
        assert!(
            st.heap.is_empty(),
            "`{text}` left {:?}",
            st.heap.dump(&st.pc, &eng.syms)
        );
    }
}

#[test]
fn cons_then_deref_verifies_against_result_postcondition() {
    // {emp} let x = cons(0) in *x {res == 0 * x |-> 0}
    let decls = prelude_decls();
    let program = parse_program("let x = cons(0) in *x").unwrap();
    let post = parse_assertion_str("res == 0 * x |-> 0", &decls, &["x"], &[]).unwrap();
    let report = verify_cmd(
        &program.decls,
        &program.main,
        &post,
        &VerifyConfig::default(),
    );
    assert!(report.is_verified(), "{report}");
}

#[test]
fn cons_deref_assert_chain_verifies() {
    let program = parse_program("let t = cons(0) in let v = *t in assert v == 0").unwrap();
    assert!(verify_program(&program).is_verified());
}

#[test]
fn gcons_produces_a_fresh_ghost_cell_at_full_coefficient() {
    let program = parse_program("glet g = gcons(0) in 0").unwrap();
    let report = verify_program(&program);
    assert!(report.is_verified());
    assert!(
        report.leaks.iter().any(|l| l.contains("1 g |->g 0")),
        "leaks: {:?}",
        report.leaks
    );
}

#[test]
fn plain_faa_fails_for_want_of_a_ghop_chunk() {
    let program = load_corpus("faa_two_threads_plain.cvf");
    let report = verify_program(&program);
    match &report.verdict {
        Verdict::Failed { diagnostic, .. } => {
            assert!(diagnostic.contains("FAA_ghop"), "{diagnostic}");
        }
        Verdict::Verified => panic!("the unannotated program must not verify"),
    }
}

#[test]
fn assert_on_unconstrained_symbol_cannot_be_decided() {
    // faa's result is a fresh unconstrained symbol, so asserting on it
    // fails with a cannot-decide diagnostic rather than a wrong answer
    let src = "\
let x = cons(0) in
glet u = gcons(0) in
let r = *x in
assert r == 1
";
    let program = parse_program(src).unwrap();
    let report = verify_program(&program);
    match &report.verdict {
        Verdict::Failed { diagnostic, .. } => {
            assert!(diagnostic.contains("unprovable equality"), "{diagnostic}");
        }
        Verdict::Verified => panic!("must fail"),
    }
}

#[test]
fn strict_leaks_turns_leftovers_into_failure() {
    let program = parse_program("let x = cons(0) in 0").unwrap();
    let relaxed = verify_program(&program);
    assert!(relaxed.is_verified());
    assert!(!relaxed.leaks.is_empty());
    let strict = verify_cmd(
        &program.decls,
        &program.main,
        &cvf::syntax::ast::Assertion::emp(),
        &VerifyConfig {
            strict_leaks: true,
            ..Default::default()
        },
    );
    assert!(!strict.is_verified());
}

/// Fraction conservation, audited on the golden run: between the open and
/// the close inside each lemma body, the total points-to coefficient for
/// the shared cell stays constant at 1.
#[test]
fn fraction_conservation_audit_on_golden_run() {
    let program = load_corpus("faa_two_threads.cvf");
    let report = verify_program(&program);
    assert!(report.is_verified());
    // snapshots are taken before each ghost instruction; after the open
    // (i.e. at `op()` and at the update) the cell must be owned at 1
    let mut audited = 0;
    for snap in &report.snapshots {
        if snap.label.starts_with("ghost op()") || snap.label.starts_with("ghost *g") {
            let total = snap
                .points_to_totals
                .iter()
                .find(|(a, _)| a == "x")
                .map(|(_, t)| t.as_str());
            assert_eq!(total, Some("1"), "at `{}`", snap.label);
            audited += 1;
        }
    }
    assert_eq!(audited, 4, "two instructions audited per branch");
}

/// Linearity of lemma type chunks: within each lemma body check, the
/// number of lemma-type chunks never increases.
#[test]
fn lemma_chunk_linearity_audit_on_golden_run() {
    let program = load_corpus("faa_two_threads.cvf");
    let report = verify_program(&program);
    assert!(report.is_verified());
    let mut windows = 0;
    let mut i = 0;
    while i < report.snapshots.len() {
        if report.snapshots[i].label == "lemma body entry" {
            let mut last = report.snapshots[i].lemtype_count;
            let mut j = i + 1;
            while report.snapshots[j].label != "lemma body end" {
                let cur = report.snapshots[j].lemtype_count;
                assert!(
                    cur <= last,
                    "lemma-type chunk count increased inside a body at `{}`",
                    report.snapshots[j].label
                );
                last = cur;
                j += 1;
            }
            windows += 1;
            i = j;
        }
        i += 1;
    }
    assert_eq!(windows, 2, "both lemma bodies audited");
}

#[test]
fn heap_chunk_update_rule() {
    // {heap(h) * l |-> _} l <-h v {heap(h[l := v]) * l |-> v}
    use cvf::heap::GhostValue;
    use cvf::syntax::ast::{GhostExpr, GhostInstr, GhostInstrKind, InnerGhost};
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    let cell = GhostValue::pair(GhostValue::Int(0), GhostValue::Int(0));
    let h0 = GhostValue::set([cell]);
    let env = st.env.clone();
    let heap_assert = parse_assertion_str("heap_(h)()", &decls, &[], &["h"]).unwrap();
    let mut env2 = env.clone();
    env2.ghost.insert("h".into(), SymTerm::Lit(h0));
    eng.produce(&mut st, &env2, &heap_assert).unwrap();
    let cell_assert = parse_assertion_str("0 |-> 0", &decls, &[], &[]).unwrap();
    eng.produce(&mut st, &env, &cell_assert).unwrap();
    let update = InnerGhost::Instr(GhostInstr {
        span: Default::default(),
        kind: GhostInstrKind::HeapUpdate(GhostExpr::int(0), GhostExpr::int(5)),
    });
    let (st, _) = eng.exec_inner(st, &update, &env).unwrap();
    assert_eq!(
        st.heap.dump(&st.pc, &eng.syms),
        vec!["1 0 |-> 5", "1 heap({(0, 5)})"]
    );
}

#[test]
fn open_produces_bookkeeping_and_invariant_body() {
    // after the open inside the first lemma body, the opened set records
    // the pair and the invariant's chunks are present
    let program = load_corpus("faa_two_threads.cvf");
    let report = verify_program(&program);
    assert!(report.is_verified());
    // the snapshot taken at `op()` shows the state right after the open
    let snap = &report.snapshots_labeled("ghost op()")[0];
    assert!(snap
        .chunks
        .contains(&"1 atomic_spaces({((), Inv(x, g1, g2))})".to_string()));
    assert!(snap.chunks.contains(&"1 g1 |->g 0".to_string()));
    assert!(snap.chunks.iter().any(|c| c.starts_with("1 x |-> ")));
    assert!(snap
        .chunks
        .contains(&"1/2 atomic_space((), Inv(x, g1, g2))".to_string()));
}

#[test]
fn consume_prefers_certain_matches_and_reports_ambiguity() {
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("a".into(), eng.fresh("a"));
    st.env.prog.insert("b".into(), eng.fresh("b"));
    let env = st.env.clone();
    for text in ["a |-> 1", "b |-> 2"] {
        let a = parse_assertion_str(text, &decls, &["a", "b"], &[]).unwrap();
        eng.produce(&mut st, &env, &a).unwrap();
    }
    // a certainly-equal match is preferred even though the other chunk
    // could also unify against a fresh existential
    let pat = parse_assertion_str("exists w. a |-> w", &decls, &["a", "b"], &[]).unwrap();
    let mut out = ConsumeOut::default();
    eng.consume(&mut st, &env, &pat, &mut out).unwrap();
    assert_eq!(out.witnesses[0].1, SymTerm::int(1));
    // two candidate cells for an unknown address is ambiguous
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("a".into(), eng.fresh("a"));
    st.env.prog.insert("b".into(), eng.fresh("b"));
    let env = st.env.clone();
    for text in ["a |-> 1", "b |-> 2"] {
        let a = parse_assertion_str(text, &decls, &["a", "b"], &[]).unwrap();
        eng.produce(&mut st, &env, &a).unwrap();
    }
    let pat = parse_assertion_str("exists l, w. l |-> w", &decls, &["a", "b"], &[]).unwrap();
    let mut out = ConsumeOut::default();
    let err = eng.consume(&mut st, &env, &pat, &mut out).unwrap_err();
    assert!(err.message.contains("ambiguous"), "{}", err.message);
}

#[test]
fn wok_value_matching_on_produce() {
    // producing two half cells at the same address equates the stored
    // values, mirroring weak consistency
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("x".into(), eng.fresh("x"));
    let env = st.env.clone();
    let a = parse_assertion_str(
        "exists v. [1/2] x |-> 0 * [1/2] x |-> v * v == 1 + -1",
        &decls,
        &["x"],
        &[],
    )
    .unwrap();
    eng.produce(&mut st, &env, &a).unwrap();
    assert_eq!(st.heap.dump(&st.pc, &eng.syms), vec!["1 x |-> 0"]);
    assert!(!st.pc.is_inconsistent());
}

#[test]
fn over_unit_points_to_makes_the_branch_vacuous() {
    // a full cell plus another half of the same cell cannot occur in any
    // weakly consistent heap, so the branch is vacuous and anything
    // verifies after it
    let decls = prelude_decls();
    let mut eng = Engine::new(&decls, VerifyConfig::default());
    let mut st = eng.fresh_state();
    st.env.prog.insert("x".into(), eng.fresh("x"));
    let env = st.env.clone();
    let a = parse_assertion_str("x |-> 0 * [1/2] x |-> 0", &decls, &["x"], &[]).unwrap();
    eng.produce(&mut st, &env, &a).unwrap();
    assert!(st.pc.is_inconsistent());
}

#[test]
fn binder_form_produce_and_lemma_calls_with_arguments() {
    // glet-bound lemma values are callable by name, calls instantiate the
    // lemma parameters, and the chunk survives each call
    let program = load_corpus("ghost_counter.cvf");
    let report = verify_program(&program);
    assert!(report.is_verified(), "{report}");
    assert!(
        report.leaks.iter().any(|l| l.contains("1 g |->g 2")),
        "the second call wrote 2: {:?}",
        report.leaks
    );
    assert!(
        report.leaks.iter().any(|l| l.contains(": SetCell(g)")),
        "the lemma chunk survives both calls"
    );
}

#[test]
fn recursive_invariant_hits_the_unfold_budget() {
    let program = load_corpus("mutants/recursive_invariant.cvf");
    let report = verify_program(&program);
    match &report.verdict {
        Verdict::Failed { diagnostic, .. } => {
            assert!(diagnostic.contains("unfold depth exceeded"), "{diagnostic}");
        }
        Verdict::Verified => panic!("must not verify"),
    }
}

#[test]
fn lemma_call_without_a_chunk_reports_linearity() {
    // a second produce is fine, but calling a name that holds no lemma
    // value fails with the linearity diagnostic
    let src = "\
lem_type Nop(c) = lem()
    req emp
    ens emp

glet g = gcons(0) in
glet n = gcons(1) in
n();
0
";
    let program = parse_program(src).unwrap();
    let report = verify_program(&program);
    match &report.verdict {
        Verdict::Failed { diagnostic, .. } => {
            assert!(diagnostic.contains("no lemma type chunk"), "{diagnostic}");
        }
        Verdict::Verified => panic!("must not verify"),
    }
}
