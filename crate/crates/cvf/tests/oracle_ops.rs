//! Oracle behavior on the worked example: semantic lemma typing, strong
//! consistency, bag invariants, and the crosscheck quadrants.

use cvf::heap::{Chunk, Fraction, GhostValue, GroundEnv, LemVal, LogicalHeap};
use cvf::interp::Configuration;
use cvf::oracle::{
    check_ground_lemma_value, consistent, sok, soundness_crosscheck, valid_bag_element,
    ConsistencyResult, WitnessUniverse,
};
use cvf::sat::{satisfies, SatConfig, SatResult};
use cvf::syntax::ast::*;
use cvf::syntax::{parse_assertion_str, parse_program};
use std::path::PathBuf;

fn load_corpus(name: &str) -> Program {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name);
    parse_program(&std::fs::read_to_string(p).expect("corpus file")).expect("corpus parses")
}

/// Extracts the first `produce_lem_ptr_chunk` body of the golden program
/// and closes it over a concrete environment (cell 0, ghost cells 1, 2).
fn golden_lemma() -> (Program, LemVal, Vec<GhostValue>) {
    let program = load_corpus("faa_two_threads.cvf");
    fn find(c: &AnnotatedCommand) -> Option<(&Vec<String>, &InnerGhost)> {
        match &c.kind {
            AnnotatedCommandKind::Let(_, rhs, body) => find(rhs).or_else(|| find(body)),
            AnnotatedCommandKind::Par { left, right, .. } => find(left).or_else(|| find(right)),
            AnnotatedCommandKind::GLet(_, g, body) => match &g.kind {
                OuterGhostKind::ProduceLemPtrChunk {
                    params, body: b, ..
                } => Some((params, b)),
                _ => find(body),
            },
            _ => None,
        }
    }
    let (params, body) = find(&program.main).expect("a produce node");
    let mut env = GroundEnv::new();
    env.prog.insert("x".into(), 0);
    env.ghost.insert("g1".into(), GhostValue::Int(1));
    env.ghost.insert("g2".into(), GhostValue::Int(2));
    let lem = LemVal::close(params, body, &env);
    let args = |p: &str| {
        GhostValue::PredVal(
            p.into(),
            vec![GhostValue::Int(0), GhostValue::Int(1), GhostValue::Int(2)],
        )
    };
    let type_args = vec![
        GhostValue::Int(0),
        GhostValue::Int(1),
        args("pre1"),
        args("post1"),
    ];
    (program, lem, type_args)
}

#[test]
fn golden_lemma_value_is_semantically_typed() {
    let (program, lem, type_args) = golden_lemma();
    assert!(check_ground_lemma_value(
        &program.decls,
        &lem,
        "FAA_ghop",
        &type_args
    ));
}

#[test]
fn sok_accepts_the_golden_chunk_and_is_vacuous_without_lemmas() {
    let (program, lem, type_args) = golden_lemma();
    assert!(sok(&LogicalHeap::new(), &program.decls));
    let no_lemmas = LogicalHeap::singleton(Chunk::points_to(0, 1), Fraction::one());
    assert!(sok(&no_lemmas, &program.decls));
    let chunk = Chunk::LemType(
        GhostValue::LemVal(Box::new(lem)),
        "FAA_ghop".into(),
        type_args,
    );
    let h = LogicalHeap::singleton(chunk.clone(), Fraction::one());
    assert!(sok(&h, &program.decls));
    // monotone under removing the lemma chunk
    let removed = h
        .sub(&LogicalHeap::singleton(chunk, Fraction::one()))
        .unwrap();
    assert!(sok(&removed, &program.decls));
}

#[test]
fn sok_rejects_an_ill_typed_lemma_value() {
    let (program, _, type_args) = golden_lemma();
    // a body that only allocates a ghost cell never establishes the
    // declared postcondition
    let skip_body = InnerGhost::Instr(GhostInstr {
        span: Default::default(),
        kind: GhostInstrKind::GCons(GhostExpr::int(0)),
    });
    let bogus = LemVal::close(&["op".to_string()], &skip_body, &GroundEnv::new());
    assert!(!check_ground_lemma_value(
        &program.decls,
        &bogus,
        "FAA_ghop",
        &type_args
    ));
    let h = LogicalHeap::singleton(
        Chunk::LemType(
            GhostValue::LemVal(Box::new(bogus)),
            "FAA_ghop".into(),
            type_args,
        ),
        Fraction::half(),
    );
    assert!(!sok(&h, &program.decls), "positive coefficient suffices");
    // non-lambda values never have a lemma type
    let not_a_lemma = LogicalHeap::singleton(
        Chunk::LemType(GhostValue::Int(3), "FAA_op".into(), vec![]),
        Fraction::one(),
    );
    assert!(!sok(&not_a_lemma, &program.decls));
}

#[test]
fn consistency_finds_an_atomic_space_witness_with_valid_bag() {
    let program = load_corpus("faa_two_threads.cvf");
    let u = WitnessUniverse::default();
    let inv = GhostValue::PredVal(
        "Inv".into(),
        vec![GhostValue::Int(0), GhostValue::Int(1), GhostValue::Int(2)],
    );
    let demand = LogicalHeap::singleton(
        Chunk::AtomicSpace(GhostValue::Unit, inv.clone()),
        Fraction::one(),
    );
    // the physical heap supplies the cell the invariant needs
    let h = cvf::interp::PhysHeap::from_iter([(0, 0)]);
    match consistent(&h, &demand, &program.decls, &u) {
        ConsistencyResult::Yes(w) => {
            assert_eq!(w.bag.len(), 1);
            let ((name, i), owned) = &w.bag[0];
            assert_eq!(*name, GhostValue::Unit);
            assert_eq!(*i, inv);
            assert!(valid_bag_element(&program.decls, i, owned, &u));
            // the owned heap satisfies the invariant per the satisfaction
            // checker as well
            let a = parse_assertion_str("I()", &program.decls, &[], &["I"]).unwrap();
            let env = GroundEnv::with_ghost([("I".to_string(), inv.clone())]);
            assert_eq!(
                satisfies(owned, &a, &env, &program.decls, &SatConfig::default()),
                SatResult::Satisfied
            );
        }
        ConsistencyResult::NoWithinUniverse => panic!("a witness exists: take v1 = v2 = 0"),
    }
    // without the backing cell there is no witness in the universe
    let empty = cvf::interp::PhysHeap::new();
    assert!(!consistent(&empty, &demand, &program.decls, &u).is_yes());
}

#[test]
fn crosscheck_quadrants_on_representative_programs() {
    let golden = soundness_crosscheck(&load_corpus("faa_two_threads.cvf"), 64);
    assert_eq!(golden.quadrant(), (true, true));
    assert!(!golden.fatal);

    let plain = soundness_crosscheck(&load_corpus("faa_two_threads_plain.cvf"), 64);
    assert_eq!(plain.quadrant(), (false, true));

    let both_reject = soundness_crosscheck(&load_corpus("mutants/assert_three.cvf"), 64);
    assert_eq!(both_reject.quadrant(), (false, false));

    let incomplete = soundness_crosscheck(&load_corpus("mutants/ghost_update2_deleted.cvf"), 64);
    assert_eq!(incomplete.quadrant(), (false, true));
}

#[test]
fn explorer_counts_two_schedules_for_the_example() {
    let program = load_corpus("faa_two_threads.cvf");
    let erased = cvf::syntax::erase(&program.main);
    let n = cvf::explore::count_interleavings(&Configuration::initial(erased), 64);
    assert_eq!(n, 2);
}
