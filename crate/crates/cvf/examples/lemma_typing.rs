//! Semantic lemma typing: check ghost-command bodies against a lemma
//! type, both through the verifier (symbolic) and the oracle (ground).

use cvf::heap::{GhostValue, GroundEnv, LemVal};
use cvf::oracle::check_ground_lemma_value;
use cvf::syntax::ast::*;
use cvf::syntax::parse_program;

fn main() {
    let path = format!("{}/corpus/faa_two_threads.cvf", env!("CARGO_MANIFEST_DIR"));
    let program = parse_program(&std::fs::read_to_string(path).expect("file"))
        .expect("golden program parses");

    // pull the first produce_lem_ptr_chunk body out of the program
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
    println!("lemma body: {body}");

    // close it over a concrete environment: the cell is address 0, the
    // ghost cells are 1 and 2
    let mut env = GroundEnv::new();
    env.prog.insert("x".into(), 0);
    env.ghost.insert("g1".into(), GhostValue::Int(1));
    env.ghost.insert("g2".into(), GhostValue::Int(2));
    let lem = LemVal::close(params, body, &env);

    let pred = |p: &str| {
        GhostValue::PredVal(
            p.into(),
            vec![GhostValue::Int(0), GhostValue::Int(1), GhostValue::Int(2)],
        )
    };
    let type_args = [
        GhostValue::Int(0),
        GhostValue::Int(1),
        pred("pre1"),
        pred("post1"),
    ];
    let accepted = check_ground_lemma_value(&program.decls, &lem, "FAA_ghop", &type_args);
    println!("golden body : FAA_ghop(0, 1, pre1, post1) ... {accepted}");
    assert!(accepted);

    // a body that skips the work is rejected
    let skip = InnerGhost::Instr(GhostInstr {
        span: Default::default(),
        kind: GhostInstrKind::GCons(GhostExpr::int(0)),
    });
    let bogus = LemVal::close(&["op".to_string()], &skip, &GroundEnv::new());
    let accepted = check_ground_lemma_value(&program.decls, &bogus, "FAA_ghop", &type_args);
    println!("gcons(0) body : FAA_ghop(0, 1, pre1, post1) ... {accepted}");
    assert!(!accepted);
}
