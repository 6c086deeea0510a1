//! Ground satisfaction checking: build small logical heaps and ask
//! whether they satisfy assertions, including a predicate application
//! with existential witnesses.

use cvf::heap::{Chunk, Fraction, GhostValue, GroundEnv, LogicalHeap};
use cvf::sat::{satisfies, SatConfig};
use cvf::syntax::{parse_assertion_str, parse_program};

fn main() {
    // declarations for the worked example's invariant
    let program = parse_program(
        "pred_ctor Inv(x, g1, g2)() =\n    exists v1, v2. [1/2]g1 |->g v1 * [1/2]g2 |->g v2 * x |-> v1 + v2\n0",
    )
    .expect("declarations parse");
    let decls = &program.decls;

    // the state right before the atomic space is created:
    // x at address 0 holds 0, ghost cells 1 and 2 hold 0 at half ownership
    let mut h = LogicalHeap::new();
    h.insert(Chunk::points_to(0, 0), Fraction::one());
    h.insert(
        Chunk::ghost_points_to(1, GhostValue::Int(0)),
        Fraction::half(),
    );
    h.insert(
        Chunk::ghost_points_to(2, GhostValue::Int(0)),
        Fraction::half(),
    );
    println!("heap:");
    for line in h.dump_lines() {
        println!("  {line}");
    }

    let env = GroundEnv::with_ghost([
        ("x".to_string(), GhostValue::Int(0)),
        ("g1".to_string(), GhostValue::Int(1)),
        ("g2".to_string(), GhostValue::Int(2)),
    ]);
    let cfg = SatConfig::default();

    for text in [
        "[1/2] x |-> 0",
        "Inv(x, g1, g2)()",
        "exists v. x |-> v * v == 0",
        "x |-> 1",
        "emp",
    ] {
        let a = parse_assertion_str(text, decls, &[], &["x", "g1", "g2"]).expect("parses");
        let result = satisfies(&h, &a, &env, decls, &cfg);
        println!("H |= {text:44} ... {result:?}");
    }
}
