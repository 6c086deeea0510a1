//! Parser, pretty-printer, substitution and erasure behavior, including
//! the round-trip properties over corpus files and generated ASTs.

use cvf::syntax::ast::*;
use cvf::syntax::{
    command_to_string, embed, erase, parse_assertion_str, parse_program, prelude_decls,
    program_to_string, subst_annotated, subst_assertion, subst_command, Bindings,
};
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;

fn corpus(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name);
    std::fs::read_to_string(p).expect("corpus file")
}

#[test]
fn plain_program_has_four_interior_nodes() {
    let p = parse_program(&corpus("faa_two_threads_plain.cvf")).unwrap();
    let cmd = erase(&p.main);
    // three lets (two of them sequencing sugar) and one par
    assert_eq!(cmd.interior_nodes(), 4);
    fn find_par(c: &Command) -> Option<&Command> {
        match c {
            Command::Par(_, _) => Some(c),
            Command::Let(_, a, b) => find_par(a).or_else(|| find_par(b)),
            _ => None,
        }
    }
    let par = find_par(&cmd).expect("a par node");
    match par {
        Command::Par(l, r) => {
            assert!(matches!(**l, Command::Instr(Instr::Faa(_, _))));
            assert!(matches!(**r, Command::Instr(Instr::Faa(_, _))));
        }
        _ => unreachable!(),
    }
}

#[test]
fn empty_input_is_a_parse_error() {
    assert!(parse_program("").is_err());
}

#[test]
fn golden_program_has_five_user_pred_ctors() {
    let p = parse_program(&corpus("faa_two_threads.cvf")).unwrap();
    let user: Vec<&str> = p.decls.user().iter().map(|d| d.name()).collect();
    assert_eq!(user, vec!["Inv", "pre1", "post1", "pre2", "post2"]);
    assert!(p
        .decls
        .user()
        .iter()
        .all(|d| matches!(d, GhostDecl::PredCtor { .. })));
    // the prelude is preloaded
    assert!(p.decls.find("FAA_ghop").is_some());
    assert!(p.decls.find("heap_").is_some());
}

#[test]
fn prelude_names_cannot_be_redeclared() {
    let src = "pred_ctor FAA_op(a)() = emp\n0";
    let err = parse_program(src).unwrap_err();
    assert!(err.to_string().contains("prelude"), "{err}");
}

#[test]
fn internal_forms_are_rejected_in_source() {
    let err = parse_program("pred_ctor P(h)() = heap(h)\n0").unwrap_err();
    assert!(err.to_string().contains("internal"), "{err}");
    let err = parse_program("glet g = gcons(0) in (g <-h 1; 0)").unwrap_err();
    assert!(err.to_string().contains("internal"), "{err}");
}

#[test]
fn arity_mismatch_is_reported() {
    let src =
        "pred_ctor P(a, b)() = a |->g b\nglet g = gcons(0) in create_atomic_space((), P(g)); 0";
    let err = parse_program(src).unwrap_err();
    assert!(err.to_string().contains("expects 2 argument"), "{err}");
}

#[test]
fn unbound_variables_are_reported_with_position() {
    let err = parse_program("assert y == 0").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("unbound") && msg.contains('y'), "{msg}");
    assert!(msg.starts_with("1:8"), "line/column prefix: {msg}");
}

#[test]
fn pretty_of_zero_literal() {
    assert_eq!(command_to_string(&Command::Expr(Expr::IntLit(0))), "0");
}

#[test]
fn corpus_round_trip_and_fixpoint() {
    let mut names = vec![
        "faa_two_threads.cvf".to_string(),
        "faa_two_threads_plain.cvf".to_string(),
        "cons_deref.cvf".to_string(),
    ];
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus/mutants");
    for e in std::fs::read_dir(dir).unwrap() {
        names.push(format!(
            "mutants/{}",
            e.unwrap().file_name().to_string_lossy()
        ));
    }
    for name in names {
        let p0 = parse_program(&corpus(&name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let t1 = program_to_string(&p0);
        let p1 = parse_program(&t1).unwrap_or_else(|e| panic!("{name} reparses: {e}\n{t1}"));
        assert_eq!(p0, p1, "parse . pretty is the identity on {name}");
        // one normalization pass reaches a fixpoint
        let t2 = program_to_string(&p1);
        assert_eq!(t1, t2, "pretty . parse . pretty is a fixpoint on {name}");
    }
}

#[test]
fn erase_drops_ghost_lets() {
    let p = parse_program("glet g = gcons(0) in assert 1 == 1").unwrap();
    let erased = erase(&p.main);
    assert_eq!(
        erased,
        Command::Instr(Instr::AssertEq(Expr::IntLit(1), Expr::IntLit(1)))
    );
}

#[test]
fn erase_is_identity_on_plain_commands_and_idempotent() {
    let p = parse_program(&corpus("faa_two_threads.cvf")).unwrap();
    let once = erase(&p.main);
    let twice = erase(&embed(&once));
    assert_eq!(once, twice);
}

#[test]
fn subst_matches_let_reduction() {
    // (h, let x = v in c) -> (h, c[v/x])
    let body = Command::Instr(Instr::Faa(Expr::Var("x".into()), Expr::IntLit(1)));
    let bound = subst_command(&body, &BTreeMap::from([("x".to_string(), 7)]));
    assert_eq!(
        bound,
        Command::Instr(Instr::Faa(Expr::IntLit(7), Expr::IntLit(1)))
    );
}

#[test]
fn empty_substitution_is_identity() {
    let decls = prelude_decls();
    let a = parse_assertion_str("exists v. [1/2] g |->g v * v == 0", &decls, &[], &["g"]).unwrap();
    assert_eq!(subst_assertion(&a, &Bindings::new()), a);
}

#[test]
fn bound_occurrences_are_untouched() {
    let decls = prelude_decls();
    let a = parse_assertion_str("exists g. g |->g w", &decls, &[], &["w"]).unwrap();
    let b = Bindings::ghost_one("g", GhostExpr::int(3));
    assert_eq!(subst_assertion(&a, &b), a, "g is bound, so nothing changes");
}

#[test]
fn capture_is_avoided_by_renaming() {
    let decls = prelude_decls();
    // substituting w := g under a binder g must rename the binder
    let a = parse_assertion_str("exists g. g |->g w", &decls, &[], &["w"]).unwrap();
    let b = Bindings::ghost_one("w", GhostExpr::GhostVar("g".into()));
    let out = subst_assertion(&a, &b);
    match &out.kind {
        AssertionKind::Exists(binder, body) => {
            assert_ne!(binder, "g", "binder must be renamed");
            match &body.kind {
                AssertionKind::GhostPointsTo(_, l, r) => {
                    assert_eq!(*l, GhostExpr::GhostVar(binder.clone()));
                    assert_eq!(*r, GhostExpr::GhostVar("g".into()));
                }
                k => panic!("unexpected body {k:?}"),
            }
        }
        k => panic!("unexpected assertion {k:?}"),
    }
}

// ----- generated ASTs -----

fn gen_expr(rng: &mut ChaCha8Rng, scope: &[String]) -> Expr {
    // `_` is a binder hole, never a usable name
    let usable: Vec<&String> = scope.iter().filter(|x| *x != "_").collect();
    if !usable.is_empty() && rng.gen_bool(0.5) {
        Expr::Var(usable[rng.gen_range(0..usable.len())].clone())
    } else {
        Expr::IntLit(rng.gen_range(-3..=9))
    }
}

fn gen_command(rng: &mut ChaCha8Rng, scope: &mut Vec<String>, depth: usize) -> Command {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        match rng.gen_range(0..5) {
            0 => Command::Expr(gen_expr(rng, scope)),
            1 => Command::Instr(Instr::Cons(gen_expr(rng, scope))),
            2 => Command::Instr(Instr::Faa(gen_expr(rng, scope), gen_expr(rng, scope))),
            3 => Command::Instr(Instr::Deref(gen_expr(rng, scope))),
            _ => Command::Instr(Instr::AssertEq(gen_expr(rng, scope), gen_expr(rng, scope))),
        }
    } else if rng.gen_bool(0.6) {
        let name = if rng.gen_bool(0.2) {
            "_".to_string()
        } else {
            format!("x{}", scope.len())
        };
        let rhs = gen_command(rng, scope, depth - 1);
        scope.push(name.clone());
        let body = gen_command(rng, scope, depth - 1);
        scope.pop();
        Command::Let(name, Box::new(rhs), Box::new(body))
    } else {
        Command::Par(
            Box::new(gen_command(rng, scope, depth - 1)),
            Box::new(gen_command(rng, scope, depth - 1)),
        )
    }
}

fn gen_ghost_expr(rng: &mut ChaCha8Rng, ghost_scope: &[&str], depth: usize) -> GhostExpr {
    if depth == 0 || rng.gen_bool(0.4) {
        match rng.gen_range(0..4) {
            0 => GhostExpr::int(rng.gen_range(-2..=5)),
            1 => GhostExpr::GhostVar(ghost_scope[rng.gen_range(0..ghost_scope.len())].into()),
            2 => GhostExpr::Unit,
            _ => GhostExpr::EmptySet,
        }
    } else {
        let sub = |rng: &mut ChaCha8Rng| Box::new(gen_ghost_expr(rng, ghost_scope, depth - 1));
        match rng.gen_range(0..5) {
            0 => GhostExpr::Add(
                Box::new(gen_ghost_expr(rng, ghost_scope, 0)),
                Box::new(gen_ghost_expr(rng, ghost_scope, 0)),
            ),
            1 => GhostExpr::Pair(sub(rng), sub(rng)),
            2 => GhostExpr::Singleton(sub(rng)),
            3 => GhostExpr::Union(sub(rng), sub(rng)),
            _ => GhostExpr::Diff(sub(rng), sub(rng)),
        }
    }
}

fn gen_assertion(rng: &mut ChaCha8Rng, ghost_scope: &[&str], depth: usize) -> Assertion {
    let coeff = |rng: &mut ChaCha8Rng| {
        let opts = [
            cvf::heap::Fraction::one(),
            cvf::heap::Fraction::half(),
            cvf::heap::Fraction::new(2, 3).unwrap(),
        ];
        opts[rng.gen_range(0..opts.len())]
    };
    let leaf = |rng: &mut ChaCha8Rng| {
        let kind = match rng.gen_range(0..7) {
            0 => AssertionKind::PointsTo(
                coeff(rng),
                gen_ghost_expr(rng, ghost_scope, 1),
                gen_ghost_expr(rng, ghost_scope, 1),
            ),
            1 => AssertionKind::GhostPointsTo(
                coeff(rng),
                gen_ghost_expr(rng, ghost_scope, 1),
                gen_ghost_expr(rng, ghost_scope, 1),
            ),
            2 => AssertionKind::AtomicSpace(
                coeff(rng),
                gen_ghost_expr(rng, ghost_scope, 0),
                gen_ghost_expr(rng, ghost_scope, 0),
            ),
            3 => AssertionKind::PredApp(GhostExpr::GhostVar(
                ghost_scope[rng.gen_range(0..ghost_scope.len())].into(),
            )),
            4 => AssertionKind::Emp,
            5 => AssertionKind::PureEq(
                gen_ghost_expr(rng, ghost_scope, 1),
                gen_ghost_expr(rng, ghost_scope, 1),
            ),
            _ => AssertionKind::AtomicSpaces(gen_ghost_expr(rng, ghost_scope, 0)),
        };
        Assertion::new(Default::default(), kind)
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.gen_range(0..3) {
        // separating conjunction is right associated; exists only in tail
        // position, matching what the grammar can express
        0 => Assertion::sep(leaf(rng), gen_assertion(rng, ghost_scope, depth - 1)),
        1 => Assertion::new(
            Default::default(),
            AssertionKind::Exists(
                format!("w{depth}"),
                Box::new({
                    let mut scope: Vec<&str> = ghost_scope.to_vec();
                    let name = format!("w{depth}");
                    let leaked: &str = Box::leak(name.into_boxed_str());
                    scope.push(leaked);
                    gen_assertion(rng, &scope, depth - 1)
                }),
            ),
        ),
        _ => leaf(rng),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn generated_commands_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scope = Vec::new();
        let cmd = gen_command(&mut rng, &mut scope, 4);
        let text = command_to_string(&cmd);
        let parsed = parse_program(&text)
            .unwrap_or_else(|e| panic!("generated program must reparse: {e}\n{text}"));
        prop_assert_eq!(erase(&parsed.main), cmd);
    }

    #[test]
    fn generated_assertions_round_trip(seed in any::<u64>()) {
        let decls = prelude_decls();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = gen_assertion(&mut rng, &["g0", "g1", "g2"], 3);
        let text = a.to_string();
        let parsed = parse_assertion_str(&text, &decls, &[], &["g0", "g1", "g2"])
            .unwrap_or_else(|e| panic!("generated assertion must reparse: {e}\n{text}"));
        prop_assert_eq!(parsed, a);
    }

    #[test]
    fn subst_commutes_with_erase(seed in any::<u64>(), v in -5i64..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // free program variables f0, f1 are in scope for generation only
        let mut scope = vec!["f0".to_string(), "f1".to_string()];
        let cmd = gen_command(&mut rng, &mut scope, 3);
        let annotated = embed(&cmd);
        let mut b = Bindings::new();
        b.prog.insert("f0".into(), v);
        b.ghost.insert("gfree".into(), GhostExpr::int(1));
        let left = erase(&subst_annotated(&annotated, &b));
        let right = subst_command(&erase(&annotated), &b.prog);
        prop_assert_eq!(left, right);
    }

    #[test]
    fn erase_never_leaves_ghost_nodes(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scope = Vec::new();
        let cmd = gen_command(&mut rng, &mut scope, 3);
        // a command embedded and re-erased is unchanged; the result type
        // cannot carry ghost constructs, so a full walk is the identity
        prop_assert_eq!(erase(&embed(&cmd)), cmd);
    }
}

#[test]
fn par_accepts_a_precondition_on_either_branch_independently() {
    let p = parse_program("let x = cons(0) in par pre { x |-> 0 } { 0 } { 0 }; 0").unwrap();
    fn find_par(c: &AnnotatedCommand) -> Option<&AnnotatedCommandKind> {
        match &c.kind {
            k @ AnnotatedCommandKind::Par { .. } => Some(k),
            AnnotatedCommandKind::Let(_, rhs, body) => find_par(rhs).or_else(|| find_par(body)),
            AnnotatedCommandKind::GLet(_, _, body) => find_par(body),
            _ => None,
        }
    }
    match find_par(&p.main).expect("par node") {
        AnnotatedCommandKind::Par {
            pre_left,
            pre_right,
            ..
        } => {
            assert!(pre_left.is_some());
            assert!(pre_right.is_none());
        }
        _ => unreachable!(),
    }
    // and the mixed form round-trips
    let printed = program_to_string(&p);
    assert_eq!(parse_program(&printed).unwrap(), p);
}

#[test]
fn let_shadowing_resolves_to_the_innermost_binder() {
    let src = "let x = cons(0) in let x = cons(1) in let v = *x in assert v == 1";
    let program = parse_program(src).unwrap();
    let report = cvf::verify::verify_program(&program);
    assert!(report.is_verified(), "{report}");
    let erased = erase(&program.main);
    let explored = cvf::explore::explore(&cvf::interp::Configuration::initial(erased), 64);
    assert!(explored.is_safe());
}
