//! Capture-avoiding simultaneous substitution.
//!
//! Program variables and ghost variables live in separate namespaces, so a
//! binding set carries one map per namespace. Program values are integers;
//! ghost bindings may be arbitrary ghost expressions (usually values).

use super::ast::*;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug, Default)]
pub struct Bindings {
    pub prog: BTreeMap<String, i64>,
    pub ghost: BTreeMap<String, GhostExpr>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn prog_one(x: &str, v: i64) -> Self {
        let mut b = Self::new();
        b.prog.insert(x.to_string(), v);
        b
    }

    pub fn ghost_one(g: &str, e: GhostExpr) -> Self {
        let mut b = Self::new();
        b.ghost.insert(g.to_string(), e);
        b
    }

    fn is_empty(&self) -> bool {
        self.prog.is_empty() && self.ghost.is_empty()
    }

    fn without_ghost(&self, g: &str) -> Self {
        let mut b = self.clone();
        b.ghost.remove(g);
        b
    }

    fn without_prog(&self, x: &str) -> Self {
        let mut b = self.clone();
        b.prog.remove(x);
        b
    }

    /// Ghost variables occurring free in any right-hand side.
    fn ghost_rhs_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in self.ghost.values() {
            free_ghost_vars_expr(e, &mut out);
        }
        out
    }
}

pub fn free_ghost_vars_expr(e: &GhostExpr, out: &mut BTreeSet<String>) {
    match e {
        GhostExpr::Value(_) | GhostExpr::ProgVar(_) | GhostExpr::Unit | GhostExpr::EmptySet => {}
        GhostExpr::GhostVar(g) => {
            out.insert(g.clone());
        }
        GhostExpr::Add(a, b)
        | GhostExpr::Pair(a, b)
        | GhostExpr::Union(a, b)
        | GhostExpr::Diff(a, b) => {
            free_ghost_vars_expr(a, out);
            free_ghost_vars_expr(b, out);
        }
        GhostExpr::PredCtorApp(_, args) => {
            for a in args {
                free_ghost_vars_expr(a, out);
            }
        }
        GhostExpr::Singleton(a) => free_ghost_vars_expr(a, out),
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut i = 0usize;
    loop {
        let candidate = if i == 0 {
            format!("{base}'")
        } else {
            format!("{base}'{i}")
        };
        if !avoid.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

pub fn subst_ghost_expr(e: &GhostExpr, b: &Bindings) -> GhostExpr {
    match e {
        GhostExpr::Value(_) | GhostExpr::Unit | GhostExpr::EmptySet => e.clone(),
        GhostExpr::ProgVar(x) => match b.prog.get(x) {
            Some(v) => GhostExpr::int(*v),
            None => e.clone(),
        },
        GhostExpr::GhostVar(g) => match b.ghost.get(g) {
            Some(rhs) => rhs.clone(),
            None => e.clone(),
        },
        GhostExpr::Add(l, r) => GhostExpr::Add(
            Box::new(subst_ghost_expr(l, b)),
            Box::new(subst_ghost_expr(r, b)),
        ),
        GhostExpr::PredCtorApp(p, args) => GhostExpr::PredCtorApp(
            p.clone(),
            args.iter().map(|a| subst_ghost_expr(a, b)).collect(),
        ),
        GhostExpr::Pair(l, r) => GhostExpr::Pair(
            Box::new(subst_ghost_expr(l, b)),
            Box::new(subst_ghost_expr(r, b)),
        ),
        GhostExpr::Singleton(a) => GhostExpr::Singleton(Box::new(subst_ghost_expr(a, b))),
        GhostExpr::Union(l, r) => GhostExpr::Union(
            Box::new(subst_ghost_expr(l, b)),
            Box::new(subst_ghost_expr(r, b)),
        ),
        GhostExpr::Diff(l, r) => GhostExpr::Diff(
            Box::new(subst_ghost_expr(l, b)),
            Box::new(subst_ghost_expr(r, b)),
        ),
    }
}

/// Picks a safe name for a ghost binder and the bindings to use inside its
/// scope. Renames only when a remaining right-hand side would capture.
fn enter_ghost_binder(
    g: &str,
    free_in_body: BTreeSet<String>,
    b: &Bindings,
) -> (String, Bindings, Option<Bindings>) {
    let inner = b.without_ghost(g);
    if inner.is_empty() || !inner.ghost_rhs_vars().contains(g) {
        return (g.to_string(), inner, None);
    }
    let mut avoid = free_in_body;
    avoid.extend(inner.ghost_rhs_vars());
    avoid.extend(inner.ghost.keys().cloned());
    avoid.insert(g.to_string());
    let fresh = fresh_name(g, &avoid);
    let rename = Bindings::ghost_one(g, GhostExpr::GhostVar(fresh.clone()));
    (fresh, inner, Some(rename))
}

pub fn subst_assertion(a: &Assertion, b: &Bindings) -> Assertion {
    if b.is_empty() {
        return a.clone();
    }
    let kind = match &a.kind {
        AssertionKind::PointsTo(c, l, r) => {
            AssertionKind::PointsTo(*c, subst_ghost_expr(l, b), subst_ghost_expr(r, b))
        }
        AssertionKind::GhostPointsTo(c, l, r) => {
            AssertionKind::GhostPointsTo(*c, subst_ghost_expr(l, b), subst_ghost_expr(r, b))
        }
        AssertionKind::PredApp(e) => AssertionKind::PredApp(subst_ghost_expr(e, b)),
        AssertionKind::AtomicSpace(c, n, i) => {
            AssertionKind::AtomicSpace(*c, subst_ghost_expr(n, b), subst_ghost_expr(i, b))
        }
        AssertionKind::LemType(e, t, args) => AssertionKind::LemType(
            subst_ghost_expr(e, b),
            t.clone(),
            args.iter().map(|x| subst_ghost_expr(x, b)).collect(),
        ),
        AssertionKind::Exists(g, body) => {
            let mut free = BTreeSet::new();
            free_ghost_vars_assertion(body, &mut free);
            let (name, inner, rename) = enter_ghost_binder(g, free, b);
            let body = match rename {
                Some(r) => subst_assertion(&subst_assertion(body, &r), &inner),
                None => subst_assertion(body, &inner),
            };
            AssertionKind::Exists(name, Box::new(body))
        }
        AssertionKind::AtomicSpaces(s) => AssertionKind::AtomicSpaces(subst_ghost_expr(s, b)),
        AssertionKind::HeapChunk(h) => AssertionKind::HeapChunk(subst_ghost_expr(h, b)),
        AssertionKind::SepConj(l, r) => AssertionKind::SepConj(
            Box::new(subst_assertion(l, b)),
            Box::new(subst_assertion(r, b)),
        ),
        AssertionKind::Emp => AssertionKind::Emp,
        AssertionKind::PureEq(l, r) => {
            AssertionKind::PureEq(subst_ghost_expr(l, b), subst_ghost_expr(r, b))
        }
    };
    Assertion::new(a.span, kind)
}

pub fn free_ghost_vars_assertion(a: &Assertion, out: &mut BTreeSet<String>) {
    match &a.kind {
        AssertionKind::PointsTo(_, l, r)
        | AssertionKind::GhostPointsTo(_, l, r)
        | AssertionKind::AtomicSpace(_, l, r)
        | AssertionKind::PureEq(l, r) => {
            free_ghost_vars_expr(l, out);
            free_ghost_vars_expr(r, out);
        }
        AssertionKind::PredApp(e)
        | AssertionKind::AtomicSpaces(e)
        | AssertionKind::HeapChunk(e) => free_ghost_vars_expr(e, out),
        AssertionKind::LemType(e, _, args) => {
            free_ghost_vars_expr(e, out);
            for x in args {
                free_ghost_vars_expr(x, out);
            }
        }
        AssertionKind::Exists(g, body) => {
            let mut inner = BTreeSet::new();
            free_ghost_vars_assertion(body, &mut inner);
            inner.remove(g);
            out.extend(inner);
        }
        AssertionKind::SepConj(l, r) => {
            free_ghost_vars_assertion(l, out);
            free_ghost_vars_assertion(r, out);
        }
        AssertionKind::Emp => {}
    }
}

pub fn subst_expr(e: &Expr, prog: &BTreeMap<String, i64>) -> Expr {
    match e {
        Expr::IntLit(_) => e.clone(),
        Expr::Var(x) => match prog.get(x) {
            Some(v) => Expr::IntLit(*v),
            None => e.clone(),
        },
    }
}

fn subst_instr(i: &Instr, prog: &BTreeMap<String, i64>) -> Instr {
    match i {
        Instr::Cons(e) => Instr::Cons(subst_expr(e, prog)),
        Instr::Faa(a, b) => Instr::Faa(subst_expr(a, prog), subst_expr(b, prog)),
        Instr::Deref(e) => Instr::Deref(subst_expr(e, prog)),
        Instr::AssertEq(a, b) => Instr::AssertEq(subst_expr(a, prog), subst_expr(b, prog)),
    }
}

/// `c[v/x]` for the concrete language. Integer right-hand sides can never
/// capture, so shadowing is the only scope concern.
pub fn subst_command(c: &Command, prog: &BTreeMap<String, i64>) -> Command {
    if prog.is_empty() {
        return c.clone();
    }
    match c {
        Command::Expr(e) => Command::Expr(subst_expr(e, prog)),
        Command::Instr(i) => Command::Instr(subst_instr(i, prog)),
        Command::Let(x, rhs, body) => {
            let rhs = subst_command(rhs, prog);
            let mut inner = prog.clone();
            inner.remove(x);
            Command::Let(
                x.clone(),
                Box::new(rhs),
                Box::new(subst_command(body, &inner)),
            )
        }
        Command::Par(l, r) => Command::Par(
            Box::new(subst_command(l, prog)),
            Box::new(subst_command(r, prog)),
        ),
    }
}

fn subst_ghost_instr(i: &GhostInstr, b: &Bindings) -> GhostInstr {
    let kind = match &i.kind {
        GhostInstrKind::LemCall(f, args) => GhostInstrKind::LemCall(
            subst_ghost_expr(f, b),
            args.iter().map(|a| subst_ghost_expr(a, b)).collect(),
        ),
        GhostInstrKind::GCons(e) => GhostInstrKind::GCons(subst_ghost_expr(e, b)),
        GhostInstrKind::GAssign(l, r) => {
            GhostInstrKind::GAssign(subst_ghost_expr(l, b), subst_ghost_expr(r, b))
        }
        GhostInstrKind::OpenAtomicSpace(n, iv) => {
            GhostInstrKind::OpenAtomicSpace(subst_ghost_expr(n, b), subst_ghost_expr(iv, b))
        }
        GhostInstrKind::CloseAtomicSpace(n, iv) => {
            GhostInstrKind::CloseAtomicSpace(subst_ghost_expr(n, b), subst_ghost_expr(iv, b))
        }
        GhostInstrKind::HeapUpdate(l, r) => {
            GhostInstrKind::HeapUpdate(subst_ghost_expr(l, b), subst_ghost_expr(r, b))
        }
    };
    GhostInstr { span: i.span, kind }
}

pub fn subst_inner_ghost(g: &InnerGhost, b: &Bindings) -> InnerGhost {
    match g {
        InnerGhost::Instr(i) => InnerGhost::Instr(subst_ghost_instr(i, b)),
        InnerGhost::GLet(x, rhs, body) => {
            let rhs = subst_inner_ghost(rhs, b);
            let mut free = BTreeSet::new();
            free_ghost_vars_inner(body, &mut free);
            let (name, inner, rename) = enter_ghost_binder(x, free, b);
            let body = match rename {
                Some(r) => subst_inner_ghost(&subst_inner_ghost(body, &r), &inner),
                None => subst_inner_ghost(body, &inner),
            };
            InnerGhost::GLet(name, Box::new(rhs), Box::new(body))
        }
    }
}

pub fn free_ghost_vars_inner(g: &InnerGhost, out: &mut BTreeSet<String>) {
    match g {
        InnerGhost::Instr(i) => match &i.kind {
            GhostInstrKind::LemCall(f, args) => {
                free_ghost_vars_expr(f, out);
                for a in args {
                    free_ghost_vars_expr(a, out);
                }
            }
            GhostInstrKind::GCons(e) => free_ghost_vars_expr(e, out),
            GhostInstrKind::GAssign(l, r)
            | GhostInstrKind::OpenAtomicSpace(l, r)
            | GhostInstrKind::CloseAtomicSpace(l, r)
            | GhostInstrKind::HeapUpdate(l, r) => {
                free_ghost_vars_expr(l, out);
                free_ghost_vars_expr(r, out);
            }
        },
        InnerGhost::GLet(x, rhs, body) => {
            free_ghost_vars_inner(rhs, out);
            let mut inner = BTreeSet::new();
            free_ghost_vars_inner(body, &mut inner);
            inner.remove(x);
            out.extend(inner);
        }
    }
}

pub fn subst_outer_ghost(g: &OuterGhost, b: &Bindings) -> OuterGhost {
    let kind = match &g.kind {
        OuterGhostKind::Inner(i) => OuterGhostKind::Inner(subst_inner_ghost(i, b)),
        OuterGhostKind::ProduceLemPtrChunk {
            lem_type,
            type_args,
            params,
            body,
        } => {
            let type_args = type_args.iter().map(|a| subst_ghost_expr(a, b)).collect();
            // lemma parameters shadow; renaming-on-capture is handled one
            // binder at a time
            let mut inner = b.clone();
            for p in params {
                inner.ghost.remove(p);
            }
            let rhs_vars = inner.ghost_rhs_vars();
            let mut params = params.clone();
            let mut body = body.clone();
            for p in params.iter_mut() {
                if rhs_vars.contains(p) {
                    let mut avoid = rhs_vars.clone();
                    let mut free = BTreeSet::new();
                    free_ghost_vars_inner(&body, &mut free);
                    avoid.extend(free);
                    let fresh = fresh_name(p, &avoid);
                    let rename = Bindings::ghost_one(p, GhostExpr::GhostVar(fresh.clone()));
                    body = subst_inner_ghost(&body, &rename);
                    *p = fresh;
                }
            }
            OuterGhostKind::ProduceLemPtrChunk {
                lem_type: lem_type.clone(),
                type_args,
                params,
                body: subst_inner_ghost(&body, &inner),
            }
        }
        OuterGhostKind::CreateAtomicSpace(n, i) => {
            OuterGhostKind::CreateAtomicSpace(subst_ghost_expr(n, b), subst_ghost_expr(i, b))
        }
        OuterGhostKind::DestroyAtomicSpace(n, i) => {
            OuterGhostKind::DestroyAtomicSpace(subst_ghost_expr(n, b), subst_ghost_expr(i, b))
        }
    };
    OuterGhost { span: g.span, kind }
}

pub fn subst_annotated(c: &AnnotatedCommand, b: &Bindings) -> AnnotatedCommand {
    if b.is_empty() {
        return c.clone();
    }
    let kind = match &c.kind {
        AnnotatedCommandKind::Expr(e) => AnnotatedCommandKind::Expr(subst_expr(e, &b.prog)),
        AnnotatedCommandKind::Instr(i) => AnnotatedCommandKind::Instr(subst_instr(i, &b.prog)),
        AnnotatedCommandKind::Let(x, rhs, body) => {
            let rhs = subst_annotated(rhs, b);
            let inner = b.without_prog(x);
            AnnotatedCommandKind::Let(
                x.clone(),
                Box::new(rhs),
                Box::new(subst_annotated(body, &inner)),
            )
        }
        AnnotatedCommandKind::Par {
            pre_left,
            left,
            pre_right,
            right,
        } => AnnotatedCommandKind::Par {
            pre_left: pre_left.as_ref().map(|a| subst_assertion(a, b)),
            left: Box::new(subst_annotated(left, b)),
            pre_right: pre_right.as_ref().map(|a| subst_assertion(a, b)),
            right: Box::new(subst_annotated(right, b)),
        },
        AnnotatedCommandKind::GLet(g, rhs, body) => {
            let rhs = subst_outer_ghost(rhs, b);
            let mut free = BTreeSet::new();
            free_ghost_vars_annotated(body, &mut free);
            let (name, inner, rename) = enter_ghost_binder(g, free, b);
            let body = match rename {
                Some(r) => subst_annotated(&subst_annotated(body, &r), &inner),
                None => subst_annotated(body, &inner),
            };
            AnnotatedCommandKind::GLet(name, rhs, Box::new(body))
        }
    };
    AnnotatedCommand::new(c.span, kind)
}

pub fn free_ghost_vars_annotated(c: &AnnotatedCommand, out: &mut BTreeSet<String>) {
    match &c.kind {
        AnnotatedCommandKind::Expr(_) | AnnotatedCommandKind::Instr(_) => {}
        AnnotatedCommandKind::Let(_, rhs, body) => {
            free_ghost_vars_annotated(rhs, out);
            free_ghost_vars_annotated(body, out);
        }
        AnnotatedCommandKind::Par {
            pre_left,
            left,
            pre_right,
            right,
        } => {
            if let Some(a) = pre_left {
                free_ghost_vars_assertion(a, out);
            }
            if let Some(a) = pre_right {
                free_ghost_vars_assertion(a, out);
            }
            free_ghost_vars_annotated(left, out);
            free_ghost_vars_annotated(right, out);
        }
        AnnotatedCommandKind::GLet(g, rhs, body) => {
            match &rhs.kind {
                OuterGhostKind::Inner(i) => free_ghost_vars_inner(i, out),
                OuterGhostKind::ProduceLemPtrChunk {
                    type_args,
                    params,
                    body: gbody,
                    ..
                } => {
                    for a in type_args {
                        free_ghost_vars_expr(a, out);
                    }
                    let mut inner = BTreeSet::new();
                    free_ghost_vars_inner(gbody, &mut inner);
                    for p in params {
                        inner.remove(p);
                    }
                    out.extend(inner);
                }
                OuterGhostKind::CreateAtomicSpace(n, i)
                | OuterGhostKind::DestroyAtomicSpace(n, i) => {
                    free_ghost_vars_expr(n, out);
                    free_ghost_vars_expr(i, out);
                }
            }
            let mut inner = BTreeSet::new();
            free_ghost_vars_annotated(body, &mut inner);
            inner.remove(g);
            out.extend(inner);
        }
    }
}
