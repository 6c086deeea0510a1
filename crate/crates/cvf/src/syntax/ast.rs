//! Abstract syntax for the concrete language, the annotated language,
//! ghost declarations, ghost commands and assertions.

use super::span::Span;
use crate::heap::{Fraction, GhostValue};

/// Program expressions: integer literals and program variables.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    IntLit(i64),
    Var(String),
}

impl Expr {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Expr::IntLit(z) => Some(*z),
            Expr::Var(_) => None,
        }
    }
}

/// The four instruction forms of the concrete language.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Instr {
    /// `cons(e)`: allocate a fresh cell initialized to `e`.
    Cons(Expr),
    /// `faa(e, e')`: atomic fetch-and-add, evaluates to the old value.
    Faa(Expr, Expr),
    /// `*e`: read the cell at address `e`.
    Deref(Expr),
    /// `assert e == e'`: steps to 0 only when both sides are equal.
    AssertEq(Expr, Expr),
}

/// Commands of the concrete (erased) language.
///
/// `c; c'` is parsed as `Let("_", c, c')`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Expr(Expr),
    Instr(Instr),
    Let(String, Box<Command>, Box<Command>),
    Par(Box<Command>, Box<Command>),
}

impl Command {
    /// True when the command is a value (an integer literal).
    pub fn is_value(&self) -> bool {
        matches!(self, Command::Expr(Expr::IntLit(_)))
    }

    pub fn value(&self) -> Option<i64> {
        match self {
            Command::Expr(Expr::IntLit(z)) => Some(*z),
            _ => None,
        }
    }

    /// Number of interior nodes (`Let` and `Par`).
    pub fn interior_nodes(&self) -> usize {
        match self {
            Command::Expr(_) | Command::Instr(_) => 0,
            Command::Let(_, a, b) => 1 + a.interior_nodes() + b.interior_nodes(),
            Command::Par(a, b) => 1 + a.interior_nodes() + b.interior_nodes(),
        }
    }
}

/// Ghost expressions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GhostExpr {
    /// A ghost value literal. The parser only ever produces `Int` literals
    /// here; other value shapes arise internally.
    Value(GhostValue),
    /// A program variable occurrence.
    ProgVar(String),
    /// A ghost variable occurrence.
    GhostVar(String),
    Add(Box<GhostExpr>, Box<GhostExpr>),
    /// `p(E, ..)` for a declared predicate constructor `p`.
    PredCtorApp(String, Vec<GhostExpr>),
    Pair(Box<GhostExpr>, Box<GhostExpr>),
    Unit,
    EmptySet,
    Singleton(Box<GhostExpr>),
    Union(Box<GhostExpr>, Box<GhostExpr>),
    Diff(Box<GhostExpr>, Box<GhostExpr>),
}

impl GhostExpr {
    pub fn int(z: i64) -> Self {
        GhostExpr::Value(GhostValue::Int(z))
    }

    /// Converts a ghost expression back to a program expression when it is
    /// one (a program variable or an integer literal).
    pub fn as_program_expr(&self) -> Option<Expr> {
        match self {
            GhostExpr::ProgVar(x) => Some(Expr::Var(x.clone())),
            GhostExpr::Value(GhostValue::Int(z)) => Some(Expr::IntLit(*z)),
            _ => None,
        }
    }
}

/// Assertions.
///
/// `Emp` and `PureEq` extend the core grammar so that trivial contracts
/// (`emp`, `res == v`) are expressible. `HeapChunk` is internal: the
/// parser rejects it in user programs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assertion {
    pub span: Span,
    pub kind: AssertionKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssertionKind {
    /// `[pi] E |-> E`
    PointsTo(Fraction, GhostExpr, GhostExpr),
    /// `[pi] E |->g E`
    GhostPointsTo(Fraction, GhostExpr, GhostExpr),
    /// `E()`
    PredApp(GhostExpr),
    /// `[pi] atomic_space(E, E)`
    AtomicSpace(Fraction, GhostExpr, GhostExpr),
    /// `E : t(E, ..)`
    LemType(GhostExpr, String, Vec<GhostExpr>),
    /// `exists g. a`
    Exists(String, Box<Assertion>),
    /// `atomic_spaces(E)`
    AtomicSpaces(GhostExpr),
    /// `heap(E)` (internal)
    HeapChunk(GhostExpr),
    /// `a * a`
    SepConj(Box<Assertion>, Box<Assertion>),
    Emp,
    /// `E == E`
    PureEq(GhostExpr, GhostExpr),
}

impl Assertion {
    pub fn new(span: Span, kind: AssertionKind) -> Self {
        Assertion { span, kind }
    }

    pub fn emp() -> Self {
        Assertion::new(Span::default(), AssertionKind::Emp)
    }

    pub fn sep(a: Assertion, b: Assertion) -> Self {
        let span = a.span;
        Assertion::new(span, AssertionKind::SepConj(Box::new(a), Box::new(b)))
    }
}

/// Ghost declarations: lemma types and predicate constructors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GhostDecl {
    /// `lem_type t(g..) = lem(g'..) forall g''.. req a ens a'`
    LemType {
        span: Span,
        name: String,
        type_params: Vec<String>,
        lemma_params: Vec<String>,
        forall_params: Vec<String>,
        req: Assertion,
        ens: Assertion,
    },
    /// `pred_ctor p(g..)() = a`
    PredCtor {
        span: Span,
        name: String,
        params: Vec<String>,
        body: Assertion,
    },
}

impl GhostDecl {
    pub fn name(&self) -> &str {
        match self {
            GhostDecl::LemType { name, .. } => name,
            GhostDecl::PredCtor { name, .. } => name,
        }
    }
}

/// Ghost instructions (the `I` level).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GhostInstr {
    pub span: Span,
    pub kind: GhostInstrKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GhostInstrKind {
    /// `E(E, ..)`: lemma call.
    LemCall(GhostExpr, Vec<GhostExpr>),
    /// `gcons(E)`: allocate a ghost cell.
    GCons(GhostExpr),
    /// `*E <-g E`: mutate a ghost cell.
    GAssign(GhostExpr, GhostExpr),
    OpenAtomicSpace(GhostExpr, GhostExpr),
    CloseAtomicSpace(GhostExpr, GhostExpr),
    /// `E <-h E`: heap chunk update (internal).
    HeapUpdate(GhostExpr, GhostExpr),
}

/// Inner ghost commands (the `G` level): instructions and ghost lets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InnerGhost {
    Instr(GhostInstr),
    GLet(String, Box<InnerGhost>, Box<InnerGhost>),
}

impl InnerGhost {
    pub fn span(&self) -> Span {
        match self {
            InnerGhost::Instr(i) => i.span,
            InnerGhost::GLet(_, rhs, _) => rhs.span(),
        }
    }
}

/// Outer ghost commands (the `C` level).
///
/// `ProduceLemPtrChunk`, `CreateAtomicSpace` and `DestroyAtomicSpace` only
/// exist at this level, so they can never occur inside a lemma body.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OuterGhost {
    pub span: Span,
    pub kind: OuterGhostKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OuterGhostKind {
    Inner(InnerGhost),
    /// `produce_lem_ptr_chunk t(E..)(g..) { G }`
    ProduceLemPtrChunk {
        lem_type: String,
        type_args: Vec<GhostExpr>,
        params: Vec<String>,
        body: InnerGhost,
    },
    CreateAtomicSpace(GhostExpr, GhostExpr),
    DestroyAtomicSpace(GhostExpr, GhostExpr),
}

/// Annotated commands.
///
/// `Par` optionally carries one precondition per branch; the verifier
/// treats a missing precondition as `emp`. `C; rest` is parsed as
/// `GLet("_", C, rest)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotatedCommand {
    pub span: Span,
    pub kind: AnnotatedCommandKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnnotatedCommandKind {
    Expr(Expr),
    Instr(Instr),
    Let(String, Box<AnnotatedCommand>, Box<AnnotatedCommand>),
    Par {
        pre_left: Option<Assertion>,
        left: Box<AnnotatedCommand>,
        pre_right: Option<Assertion>,
        right: Box<AnnotatedCommand>,
    },
    GLet(String, OuterGhost, Box<AnnotatedCommand>),
}

impl AnnotatedCommand {
    pub fn new(span: Span, kind: AnnotatedCommandKind) -> Self {
        AnnotatedCommand { span, kind }
    }
}

/// A declaration table: the built-in prelude followed by user declarations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decls {
    list: Vec<GhostDecl>,
    user_offset: usize,
}

impl Decls {
    pub fn new(prelude: Vec<GhostDecl>) -> Self {
        let user_offset = prelude.len();
        Decls {
            list: prelude,
            user_offset,
        }
    }

    pub fn push(&mut self, d: GhostDecl) {
        self.list.push(d);
    }

    pub fn all(&self) -> &[GhostDecl] {
        &self.list
    }

    pub fn user(&self) -> &[GhostDecl] {
        &self.list[self.user_offset..]
    }

    pub fn prelude(&self) -> &[GhostDecl] {
        &self.list[..self.user_offset]
    }

    pub fn find(&self, name: &str) -> Option<&GhostDecl> {
        self.list.iter().find(|d| d.name() == name)
    }

    pub fn pred_ctor(&self, name: &str) -> Option<(&[String], &Assertion)> {
        match self.find(name) {
            Some(GhostDecl::PredCtor { params, body, .. }) => Some((params, body)),
            _ => None,
        }
    }

    pub fn lem_type(&self, name: &str) -> Option<&GhostDecl> {
        match self.find(name) {
            d @ Some(GhostDecl::LemType { .. }) => d,
            _ => None,
        }
    }
}

/// A parsed program: declarations plus the main annotated command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub decls: Decls,
    pub main: AnnotatedCommand,
}

use std::fmt;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::IntLit(z) => write!(f, "{z}"),
            Expr::Var(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Cons(e) => write!(f, "cons({e})"),
            Instr::Faa(a, b) => write!(f, "faa({a}, {b})"),
            Instr::Deref(e) => write!(f, "*{e}"),
            Instr::AssertEq(a, b) => write!(f, "assert {a} == {b}"),
        }
    }
}

impl fmt::Display for GhostExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GhostExpr::Value(v) => write!(f, "{v}"),
            GhostExpr::ProgVar(x) => write!(f, "{x}"),
            GhostExpr::GhostVar(g) => write!(f, "{g}"),
            GhostExpr::Add(a, b) => {
                write!(f, "{a} + ")?;
                // parenthesize a right-nested sum so reparsing stays left
                // associative
                if matches!(**b, GhostExpr::Add(_, _)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            GhostExpr::PredCtorApp(p, args) => {
                write!(f, "{p}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            GhostExpr::Pair(a, b) => write!(f, "({a}, {b})"),
            GhostExpr::Unit => write!(f, "()"),
            GhostExpr::EmptySet => write!(f, "{{}}"),
            GhostExpr::Singleton(a) => write!(f, "{{{a}}}"),
            GhostExpr::Union(a, b) => write!(f, "union({a}, {b})"),
            GhostExpr::Diff(a, b) => write!(f, "diff({a}, {b})"),
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn coeff(f: &mut fmt::Formatter<'_>, c: &Fraction) -> fmt::Result {
            if c.is_one() {
                Ok(())
            } else {
                write!(f, "[{c}]")
            }
        }
        match &self.kind {
            AssertionKind::PointsTo(c, a, v) => {
                coeff(f, c)?;
                write!(f, "{a} |-> {v}")
            }
            AssertionKind::GhostPointsTo(c, a, v) => {
                coeff(f, c)?;
                write!(f, "{a} |->g {v}")
            }
            AssertionKind::PredApp(e) => write!(f, "{e}()"),
            AssertionKind::AtomicSpace(c, n, i) => {
                coeff(f, c)?;
                write!(f, "atomic_space({n}, {i})")
            }
            AssertionKind::LemType(e, t, args) => {
                write!(f, "{e} : {t}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            AssertionKind::Exists(g, body) => {
                // flatten directly nested binders
                write!(f, "exists {g}")?;
                let mut b = body;
                while let AssertionKind::Exists(g2, inner) = &b.kind {
                    write!(f, ", {g2}")?;
                    b = inner;
                }
                write!(f, ". {b}")
            }
            AssertionKind::AtomicSpaces(s) => write!(f, "atomic_spaces({s})"),
            AssertionKind::HeapChunk(h) => write!(f, "heap({h})"),
            AssertionKind::SepConj(a, b) => write!(f, "{a} * {b}"),
            AssertionKind::Emp => write!(f, "emp"),
            AssertionKind::PureEq(a, b) => write!(f, "{a} == {b}"),
        }
    }
}

impl fmt::Display for GhostInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GhostInstrKind::LemCall(e, args) => {
                write!(f, "{e}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            GhostInstrKind::GCons(e) => write!(f, "gcons({e})"),
            GhostInstrKind::GAssign(l, r) => write!(f, "*{l} <-g {r}"),
            GhostInstrKind::OpenAtomicSpace(n, i) => write!(f, "open_atomic_space({n}, {i})"),
            GhostInstrKind::CloseAtomicSpace(n, i) => write!(f, "close_atomic_space({n}, {i})"),
            GhostInstrKind::HeapUpdate(l, r) => write!(f, "{l} <-h {r}"),
        }
    }
}

impl fmt::Display for InnerGhost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerGhost::Instr(i) => write!(f, "{i}"),
            InnerGhost::GLet(g, rhs, rest) => {
                if g == "_" {
                    write!(f, "{rhs}; {rest}")
                } else {
                    write!(f, "glet {g} = {rhs} in {rest}")
                }
            }
        }
    }
}
