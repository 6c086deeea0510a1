//! Recursive descent parser for `.cvf` source files.
//!
//! Namespaces are resolved during parsing: a bare identifier is a program
//! variable or a ghost variable depending on the binder that introduced it
//! (`let` vs `glet`/`exists`/declaration parameters). Predicate constructor
//! applications are resolved against the declaration table, which is why
//! declaration headers are collected in a prescan pass.

use super::ast::*;
use super::lexer::{lex, LexError, Tok, Token};
use super::prelude::prelude_decls;
use super::span::Span;
use crate::heap::Fraction;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{span}: expected {expected}, found {found}")]
    Unexpected {
        span: Span,
        expected: String,
        found: String,
    },
    #[error("{span}: unbound variable `{name}`")]
    Unbound { span: Span, name: String },
    #[error("{span}: `{name}` expects {expected} argument(s), got {got}")]
    Arity {
        span: Span,
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{span}: duplicate declaration `{name}`")]
    Duplicate { span: Span, name: String },
    #[error("{span}: `{name}` redeclares a prelude name")]
    PreludeRedecl { span: Span, name: String },
    #[error("{span}: internal form `{form}` is not allowed in source programs")]
    InternalForm { span: Span, form: &'static str },
    #[error("{span}: `res` is reserved for postconditions")]
    ReservedRes { span: Span },
    #[error("{span}: duplicate parameter `{name}`")]
    DuplicateParam { span: Span, name: String },
    #[error("{span}: coefficient must be a positive rational")]
    BadCoefficient { span: Span },
    #[error("{span}: ghost variable `{name}` cannot be used as a command")]
    GhostVarAsCommand { span: Span, name: String },
    #[error("{span}: `{found}` is not a program expression")]
    NotProgramExpr { span: Span, found: String },
}

pub type ParseResult<T> = Result<T, ParseError>;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Ns {
    Prog,
    Ghost,
}

#[derive(Clone, Copy, Debug)]
enum SigKind {
    PredCtor,
    LemType,
}

#[derive(Clone, Copy, Debug)]
struct DeclSig {
    kind: SigKind,
    arity: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    sigs: HashMap<String, DeclSig>,
    scopes: Vec<HashMap<String, Ns>>,
    allow_internal: bool,
    allow_res: bool,
}

/// Parses a full program in user mode: the built-in prelude is preloaded
/// and internal forms (`heap(..)`, `<-h`) are rejected.
pub fn parse_program(src: &str) -> ParseResult<Program> {
    let prelude = prelude_decls();
    let mut p = Parser::new(src, false)?;
    p.load_sigs(&prelude);
    p.prescan()?;
    let mut decls = Decls::new(prelude.all().to_vec());
    p.parse_decls(&mut decls, true)?;
    p.scopes.push(HashMap::new());
    let main = p.parse_acmd_seq()?;
    p.expect(Tok::Eof)?;
    Ok(Program { decls, main })
}

/// Parses a declaration-only source in internal mode. Used for the prelude.
pub(crate) fn parse_decls_internal(src: &str) -> ParseResult<Vec<GhostDecl>> {
    let mut p = Parser::new(src, true)?;
    p.prescan()?;
    let mut decls = Decls::new(Vec::new());
    p.parse_decls(&mut decls, false)?;
    p.expect(Tok::Eof)?;
    Ok(decls.all().to_vec())
}

/// Parses a standalone assertion against a declaration table, with the
/// given program and ghost variables in scope. `res` is allowed.
pub fn parse_assertion_str(
    src: &str,
    decls: &Decls,
    prog_vars: &[&str],
    ghost_vars: &[&str],
) -> ParseResult<Assertion> {
    let mut p = Parser::new(src, false)?;
    p.load_sigs(decls);
    p.allow_res = true;
    let mut scope = HashMap::new();
    for v in prog_vars {
        scope.insert((*v).to_string(), Ns::Prog);
    }
    for v in ghost_vars {
        scope.insert((*v).to_string(), Ns::Ghost);
    }
    p.scopes.push(scope);
    let a = p.parse_assertion()?;
    p.expect(Tok::Eof)?;
    Ok(a)
}

impl Parser {
    fn new(src: &str, allow_internal: bool) -> ParseResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            sigs: HashMap::new(),
            scopes: Vec::new(),
            allow_internal,
            allow_res: false,
        })
    }

    fn load_sigs(&mut self, decls: &Decls) {
        for d in decls.all() {
            let sig = match d {
                GhostDecl::PredCtor { params, .. } => DeclSig {
                    kind: SigKind::PredCtor,
                    arity: params.len(),
                },
                GhostDecl::LemType { type_params, .. } => DeclSig {
                    kind: SigKind::LemType,
                    arity: type_params.len(),
                },
            };
            self.sigs.insert(d.name().to_string(), sig);
        }
    }

    /// Collects declaration headers so that applications may reference
    /// declarations in any order.
    fn prescan(&mut self) -> ParseResult<()> {
        let mut i = 0;
        while i < self.toks.len() {
            let kind = match self.toks[i].tok {
                Tok::PredCtor => SigKind::PredCtor,
                Tok::LemType => SigKind::LemType,
                _ => {
                    i += 1;
                    continue;
                }
            };
            if let Some(Token {
                tok: Tok::Ident(name),
                ..
            }) = self.toks.get(i + 1)
            {
                let mut arity = 0;
                if matches!(self.toks.get(i + 2).map(|t| &t.tok), Some(Tok::LParen)) {
                    let mut j = i + 3;
                    while let Some(t) = self.toks.get(j) {
                        match &t.tok {
                            Tok::RParen => break,
                            Tok::Ident(_) => arity += 1,
                            Tok::Comma => {}
                            _ => break,
                        }
                        j += 1;
                    }
                }
                self.sigs.insert(name.clone(), DeclSig { kind, arity });
            }
            i += 1;
        }
        Ok(())
    }

    // ----- token helpers -----

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> ParseResult<Span> {
        if self.at(&t) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("{t}")))
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Unexpected {
            span: self.span(),
            expected: expected.to_string(),
            found: format!("{}", self.peek()),
        }
    }

    fn expect_ident(&mut self) -> ParseResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                let sp = self.bump().span;
                Ok((x, sp))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    // ----- scopes -----

    fn bind(&mut self, name: &str, ns: Ns, span: Span) -> ParseResult<()> {
        if name == "res" {
            return Err(ParseError::ReservedRes { span });
        }
        self.scopes
            .last_mut()
            .expect("scope stack")
            .insert(name.to_string(), ns);
        Ok(())
    }

    fn resolve(&self, name: &str, span: Span) -> ParseResult<Ns> {
        for scope in self.scopes.iter().rev() {
            if let Some(ns) = scope.get(name) {
                return Ok(*ns);
            }
        }
        if name == "res" {
            if self.allow_res {
                return Ok(Ns::Ghost);
            }
            return Err(ParseError::ReservedRes { span });
        }
        Err(ParseError::Unbound {
            span,
            name: name.to_string(),
        })
    }

    // ----- declarations -----

    fn parse_decls(&mut self, decls: &mut Decls, user_mode: bool) -> ParseResult<()> {
        loop {
            match self.peek() {
                Tok::PredCtor => {
                    let d = self.parse_pred_ctor()?;
                    self.check_decl_name(decls, &d, user_mode)?;
                    decls.push(d);
                }
                Tok::LemType => {
                    let d = self.parse_lem_type()?;
                    self.check_decl_name(decls, &d, user_mode)?;
                    decls.push(d);
                }
                _ => return Ok(()),
            }
        }
    }

    fn check_decl_name(&self, decls: &Decls, d: &GhostDecl, user_mode: bool) -> ParseResult<()> {
        let span = match d {
            GhostDecl::PredCtor { span, .. } | GhostDecl::LemType { span, .. } => *span,
        };
        if decls.find(d.name()).is_some() {
            if user_mode && decls.prelude().iter().any(|p| p.name() == d.name()) {
                return Err(ParseError::PreludeRedecl {
                    span,
                    name: d.name().to_string(),
                });
            }
            return Err(ParseError::Duplicate {
                span,
                name: d.name().to_string(),
            });
        }
        Ok(())
    }

    fn parse_params(&mut self) -> ParseResult<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let (name, sp) = self.expect_ident()?;
                if name == "res" {
                    return Err(ParseError::ReservedRes { span: sp });
                }
                if params.contains(&name) {
                    return Err(ParseError::DuplicateParam { span: sp, name });
                }
                params.push(name);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(params)
    }

    fn parse_pred_ctor(&mut self) -> ParseResult<GhostDecl> {
        let span = self.expect(Tok::PredCtor)?;
        let (name, _) = self.expect_ident()?;
        let params = self.parse_params()?;
        self.expect(Tok::LParen)?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Assign)?;
        let mut scope = HashMap::new();
        for p in &params {
            scope.insert(p.clone(), Ns::Ghost);
        }
        self.scopes.push(scope);
        let body = self.parse_assertion()?;
        self.scopes.pop();
        Ok(GhostDecl::PredCtor {
            span,
            name,
            params,
            body,
        })
    }

    fn parse_lem_type(&mut self) -> ParseResult<GhostDecl> {
        let span = self.expect(Tok::LemType)?;
        let (name, _) = self.expect_ident()?;
        let type_params = self.parse_params()?;
        self.expect(Tok::Assign)?;
        self.expect(Tok::Lem)?;
        let lemma_params = self.parse_params()?;
        let mut forall_params = Vec::new();
        if self.eat(&Tok::Forall) {
            loop {
                let (p, sp) = self.expect_ident()?;
                if p == "res" {
                    return Err(ParseError::ReservedRes { span: sp });
                }
                forall_params.push(p);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        // all parameter names within one declaration must be distinct
        let mut seen: Vec<&String> = Vec::new();
        for p in type_params
            .iter()
            .chain(lemma_params.iter())
            .chain(forall_params.iter())
        {
            if seen.contains(&p) {
                return Err(ParseError::DuplicateParam {
                    span,
                    name: p.clone(),
                });
            }
            seen.push(p);
        }
        let mut scope = HashMap::new();
        for p in &seen {
            scope.insert((*p).clone(), Ns::Ghost);
        }
        self.scopes.push(scope);
        self.expect(Tok::Req)?;
        let req = self.parse_assertion()?;
        self.expect(Tok::Ens)?;
        let saved = self.allow_res;
        self.allow_res = true;
        let ens = self.parse_assertion()?;
        self.allow_res = saved;
        self.scopes.pop();
        Ok(GhostDecl::LemType {
            span,
            name,
            type_params,
            lemma_params,
            forall_params,
            req,
            ens,
        })
    }

    // ----- annotated commands -----

    fn parse_acmd_seq(&mut self) -> ParseResult<AnnotatedCommand> {
        let item = self.parse_acmd_item()?;
        match item {
            Item::Cmd(c) => {
                if self.eat(&Tok::Semi) {
                    let rest = self.parse_acmd_seq()?;
                    let span = c.span;
                    Ok(AnnotatedCommand::new(
                        span,
                        AnnotatedCommandKind::Let("_".into(), Box::new(c), Box::new(rest)),
                    ))
                } else {
                    Ok(c)
                }
            }
            Item::Ghost(g) => {
                self.expect(Tok::Semi)?;
                let rest = self.parse_acmd_seq()?;
                let span = g.span;
                Ok(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::GLet("_".into(), g, Box::new(rest)),
                ))
            }
        }
    }

    fn parse_acmd_rhs(&mut self) -> ParseResult<AnnotatedCommand> {
        match self.parse_acmd_item()? {
            Item::Cmd(c) => Ok(c),
            Item::Ghost(g) => Err(ParseError::Unexpected {
                span: g.span,
                expected: "a command (ghost commands are bound with `glet`)".into(),
                found: "ghost command".into(),
            }),
        }
    }

    fn parse_acmd_item(&mut self) -> ParseResult<Item> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Let => {
                self.bump();
                let (x, xsp) = self.expect_ident()?;
                if x == "res" {
                    return Err(ParseError::ReservedRes { span: xsp });
                }
                self.expect(Tok::Assign)?;
                let rhs = self.parse_acmd_rhs()?;
                self.expect(Tok::In)?;
                self.scopes.push(HashMap::new());
                self.bind(&x, Ns::Prog, xsp)?;
                let body = self.parse_acmd_seq()?;
                self.scopes.pop();
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::Let(x, Box::new(rhs), Box::new(body)),
                )))
            }
            Tok::GLet => {
                self.bump();
                let (g, gsp) = self.expect_ident()?;
                if g == "res" {
                    return Err(ParseError::ReservedRes { span: gsp });
                }
                let ghost_span = self.span();
                self.expect(Tok::Assign)?;
                let rhs = self.parse_ghost_outer(ghost_span)?;
                self.expect(Tok::In)?;
                self.scopes.push(HashMap::new());
                self.bind(&g, Ns::Ghost, gsp)?;
                let body = self.parse_acmd_seq()?;
                self.scopes.pop();
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::GLet(g, rhs, Box::new(body)),
                )))
            }
            Tok::Par => {
                self.bump();
                let (pre_left, left) = self.parse_par_branch()?;
                let (pre_right, right) = self.parse_par_branch()?;
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::Par {
                        pre_left,
                        left: Box::new(left),
                        pre_right,
                        right: Box::new(right),
                    },
                )))
            }
            Tok::Ghost => {
                self.bump();
                let sp = self.span();
                let g = self.parse_ghost_outer(sp)?;
                Ok(Item::Ghost(g))
            }
            Tok::GCons
            | Tok::OpenAtomicSpace
            | Tok::CloseAtomicSpace
            | Tok::CreateAtomicSpace
            | Tok::DestroyAtomicSpace
            | Tok::ProduceLemPtrChunk => {
                let g = self.parse_ghost_outer(span)?;
                Ok(Item::Ghost(g))
            }
            Tok::Star => {
                self.bump();
                let e = self.parse_gexpr()?;
                if self.eat(&Tok::GhostAssign) {
                    let rhs = self.parse_gexpr()?;
                    Ok(Item::Ghost(OuterGhost {
                        span,
                        kind: OuterGhostKind::Inner(InnerGhost::Instr(GhostInstr {
                            span,
                            kind: GhostInstrKind::GAssign(e, rhs),
                        })),
                    }))
                } else {
                    let pe = e
                        .as_program_expr()
                        .ok_or_else(|| ParseError::NotProgramExpr {
                            span,
                            found: format!("{e}"),
                        })?;
                    Ok(Item::Cmd(AnnotatedCommand::new(
                        span,
                        AnnotatedCommandKind::Instr(Instr::Deref(pe)),
                    )))
                }
            }
            Tok::Cons => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.parse_pexpr()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::Instr(Instr::Cons(e)),
                )))
            }
            Tok::Faa => {
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.parse_pexpr()?;
                self.expect(Tok::Comma)?;
                let b = self.parse_pexpr()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::Instr(Instr::Faa(a, b)),
                )))
            }
            Tok::Assert => {
                self.bump();
                let a = self.parse_pexpr()?;
                self.expect(Tok::EqEq)?;
                let b = self.parse_pexpr()?;
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::Instr(Instr::AssertEq(a, b)),
                )))
            }
            Tok::Int(z) => {
                self.bump();
                Ok(Item::Cmd(AnnotatedCommand::new(
                    span,
                    AnnotatedCommandKind::Expr(Expr::IntLit(z)),
                )))
            }
            Tok::Ident(x) => {
                if matches!(self.peek2(), Tok::LParen | Tok::HeapAssign) {
                    // lemma call or (internal) heap update statement
                    let instr = self.parse_ghost_instr()?;
                    Ok(Item::Ghost(OuterGhost {
                        span,
                        kind: OuterGhostKind::Inner(InnerGhost::Instr(instr)),
                    }))
                } else {
                    self.bump();
                    match self.resolve(&x, span)? {
                        Ns::Prog => Ok(Item::Cmd(AnnotatedCommand::new(
                            span,
                            AnnotatedCommandKind::Expr(Expr::Var(x)),
                        ))),
                        Ns::Ghost => Err(ParseError::GhostVarAsCommand { span, name: x }),
                    }
                }
            }
            Tok::LParen => {
                self.bump();
                let c = self.parse_acmd_seq()?;
                self.expect(Tok::RParen)?;
                Ok(Item::Cmd(c))
            }
            _ => Err(self.unexpected("a command")),
        }
    }

    fn parse_par_branch(&mut self) -> ParseResult<(Option<Assertion>, AnnotatedCommand)> {
        // contextual keyword `pre`
        let pre = if matches!(self.peek(), Tok::Ident(x) if x == "pre")
            && matches!(self.peek2(), Tok::LBrace)
        {
            self.bump();
            self.expect(Tok::LBrace)?;
            let a = self.parse_assertion()?;
            self.expect(Tok::RBrace)?;
            Some(a)
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let body = self.parse_acmd_seq()?;
        self.expect(Tok::RBrace)?;
        Ok((pre, body))
    }

    fn parse_pexpr(&mut self) -> ParseResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(z) => {
                self.bump();
                Ok(Expr::IntLit(z))
            }
            Tok::Ident(x) => {
                self.bump();
                match self.resolve(&x, span)? {
                    Ns::Prog => Ok(Expr::Var(x)),
                    Ns::Ghost => Err(ParseError::NotProgramExpr {
                        span,
                        found: format!("ghost variable `{x}`"),
                    }),
                }
            }
            _ => Err(self.unexpected("a program expression")),
        }
    }

    // ----- ghost commands -----

    fn parse_ghost_outer(&mut self, span: Span) -> ParseResult<OuterGhost> {
        match self.peek().clone() {
            Tok::ProduceLemPtrChunk => {
                self.bump();
                let (t, tsp) = self.expect_ident()?;
                match self.sigs.get(&t) {
                    Some(DeclSig {
                        kind: SigKind::LemType,
                        arity,
                    }) => {
                        let arity = *arity;
                        self.expect(Tok::LParen)?;
                        let type_args = self.parse_gexpr_list(Tok::RParen)?;
                        self.expect(Tok::RParen)?;
                        if type_args.len() != arity {
                            return Err(ParseError::Arity {
                                span: tsp,
                                name: t,
                                expected: arity,
                                got: type_args.len(),
                            });
                        }
                        let params = self.parse_params()?;
                        self.expect(Tok::LBrace)?;
                        let mut scope = HashMap::new();
                        for p in &params {
                            scope.insert(p.clone(), Ns::Ghost);
                        }
                        self.scopes.push(scope);
                        let body = self.parse_ghost_inner_seq()?;
                        self.scopes.pop();
                        self.expect(Tok::RBrace)?;
                        Ok(OuterGhost {
                            span,
                            kind: OuterGhostKind::ProduceLemPtrChunk {
                                lem_type: t,
                                type_args,
                                params,
                                body,
                            },
                        })
                    }
                    _ => Err(ParseError::Unbound { span: tsp, name: t }),
                }
            }
            Tok::CreateAtomicSpace => {
                self.bump();
                self.expect(Tok::LParen)?;
                let n = self.parse_gexpr()?;
                self.expect(Tok::Comma)?;
                let i = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(OuterGhost {
                    span,
                    kind: OuterGhostKind::CreateAtomicSpace(n, i),
                })
            }
            Tok::DestroyAtomicSpace => {
                self.bump();
                self.expect(Tok::LParen)?;
                let n = self.parse_gexpr()?;
                self.expect(Tok::Comma)?;
                let i = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(OuterGhost {
                    span,
                    kind: OuterGhostKind::DestroyAtomicSpace(n, i),
                })
            }
            _ => {
                let inner = self.parse_ghost_inner_single()?;
                Ok(OuterGhost {
                    span,
                    kind: OuterGhostKind::Inner(inner),
                })
            }
        }
    }

    /// A single inner ghost command (no `;` sequencing): used as the
    /// right-hand side of a `glet`.
    fn parse_ghost_inner_single(&mut self) -> ParseResult<InnerGhost> {
        if self.at(&Tok::GLet) {
            self.bump();
            let (g, gsp) = self.expect_ident()?;
            self.expect(Tok::Assign)?;
            let rhs = self.parse_ghost_inner_single()?;
            self.expect(Tok::In)?;
            self.scopes.push(HashMap::new());
            self.bind(&g, Ns::Ghost, gsp)?;
            let body = self.parse_ghost_inner_single()?;
            self.scopes.pop();
            Ok(InnerGhost::GLet(g, Box::new(rhs), Box::new(body)))
        } else {
            Ok(InnerGhost::Instr(self.parse_ghost_instr()?))
        }
    }

    /// A `;`-separated inner ghost command sequence, as appears inside
    /// `produce_lem_ptr_chunk { ... }` bodies.
    fn parse_ghost_inner_seq(&mut self) -> ParseResult<InnerGhost> {
        let first = if self.at(&Tok::GLet) {
            self.bump();
            let (g, gsp) = self.expect_ident()?;
            self.expect(Tok::Assign)?;
            let rhs = self.parse_ghost_inner_single()?;
            self.expect(Tok::In)?;
            self.scopes.push(HashMap::new());
            self.bind(&g, Ns::Ghost, gsp)?;
            let body = self.parse_ghost_inner_seq()?;
            self.scopes.pop();
            return Ok(InnerGhost::GLet(g, Box::new(rhs), Box::new(body)));
        } else {
            InnerGhost::Instr(self.parse_ghost_instr()?)
        };
        if self.eat(&Tok::Semi) {
            let rest = self.parse_ghost_inner_seq()?;
            Ok(InnerGhost::GLet(
                "_".into(),
                Box::new(first),
                Box::new(rest),
            ))
        } else {
            Ok(first)
        }
    }

    fn parse_ghost_instr(&mut self) -> ParseResult<GhostInstr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::GCons => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(GhostInstr {
                    span,
                    kind: GhostInstrKind::GCons(e),
                })
            }
            Tok::OpenAtomicSpace | Tok::CloseAtomicSpace => {
                let open = self.at(&Tok::OpenAtomicSpace);
                self.bump();
                self.expect(Tok::LParen)?;
                let n = self.parse_gexpr()?;
                self.expect(Tok::Comma)?;
                let i = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(GhostInstr {
                    span,
                    kind: if open {
                        GhostInstrKind::OpenAtomicSpace(n, i)
                    } else {
                        GhostInstrKind::CloseAtomicSpace(n, i)
                    },
                })
            }
            Tok::Star => {
                self.bump();
                let l = self.parse_gexpr()?;
                self.expect(Tok::GhostAssign)?;
                let r = self.parse_gexpr()?;
                Ok(GhostInstr {
                    span,
                    kind: GhostInstrKind::GAssign(l, r),
                })
            }
            _ => {
                let e = self.parse_gexpr()?;
                if self.at(&Tok::HeapAssign) {
                    if !self.allow_internal {
                        return Err(ParseError::InternalForm {
                            span: self.span(),
                            form: "<-h",
                        });
                    }
                    self.bump();
                    let r = self.parse_gexpr()?;
                    Ok(GhostInstr {
                        span,
                        kind: GhostInstrKind::HeapUpdate(e, r),
                    })
                } else {
                    self.expect(Tok::LParen)?;
                    let args = self.parse_gexpr_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    Ok(GhostInstr {
                        span,
                        kind: GhostInstrKind::LemCall(e, args),
                    })
                }
            }
        }
    }

    // ----- ghost expressions -----

    fn parse_gexpr_list(&mut self, terminator: Tok) -> ParseResult<Vec<GhostExpr>> {
        let mut args = Vec::new();
        if !self.at(&terminator) {
            loop {
                args.push(self.parse_gexpr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        Ok(args)
    }

    fn parse_gexpr(&mut self) -> ParseResult<GhostExpr> {
        let mut left = self.parse_gexpr_primary()?;
        while self.eat(&Tok::Plus) {
            let right = self.parse_gexpr_primary()?;
            left = GhostExpr::Add(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parse_gexpr_primary(&mut self) -> ParseResult<GhostExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(z) => {
                self.bump();
                Ok(GhostExpr::int(z))
            }
            Tok::Ident(x) => {
                if let Some(DeclSig {
                    kind: SigKind::PredCtor,
                    arity,
                }) = self.sigs.get(&x).copied()
                {
                    if matches!(self.peek2(), Tok::LParen) {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let args = self.parse_gexpr_list(Tok::RParen)?;
                        self.expect(Tok::RParen)?;
                        if args.len() != arity {
                            return Err(ParseError::Arity {
                                span,
                                name: x,
                                expected: arity,
                                got: args.len(),
                            });
                        }
                        return Ok(GhostExpr::PredCtorApp(x, args));
                    }
                }
                self.bump();
                match self.resolve(&x, span)? {
                    Ns::Prog => Ok(GhostExpr::ProgVar(x)),
                    Ns::Ghost => Ok(GhostExpr::GhostVar(x)),
                }
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(GhostExpr::Unit);
                }
                let first = self.parse_gexpr()?;
                if self.eat(&Tok::Comma) {
                    let second = self.parse_gexpr()?;
                    self.expect(Tok::RParen)?;
                    Ok(GhostExpr::Pair(Box::new(first), Box::new(second)))
                } else {
                    self.expect(Tok::RParen)?;
                    Ok(first)
                }
            }
            Tok::LBrace => {
                self.bump();
                if self.eat(&Tok::RBrace) {
                    return Ok(GhostExpr::EmptySet);
                }
                let e = self.parse_gexpr()?;
                self.expect(Tok::RBrace)?;
                Ok(GhostExpr::Singleton(Box::new(e)))
            }
            Tok::Union | Tok::Diff => {
                let is_union = self.at(&Tok::Union);
                self.bump();
                self.expect(Tok::LParen)?;
                let a = self.parse_gexpr()?;
                self.expect(Tok::Comma)?;
                let b = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(if is_union {
                    GhostExpr::Union(Box::new(a), Box::new(b))
                } else {
                    GhostExpr::Diff(Box::new(a), Box::new(b))
                })
            }
            _ => Err(self.unexpected("a ghost expression")),
        }
    }

    // ----- assertions -----

    fn parse_assertion(&mut self) -> ParseResult<Assertion> {
        let a = self.parse_assertion_term()?;
        if self.eat(&Tok::Star) {
            let b = self.parse_assertion()?;
            Ok(Assertion::sep(a, b))
        } else {
            Ok(a)
        }
    }

    fn parse_frac(&mut self) -> ParseResult<Fraction> {
        let span = self.expect(Tok::LBracket)?;
        let p = match self.peek() {
            Tok::Int(z) => {
                let z = *z;
                self.bump();
                z
            }
            _ => return Err(self.unexpected("a positive integer")),
        };
        let q = if self.eat(&Tok::Slash) {
            match self.peek() {
                Tok::Int(z) => {
                    let z = *z;
                    self.bump();
                    z
                }
                _ => return Err(self.unexpected("a positive integer")),
            }
        } else {
            1
        };
        self.expect(Tok::RBracket)?;
        if p <= 0 || q <= 0 {
            return Err(ParseError::BadCoefficient { span });
        }
        Fraction::new(p, q).ok_or(ParseError::BadCoefficient { span })
    }

    fn parse_assertion_term(&mut self) -> ParseResult<Assertion> {
        let span = self.span();
        match self.peek().clone() {
            Tok::LBracket => {
                let c = self.parse_frac()?;
                if self.at(&Tok::AtomicSpace) {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let n = self.parse_gexpr()?;
                    self.expect(Tok::Comma)?;
                    let i = self.parse_gexpr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Assertion::new(span, AssertionKind::AtomicSpace(c, n, i)));
                }
                let e = self.parse_gexpr()?;
                if self.eat(&Tok::PointsTo) {
                    let v = self.parse_gexpr()?;
                    Ok(Assertion::new(span, AssertionKind::PointsTo(c, e, v)))
                } else if self.eat(&Tok::GhostPointsTo) {
                    let v = self.parse_gexpr()?;
                    Ok(Assertion::new(span, AssertionKind::GhostPointsTo(c, e, v)))
                } else {
                    Err(self.unexpected("`|->` or `|->g` after a coefficient"))
                }
            }
            Tok::Emp => {
                self.bump();
                Ok(Assertion::new(span, AssertionKind::Emp))
            }
            Tok::Exists => {
                self.bump();
                let mut binders = Vec::new();
                loop {
                    let (g, gsp) = self.expect_ident()?;
                    if g == "res" {
                        return Err(ParseError::ReservedRes { span: gsp });
                    }
                    binders.push(g);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Dot)?;
                let mut scope = HashMap::new();
                for b in &binders {
                    scope.insert(b.clone(), Ns::Ghost);
                }
                self.scopes.push(scope);
                let body = self.parse_assertion()?;
                self.scopes.pop();
                let mut a = body;
                for b in binders.into_iter().rev() {
                    a = Assertion::new(span, AssertionKind::Exists(b, Box::new(a)));
                }
                Ok(a)
            }
            Tok::AtomicSpace => {
                self.bump();
                self.expect(Tok::LParen)?;
                let n = self.parse_gexpr()?;
                self.expect(Tok::Comma)?;
                let i = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(Assertion::new(
                    span,
                    AssertionKind::AtomicSpace(Fraction::one(), n, i),
                ))
            }
            Tok::AtomicSpaces => {
                self.bump();
                self.expect(Tok::LParen)?;
                let s = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(Assertion::new(span, AssertionKind::AtomicSpaces(s)))
            }
            Tok::Heap => {
                if !self.allow_internal {
                    return Err(ParseError::InternalForm {
                        span,
                        form: "heap(..)",
                    });
                }
                self.bump();
                self.expect(Tok::LParen)?;
                let h = self.parse_gexpr()?;
                self.expect(Tok::RParen)?;
                Ok(Assertion::new(span, AssertionKind::HeapChunk(h)))
            }
            _ => {
                let e = self.parse_gexpr()?;
                if self.eat(&Tok::PointsTo) {
                    let v = self.parse_gexpr()?;
                    Ok(Assertion::new(
                        span,
                        AssertionKind::PointsTo(Fraction::one(), e, v),
                    ))
                } else if self.eat(&Tok::GhostPointsTo) {
                    let v = self.parse_gexpr()?;
                    Ok(Assertion::new(
                        span,
                        AssertionKind::GhostPointsTo(Fraction::one(), e, v),
                    ))
                } else if self.eat(&Tok::EqEq) {
                    let b = self.parse_gexpr()?;
                    Ok(Assertion::new(span, AssertionKind::PureEq(e, b)))
                } else if self.eat(&Tok::Colon) {
                    let (t, tsp) = self.expect_ident()?;
                    let arity = match self.sigs.get(&t) {
                        Some(DeclSig {
                            kind: SigKind::LemType,
                            arity,
                        }) => *arity,
                        _ => return Err(ParseError::Unbound { span: tsp, name: t }),
                    };
                    self.expect(Tok::LParen)?;
                    let args = self.parse_gexpr_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    if args.len() != arity {
                        return Err(ParseError::Arity {
                            span: tsp,
                            name: t,
                            expected: arity,
                            got: args.len(),
                        });
                    }
                    Ok(Assertion::new(span, AssertionKind::LemType(e, t, args)))
                } else if self.eat(&Tok::LParen) {
                    self.expect(Tok::RParen)?;
                    Ok(Assertion::new(span, AssertionKind::PredApp(e)))
                } else {
                    Err(self.unexpected("an assertion"))
                }
            }
        }
    }
}

enum Item {
    Cmd(AnnotatedCommand),
    Ghost(OuterGhost),
}
