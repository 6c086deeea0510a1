//! Pretty-printer producing canonical concrete syntax.
//!
//! `parse_program(pretty(p))` is structurally equal to `p` for every
//! parser-produced AST. Printing normalizes: `let _ = c in c'` is written
//! `c; c'`, prelude declarations are not printed, and nested existentials
//! collapse into one binder list.

use super::ast::*;

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for d in p.decls.user() {
        out.push_str(&decl_to_string(d));
        out.push('\n');
    }
    if !p.decls.user().is_empty() {
        out.push('\n');
    }
    let mut pr = Printer::new();
    pr.annotated(&p.main);
    out.push_str(&pr.out);
    out.push('\n');
    out
}

pub fn decl_to_string(d: &GhostDecl) -> String {
    match d {
        GhostDecl::PredCtor {
            name, params, body, ..
        } => format!("pred_ctor {name}({})() =\n    {body}\n", params.join(", ")),
        GhostDecl::LemType {
            name,
            type_params,
            lemma_params,
            forall_params,
            req,
            ens,
            ..
        } => {
            let mut s = format!(
                "lem_type {name}({}) = lem({})\n",
                type_params.join(", "),
                lemma_params.join(", ")
            );
            if !forall_params.is_empty() {
                s.push_str(&format!("    forall {}\n", forall_params.join(", ")));
            }
            s.push_str(&format!("    req {req}\n"));
            s.push_str(&format!("    ens {ens}\n"));
            s
        }
    }
}

pub fn command_to_string(c: &Command) -> String {
    let mut pr = Printer::new();
    pr.command(c);
    pr.out
}

pub fn annotated_to_string(c: &AnnotatedCommand) -> String {
    let mut pr = Printer::new();
    pr.annotated(c);
    pr.out
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn new() -> Self {
        Printer {
            out: String::new(),
            indent: 0,
        }
    }

    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
    }

    fn command(&mut self, c: &Command) {
        match c {
            Command::Expr(e) => self.out.push_str(&e.to_string()),
            Command::Instr(i) => self.out.push_str(&i.to_string()),
            Command::Let(x, rhs, body) => {
                if x == "_" {
                    self.command_rhs(rhs);
                    self.out.push(';');
                    self.newline();
                    self.command(body);
                } else {
                    self.out.push_str(&format!("let {x} = "));
                    self.command_rhs(rhs);
                    self.out.push_str(" in");
                    self.newline();
                    self.command(body);
                }
            }
            Command::Par(l, r) => {
                self.out.push_str("par ");
                self.command_branch(l);
                self.out.push(' ');
                self.command_branch(r);
            }
        }
    }

    /// A let right-hand side must not contain a bare `;` chain, so nested
    /// composites get parentheses.
    fn command_rhs(&mut self, c: &Command) {
        match c {
            Command::Expr(_) | Command::Instr(_) | Command::Par(_, _) => self.command(c),
            Command::Let(_, _, _) => {
                self.out.push('(');
                self.command(c);
                self.out.push(')');
            }
        }
    }

    fn command_branch(&mut self, c: &Command) {
        match c {
            Command::Expr(_) | Command::Instr(_) => {
                self.out.push_str("{ ");
                self.command(c);
                self.out.push_str(" }");
            }
            _ => {
                self.out.push('{');
                self.indent += 1;
                self.newline();
                self.command(c);
                self.indent -= 1;
                self.newline();
                self.out.push('}');
            }
        }
    }

    fn annotated(&mut self, c: &AnnotatedCommand) {
        match &c.kind {
            AnnotatedCommandKind::Expr(e) => self.out.push_str(&e.to_string()),
            AnnotatedCommandKind::Instr(i) => self.out.push_str(&i.to_string()),
            AnnotatedCommandKind::Let(x, rhs, body) => {
                if x == "_" {
                    self.annotated_rhs(rhs);
                    self.out.push(';');
                    self.newline();
                    self.annotated(body);
                } else {
                    self.out.push_str(&format!("let {x} = "));
                    self.annotated_rhs(rhs);
                    self.out.push_str(" in");
                    self.newline();
                    self.annotated(body);
                }
            }
            AnnotatedCommandKind::Par {
                pre_left,
                left,
                pre_right,
                right,
            } => {
                self.out.push_str("par");
                self.par_branch(pre_left, left);
                self.par_branch(pre_right, right);
            }
            AnnotatedCommandKind::GLet(g, rhs, body) => {
                if g == "_" {
                    self.outer_ghost(rhs);
                    self.out.push(';');
                    self.newline();
                    self.annotated(body);
                } else {
                    self.out.push_str(&format!("glet {g} = "));
                    self.outer_ghost(rhs);
                    self.out.push_str(" in");
                    self.newline();
                    self.annotated(body);
                }
            }
        }
    }

    fn annotated_rhs(&mut self, c: &AnnotatedCommand) {
        match &c.kind {
            AnnotatedCommandKind::Expr(_)
            | AnnotatedCommandKind::Instr(_)
            | AnnotatedCommandKind::Par { .. } => self.annotated(c),
            _ => {
                self.out.push('(');
                self.annotated(c);
                self.out.push(')');
            }
        }
    }

    fn par_branch(&mut self, pre: &Option<Assertion>, c: &AnnotatedCommand) {
        if let Some(a) = pre {
            self.newline();
            self.out.push_str(&format!("pre {{ {a} }}"));
        }
        match &c.kind {
            AnnotatedCommandKind::Expr(_) | AnnotatedCommandKind::Instr(_) => {
                self.out.push_str(" { ");
                self.annotated(c);
                self.out.push_str(" }");
            }
            _ => {
                self.newline();
                self.out.push('{');
                self.indent += 1;
                self.newline();
                self.annotated(c);
                self.indent -= 1;
                self.newline();
                self.out.push('}');
            }
        }
    }

    fn outer_ghost(&mut self, g: &OuterGhost) {
        match &g.kind {
            OuterGhostKind::Inner(i) => self.inner_ghost_inline(i),
            OuterGhostKind::ProduceLemPtrChunk {
                lem_type,
                type_args,
                params,
                body,
            } => {
                let args = type_args
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(", ");
                self.out.push_str(&format!(
                    "produce_lem_ptr_chunk {lem_type}({args})({}) {{",
                    params.join(", ")
                ));
                self.indent += 1;
                self.newline();
                self.inner_ghost_seq(body);
                self.indent -= 1;
                self.newline();
                self.out.push('}');
            }
            OuterGhostKind::CreateAtomicSpace(n, i) => {
                self.out.push_str(&format!("create_atomic_space({n}, {i})"));
            }
            OuterGhostKind::DestroyAtomicSpace(n, i) => {
                self.out
                    .push_str(&format!("destroy_atomic_space({n}, {i})"));
            }
        }
    }

    fn inner_ghost_inline(&mut self, g: &InnerGhost) {
        self.out.push_str(&g.to_string());
    }

    fn inner_ghost_seq(&mut self, g: &InnerGhost) {
        match g {
            InnerGhost::Instr(i) => self.out.push_str(&i.to_string()),
            InnerGhost::GLet(x, rhs, rest) => {
                if x == "_" {
                    self.out.push_str(&rhs.to_string());
                    self.out.push(';');
                    self.newline();
                    self.inner_ghost_seq(rest);
                } else {
                    self.out.push_str(&format!("glet {x} = {rhs} in "));
                    self.inner_ghost_seq(rest);
                }
            }
        }
    }
}
