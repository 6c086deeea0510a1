//! Syntax: ASTs, lexer, parser, pretty-printer, substitution and erasure.

pub mod ast;
pub mod erase;
pub mod lexer;
pub mod parser;
pub mod prelude;
pub mod pretty;
pub mod span;
pub mod subst;

pub use ast::*;
pub use erase::{embed, erase};
pub use parser::{parse_assertion_str, parse_program, ParseError};
pub use prelude::{prelude_decls, PRELUDE_SRC};
pub use pretty::{annotated_to_string, command_to_string, decl_to_string, program_to_string};
pub use span::Span;
pub use subst::{subst_annotated, subst_assertion, subst_command, subst_ghost_expr, Bindings};
