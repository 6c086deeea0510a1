//! The built-in ghost prelude.
//!
//! `heap_` is internal: it exists so that heap chunk updates can be
//! specified, and user programs may not redeclare or mention it through
//! `heap(..)` assertions.

use super::ast::{Decls, GhostDecl};
use super::parser::parse_decls_internal;
use std::sync::LazyLock;

pub const PRELUDE_SRC: &str = "\
lem_type FAA_op(x, n, P, Q) = lem()
    forall v
    req x |-> v * P()
    ens x |-> v + n * Q()

lem_type FAA_ghop(x, n, pre, post) = lem(op)
    forall P, Q
    req atomic_spaces({}) * op : FAA_op(x, n, P, Q) * P() * pre()
    ens atomic_spaces({}) * op : FAA_op(x, n, P, Q) * Q() * post()

pred_ctor heap_(h)() = heap(h)
";

static PRELUDE: LazyLock<Vec<GhostDecl>> =
    LazyLock::new(|| parse_decls_internal(PRELUDE_SRC).expect("the built-in prelude parses"));

/// A fresh declaration table containing exactly the prelude.
pub fn prelude_decls() -> Decls {
    Decls::new(PRELUDE.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prelude_has_the_three_builtins() {
        let d = prelude_decls();
        let names: Vec<&str> = d.all().iter().map(|d| d.name()).collect();
        assert_eq!(names, vec!["FAA_op", "FAA_ghop", "heap_"]);
        match d.find("FAA_ghop").unwrap() {
            GhostDecl::LemType {
                type_params,
                lemma_params,
                forall_params,
                ..
            } => {
                assert_eq!(type_params, &["x", "n", "pre", "post"]);
                assert_eq!(lemma_params, &["op"]);
                assert_eq!(forall_params, &["P", "Q"]);
            }
            _ => panic!("FAA_ghop should be a lemma type"),
        }
    }
}
