//! Erasure of ghost annotations.

use super::ast::*;

/// Strips all ghost constructs from an annotated command:
/// plain leaves are kept, `let` and `par` erase structurally, and
/// `glet` nodes disappear entirely.
pub fn erase(c: &AnnotatedCommand) -> Command {
    match &c.kind {
        AnnotatedCommandKind::Expr(e) => Command::Expr(e.clone()),
        AnnotatedCommandKind::Instr(i) => Command::Instr(i.clone()),
        AnnotatedCommandKind::Let(x, rhs, body) => {
            Command::Let(x.clone(), Box::new(erase(rhs)), Box::new(erase(body)))
        }
        AnnotatedCommandKind::Par { left, right, .. } => {
            Command::Par(Box::new(erase(left)), Box::new(erase(right)))
        }
        AnnotatedCommandKind::GLet(_, _, body) => erase(body),
    }
}

/// Embeds a plain command into the annotated language.
pub fn embed(c: &Command) -> AnnotatedCommand {
    let kind = match c {
        Command::Expr(e) => AnnotatedCommandKind::Expr(e.clone()),
        Command::Instr(i) => AnnotatedCommandKind::Instr(i.clone()),
        Command::Let(x, rhs, body) => {
            AnnotatedCommandKind::Let(x.clone(), Box::new(embed(rhs)), Box::new(embed(body)))
        }
        Command::Par(l, r) => AnnotatedCommandKind::Par {
            pre_left: None,
            left: Box::new(embed(l)),
            pre_right: None,
            right: Box::new(embed(r)),
        },
    };
    AnnotatedCommand::new(Default::default(), kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erase_embed_is_identity() {
        let c = Command::Let(
            "x".into(),
            Box::new(Command::Instr(Instr::Cons(Expr::IntLit(0)))),
            Box::new(Command::Par(
                Box::new(Command::Expr(Expr::IntLit(1))),
                Box::new(Command::Expr(Expr::Var("x".into()))),
            )),
        );
        assert_eq!(erase(&embed(&c)), c);
    }
}
