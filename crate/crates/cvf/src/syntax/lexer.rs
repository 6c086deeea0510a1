use super::span::Span;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Int(i64),
    Ident(String),
    // keywords
    Let,
    In,
    Cons,
    Faa,
    Assert,
    Par,
    Ghost,
    GLet,
    GCons,
    OpenAtomicSpace,
    CloseAtomicSpace,
    CreateAtomicSpace,
    DestroyAtomicSpace,
    ProduceLemPtrChunk,
    PredCtor,
    LemType,
    Lem,
    Forall,
    Req,
    Ens,
    Exists,
    Emp,
    Union,
    Diff,
    Heap,
    AtomicSpace,
    AtomicSpaces,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Colon,
    Assign,        // =
    EqEq,          // ==
    Star,          // *
    Plus,          // +
    Slash,         // /
    PointsTo,      // |->
    GhostPointsTo, // |->g
    GhostAssign,   // <-g
    HeapAssign,    // <-h
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Int(z) => return write!(f, "integer `{z}`"),
            Tok::Ident(x) => return write!(f, "`{x}`"),
            Tok::Let => "`let`",
            Tok::In => "`in`",
            Tok::Cons => "`cons`",
            Tok::Faa => "`faa`",
            Tok::Assert => "`assert`",
            Tok::Par => "`par`",
            Tok::Ghost => "`ghost`",
            Tok::GLet => "`glet`",
            Tok::GCons => "`gcons`",
            Tok::OpenAtomicSpace => "`open_atomic_space`",
            Tok::CloseAtomicSpace => "`close_atomic_space`",
            Tok::CreateAtomicSpace => "`create_atomic_space`",
            Tok::DestroyAtomicSpace => "`destroy_atomic_space`",
            Tok::ProduceLemPtrChunk => "`produce_lem_ptr_chunk`",
            Tok::PredCtor => "`pred_ctor`",
            Tok::LemType => "`lem_type`",
            Tok::Lem => "`lem`",
            Tok::Forall => "`forall`",
            Tok::Req => "`req`",
            Tok::Ens => "`ens`",
            Tok::Exists => "`exists`",
            Tok::Emp => "`emp`",
            Tok::Union => "`union`",
            Tok::Diff => "`diff`",
            Tok::Heap => "`heap`",
            Tok::AtomicSpace => "`atomic_space`",
            Tok::AtomicSpaces => "`atomic_spaces`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Dot => "`.`",
            Tok::Colon => "`:`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::Star => "`*`",
            Tok::Plus => "`+`",
            Tok::Slash => "`/`",
            Tok::PointsTo => "`|->`",
            Tok::GhostPointsTo => "`|->g`",
            Tok::GhostAssign => "`<-g`",
            Tok::HeapAssign => "`<-h`",
            Tok::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("{span}: {msg}")]
pub struct LexError {
    pub span: Span,
    pub msg: String,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "let" => Tok::Let,
        "in" => Tok::In,
        "cons" => Tok::Cons,
        "faa" => Tok::Faa,
        "assert" => Tok::Assert,
        "par" => Tok::Par,
        "ghost" => Tok::Ghost,
        "glet" => Tok::GLet,
        "gcons" => Tok::GCons,
        "open_atomic_space" => Tok::OpenAtomicSpace,
        "close_atomic_space" => Tok::CloseAtomicSpace,
        "create_atomic_space" => Tok::CreateAtomicSpace,
        "destroy_atomic_space" => Tok::DestroyAtomicSpace,
        "produce_lem_ptr_chunk" => Tok::ProduceLemPtrChunk,
        "pred_ctor" => Tok::PredCtor,
        "lem_type" => Tok::LemType,
        "lem" => Tok::Lem,
        "forall" => Tok::Forall,
        "req" => Tok::Req,
        "ens" => Tok::Ens,
        "exists" => Tok::Exists,
        "emp" => Tok::Emp,
        "union" => Tok::Union,
        "diff" => Tok::Diff,
        "heap" => Tok::Heap,
        "atomic_space" => Tok::AtomicSpace,
        "atomic_spaces" => Tok::AtomicSpaces,
        _ => return None,
    })
}

/// Tokenizes UTF-8 source text. `//` starts a line comment.
pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Token {
                tok: $tok,
                span: Span::new($l, $c),
            })
        };
    }

    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let mut advance = |i: &mut usize, n: usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => advance(&mut i, 1),
            '/' if i + 1 < chars.len() && chars[i + 1] == '/' => {
                while i < chars.len() && chars[i] != '\n' {
                    advance(&mut i, 1);
                }
            }
            '/' => {
                advance(&mut i, 1);
                push!(Tok::Slash, l0, c0);
            }
            '(' => {
                advance(&mut i, 1);
                push!(Tok::LParen, l0, c0);
            }
            ')' => {
                advance(&mut i, 1);
                push!(Tok::RParen, l0, c0);
            }
            '{' => {
                advance(&mut i, 1);
                push!(Tok::LBrace, l0, c0);
            }
            '}' => {
                advance(&mut i, 1);
                push!(Tok::RBrace, l0, c0);
            }
            '[' => {
                advance(&mut i, 1);
                push!(Tok::LBracket, l0, c0);
            }
            ']' => {
                advance(&mut i, 1);
                push!(Tok::RBracket, l0, c0);
            }
            ',' => {
                advance(&mut i, 1);
                push!(Tok::Comma, l0, c0);
            }
            ';' => {
                advance(&mut i, 1);
                push!(Tok::Semi, l0, c0);
            }
            '.' => {
                advance(&mut i, 1);
                push!(Tok::Dot, l0, c0);
            }
            ':' => {
                advance(&mut i, 1);
                push!(Tok::Colon, l0, c0);
            }
            '+' => {
                advance(&mut i, 1);
                push!(Tok::Plus, l0, c0);
            }
            '*' => {
                advance(&mut i, 1);
                push!(Tok::Star, l0, c0);
            }
            '=' => {
                if i + 1 < chars.len() && chars[i + 1] == '=' {
                    advance(&mut i, 2);
                    push!(Tok::EqEq, l0, c0);
                } else {
                    advance(&mut i, 1);
                    push!(Tok::Assign, l0, c0);
                }
            }
            '|' => {
                // `|->` optionally followed by a lone `g`
                if i + 2 < chars.len() && chars[i + 1] == '-' && chars[i + 2] == '>' {
                    let ghost = i + 3 < chars.len()
                        && chars[i + 3] == 'g'
                        && !(i + 4 < chars.len() && is_ident_continue(chars[i + 4]));
                    if ghost {
                        advance(&mut i, 4);
                        push!(Tok::GhostPointsTo, l0, c0);
                    } else {
                        advance(&mut i, 3);
                        push!(Tok::PointsTo, l0, c0);
                    }
                } else {
                    return Err(LexError {
                        span: Span::new(l0, c0),
                        msg: "expected `|->`".to_string(),
                    });
                }
            }
            '<' => {
                // `<-g` or `<-h`
                if i + 2 < chars.len()
                    && chars[i + 1] == '-'
                    && (chars[i + 2] == 'g' || chars[i + 2] == 'h')
                    && !(i + 3 < chars.len() && is_ident_continue(chars[i + 3]))
                {
                    let tok = if chars[i + 2] == 'g' {
                        Tok::GhostAssign
                    } else {
                        Tok::HeapAssign
                    };
                    advance(&mut i, 3);
                    push!(tok, l0, c0);
                } else {
                    return Err(LexError {
                        span: Span::new(l0, c0),
                        msg: "expected `<-g` or `<-h`".to_string(),
                    });
                }
            }
            '-' => {
                // negative integer literal
                let mut j = i + 1;
                if j >= chars.len() || !chars[j].is_ascii_digit() {
                    return Err(LexError {
                        span: Span::new(l0, c0),
                        msg: "`-` must start a negative integer literal".to_string(),
                    });
                }
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let z = text.parse::<i64>().map_err(|_| LexError {
                    span: Span::new(l0, c0),
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                let n = j - i;
                advance(&mut i, n);
                push!(Tok::Int(z), l0, c0);
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let z = text.parse::<i64>().map_err(|_| LexError {
                    span: Span::new(l0, c0),
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                let n = j - i;
                advance(&mut i, n);
                push!(Tok::Int(z), l0, c0);
            }
            a if is_ident_start(a) => {
                let mut j = i;
                while j < chars.len() && is_ident_continue(chars[j]) {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                let n = j - i;
                advance(&mut i, n);
                match keyword(&text) {
                    Some(tok) => push!(tok, l0, c0),
                    None => push!(Tok::Ident(text), l0, c0),
                }
            }
            other => {
                return Err(LexError {
                    span: Span::new(l0, c0),
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn points_to_variants() {
        assert_eq!(
            toks("x |->g 0"),
            vec![
                Tok::Ident("x".into()),
                Tok::GhostPointsTo,
                Tok::Int(0),
                Tok::Eof
            ]
        );
        // `g0` is an identifier, not the ghost marker
        assert_eq!(
            toks("x |-> g0"),
            vec![
                Tok::Ident("x".into()),
                Tok::PointsTo,
                Tok::Ident("g0".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn negative_literals_and_comments() {
        assert_eq!(
            toks("-3 // c\n4"),
            vec![Tok::Int(-3), Tok::Int(4), Tok::Eof]
        );
    }

    #[test]
    fn ghost_assign() {
        assert_eq!(
            toks("*g1 <-g 1"),
            vec![
                Tok::Star,
                Tok::Ident("g1".into()),
                Tok::GhostAssign,
                Tok::Int(1),
                Tok::Eof
            ]
        );
    }
}
