use std::fmt;

use super::ast::Pos;
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(i64),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

// Longest symbols first.
const SYMBOLS: &[&str] = &[
    "::", "->", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "++", "--", "{", "}", "(", ")", "[", "]", ";", ",",
    ":", "!", "?", "<", ">", "=", "+", "-", "*", "/", "%", "&", "|", "^", "~", ".",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let adv = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if bytes[*i] == b'\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos { line, col };
        if c.is_ascii_whitespace() {
            adv(&mut i, &mut line, &mut col, 1);
        } else if src[i..].starts_with("//") {
            let n = src[i..].find('\n').unwrap_or(src.len() - i);
            adv(&mut i, &mut line, &mut col, n);
        } else if src[i..].starts_with("/*") {
            let n = src[i + 2..]
                .find("*/")
                .ok_or(ParseError::Syntax { line, col, msg: "unterminated comment".into() })?;
            adv(&mut i, &mut line, &mut col, n + 4);
        } else if c == b'#' {
            return Err(ParseError::Unsupported { line, col, construct: "preprocessor directive".into() });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                adv(&mut i, &mut line, &mut col, 1);
            }
            let n = src[start..i]
                .parse::<i64>()
                .map_err(|_| ParseError::Syntax { line: pos.line, col: pos.col, msg: "integer literal out of range".into() })?;
            out.push(Token { tok: Tok::Num(n), pos });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                adv(&mut i, &mut line, &mut col, 1);
            }
            out.push(Token { tok: Tok::Ident(src[start..i].to_string()), pos });
        } else if c == b'"' {
            let n = src[i + 1..]
                .find('"')
                .ok_or(ParseError::Syntax { line, col, msg: "unterminated string".into() })?;
            let s = src[i + 1..i + 1 + n].to_string();
            adv(&mut i, &mut line, &mut col, n + 2);
            out.push(Token { tok: Tok::Str(s), pos });
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            adv(&mut i, &mut line, &mut col, sym.len());
            out.push(Token { tok: Tok::Sym(sym), pos });
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(ParseError::Syntax { line, col, msg: format!("unexpected character {ch:?}") });
        }
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn symbols_and_comments() {
        assert_eq!(
            toks("a::b->c /* x */ != 3 // tail\n++"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("::"),
                Tok::Ident("b".into()),
                Tok::Sym("->"),
                Tok::Ident("c".into()),
                Tok::Sym("!="),
                Tok::Num(3),
                Tok::Sym("++"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_track_lines() {
        let t = tokenize("x\n  y").unwrap();
        assert_eq!(t[1].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn preprocessor_rejected() {
        assert!(matches!(tokenize("#define N 2"), Err(ParseError::Unsupported { .. })));
    }
}
