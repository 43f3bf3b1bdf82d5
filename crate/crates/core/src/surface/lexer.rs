use crate::diagnostic::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(u64),
    Kw(&'static str),
    Sym(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Num(n) => write!(f, "number `{n}`"),
            Tok::Kw(k) => write!(f, "keyword `{k}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "def", "Type", "N", "S", "R", "Id", "refl", "J", "U", "T", "cU", "cPi", "cSig", "cN", "cId", "lift",
];

// longest first
const SYMBOLS: &[&str] = &[
    "\\/", "->", "<=", "@[", ".1", ".2", "\\", "(", ")", "[", "]", ":", "*", ",", "^", "=", "<", ";", "|",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexError {
    pub message: String,
    pub span: Span,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Span)>, LexError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let mut i = 0;
    let bytes = src.as_bytes();
    let span_at = |start: usize, end: usize, line: usize, line_start: usize| Span {
        start,
        end,
        line,
        col: src[line_start..start].chars().count() + 1,
    };
    while i < src.len() {
        let rest = &src[i..];
        let c = rest.chars().next().unwrap();
        if c == '\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if rest.starts_with("--") {
            i += rest.find('\n').unwrap_or(rest.len());
            continue;
        }
        let start = i;
        if is_ident_start(c) {
            let len = rest.find(|ch: char| !is_ident_char(ch)).unwrap_or(rest.len());
            let word = &rest[..len];
            i += len;
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            };
            out.push((tok, span_at(start, i, line, line_start)));
            continue;
        }
        if c.is_ascii_digit() {
            let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
            i += len;
            let span = span_at(start, i, line, line_start);
            let n = rest[..len]
                .parse()
                .map_err(|_| LexError { message: format!("numeral `{}` is too large", &rest[..len]), span })?;
            out.push((Tok::Num(n), span));
            continue;
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            // `.1`/`.2` must not swallow the start of a longer numeral
            Some(s) if s.starts_with('.') && bytes.get(i + 2).is_some_and(u8::is_ascii_digit) => {}
            Some(s) => {
                i += s.len();
                out.push((Tok::Sym(s), span_at(start, i, line, line_start)));
                continue;
            }
            None => {}
        }
        return Err(LexError {
            message: format!("unexpected character `{c}`"),
            span: span_at(start, start + c.len_utf8(), line, line_start),
        });
    }
    out.push((Tok::Eof, span_at(src.len(), src.len(), line, line_start)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn lexes_symbols_and_keywords() {
        assert_eq!(
            toks("\\(x : T a X) -> p.1 @[a \\/ b^] -- comment\n;"),
            vec![
                Tok::Sym("\\"),
                Tok::Sym("("),
                Tok::Ident("x".into()),
                Tok::Sym(":"),
                Tok::Kw("T"),
                Tok::Ident("a".into()),
                Tok::Ident("X".into()),
                Tok::Sym(")"),
                Tok::Sym("->"),
                Tok::Ident("p".into()),
                Tok::Sym(".1"),
                Tok::Sym("@["),
                Tok::Ident("a".into()),
                Tok::Sym("\\/"),
                Tok::Ident("b".into()),
                Tok::Sym("^"),
                Tok::Sym("]"),
                Tok::Sym(";"),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn spans_track_lines() {
        let ts = lex("def\n  x'").unwrap();
        assert_eq!(ts[1].1.line, 2);
        assert_eq!(ts[1].1.col, 3);
        assert_eq!(ts[1].0, Tok::Ident("x'".into()));
        assert!(lex("def ?").is_err());
        assert_eq!(toks("α β"), vec![Tok::Ident("α".into()), Tok::Ident("β".into()), Tok::Eof]);
    }
}
