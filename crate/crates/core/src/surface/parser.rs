use crate::diagnostic::{Diagnostic, Span};
use crate::level::LevelExpr;

use super::ast::{CstrOp, Decl, Expr, ExprKind, Param, SurfaceConstraint};
use super::lexer::{lex, Tok};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.span.line, self.span.col, self.message)
    }
}

impl std::error::Error for ParseError {}

impl From<ParseError> for Diagnostic {
    fn from(e: ParseError) -> Self {
        Diagnostic::error("parse", e.message).with_span(e.span)
    }
}

type PResult<T> = Result<T, ParseError>;

pub fn parse_file(src: &str) -> PResult<Vec<Decl>> {
    let mut p = Parser::new(src)?;
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(decls)
}

pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_level(src: &str) -> PResult<LevelExpr> {
    let mut p = Parser::new(src)?;
    let l = p.level()?;
    p.expect_eof()?;
    Ok(l)
}

/// Comma-separated constraints; the empty string is the empty list.
pub fn parse_constraints(src: &str) -> PResult<Vec<SurfaceConstraint>> {
    let mut p = Parser::new(src)?;
    if p.peek() == &Tok::Eof {
        return Ok(Vec::new());
    }
    let cs = p.constraints()?;
    p.expect_eof()?;
    Ok(cs)
}

/// Comma- or space-separated level variable names.
pub fn parse_level_vars(src: &str) -> PResult<Vec<String>> {
    let mut p = Parser::new(src)?;
    let mut out = Vec::new();
    loop {
        match p.peek().clone() {
            Tok::Eof => return Ok(out),
            Tok::Sym(",") => {
                p.bump();
            }
            _ => out.push(p.ident()?),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> PResult<Self> {
        let toks = lex(src).map_err(|e| ParseError { message: e.message, span: e.span })?;
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].1.end
        }
    }

    fn since(&self, start: Span) -> Span {
        Span { end: self.prev_end().max(start.start), ..start }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, what: &str) -> PResult<T> {
        Err(ParseError { message: format!("expected {what}, found {}", self.peek()), span: self.span() })
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> PResult<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.error(&format!("`{sym}`"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.error("end of input")
        }
    }

    fn is_sym(&self, k: usize, sym: &str) -> bool {
        matches!(self.peek_at(k), Tok::Sym(s) if *s == sym)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.error("an identifier"),
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let start = self.span();
        if self.peek() != &Tok::Kw("def") {
            return self.error("`def`");
        }
        self.bump();
        let name = self.ident()?;
        let mut params = Vec::new();
        while !self.is_sym(0, ":") {
            params.push(self.param()?);
        }
        self.expect(":")?;
        let ty = self.expr()?;
        self.expect("=")?;
        let body = self.expr()?;
        self.expect(";")?;
        Ok(Decl { name, params, ty, body, span: self.since(start) })
    }

    fn param(&mut self) -> PResult<Param> {
        if self.eat("(") {
            let mut names = vec![self.ident()?];
            while let Tok::Ident(_) = self.peek() {
                names.push(self.ident()?);
            }
            self.expect(":")?;
            let ty = self.expr()?;
            self.expect(")")?;
            return Ok(Param::Term(names, ty));
        }
        if self.eat("[") {
            let p = if self.bracket_is_names() {
                let names = self.names_until_bar()?;
                let cs = if self.eat("|") { self.constraints()? } else { Vec::new() };
                Param::Levels(names, cs)
            } else {
                Param::Constraints(self.constraints()?)
            };
            self.expect("]")?;
            return Ok(p);
        }
        self.error("a parameter `(x : A)`, `[a b]` or `[constraints]`, or `:`")
    }

    /// After `[`: a run of identifiers closed by `]` or `|` names level binders.
    fn bracket_is_names(&self) -> bool {
        let mut k = 0;
        while let Tok::Ident(_) = self.peek_at(k) {
            k += 1;
        }
        k > 0 && (self.is_sym(k, "]") || self.is_sym(k, "|"))
    }

    fn names_until_bar(&mut self) -> PResult<Vec<String>> {
        let mut names = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            names.push(self.ident()?);
        }
        Ok(names)
    }

    /// `(` IDENT+ `:` starts a binder group.
    fn at_binder_group(&self) -> bool {
        if !self.is_sym(0, "(") {
            return false;
        }
        let mut k = 1;
        while let Tok::Ident(_) = self.peek_at(k) {
            k += 1;
        }
        k > 1 && self.is_sym(k, ":")
    }

    fn binder_group(&mut self) -> PResult<(Vec<String>, Expr)> {
        self.expect("(")?;
        let names = self.names_until_bar()?;
        self.expect(":")?;
        let ty = self.expr()?;
        self.expect(")")?;
        Ok((names, ty))
    }

    fn mk(&self, kind: ExprKind, start: Span) -> Expr {
        Expr { kind, span: self.since(start) }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat("\\") {
            if self.eat("[") {
                let kind = if self.bracket_is_names() {
                    let names = self.names_until_bar()?;
                    self.expect("]")?;
                    self.expect("->")?;
                    ExprKind::LvlLam(names, Box::new(self.expr()?))
                } else {
                    let cs = self.constraints()?;
                    self.expect("]")?;
                    self.expect("->")?;
                    ExprKind::CstrLam(cs, Box::new(self.expr()?))
                };
                return Ok(self.mk(kind, start));
            }
            let (names, ty) = self.binder_group()?;
            self.expect("->")?;
            let body = self.expr()?;
            return Ok(nest(names, ty, body, start, ExprKind::Lam));
        }
        if self.eat("[") {
            let kind = if self.bracket_is_names() {
                let names = self.names_until_bar()?;
                self.expect("]")?;
                ExprKind::LvlPi(names, Box::new(self.expr()?))
            } else {
                let cs = self.constraints()?;
                self.expect("]")?;
                ExprKind::CstrPi(cs, Box::new(self.expr()?))
            };
            return Ok(self.mk(kind, start));
        }
        if self.at_binder_group() {
            let (names, ty) = self.binder_group()?;
            if self.eat("->") {
                let body = self.expr()?;
                return Ok(nest(names, ty, body, start, ExprKind::Pi));
            }
            self.expect("*")?;
            let rest = self.prod()?;
            let sigma = nest(names, ty, rest, start, ExprKind::Sigma);
            return self.arrow_tail(sigma, start);
        }
        let lhs = self.prod()?;
        self.arrow_tail(lhs, start)
    }

    fn arrow_tail(&mut self, lhs: Expr, start: Span) -> PResult<Expr> {
        if self.eat("->") {
            let rhs = self.expr()?;
            Ok(self.mk(ExprKind::Arrow(Box::new(lhs), Box::new(rhs)), start))
        } else {
            Ok(lhs)
        }
    }

    fn prod(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.at_binder_group() {
            let (names, ty) = self.binder_group()?;
            self.expect("*")?;
            let rest = self.prod()?;
            return Ok(nest(names, ty, rest, start, ExprKind::Sigma));
        }
        let lhs = self.app()?;
        if self.eat("*") {
            let rhs = self.prod()?;
            return Ok(self.mk(ExprKind::Prod(Box::new(lhs), Box::new(rhs)), start));
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) | Tok::Num(_) | Tok::Kw("N") | Tok::Kw("Type") => true,
            Tok::Sym("(") => !self.at_binder_group(),
            _ => false,
        }
    }

    fn app(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut head = self.head()?;
        loop {
            if self.eat("@[") {
                let l = self.level()?;
                self.expect("]")?;
                head = self.mk(ExprKind::LvlApp(Box::new(head), l), start);
            } else if self.starts_atom() {
                let arg = self.postfix()?;
                head = self.mk(ExprKind::App(Box::new(head), Box::new(arg)), start);
            } else {
                return Ok(head);
            }
        }
    }

    fn head(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kw = match self.peek() {
            Tok::Kw(k) if !matches!(*k, "N" | "Type" | "def") => *k,
            _ => return self.postfix(),
        };
        self.bump();
        let b = |e: Expr| Box::new(e);
        let kind = match kw {
            "S" => ExprKind::Suc(b(self.postfix()?)),
            "R" => ExprKind::Rec(b(self.postfix()?), b(self.postfix()?), b(self.postfix()?), b(self.postfix()?)),
            "Id" => ExprKind::Id(b(self.postfix()?), b(self.postfix()?), b(self.postfix()?)),
            "refl" => ExprKind::Refl(b(self.postfix()?), b(self.postfix()?)),
            "J" => ExprKind::J(
                b(self.postfix()?),
                b(self.postfix()?),
                b(self.postfix()?),
                b(self.postfix()?),
                b(self.postfix()?),
                b(self.postfix()?),
            ),
            "U" => ExprKind::Univ(self.level_atom()?),
            "T" => ExprKind::Decode(self.level_atom()?, b(self.postfix()?)),
            "cU" => ExprKind::CodeUniv(self.level_atom()?, self.level_atom()?),
            "cPi" | "cSig" => {
                let (l, m) = (self.level_atom()?, self.level_atom()?);
                let (a, f) = (b(self.postfix()?), b(self.postfix()?));
                if kw == "cPi" {
                    ExprKind::CodePi(l, m, a, f)
                } else {
                    ExprKind::CodeSigma(l, m, a, f)
                }
            }
            "cN" => ExprKind::CodeNat(self.level_atom()?),
            "cId" => ExprKind::CodeId(self.level_atom()?, b(self.postfix()?), b(self.postfix()?), b(self.postfix()?)),
            "lift" => ExprKind::Lift(self.level_atom()?, self.level_atom()?, b(self.postfix()?)),
            _ => unreachable!("keyword {kw}"),
        };
        Ok(self.mk(kind, start))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.span();
        let mut e = self.atom()?;
        loop {
            if self.eat(".1") {
                e = self.mk(ExprKind::Fst(Box::new(e)), start);
            } else if self.eat(".2") {
                e = self.mk(ExprKind::Snd(Box::new(e)), start);
            } else {
                return Ok(e);
            }
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                ExprKind::Ident(s)
            }
            Tok::Num(n) => {
                self.bump();
                ExprKind::Num(n)
            }
            Tok::Kw("N") => {
                self.bump();
                ExprKind::Nat
            }
            Tok::Kw("Type") => {
                self.bump();
                ExprKind::Type
            }
            Tok::Sym("(") if !self.at_binder_group() => {
                self.bump();
                let e = self.expr()?;
                if self.eat(",") {
                    let f = self.expr()?;
                    self.expect(")")?;
                    ExprKind::Pair(Box::new(e), Box::new(f))
                } else {
                    self.expect(")")?;
                    return Ok(Expr { span: self.since(start), ..e });
                }
            }
            _ => return self.error("an expression"),
        };
        Ok(self.mk(kind, start))
    }

    pub fn level(&mut self) -> PResult<LevelExpr> {
        let mut l = self.level_atom()?;
        while self.eat("\\/") {
            l = l.join(self.level_atom()?);
        }
        Ok(l)
    }

    fn level_atom(&mut self) -> PResult<LevelExpr> {
        let mut l = match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                LevelExpr::var(s)
            }
            Tok::Num(n) => {
                self.bump();
                match u32::try_from(n) {
                    Ok(n) => LevelExpr::numeral(n),
                    Err(_) => return self.error("a smaller numeral level"),
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let l = self.level()?;
                self.expect(")")?;
                l
            }
            _ => return self.error("a level"),
        };
        while self.eat("^") {
            l = l.suc();
        }
        Ok(l)
    }

    fn constraint(&mut self) -> PResult<SurfaceConstraint> {
        let lhs = self.level()?;
        let op = if self.eat("=") {
            CstrOp::Eq
        } else if self.eat("<=") {
            CstrOp::Leq
        } else if self.eat("<") {
            CstrOp::Lt
        } else {
            return self.error("`=`, `<=` or `<`");
        };
        let rhs = self.level()?;
        Ok(SurfaceConstraint { lhs, op, rhs })
    }

    fn constraints(&mut self) -> PResult<Vec<SurfaceConstraint>> {
        let mut cs = vec![self.constraint()?];
        while self.eat(",") {
            cs.push(self.constraint()?);
        }
        Ok(cs)
    }
}

/// `(x y : A) op body` as nested single binders.
fn nest(
    names: Vec<String>,
    ty: Expr,
    body: Expr,
    start: Span,
    ctor: fn(String, Box<Expr>, Box<Expr>) -> ExprKind,
) -> Expr {
    let span = Span { end: body.span.end.max(start.start), ..start };
    names.into_iter().rev().fold(body, |acc, x| Expr { kind: ctor(x, Box::new(ty.clone()), Box::new(acc)), span })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_declaration() {
        let ds = parse_file("def idf [a] (X : U a) (x : T a X) : T a X = x ;").unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].name, "idf");
        assert_eq!(ds[0].params[0], Param::Levels(vec!["a".into()], vec![]));
        assert!(matches!(ds[0].params[1], Param::Term(..)));
        assert_eq!(ds[0].body.kind, ExprKind::Ident("x".into()));
    }

    #[test]
    fn errors_and_empty() {
        let e = parse_file("def bad : = ;").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (1, 11));
        assert!(parse_file("").unwrap().is_empty());
        assert!(parse_file("-- only a comment\n").unwrap().is_empty());
    }

    #[test]
    fn telescopes() {
        let ds = parse_file("def c [a b | a < b] (Y : U b) : U b = Y ;").unwrap();
        match &ds[0].params[0] {
            Param::Levels(names, cs) => {
                assert_eq!(names, &["a", "b"]);
                assert_eq!(cs[0].op, CstrOp::Lt);
            }
            p => panic!("{p:?}"),
        }
        let ds = parse_file("def d [a b] [a <= b, b = b] : N = 0 ;").unwrap();
        assert!(matches!(&ds[0].params[1], Param::Constraints(cs) if cs.len() == 2));
    }

    #[test]
    fn precedence() {
        let e = parse_expr("A -> B -> C").unwrap();
        let ExprKind::Arrow(_, rhs) = e.kind else { panic!() };
        assert!(matches!(rhs.kind, ExprKind::Arrow(..)));
        let e = parse_expr("(x : A) * B x -> C").unwrap();
        assert!(matches!(e.kind, ExprKind::Arrow(..)));
        let e = parse_expr("f a @[b^] c.1").unwrap();
        let ExprKind::App(f, arg) = e.kind else { panic!() };
        assert!(matches!(arg.kind, ExprKind::Fst(_)));
        assert!(matches!(f.kind, ExprKind::LvlApp(..)));
        let e = parse_expr("T (a \\/ b) X").unwrap();
        assert!(matches!(e.kind, ExprKind::Decode(LevelExpr::Join(..), _)));
    }

    #[test]
    fn levels_and_constraints() {
        assert_eq!(parse_level("a \\/ b^ \\/ c").unwrap().to_string(), "a \\/ b^ \\/ c");
        assert_eq!(parse_level("(a \\/ b)^").unwrap(), LevelExpr::var("a").join(LevelExpr::var("b")).suc());
        assert_eq!(parse_constraints("a <= g, g^ <= b").unwrap().len(), 2);
        assert!(parse_constraints("").unwrap().is_empty());
        assert_eq!(parse_level_vars("a,b, g").unwrap(), ["a", "b", "g"]);
    }
}
