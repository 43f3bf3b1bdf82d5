//! Surface syntax to kernel terms.
//!
//! Definitions become constants that unfold during reduction. Declarations
//! whose type is the keyword `Type` are type abbreviations: they are expanded
//! at every use and their instances are checked where they occur.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::constraint::Constraint;
use crate::diagnostic::{Diagnostic, Span};
use crate::level::{LevelExpr, LevelVar};
use crate::syntax::{fresh_name, name, Name, Subst, Term};

use super::ast::{CstrOp, Decl, Expr, ExprKind, Param, SurfaceConstraint};

type EResult<T> = Result<T, Diagnostic>;

fn err<T>(rule: &str, span: Span, msg: impl Into<String>) -> EResult<T> {
    Err(Diagnostic::error(rule, msg).with_span(span))
}

#[derive(Debug, Clone)]
enum MacroParam {
    Term(Name),
    Type(Name),
    Level(LevelVar),
    Constraints(Vec<Constraint>),
}

#[derive(Debug, Clone)]
struct Macro {
    params: Vec<MacroParam>,
    body: Term,
}

impl Macro {
    fn arity(&self) -> (usize, usize) {
        let levels = self.params.iter().filter(|p| matches!(p, MacroParam::Level(_))).count();
        let terms = self.params.iter().filter(|p| matches!(p, MacroParam::Term(_) | MacroParam::Type(_))).count();
        (levels, terms)
    }
}

/// Output of elaborating one declaration.
#[derive(Debug, Clone)]
pub enum Elaborated {
    Def { name: Name, ty: Term, body: Term },
    /// A type abbreviation. `closed` is its telescope-closed form, available
    /// when no parameter ranges over types, and is checked as a type.
    Abbrev { name: Name, closed: Option<Term> },
}

#[derive(Debug, Clone, Default)]
pub struct Elaborator {
    defs: BTreeSet<String>,
    macros: BTreeMap<String, Macro>,
}

#[derive(Default, Clone)]
struct Scope {
    terms: Vec<String>,
    levels: Vec<String>,
}

impl Elaborator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_defined(&self, x: &str) -> bool {
        self.defs.contains(x) || self.macros.contains_key(x)
    }

    /// Registers a definition name so later declarations can refer to it.
    pub fn declare(&mut self, x: &str) {
        self.defs.insert(x.to_string());
    }

    /// Drops a type abbreviation whose closed form failed to check.
    pub fn forget(&mut self, x: &str) {
        self.macros.remove(x);
        self.defs.remove(x);
    }

    /// Elaborates a declaration. Definitions are not declared until the
    /// caller has checked them; abbreviations are registered immediately.
    pub fn decl(&mut self, d: &Decl) -> EResult<Elaborated> {
        if self.is_defined(&d.name) {
            return err("duplicate-name", d.span, format!("`{}` is already defined", d.name));
        }
        if d.is_type_macro() {
            return self.abbrev(d);
        }
        let mut scope = Scope::default();
        let mut tel = Vec::new();
        for p in &d.params {
            tel.extend(self.param(&mut scope, p, false, d.span)?);
        }
        let ty = self.expr(&scope, &d.ty)?;
        let body = self.expr(&scope, &d.body)?;
        let ty = close_type(&tel, ty);
        let body = close_term(&tel, body);
        Ok(Elaborated::Def { name: name(&d.name), ty, body })
    }

    fn abbrev(&mut self, d: &Decl) -> EResult<Elaborated> {
        let mut scope = Scope::default();
        let mut params = Vec::new();
        for p in &d.params {
            params.extend(self.param(&mut scope, p, true, d.span)?);
        }
        let body = self.expr(&scope, &d.body)?;
        let closed = if params.iter().any(|p| matches!(p, TelEntry::TypeParam(_))) {
            None
        } else {
            Some(close_type(&params, body.clone()))
        };
        let params = params
            .into_iter()
            .map(|p| match p {
                TelEntry::Term(x, _) => MacroParam::Term(x),
                TelEntry::TypeParam(x) => MacroParam::Type(x),
                TelEntry::Level(a) => MacroParam::Level(a),
                TelEntry::Constraints(cs) => MacroParam::Constraints(cs),
            })
            .collect();
        self.macros.insert(d.name.clone(), Macro { params, body });
        Ok(Elaborated::Abbrev { name: name(&d.name), closed })
    }

    fn param(&self, scope: &mut Scope, p: &Param, allow_type: bool, span: Span) -> EResult<Vec<TelEntry>> {
        match p {
            Param::Term(xs, a) => {
                let ty = if a.kind == ExprKind::Type {
                    if !allow_type {
                        return err("type-keyword", a.span, "`Type` parameters are only allowed in type abbreviations");
                    }
                    None
                } else {
                    Some(self.expr(scope, a)?)
                };
                let mut out = Vec::new();
                for x in xs {
                    if let Some(t) = &ty {
                        if out.iter().any(|e: &TelEntry| matches!(e, TelEntry::Term(y, _) if t.has_free(y))) {
                            return err("duplicate-name", a.span, format!("binder `{x}` captures a variable of its own type"));
                        }
                    }
                    scope.terms.push(x.clone());
                    out.push(match &ty {
                        Some(t) => TelEntry::Term(name(x), t.clone()),
                        None => TelEntry::TypeParam(name(x)),
                    });
                }
                Ok(out)
            }
            Param::Levels(xs, cs) => {
                let mut out: Vec<TelEntry> = xs
                    .iter()
                    .map(|a| {
                        scope.levels.push(a.clone());
                        TelEntry::Level(LevelVar::new(a))
                    })
                    .collect();
                if !cs.is_empty() {
                    out.push(TelEntry::Constraints(self.constraints(scope, cs, span)?));
                }
                Ok(out)
            }
            Param::Constraints(cs) => Ok(vec![TelEntry::Constraints(self.constraints(scope, cs, span)?)]),
        }
    }

    fn level(&self, scope: &Scope, l: &LevelExpr, span: Span) -> EResult<LevelExpr> {
        for v in l.vars() {
            if !v.is_numeral_base() && !scope.levels.iter().any(|a| a == v.name()) {
                return err("undeclared-level", span, format!("level variable `{v}` is not bound"));
            }
        }
        Ok(l.clone())
    }

    fn constraints(&self, scope: &Scope, cs: &[SurfaceConstraint], span: Span) -> EResult<Vec<Constraint>> {
        cs.iter()
            .map(|c| {
                let l = self.level(scope, &c.lhs, span)?;
                let m = self.level(scope, &c.rhs, span)?;
                Ok(surface_constraint(c.op, l, m))
            })
            .collect()
    }

    fn under(&self, scope: &Scope, x: &str, e: &Expr) -> EResult<Term> {
        let mut inner = scope.clone();
        inner.terms.push(x.to_string());
        self.expr(&inner, e)
    }

    fn under_levels(&self, scope: &Scope, xs: &[String], e: &Expr) -> EResult<Term> {
        let mut inner = scope.clone();
        inner.levels.extend(xs.iter().cloned());
        self.expr(&inner, e)
    }

    /// Elaborates a closed expression.
    pub fn closed_expr(&self, e: &Expr) -> EResult<Term> {
        self.expr(&Scope::default(), e)
    }

    fn expr(&self, scope: &Scope, e: &Expr) -> EResult<Term> {
        use ExprKind as K;
        let go = |e: &Expr| self.expr(scope, e).map(Arc::new);
        let lv = |l: &LevelExpr| self.level(scope, l, e.span);
        Ok(match &e.kind {
            K::Ident(_) | K::App(..) | K::LvlApp(..) if self.macro_head(scope, e).is_some() => {
                return self.expand(scope, e);
            }
            K::Ident(x) => {
                if scope.terms.iter().any(|y| y == x) {
                    Term::var(x)
                } else if self.defs.contains(x) {
                    Term::Const(name(x))
                } else {
                    return err("unknown-identifier", e.span, format!("unknown identifier `{x}`"));
                }
            }
            K::Num(n) => Term::numeral(*n),
            K::Type => {
                return err("type-keyword", e.span, "`Type` may only be the type of an abbreviation or its parameters")
            }
            K::Nat => Term::Nat,
            K::Lam(x, a, b) => Term::Lam(name(x), go(a)?, Arc::new(self.under(scope, x, b)?)),
            K::Pi(x, a, b) => Term::Pi(name(x), go(a)?, Arc::new(self.under(scope, x, b)?)),
            K::Sigma(x, a, b) => Term::Sigma(name(x), go(a)?, Arc::new(self.under(scope, x, b)?)),
            K::Arrow(a, b) => Term::arrow(self.expr(scope, a)?, self.expr(scope, b)?),
            K::Prod(a, b) => {
                let b = self.expr(scope, b)?;
                let x = fresh_name("_", |n| b.has_free(n));
                Term::Sigma(x, go(a)?, Arc::new(b))
            }
            K::LvlLam(xs, b) => {
                let body = self.under_levels(scope, xs, b)?;
                xs.iter().rev().fold(body, |t, a| Term::lvl_lam(a, t))
            }
            K::LvlPi(xs, b) => {
                let body = self.under_levels(scope, xs, b)?;
                xs.iter().rev().fold(body, |t, a| Term::lvl_pi(a, t))
            }
            K::CstrLam(cs, b) => Term::CstrLam(self.constraints(scope, cs, e.span)?, go(b)?),
            K::CstrPi(cs, b) => Term::CstrPi(self.constraints(scope, cs, e.span)?, go(b)?),
            K::Pair(a, b) => Term::Pair(go(a)?, go(b)?),
            K::Fst(a) => Term::Fst(go(a)?),
            K::Snd(a) => Term::Snd(go(a)?),
            K::App(f, a) => Term::App(go(f)?, go(a)?),
            K::LvlApp(f, l) => Term::LvlApp(go(f)?, lv(l)?),
            K::Suc(n) => Term::Suc(go(n)?),
            K::Rec(p, a, g, n) => {
                let K::Lam(x, ann, body) = &p.kind else {
                    return err("natrec-motive", p.span, "the motive of `R` must have the form `\\(x : N) -> P`");
                };
                if ann.kind != K::Nat {
                    return err("natrec-motive", ann.span, "the motive of `R` must bind a variable of type `N`");
                }
                Term::NatRec {
                    var: name(x),
                    motive: Arc::new(self.under(scope, x, body)?),
                    base: go(a)?,
                    step: go(g)?,
                    target: go(n)?,
                }
            }
            K::Id(a, x, y) => Term::Id(go(a)?, go(x)?, go(y)?),
            K::Refl(a, x) => Term::Refl(go(a)?, go(x)?),
            K::J(a, x, c, d, y, q) => {
                let shape = "the motive of `J` must have the form `\\(x : A) -> \\(p : Id A a x) -> C`";
                let K::Lam(xv, xann, inner) = &c.kind else { return err("j-motive", c.span, shape) };
                let K::Lam(pv, pann, body) = &inner.kind else { return err("j-motive", c.span, shape) };
                // the annotations are determined by `A` and `a`; they are only scope-checked
                self.expr(scope, xann)?;
                self.under(scope, xv, pann)?;
                let mut inner_scope = scope.clone();
                inner_scope.terms.push(xv.clone());
                inner_scope.terms.push(pv.clone());
                Term::J {
                    ty: go(a)?,
                    from: go(x)?,
                    x: name(xv),
                    p: name(pv),
                    motive: Arc::new(self.expr(&inner_scope, body)?),
                    base: go(d)?,
                    to: go(y)?,
                    path: go(q)?,
                }
            }
            K::Univ(l) => Term::Univ(lv(l)?),
            K::Decode(l, a) => Term::Decode(lv(l)?, go(a)?),
            K::CodeUniv(l, m) => Term::CodeUniv(lv(l)?, lv(m)?),
            K::CodePi(l, m, a, b) => Term::CodePi(lv(l)?, lv(m)?, go(a)?, go(b)?),
            K::CodeSigma(l, m, a, b) => Term::CodeSigma(lv(l)?, lv(m)?, go(a)?, go(b)?),
            K::CodeNat(l) => Term::CodeNat(lv(l)?),
            K::CodeId(l, a, x, y) => Term::CodeId(lv(l)?, go(a)?, go(x)?, go(y)?),
            K::Lift(l, m, a) => Term::Lift(lv(l)?, lv(m)?, go(a)?),
        })
    }

    /// The abbreviation at the head of an application spine, unless shadowed.
    fn macro_head(&self, scope: &Scope, e: &Expr) -> Option<&Macro> {
        match &e.kind {
            ExprKind::Ident(x) if !scope.terms.contains(x) => self.macros.get(x),
            ExprKind::App(f, _) | ExprKind::LvlApp(f, _) => self.macro_head(scope, f),
            _ => None,
        }
    }

    fn expand(&self, scope: &Scope, e: &Expr) -> EResult<Term> {
        let mut levels = Vec::new();
        let mut terms = Vec::new();
        let mut head = e;
        loop {
            match &head.kind {
                ExprKind::App(f, a) => {
                    terms.push(a.as_ref());
                    head = f;
                }
                ExprKind::LvlApp(f, l) => {
                    levels.push(self.level(scope, l, head.span)?);
                    head = f;
                }
                _ => break,
            }
        }
        levels.reverse();
        terms.reverse();
        let ExprKind::Ident(x) = &head.kind else { unreachable!() };
        let m = &self.macros[x];
        let (nl, nt) = m.arity();
        if (levels.len(), terms.len()) != (nl, nt) {
            return err(
                "macro-arity",
                e.span,
                format!(
                    "`{x}` expects {nl} level and {nt} term arguments, got {} and {}",
                    levels.len(),
                    terms.len()
                ),
            );
        }
        let (mut levels, mut terms) = (levels.into_iter(), terms.into_iter());
        let mut subst = Subst::new();
        let mut guards = Vec::new();
        for p in &m.params {
            match p {
                MacroParam::Level(a) => subst = subst.level(a.clone(), levels.next().unwrap()),
                MacroParam::Term(y) | MacroParam::Type(y) => {
                    subst = subst.term(y.clone(), self.expr(scope, terms.next().unwrap())?)
                }
                MacroParam::Constraints(cs) => guards.push(cs.clone()),
            }
        }
        let body = subst.apply(&m.body);
        Ok(guards
            .into_iter()
            .rev()
            .fold(body, |t, cs| Term::CstrPi(cs.iter().map(|c| subst.constraint(c)).collect(), Arc::new(t))))
    }
}

#[derive(Debug, Clone)]
enum TelEntry {
    Term(Name, Term),
    TypeParam(Name),
    Level(LevelVar),
    Constraints(Vec<Constraint>),
}

fn close_type(tel: &[TelEntry], ty: Term) -> Term {
    tel.iter().rev().fold(ty, |t, e| match e {
        TelEntry::Term(x, a) => Term::Pi(x.clone(), Arc::new(a.clone()), Arc::new(t)),
        TelEntry::TypeParam(_) => unreachable!("type parameters are never closed over"),
        TelEntry::Level(a) => Term::LvlPi(a.clone(), Arc::new(t)),
        TelEntry::Constraints(cs) => Term::CstrPi(cs.clone(), Arc::new(t)),
    })
}

fn close_term(tel: &[TelEntry], body: Term) -> Term {
    tel.iter().rev().fold(body, |t, e| match e {
        TelEntry::Term(x, a) => Term::Lam(x.clone(), Arc::new(a.clone()), Arc::new(t)),
        TelEntry::TypeParam(_) => unreachable!("type parameters are never closed over"),
        TelEntry::Level(a) => Term::LvlLam(a.clone(), Arc::new(t)),
        TelEntry::Constraints(cs) => Term::CstrLam(cs.clone(), Arc::new(t)),
    })
}

/// `l < m` is `m = l^ \/ m` and `l <= m` is `m = l \/ m`.
pub fn surface_constraint(op: CstrOp, l: LevelExpr, m: LevelExpr) -> Constraint {
    match op {
        CstrOp::Eq => Constraint::eq(l, m),
        CstrOp::Leq => Constraint::leq(l, m),
        CstrOp::Lt => Constraint::lt(l, m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parser::{parse_expr, parse_file};

    fn elab_all(src: &str) -> Vec<Elaborated> {
        let mut el = Elaborator::new();
        parse_file(src)
            .unwrap()
            .iter()
            .map(|d| {
                let out = el.decl(d).unwrap();
                el.declare(&d.name);
                out
            })
            .collect()
    }

    fn closed(src: &str) -> EResult<Term> {
        Elaborator::new().closed_expr(&parse_expr(src).unwrap())
    }

    #[test]
    fn telescope_closes_over_levels_constraints_and_terms() {
        let ds = elab_all("def c [a b | a < b] (Y : U b) : U b^ = cId b^ (cU b b^) Y Y ;");
        let Elaborated::Def { ty, body, .. } = &ds[0] else { panic!() };
        assert_eq!(ty.to_string(), "[a] [b] [b = a^ \\/ b] U b -> U b^");
        assert_eq!(body.to_string(), "\\[a] -> \\[b] -> \\[b = a^ \\/ b] -> \\(Y : U b) -> cId b^ (cU b b^) Y Y");
    }

    #[test]
    fn sugar() {
        assert!(matches!(closed("\\(A : N) -> A * A").unwrap(), Term::Lam(_, _, ref b) if matches!(**b, Term::Sigma(..))));
        assert_eq!(closed("2").unwrap(), Term::Suc(Arc::new(Term::Suc(Arc::new(Term::Zero)))));
        let e = closed("x").unwrap_err();
        assert_eq!(e.rule, "unknown-identifier");
        let e = closed("\\[a] -> U b").unwrap_err();
        assert_eq!(e.rule, "undeclared-level");
    }

    #[test]
    fn abbreviations_expand_at_use() {
        let ds = elab_all(
            "def isContr [a] (A : U a) : Type = (x : T a A) * ((y : T a A) -> Id (T a A) x y) ;\n\
             def p : Type = isContr @[0] (cN 0) ;",
        );
        let Elaborated::Abbrev { closed: Some(c), .. } = &ds[0] else { panic!() };
        assert!(matches!(c, Term::LvlPi(..)));
        let Elaborated::Abbrev { closed: Some(p), .. } = &ds[1] else { panic!() };
        assert!(matches!(p, Term::Sigma(..)), "{p}");
        let mut el = Elaborator::new();
        let d = parse_file("def q : Type = isContr @[0] ;").unwrap();
        assert_eq!(el.decl(&d[0]).unwrap_err().rule, "unknown-identifier");
    }

    #[test]
    fn macro_arity_is_enforced() {
        let mut el = Elaborator::new();
        let ds = parse_file("def E [a] (A : U a) : Type = T a A ; def bad : Type = E @[0] ;").unwrap();
        el.decl(&ds[0]).unwrap();
        assert_eq!(el.decl(&ds[1]).unwrap_err().rule, "macro-arity");
    }
}
