//! Kernel syntax: one term language for types, terms, universe codes, level
//! binders and constraint binders, with named variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::constraint::Constraint;
use crate::level::{eq_free, LevelExpr, LevelVar};

pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

#[derive(Clone, PartialEq, Eq)]
pub enum Term {
    Var(Name),
    /// Reference to a checked top-level definition; unfolds during reduction.
    Const(Name),
    Pi(Name, Arc<Term>, Arc<Term>),
    Lam(Name, Arc<Term>, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
    Sigma(Name, Arc<Term>, Arc<Term>),
    Pair(Arc<Term>, Arc<Term>),
    Fst(Arc<Term>),
    Snd(Arc<Term>),
    Nat,
    Zero,
    Suc(Arc<Term>),
    /// `R P a g n` with the motive `P` binding `var : N`.
    NatRec {
        var: Name,
        motive: Arc<Term>,
        base: Arc<Term>,
        step: Arc<Term>,
        target: Arc<Term>,
    },
    Id(Arc<Term>, Arc<Term>, Arc<Term>),
    Refl(Arc<Term>, Arc<Term>),
    /// Based path induction `J A a C d a' q`; the motive binds `x : A` and
    /// `p : Id A a x`.
    J {
        ty: Arc<Term>,
        from: Arc<Term>,
        x: Name,
        p: Name,
        motive: Arc<Term>,
        base: Arc<Term>,
        to: Arc<Term>,
        path: Arc<Term>,
    },
    Univ(LevelExpr),
    Decode(LevelExpr, Arc<Term>),
    /// Code of `U_l` in `U_m`, written `cU l m`.
    CodeUniv(LevelExpr, LevelExpr),
    CodePi(LevelExpr, LevelExpr, Arc<Term>, Arc<Term>),
    CodeSigma(LevelExpr, LevelExpr, Arc<Term>, Arc<Term>),
    CodeNat(LevelExpr),
    CodeId(LevelExpr, Arc<Term>, Arc<Term>, Arc<Term>),
    LvlPi(LevelVar, Arc<Term>),
    LvlLam(LevelVar, Arc<Term>),
    LvlApp(Arc<Term>, LevelExpr),
    CstrPi(Vec<Constraint>, Arc<Term>),
    CstrLam(Vec<Constraint>, Arc<Term>),
    /// Cumulativity map from `U_l` to `U_m`.
    Lift(LevelExpr, LevelExpr, Arc<Term>),
}

use Term::*;

fn rc(t: Term) -> Arc<Term> {
    Arc::new(t)
}

impl Term {
    pub fn var(x: &str) -> Term {
        Var(name(x))
    }
    pub fn pi(x: &str, a: Term, b: Term) -> Term {
        Pi(name(x), rc(a), rc(b))
    }
    pub fn arrow(a: Term, b: Term) -> Term {
        let x = fresh_name("_", |n| b.has_free(n));
        Pi(x, rc(a), rc(b))
    }
    pub fn lam(x: &str, a: Term, b: Term) -> Term {
        Lam(name(x), rc(a), rc(b))
    }
    pub fn app(f: Term, a: Term) -> Term {
        App(rc(f), rc(a))
    }
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }
    pub fn sigma(x: &str, a: Term, b: Term) -> Term {
        Sigma(name(x), rc(a), rc(b))
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Pair(rc(a), rc(b))
    }
    pub fn suc(n: Term) -> Term {
        Suc(rc(n))
    }
    pub fn numeral(n: u64) -> Term {
        (0..n).fold(Zero, |t, _| Term::suc(t))
    }
    pub fn id(a: Term, x: Term, y: Term) -> Term {
        Id(rc(a), rc(x), rc(y))
    }
    pub fn refl(a: Term, x: Term) -> Term {
        Refl(rc(a), rc(x))
    }
    pub fn decode(l: LevelExpr, a: Term) -> Term {
        Decode(l, rc(a))
    }
    pub fn lvl_pi(a: &str, t: Term) -> Term {
        LvlPi(LevelVar::new(a), rc(t))
    }
    pub fn lvl_lam(a: &str, t: Term) -> Term {
        LvlLam(LevelVar::new(a), rc(t))
    }
    pub fn lvl_app(t: Term, l: LevelExpr) -> Term {
        LvlApp(rc(t), l)
    }
    pub fn cstr_pi(psi: Vec<Constraint>, t: Term) -> Term {
        CstrPi(psi, rc(t))
    }
    pub fn cstr_lam(psi: Vec<Constraint>, t: Term) -> Term {
        CstrLam(psi, rc(t))
    }

    /// `Some(n)` if the term is a closed numeral `S (... (S 0))`.
    pub fn as_numeral(&self) -> Option<u64> {
        match self {
            Zero => Some(0),
            Suc(n) => n.as_numeral().map(|k| k + 1),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        self.free_vars().iter().any(|y| &**y == x)
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        let under = |x: &Name, t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| {
            bound.push(x.clone());
            t.collect_free(bound, out);
            bound.pop();
        };
        match self {
            Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Pi(x, a, b) | Lam(x, a, b) | Sigma(x, a, b) => {
                a.collect_free(bound, out);
                under(x, b, bound, out);
            }
            NatRec { var, motive, base, step, target } => {
                under(var, motive, bound, out);
                for t in [base, step, target] {
                    t.collect_free(bound, out);
                }
            }
            J { ty, from, x, p, motive, base, to, path } => {
                for t in [ty, from, base, to, path] {
                    t.collect_free(bound, out);
                }
                bound.push(x.clone());
                under(p, motive, bound, out);
                bound.pop();
            }
            _ => self.for_each_child(|t| t.collect_free(bound, out)),
        }
    }

    /// Visits the immediate subterms of nodes that bind no term variables.
    fn for_each_child(&self, mut f: impl FnMut(&Term)) {
        match self {
            Var(_) | Const(_) | Nat | Zero | Univ(_) | CodeUniv(..) | CodeNat(_) => {}
            App(a, b) | Pair(a, b) | Refl(a, b) | CodePi(_, _, a, b) | CodeSigma(_, _, a, b) => {
                f(a);
                f(b);
            }
            Fst(a) | Snd(a) | Suc(a) | Decode(_, a) | LvlPi(_, a) | LvlLam(_, a) | LvlApp(a, _) | CstrPi(_, a)
            | CstrLam(_, a) | Lift(_, _, a) => f(a),
            Id(a, b, c) | CodeId(_, a, b, c) => {
                f(a);
                f(b);
                f(c);
            }
            Pi(_, a, b) | Lam(_, a, b) | Sigma(_, a, b) => {
                f(a);
                f(b);
            }
            NatRec { motive, base, step, target, .. } => {
                for t in [motive, base, step, target] {
                    f(t);
                }
            }
            J { ty, from, motive, base, to, path, .. } => {
                for t in [ty, from, motive, base, to, path] {
                    f(t);
                }
            }
        }
    }

    /// Free level variables, including those in constraint lists.
    pub fn free_level_vars(&self) -> BTreeSet<LevelVar> {
        let mut out = BTreeSet::new();
        self.collect_free_levels(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_levels(&self, bound: &mut Vec<LevelVar>, out: &mut BTreeSet<LevelVar>) {
        let add = |l: &LevelExpr, bound: &Vec<LevelVar>, out: &mut BTreeSet<LevelVar>| {
            out.extend(l.vars().into_iter().filter(|v| !bound.contains(v)));
        };
        for l in self.levels() {
            add(l, bound, out);
        }
        if let CstrPi(psi, _) | CstrLam(psi, _) = self {
            for c in psi {
                add(&c.lhs, bound, out);
                add(&c.rhs, bound, out);
            }
        }
        match self {
            LvlPi(a, t) | LvlLam(a, t) => {
                bound.push(a.clone());
                t.collect_free_levels(bound, out);
                bound.pop();
            }
            _ => self.for_each_child(|t| t.collect_free_levels(bound, out)),
        }
    }

    /// Level expressions stored directly in this node.
    pub fn levels(&self) -> Vec<&LevelExpr> {
        match self {
            Univ(l) | Decode(l, _) | CodeNat(l) | CodeId(l, ..) | LvlApp(_, l) => vec![l],
            CodeUniv(l, m) | CodePi(l, m, ..) | CodeSigma(l, m, ..) | Lift(l, m, _) => vec![l, m],
            _ => vec![],
        }
    }

    /// Whether any level or constraint binder occurs in the term.
    pub fn has_level_binders(&self) -> bool {
        match self {
            LvlPi(..) | LvlLam(..) | CstrPi(..) | CstrLam(..) => true,
            _ => {
                let mut found = false;
                self.for_each_child(|t| found |= t.has_level_binders());
                found
            }
        }
    }

    pub fn subst(&self, x: &str, u: &Term) -> Term {
        Subst::new().term(name(x), u.clone()).apply(self)
    }

    pub fn subst_level(&self, a: &LevelVar, l: &LevelExpr) -> Term {
        Subst::new().level(a.clone(), l.clone()).apply(self)
    }
}

/// Generates `base`, `base'`, `base''`, ... until `taken` rejects none.
pub fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let mut candidate = base.to_string();
    while taken(&candidate) {
        candidate.push('\'');
    }
    name(&candidate)
}

/// Simultaneous capture-avoiding substitution of terms for term variables
/// and levels for level variables.
#[derive(Clone, Default)]
pub struct Subst {
    terms: BTreeMap<Name, Term>,
    levels: BTreeMap<LevelVar, LevelExpr>,
    avoid_terms: BTreeSet<Name>,
    avoid_levels: BTreeSet<LevelVar>,
}

impl Subst {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn term(mut self, x: Name, u: Term) -> Self {
        self.avoid_terms.extend(u.free_vars());
        self.avoid_levels.extend(u.free_level_vars());
        self.avoid_terms.insert(x.clone());
        self.terms.insert(x, u);
        self
    }

    pub fn level(mut self, a: LevelVar, l: LevelExpr) -> Self {
        self.avoid_levels.extend(l.vars());
        self.avoid_levels.insert(a.clone());
        self.levels.insert(a, l);
        self
    }

    fn is_empty(&self) -> bool {
        self.terms.is_empty() && self.levels.is_empty()
    }

    fn level_expr_simul(&self, l: &LevelExpr) -> LevelExpr {
        match l {
            LevelExpr::Var(v) => self.levels.get(v).cloned().unwrap_or_else(|| l.clone()),
            LevelExpr::Suc(m) => self.level_expr_simul(m).suc(),
            LevelExpr::Join(m, n) => self.level_expr_simul(m).join(self.level_expr_simul(n)),
        }
    }

    pub fn constraint(&self, c: &Constraint) -> Constraint {
        Constraint { lhs: self.level_expr_simul(&c.lhs), rhs: self.level_expr_simul(&c.rhs) }
    }

    /// Enters a term binder `x` over `bodies`, renaming it if it would capture.
    fn bind(&self, x: &Name, bodies: &[&Term]) -> (Name, Subst) {
        let mut inner = self.clone();
        inner.terms.remove(x);
        if inner.is_empty() {
            return (x.clone(), inner);
        }
        if !inner.avoid_terms.contains(x) {
            return (x.clone(), inner);
        }
        let body_fv: BTreeSet<Name> = bodies.iter().flat_map(|b| b.free_vars()).collect();
        let fresh = fresh_name(x, |n| inner.avoid_terms.contains(n) || body_fv.contains(n));
        let inner = inner.term(x.clone(), Var(fresh.clone()));
        (fresh, inner)
    }

    fn bind_level(&self, a: &LevelVar, body: &Term) -> (LevelVar, Subst) {
        let mut inner = self.clone();
        inner.levels.remove(a);
        if inner.is_empty() || !inner.avoid_levels.contains(a) {
            return (a.clone(), inner);
        }
        let body_fv = body.free_level_vars();
        let fresh = LevelVar::new(fresh_name(a.name(), |n| {
            let v = LevelVar::new(n);
            inner.avoid_levels.contains(&v) || body_fv.contains(&v)
        }));
        let inner = inner.level(a.clone(), LevelExpr::Var(fresh.clone()));
        (fresh, inner)
    }

    pub fn apply(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        let go = |t: &Arc<Term>| rc(self.apply(t));
        let lv = |l: &LevelExpr| self.level_expr_simul(l);
        match t {
            Var(x) => self.terms.get(x).cloned().unwrap_or_else(|| t.clone()),
            Const(_) | Nat | Zero => t.clone(),
            Pi(x, a, b) | Lam(x, a, b) | Sigma(x, a, b) => {
                let (y, inner) = self.bind(x, &[b]);
                let a = go(a);
                let b = rc(inner.apply(b));
                match t {
                    Pi(..) => Pi(y, a, b),
                    Lam(..) => Lam(y, a, b),
                    _ => Sigma(y, a, b),
                }
            }
            App(f, a) => App(go(f), go(a)),
            Pair(a, b) => Pair(go(a), go(b)),
            Fst(a) => Fst(go(a)),
            Snd(a) => Snd(go(a)),
            Suc(n) => Suc(go(n)),
            NatRec { var, motive, base, step, target } => {
                let (y, inner) = self.bind(var, &[motive]);
                NatRec { var: y, motive: rc(inner.apply(motive)), base: go(base), step: go(step), target: go(target) }
            }
            Id(a, x, y) => Id(go(a), go(x), go(y)),
            Refl(a, x) => Refl(go(a), go(x)),
            J { ty, from, x, p, motive, base, to, path } => {
                let (x2, inner) = self.bind(x, &[motive]);
                let (p2, inner) = inner.bind(p, &[motive]);
                // a renamed p must also avoid the (possibly renamed) x
                let (x2, p2, inner) = if x2 == p2 {
                    let p3 = fresh_name(&p2, |n| n == &*x2 || inner.avoid_terms.contains(n));
                    let inner = inner.term(p.clone(), Var(p3.clone()));
                    (x2, p3, inner)
                } else {
                    (x2, p2, inner)
                };
                J {
                    ty: go(ty),
                    from: go(from),
                    x: x2,
                    p: p2,
                    motive: rc(inner.apply(motive)),
                    base: go(base),
                    to: go(to),
                    path: go(path),
                }
            }
            Univ(l) => Univ(lv(l)),
            Decode(l, a) => Decode(lv(l), go(a)),
            CodeUniv(l, m) => CodeUniv(lv(l), lv(m)),
            CodePi(l, m, a, b) => CodePi(lv(l), lv(m), go(a), go(b)),
            CodeSigma(l, m, a, b) => CodeSigma(lv(l), lv(m), go(a), go(b)),
            CodeNat(l) => CodeNat(lv(l)),
            CodeId(l, a, x, y) => CodeId(lv(l), go(a), go(x), go(y)),
            LvlPi(a, body) | LvlLam(a, body) => {
                let (b2, inner) = self.bind_level(a, body);
                let body = rc(inner.apply(body));
                if matches!(t, LvlPi(..)) {
                    LvlPi(b2, body)
                } else {
                    LvlLam(b2, body)
                }
            }
            LvlApp(f, l) => LvlApp(go(f), lv(l)),
            CstrPi(psi, a) => CstrPi(psi.iter().map(|c| self.constraint(c)).collect(), go(a)),
            CstrLam(psi, a) => CstrLam(psi.iter().map(|c| self.constraint(c)).collect(), go(a)),
            Lift(l, m, a) => Lift(lv(l), lv(m), go(a)),
        }
    }
}

/// Structural equality up to renaming of bound term and level variables,
/// with level expressions compared in the free theory.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    AlphaEnv::default().eq(t, u)
}

#[derive(Default, Clone)]
struct AlphaEnv {
    left: Vec<Name>,
    right: Vec<Name>,
    lleft: Vec<LevelVar>,
    lright: Vec<LevelVar>,
}

impl AlphaEnv {
    fn var_eq(&self, x: &Name, y: &Name) -> bool {
        let i = self.left.iter().rposition(|z| z == x);
        let j = self.right.iter().rposition(|z| z == y);
        match (i, j) {
            (Some(i), Some(j)) => i == j,
            (None, None) => x == y,
            _ => false,
        }
    }

    fn canon(&self, l: &LevelExpr, side: &[LevelVar]) -> LevelExpr {
        let mut map = BTreeMap::new();
        for (i, v) in side.iter().enumerate() {
            map.insert(v.clone(), LevelVar::new(format!("#{i}")));
        }
        l.rename(&map)
    }

    fn level_eq(&self, l: &LevelExpr, m: &LevelExpr) -> bool {
        eq_free(&self.canon(l, &self.lleft), &self.canon(m, &self.lright))
    }

    fn cstrs_eq(&self, p: &[Constraint], q: &[Constraint]) -> bool {
        p.len() == q.len() && p.iter().zip(q).all(|(c, d)| self.level_eq(&c.lhs, &d.lhs) && self.level_eq(&c.rhs, &d.rhs))
    }

    fn under(&self, x: &Name, y: &Name) -> AlphaEnv {
        let mut env = self.clone();
        env.left.push(x.clone());
        env.right.push(y.clone());
        env
    }

    fn eq(&self, t: &Term, u: &Term) -> bool {
        match (t, u) {
            (Var(x), Var(y)) => self.var_eq(x, y),
            (Const(x), Const(y)) => x == y,
            (Pi(x, a, b), Pi(y, c, d)) | (Lam(x, a, b), Lam(y, c, d)) | (Sigma(x, a, b), Sigma(y, c, d)) => {
                self.eq(a, c) && self.under(x, y).eq(b, d)
            }
            (App(a, b), App(c, d)) | (Pair(a, b), Pair(c, d)) | (Refl(a, b), Refl(c, d)) => self.eq(a, c) && self.eq(b, d),
            (Fst(a), Fst(b)) | (Snd(a), Snd(b)) | (Suc(a), Suc(b)) => self.eq(a, b),
            (Nat, Nat) | (Zero, Zero) => true,
            (
                NatRec { var: x, motive: p, base: a, step: g, target: n },
                NatRec { var: y, motive: q, base: b, step: h, target: m },
            ) => self.under(x, y).eq(p, q) && self.eq(a, b) && self.eq(g, h) && self.eq(n, m),
            (Id(a, b, c), Id(d, e, f)) => self.eq(a, d) && self.eq(b, e) && self.eq(c, f),
            (
                J { ty: a1, from: b1, x: x1, p: p1, motive: c1, base: d1, to: e1, path: f1 },
                J { ty: a2, from: b2, x: x2, p: p2, motive: c2, base: d2, to: e2, path: f2 },
            ) => {
                self.eq(a1, a2)
                    && self.eq(b1, b2)
                    && self.under(x1, x2).under(p1, p2).eq(c1, c2)
                    && self.eq(d1, d2)
                    && self.eq(e1, e2)
                    && self.eq(f1, f2)
            }
            (Univ(l), Univ(m)) | (CodeNat(l), CodeNat(m)) => self.level_eq(l, m),
            (Decode(l, a), Decode(m, b)) => self.level_eq(l, m) && self.eq(a, b),
            (CodeUniv(l1, m1), CodeUniv(l2, m2)) => self.level_eq(l1, l2) && self.level_eq(m1, m2),
            (CodePi(l1, m1, a1, b1), CodePi(l2, m2, a2, b2)) | (CodeSigma(l1, m1, a1, b1), CodeSigma(l2, m2, a2, b2)) => {
                self.level_eq(l1, l2) && self.level_eq(m1, m2) && self.eq(a1, a2) && self.eq(b1, b2)
            }
            (CodeId(l, a, b, c), CodeId(m, d, e, f)) => {
                self.level_eq(l, m) && self.eq(a, d) && self.eq(b, e) && self.eq(c, f)
            }
            (LvlPi(a, s), LvlPi(b, t)) | (LvlLam(a, s), LvlLam(b, t)) => {
                let mut env = self.clone();
                env.lleft.push(a.clone());
                env.lright.push(b.clone());
                env.eq(s, t)
            }
            (LvlApp(s, l), LvlApp(t, m)) => self.eq(s, t) && self.level_eq(l, m),
            (CstrPi(p, s), CstrPi(q, t)) | (CstrLam(p, s), CstrLam(q, t)) => self.cstrs_eq(p, q) && self.eq(s, t),
            (Lift(l1, m1, a), Lift(l2, m2, b)) => self.level_eq(l1, l2) && self.level_eq(m1, m2) && self.eq(a, b),
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// Printing, in the concrete syntax accepted by the parser.

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Binder,
    Prod,
    App,
    Atom,
}

fn level_atom(l: &LevelExpr) -> String {
    match l {
        LevelExpr::Join(..) if l.as_numeral().is_none() => format!("({l})"),
        _ => l.to_string(),
    }
}

fn constraints_str(psi: &[Constraint]) -> String {
    psi.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl Term {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: Prec) -> fmt::Result {
        if let Some(n) = self.as_numeral() {
            return write!(f, "{n}");
        }
        let needs = |p: Prec| prec > p;
        let open = |f: &mut fmt::Formatter<'_>, p: Prec| if needs(p) { f.write_str("(") } else { Ok(()) };
        let close = |f: &mut fmt::Formatter<'_>, p: Prec| if needs(p) { f.write_str(")") } else { Ok(()) };
        match self {
            Var(x) | Const(x) => write!(f, "{x}"),
            Nat => f.write_str("N"),
            Zero => f.write_str("0"),
            Pi(x, a, b) | Sigma(x, a, b) => {
                let op = if matches!(self, Pi(..)) { "->" } else { "*" };
                let p = if op == "->" { Prec::Binder } else { Prec::Prod };
                open(f, p)?;
                if b.has_free(x) {
                    write!(f, "({x} : {a}) {op} ")?;
                } else {
                    a.fmt_prec(f, if op == "->" { Prec::Prod } else { Prec::App })?;
                    write!(f, " {op} ")?;
                }
                b.fmt_prec(f, p)?;
                close(f, p)
            }
            Lam(x, a, b) => {
                open(f, Prec::Binder)?;
                write!(f, "\\({x} : {a}) -> ")?;
                b.fmt_prec(f, Prec::Binder)?;
                close(f, Prec::Binder)
            }
            LvlPi(a, t) => {
                open(f, Prec::Binder)?;
                write!(f, "[{a}] ")?;
                t.fmt_prec(f, Prec::Binder)?;
                close(f, Prec::Binder)
            }
            LvlLam(a, t) => {
                open(f, Prec::Binder)?;
                write!(f, "\\[{a}] -> ")?;
                t.fmt_prec(f, Prec::Binder)?;
                close(f, Prec::Binder)
            }
            CstrPi(psi, t) => {
                open(f, Prec::Binder)?;
                write!(f, "[{}] ", constraints_str(psi))?;
                t.fmt_prec(f, Prec::Binder)?;
                close(f, Prec::Binder)
            }
            CstrLam(psi, t) => {
                open(f, Prec::Binder)?;
                write!(f, "\\[{}] -> ", constraints_str(psi))?;
                t.fmt_prec(f, Prec::Binder)?;
                close(f, Prec::Binder)
            }
            Pair(a, b) => write!(f, "({a}, {b})"),
            Fst(a) | Snd(a) => {
                a.fmt_prec(f, Prec::Atom)?;
                f.write_str(if matches!(self, Fst(_)) { ".1" } else { ".2" })
            }
            _ => {
                open(f, Prec::App)?;
                self.fmt_app(f)?;
                close(f, Prec::App)
            }
        }
    }

    fn fmt_app(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(t: &Term) -> AtomDisplay<'_> {
            AtomDisplay(t)
        }
        match self {
            App(g, a) => {
                g.fmt_prec(f, Prec::App)?;
                write!(f, " {}", atom(a))
            }
            LvlApp(g, l) => {
                g.fmt_prec(f, Prec::App)?;
                write!(f, " @[{l}]")
            }
            Suc(n) => write!(f, "S {}", atom(n)),
            NatRec { var, motive, base, step, target } => write!(
                f,
                "R (\\({var} : N) -> {motive}) {} {} {}",
                atom(base),
                atom(step),
                atom(target)
            ),
            Id(a, x, y) => write!(f, "Id {} {} {}", atom(a), atom(x), atom(y)),
            Refl(a, x) => write!(f, "refl {} {}", atom(a), atom(x)),
            J { ty, from, x, p, motive, base, to, path } => write!(
                f,
                "J {} {} (\\({x} : {ty}) -> \\({p} : Id {} {} {x}) -> {motive}) {} {} {}",
                atom(ty),
                atom(from),
                atom(ty),
                atom(from),
                atom(base),
                atom(to),
                atom(path)
            ),
            Univ(l) => write!(f, "U {}", level_atom(l)),
            Decode(l, a) => write!(f, "T {} {}", level_atom(l), atom(a)),
            CodeUniv(l, m) => write!(f, "cU {} {}", level_atom(l), level_atom(m)),
            CodePi(l, m, a, b) => write!(f, "cPi {} {} {} {}", level_atom(l), level_atom(m), atom(a), atom(b)),
            CodeSigma(l, m, a, b) => write!(f, "cSig {} {} {} {}", level_atom(l), level_atom(m), atom(a), atom(b)),
            CodeNat(l) => write!(f, "cN {}", level_atom(l)),
            CodeId(l, a, x, y) => write!(f, "cId {} {} {} {}", level_atom(l), atom(a), atom(x), atom(y)),
            Lift(l, m, a) => write!(f, "lift {} {} {}", level_atom(l), level_atom(m), atom(a)),
            _ => unreachable!("not an application form"),
        }
    }
}

struct AtomDisplay<'a>(&'a Term);

impl fmt::Display for AtomDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_prec(f, Prec::Atom)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, Prec::Binder)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(n: &str) -> LevelExpr {
        LevelExpr::var(n)
    }

    #[test]
    fn subst_examples() {
        assert_eq!(Term::var("x").subst("x", &Zero), Zero);
        let shadow = Term::lam("x", Nat, Term::var("x"));
        assert_eq!(shadow.subst("x", &Term::var("u")), shadow);
        let app = Term::app(Term::var("f"), Term::var("x"));
        assert_eq!(app.subst("x", &Zero), Term::app(Term::var("f"), Zero));
    }

    #[test]
    fn subst_avoids_capture() {
        // (\(y : N) -> x)[y/x] must not capture
        let t = Term::lam("y", Nat, Term::var("x"));
        let got = t.subst("x", &Term::var("y"));
        match &got {
            Lam(z, _, body) => {
                assert_ne!(&**z, "y");
                assert_eq!(**body, Term::var("y"));
            }
            _ => panic!("{got}"),
        }
        assert!(alpha_eq(&got, &Term::lam("z", Nat, Term::var("y"))));
    }

    #[test]
    fn subst_level_examples() {
        let a = LevelVar::new("a");
        assert_eq!(Univ(lv("a")).subst_level(&a, &lv("b").suc()), Univ(lv("b").suc()));
        let shadow = Term::lvl_lam("a", Univ(lv("a")));
        assert_eq!(shadow.subst_level(&a, &lv("b")), shadow);
        let gd = lv("g").join(lv("d"));
        assert_eq!(
            CodeUniv(lv("a"), lv("a").suc()).subst_level(&a, &gd),
            CodeUniv(gd.clone(), gd.clone().suc())
        );
        // level binders are renamed to avoid capture
        let t = Term::lvl_lam("b", CodeUniv(lv("a"), lv("b")));
        let got = t.subst_level(&a, &lv("b"));
        assert!(alpha_eq(&got, &Term::lvl_lam("c", CodeUniv(lv("b"), lv("c")))), "{got}");
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_eq(&Term::lam("x", Nat, Term::var("x")), &Term::lam("y", Nat, Term::var("y"))));
        assert!(alpha_eq(&Univ(lv("a").join(lv("b"))), &Univ(lv("b").join(lv("a")))));
        assert!(!alpha_eq(&Term::lam("x", Nat, Term::var("x")), &Term::lam("x", Nat, Zero)));
        assert!(alpha_eq(&Term::lvl_lam("a", Univ(lv("a"))), &Term::lvl_lam("b", Univ(lv("b")))));
        assert!(!alpha_eq(&Term::lvl_lam("a", Univ(lv("a"))), &Term::lvl_lam("b", Univ(lv("a")))));
    }

    #[test]
    fn printing() {
        let id = Term::lvl_lam(
            "a",
            Term::lam("X", Univ(lv("a")), Term::lam("x", Term::decode(lv("a"), Term::var("X")), Term::var("x"))),
        );
        assert_eq!(id.to_string(), "\\[a] -> \\(X : U a) -> \\(x : T a X) -> x");
        assert_eq!(Term::arrow(Nat, Term::arrow(Nat, Nat)).to_string(), "N -> N -> N");
        assert_eq!(Term::numeral(3).to_string(), "3");
        assert_eq!(Univ(lv("a").join(lv("b")).suc()).to_string(), "U (a \\/ b)^");
        assert_eq!(Univ(lv("a").join(lv("b"))).to_string(), "U (a \\/ b)");
    }
}
