use std::fmt;

use crate::level::LevelExpr;

use super::ast::{CstrOp, Decl, Expr, ExprKind, Param, SurfaceConstraint};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Binder,
    Prod,
    App,
    Atom,
}

fn latom(l: &LevelExpr) -> String {
    match l {
        LevelExpr::Join(..) => format!("({l})"),
        _ => l.to_string(),
    }
}

impl fmt::Display for SurfaceConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            CstrOp::Eq => "=",
            CstrOp::Leq => "<=",
            CstrOp::Lt => "<",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

fn cstrs(cs: &[SurfaceConstraint]) -> String {
    cs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

struct At<'a>(&'a Expr, Prec);

impl fmt::Display for At<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_prec(f, self.1)
    }
}

impl Expr {
    fn own_prec(&self) -> Prec {
        use ExprKind::*;
        match &self.kind {
            Lam(..) | LvlLam(..) | CstrLam(..) | Pi(..) | Arrow(..) | LvlPi(..) | CstrPi(..) => Prec::Binder,
            Sigma(..) | Prod(..) => Prec::Prod,
            Ident(_) | Num(_) | Type | Nat | Pair(..) | Fst(_) | Snd(_) => Prec::Atom,
            _ => Prec::App,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: Prec) -> fmt::Result {
        if self.own_prec() < prec {
            write!(f, "(")?;
            self.fmt_kind(f)?;
            return write!(f, ")");
        }
        self.fmt_kind(f)
    }

    fn fmt_kind(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ExprKind::*;
        let atom = |e: &'_ Expr| At(e, Prec::Atom).to_string();
        match &self.kind {
            Ident(x) => f.write_str(x),
            Num(n) => write!(f, "{n}"),
            Type => f.write_str("Type"),
            Nat => f.write_str("N"),
            Lam(x, a, b) => write!(f, "\\({x} : {}) -> {}", At(a, Prec::Binder), At(b, Prec::Binder)),
            LvlLam(xs, b) => write!(f, "\\[{}] -> {}", xs.join(" "), At(b, Prec::Binder)),
            CstrLam(cs, b) => write!(f, "\\[{}] -> {}", cstrs(cs), At(b, Prec::Binder)),
            Pi(x, a, b) => write!(f, "({x} : {}) -> {}", At(a, Prec::Binder), At(b, Prec::Binder)),
            Arrow(a, b) => write!(f, "{} -> {}", At(a, Prec::Prod), At(b, Prec::Binder)),
            Sigma(x, a, b) => write!(f, "({x} : {}) * {}", At(a, Prec::Binder), At(b, Prec::Prod)),
            Prod(a, b) => write!(f, "{} * {}", At(a, Prec::App), At(b, Prec::Prod)),
            LvlPi(xs, b) => write!(f, "[{}] {}", xs.join(" "), At(b, Prec::Binder)),
            CstrPi(cs, b) => write!(f, "[{}] {}", cstrs(cs), At(b, Prec::Binder)),
            Pair(a, b) => write!(f, "({}, {})", At(a, Prec::Binder), At(b, Prec::Binder)),
            Fst(a) => write!(f, "{}.1", atom(a)),
            Snd(a) => write!(f, "{}.2", atom(a)),
            App(g, a) => write!(f, "{} {}", At(g, Prec::App), atom(a)),
            LvlApp(g, l) => write!(f, "{} @[{l}]", At(g, Prec::App)),
            Suc(n) => write!(f, "S {}", atom(n)),
            Rec(p, a, g, n) => write!(f, "R {} {} {} {}", atom(p), atom(a), atom(g), atom(n)),
            Id(a, x, y) => write!(f, "Id {} {} {}", atom(a), atom(x), atom(y)),
            Refl(a, x) => write!(f, "refl {} {}", atom(a), atom(x)),
            J(a, x, c, d, y, q) => {
                write!(f, "J {} {} {} {} {} {}", atom(a), atom(x), atom(c), atom(d), atom(y), atom(q))
            }
            Univ(l) => write!(f, "U {}", latom(l)),
            Decode(l, a) => write!(f, "T {} {}", latom(l), atom(a)),
            CodeUniv(l, m) => write!(f, "cU {} {}", latom(l), latom(m)),
            CodePi(l, m, a, b) => write!(f, "cPi {} {} {} {}", latom(l), latom(m), atom(a), atom(b)),
            CodeSigma(l, m, a, b) => write!(f, "cSig {} {} {} {}", latom(l), latom(m), atom(a), atom(b)),
            CodeNat(l) => write!(f, "cN {}", latom(l)),
            CodeId(l, a, x, y) => write!(f, "cId {} {} {} {}", latom(l), atom(a), atom(x), atom(y)),
            Lift(l, m, a) => write!(f, "lift {} {} {}", latom(l), latom(m), atom(a)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, Prec::Binder)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Term(xs, a) => write!(f, "({} : {a})", xs.join(" ")),
            Param::Levels(xs, cs) if cs.is_empty() => write!(f, "[{}]", xs.join(" ")),
            Param::Levels(xs, cs) => write!(f, "[{} | {}]", xs.join(" "), cstrs(cs)),
            Param::Constraints(cs) => write!(f, "[{}]", cstrs(cs)),
        }
    }
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "def {}", self.name)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        write!(f, " : {} = {} ;", self.ty, self.body)
    }
}
