use std::sync::Arc;

use crate::constraint::Constraint;
use crate::context::Context;
use crate::level::LevelExpr;
use crate::syntax::{Name, Term};

use super::{fresh_for, fresh_level_for, Checker};

impl Checker {
    /// Definitional equality.
    pub fn conv(&self, ctx: &Context, t: &Term, u: &Term) -> bool {
        if t == u {
            return true;
        }
        let t = self.whnf(ctx, t);
        let u = self.whnf(ctx, u);
        t == u || self.conv_whnf(ctx, &t, &u)
    }

    fn conv_under(&self, ctx: &Context, x: &Name, b: &Term, y: &Name, c: &Term) -> bool {
        let z = fresh_for(ctx, x, &[b, c]);
        let v = Term::Var(z);
        self.conv(ctx, &b.subst(x, &v), &c.subst(y, &v))
    }

    /// Compares the bodies of two level binders under a shared fresh variable.
    fn conv_level_under(&self, ctx: &Context, a: &crate::level::LevelVar, s: &Term, b: &crate::level::LevelVar, t: &Term) -> bool {
        let c = fresh_level_for(ctx, a, &[s, t]);
        let Ok(inner) = ctx.with_level(c.clone()) else { return false };
        let v = LevelExpr::Var(c);
        self.conv(&inner, &s.subst_level(a, &v), &t.subst_level(b, &v))
    }

    /// Constraint sets are equal when each entails the other.
    fn conv_constraints(&self, ctx: &Context, p: &[Constraint], q: &[Constraint]) -> Option<Context> {
        let with_p = ctx.with_constraints(p.to_vec()).ok()?;
        let with_q = ctx.with_constraints(q.to_vec()).ok()?;
        let p_q = self.oracle(&with_p).valid(q);
        let q_p = self.oracle(&with_q).valid(p);
        (p_q && q_p).then_some(with_p)
    }

    fn conv_whnf(&self, ctx: &Context, t: &Term, u: &Term) -> bool {
        use Term::*;
        let o = self.oracle(ctx);
        let conv = |a: &Arc<Term>, b: &Arc<Term>| self.conv(ctx, a, b);
        match (t, u) {
            (Lam(x, _, b), Lam(y, _, c)) => self.conv_under(ctx, x, b, y, c),
            (Lam(x, _, b), n) | (n, Lam(x, _, b)) => {
                let z = fresh_for(ctx, x, &[b, n]);
                let v = Term::Var(z);
                self.conv(ctx, &b.subst(x, &v), &Term::app(n.clone(), v))
            }
            (Pair(a, b), Pair(c, d)) => conv(a, c) && conv(b, d),
            (Pair(a, b), n) | (n, Pair(a, b)) => {
                let n = Arc::new(n.clone());
                self.conv(ctx, a, &Fst(n.clone())) && self.conv(ctx, b, &Snd(n))
            }
            (LvlLam(a, s), LvlLam(b, t)) => self.conv_level_under(ctx, a, s, b, t),
            (LvlLam(a, s), n) | (n, LvlLam(a, s)) => {
                let c = fresh_level_for(ctx, a, &[s, n]);
                let Ok(inner) = ctx.with_level(c.clone()) else { return false };
                let v = LevelExpr::Var(c);
                self.conv(&inner, &s.subst_level(a, &v), &Term::lvl_app(n.clone(), v))
            }
            (Var(x), Var(y)) | (Const(x), Const(y)) => x == y,
            (App(f, a), App(g, b)) => conv(f, g) && conv(a, b),
            (Fst(p), Fst(q)) | (Snd(p), Snd(q)) | (Suc(p), Suc(q)) => conv(p, q),
            (Nat, Nat) | (Zero, Zero) => true,
            (
                NatRec { var: x, motive: p, base: a, step: g, target: n },
                NatRec { var: y, motive: q, base: b, step: h, target: m },
            ) => conv(n, m) && conv(a, b) && conv(g, h) && self.conv_under(ctx, x, p, y, q),
            (Id(a, x, y), Id(b, z, w)) => conv(a, b) && conv(x, z) && conv(y, w),
            (Refl(a, x), Refl(b, y)) => conv(a, b) && conv(x, y),
            (
                J { ty: a1, from: b1, x: x1, p: p1, motive: c1, base: d1, to: e1, path: f1 },
                J { ty: a2, from: b2, x: x2, p: p2, motive: c2, base: d2, to: e2, path: f2 },
            ) => {
                if !(conv(f1, f2) && conv(a1, a2) && conv(b1, b2) && conv(d1, d2) && conv(e1, e2)) {
                    return false;
                }
                let x = fresh_for(ctx, x1, &[c1, c2]);
                let p = fresh_for(ctx, p1, &[c1, c2, &Term::Var(x.clone())]);
                let rename = |c: &Term, x0: &Name, p0: &Name| {
                    crate::syntax::Subst::new()
                        .term(x0.clone(), Term::Var(x.clone()))
                        .term(p0.clone(), Term::Var(p.clone()))
                        .apply(c)
                };
                self.conv(ctx, &rename(c1, x1, p1), &rename(c2, x2, p2))
            }
            (Pi(x, a, b), Pi(y, c, d)) | (Sigma(x, a, b), Sigma(y, c, d)) => {
                conv(a, c) && self.conv_under(ctx, x, b, y, d)
            }
            (Univ(l), Univ(m)) | (CodeNat(l), CodeNat(m)) => o.eq(l, m),
            (Decode(l, a), Decode(m, b)) => o.eq(l, m) && conv(a, b),
            (CodeUniv(l1, m1), CodeUniv(l2, m2)) => o.eq(l1, l2) && o.eq(m1, m2),
            (CodePi(l1, m1, a1, b1), CodePi(l2, m2, a2, b2)) | (CodeSigma(l1, m1, a1, b1), CodeSigma(l2, m2, a2, b2)) => {
                o.eq(l1, l2) && o.eq(m1, m2) && conv(a1, a2) && conv(b1, b2)
            }
            (CodeId(l, a, x, y), CodeId(m, b, z, w)) => o.eq(l, m) && conv(a, b) && conv(x, z) && conv(y, w),
            (LvlPi(a, s), LvlPi(b, t)) => self.conv_level_under(ctx, a, s, b, t),
            (LvlApp(s, l), LvlApp(t, m)) => o.eq(l, m) && conv(s, t),
            (CstrPi(p, s), CstrPi(q, t)) | (CstrLam(p, s), CstrLam(q, t)) => match self.conv_constraints(ctx, p, q) {
                Some(inner) => self.conv(&inner, s, t),
                None => false,
            },
            (Lift(l1, m1, a), Lift(l2, m2, b)) => o.eq(l1, l2) && o.eq(m1, m2) && conv(a, b),
            _ => false,
        }
    }
}
