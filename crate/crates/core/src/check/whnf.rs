use std::sync::Arc;

use crate::context::Context;
use crate::level::LevelExpr;
use crate::syntax::{fresh_name, Term};

use super::{fresh_level_for, Checker};

impl Checker {
    /// Reduces `t` until its head is stable.
    pub fn whnf(&self, ctx: &Context, t: &Term) -> Term {
        let oracle = self.oracle(ctx);
        let mut t = t.clone();
        loop {
            let next = match &t {
                Term::Const(c) => match self.sig.get(c).and_then(|d| d.body.clone()) {
                    Some(body) => body,
                    None => return t,
                },
                Term::App(f, a) => match self.whnf(ctx, f) {
                    Term::Lam(x, _, body) => body.subst(&x, a),
                    f => return Term::App(Arc::new(f), a.clone()),
                },
                Term::Fst(p) | Term::Snd(p) => {
                    let first = matches!(t, Term::Fst(_));
                    match self.whnf(ctx, p) {
                        Term::Pair(a, b) => (*if first { a } else { b }).clone(),
                        p => {
                            let p = Arc::new(p);
                            return if first { Term::Fst(p) } else { Term::Snd(p) };
                        }
                    }
                }
                Term::NatRec { var, motive, base, step, target } => match self.whnf(ctx, target) {
                    Term::Zero => (**base).clone(),
                    Term::Suc(n) => {
                        let rec = Term::NatRec {
                            var: var.clone(),
                            motive: motive.clone(),
                            base: base.clone(),
                            step: step.clone(),
                            target: n.clone(),
                        };
                        Term::app(Term::app((**step).clone(), (*n).clone()), rec)
                    }
                    n => {
                        return Term::NatRec {
                            var: var.clone(),
                            motive: motive.clone(),
                            base: base.clone(),
                            step: step.clone(),
                            target: Arc::new(n),
                        }
                    }
                },
                Term::J { base, path, .. } => match self.whnf(ctx, path) {
                    Term::Refl(..) => (**base).clone(),
                    q => {
                        let Term::J { ty, from, x, p, motive, base, to, .. } = &t else { unreachable!() };
                        return Term::J {
                            ty: ty.clone(),
                            from: from.clone(),
                            x: x.clone(),
                            p: p.clone(),
                            motive: motive.clone(),
                            base: base.clone(),
                            to: to.clone(),
                            path: Arc::new(q),
                        };
                    }
                },
                Term::Decode(l, a) => match self.whnf(ctx, a) {
                    Term::CodeUniv(k, _) => return Term::Univ(k),
                    Term::CodeNat(_) => return Term::Nat,
                    Term::CodePi(n, m, a, b) => return decode_binder(true, n, m, &a, &b),
                    Term::CodeSigma(n, m, a, b) => return decode_binder(false, n, m, &a, &b),
                    Term::CodeId(k, a, x, y) => return Term::Id(Arc::new(Term::decode(k, (*a).clone())), x, y),
                    Term::Lift(k, _, b) if self.config.cumulative => Term::Decode(k, b),
                    a => return Term::Decode(l.clone(), Arc::new(a)),
                },
                Term::LvlApp(f, l) => match self.whnf(ctx, f) {
                    Term::LvlLam(a, body) => body.subst_level(&a, l),
                    f => return Term::LvlApp(Arc::new(f), l.clone()),
                },
                Term::CstrPi(psi, body) | Term::CstrLam(psi, body) if oracle.valid(psi) => (**body).clone(),
                Term::Lift(l, m, a) if self.config.cumulative => {
                    if oracle.eq(l, m) {
                        (**a).clone()
                    } else {
                        match self.whnf(ctx, a) {
                            Term::Lift(k, _, b) => Term::Lift(k, m.clone(), b),
                            a => return lift_code(l, m, a),
                        }
                    }
                }
                _ => return t,
            };
            self.tick();
            t = next;
        }
    }

    /// Reduces everywhere, not only at the head.
    pub fn normalize(&self, ctx: &Context, t: &Term) -> Term {
        use Term::*;
        let t = self.whnf(ctx, t);
        let go = |s: &Arc<Term>| Arc::new(self.normalize(ctx, s));
        match &t {
            Var(_) | Const(_) | Nat | Zero | Univ(_) | CodeUniv(..) | CodeNat(_) => t,
            Pi(x, a, b) => Pi(x.clone(), go(a), go(b)),
            Lam(x, a, b) => Lam(x.clone(), go(a), go(b)),
            Sigma(x, a, b) => Sigma(x.clone(), go(a), go(b)),
            App(f, a) => App(go(f), go(a)),
            Pair(a, b) => Pair(go(a), go(b)),
            Fst(a) => Fst(go(a)),
            Snd(a) => Snd(go(a)),
            Suc(n) => Suc(go(n)),
            NatRec { var, motive, base, step, target } => NatRec {
                var: var.clone(),
                motive: go(motive),
                base: go(base),
                step: go(step),
                target: go(target),
            },
            Id(a, x, y) => Id(go(a), go(x), go(y)),
            Refl(a, x) => Refl(go(a), go(x)),
            J { ty, from, x, p, motive, base, to, path } => J {
                ty: go(ty),
                from: go(from),
                x: x.clone(),
                p: p.clone(),
                motive: go(motive),
                base: go(base),
                to: go(to),
                path: go(path),
            },
            Decode(l, a) => Decode(l.clone(), go(a)),
            CodePi(l, m, a, b) => CodePi(l.clone(), m.clone(), go(a), go(b)),
            CodeSigma(l, m, a, b) => CodeSigma(l.clone(), m.clone(), go(a), go(b)),
            CodeId(l, a, x, y) => CodeId(l.clone(), go(a), go(x), go(y)),
            LvlPi(a, b) | LvlLam(a, b) => {
                let c = fresh_level_for(ctx, a, &[b]);
                let inner = ctx.with_level(c.clone()).expect("fresh level variable");
                let b = Arc::new(self.normalize(&inner, &b.subst_level(a, &LevelExpr::Var(c.clone()))));
                if matches!(t, LvlPi(..)) {
                    LvlPi(c, b)
                } else {
                    LvlLam(c, b)
                }
            }
            LvlApp(f, l) => LvlApp(go(f), l.clone()),
            CstrPi(psi, b) | CstrLam(psi, b) => {
                let b = match ctx.with_constraints(psi.clone()) {
                    Ok(inner) => Arc::new(self.normalize(&inner, b)),
                    Err(_) => b.clone(),
                };
                if matches!(t, CstrPi(..)) {
                    CstrPi(psi.clone(), b)
                } else {
                    CstrLam(psi.clone(), b)
                }
            }
            Lift(l, m, a) => Lift(l.clone(), m.clone(), go(a)),
        }
    }
}

/// Decoding of a dependent product or sum code.
fn decode_binder(pi: bool, n: LevelExpr, m: LevelExpr, a: &Arc<Term>, b: &Arc<Term>) -> Term {
    let x = fresh_name("x", |s| b.has_free(s));
    let dom = Arc::new(Term::decode(n, (**a).clone()));
    let cod = Arc::new(Term::decode(m, Term::app((**b).clone(), Term::Var(x.clone()))));
    if pi {
        Term::Pi(x, dom, cod)
    } else {
        Term::Sigma(x, dom, cod)
    }
}

/// `lift l m a` for `a` in weak-head normal form.
fn lift_code(l: &LevelExpr, m: &LevelExpr, a: Term) -> Term {
    let lift = |k: &LevelExpr, t: Term| Term::Lift(k.clone(), m.clone(), Arc::new(t));
    let is_pi = matches!(a, Term::CodePi(..));
    match a {
        Term::CodeNat(_) => Term::CodeNat(m.clone()),
        Term::CodeUniv(k, _) => Term::CodeUniv(k, m.clone()),
        Term::CodePi(ref n, ref n2, ref a, ref b) | Term::CodeSigma(ref n, ref n2, ref a, ref b) => {
            let x = fresh_name("x", |s| b.has_free(s));
            let fam = Term::lam(
                &x,
                Term::decode(n.clone(), (**a).clone()),
                lift(n2, Term::app((**b).clone(), Term::Var(x.clone()))),
            );
            let (dom, fam) = (Arc::new(lift(n, (**a).clone())), Arc::new(fam));
            if is_pi {
                Term::CodePi(m.clone(), m.clone(), dom, fam)
            } else {
                Term::CodeSigma(m.clone(), m.clone(), dom, fam)
            }
        }
        Term::CodeId(k, a, x, y) => Term::CodeId(m.clone(), Arc::new(lift(&k, (*a).clone())), x, y),
        a => Term::Lift(l.clone(), m.clone(), Arc::new(a)),
    }
}
