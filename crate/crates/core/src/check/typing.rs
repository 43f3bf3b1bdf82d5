use std::sync::Arc;

use crate::constraint::Constraint;
use crate::context::{Context, ContextEntry};
use crate::level::{LevelExpr, LevelVar};
use crate::syntax::{Name, Subst, Term};

use super::{ctx_error, fail, fresh_for, fresh_level_for, CheckResult, Checker, Mode};

impl Checker {
    /// Enters the term binder `x : a` over `bodies`, renaming `x` if the
    /// context already declares it.
    fn enter(&self, ctx: &Context, x: &Name, a: &Term, bodies: &[&Term]) -> CheckResult<(Context, Name, Vec<Term>)> {
        let (y, renamed) = if ctx.has_term(x) {
            let y = fresh_for(ctx, x, bodies);
            let v = Term::Var(y.clone());
            (y, bodies.iter().map(|b| b.subst(x, &v)).collect())
        } else {
            (x.clone(), bodies.iter().map(|b| (*b).clone()).collect())
        };
        let inner = ctx.with_term(y.clone(), a.clone()).map_err(|e| ctx_error(ctx, e))?;
        Ok((inner, y, renamed))
    }

    fn enter_level(&self, ctx: &Context, a: &LevelVar, bodies: &[&Term]) -> CheckResult<(Context, LevelVar, Vec<Term>)> {
        if self.config.mode == Mode::External {
            return fail(ctx, "external-level", format!("level binder `{a}` in the external system"));
        }
        let (b, renamed) = if ctx.has_level(a) || a.is_numeral_base() {
            let b = fresh_level_for(ctx, a, bodies);
            let v = LevelExpr::Var(b.clone());
            (b, bodies.iter().map(|t| t.subst_level(a, &v)).collect())
        } else {
            (a.clone(), bodies.iter().map(|t| (*t).clone()).collect())
        };
        let inner = ctx.with_level(b.clone()).map_err(|e| ctx_error(ctx, e))?;
        Ok((inner, b, renamed))
    }

    fn enter_constraints(&self, ctx: &Context, psi: &[Constraint]) -> CheckResult<Context> {
        if self.config.mode == Mode::External {
            return fail(ctx, "external-level", "constraint binder in the external system");
        }
        for c in psi {
            self.check_level(ctx, &c.lhs)?;
            self.check_level(ctx, &c.rhs)?;
        }
        ctx.with_constraints(psi.to_vec()).map_err(|e| ctx_error(ctx, e))
    }

    /// All variables of `l` are declared (internal mode), or `l` is a
    /// closed numeral expression (external mode).
    pub fn check_level(&self, ctx: &Context, l: &LevelExpr) -> CheckResult<()> {
        for v in l.vars() {
            match self.config.mode {
                Mode::External if !v.is_numeral_base() => {
                    return fail(ctx, "external-level", format!("level variable `{v}` in the external system"));
                }
                Mode::Internal if v.is_numeral_base() => {
                    return fail(ctx, "undeclared-level", format!("numeral level `{l}` outside the external system"));
                }
                Mode::Internal if !ctx.has_level(&v) => {
                    return fail(ctx, "undeclared-level", format!("level variable `{v}` is not declared"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Validates a context entry by entry.
    pub fn check_ctx(&self, entries: &[ContextEntry]) -> CheckResult<Context> {
        let mut ctx = Context::new();
        for e in entries {
            ctx = match e {
                ContextEntry::TermDecl(x, a) => {
                    self.check_type(&ctx, a)?;
                    ctx.with_term(x.clone(), a.clone()).map_err(|err| ctx_error(&ctx, err))?
                }
                ContextEntry::LevelDecl(a) => {
                    if self.config.mode == Mode::External {
                        return fail(&ctx, "external-level", format!("level declaration `{a}` in the external system"));
                    }
                    ctx.with_level(a.clone()).map_err(|err| ctx_error(&ctx, err))?
                }
                ContextEntry::ConstraintBlock(psi) => self.enter_constraints(&ctx, psi)?,
            };
        }
        Ok(ctx)
    }

    pub fn check_type(&self, ctx: &Context, a: &Term) -> CheckResult<()> {
        match a {
            Term::Pi(x, dom, cod) | Term::Sigma(x, dom, cod) => {
                self.check_type(ctx, dom)?;
                let (inner, _, body) = self.enter(ctx, x, dom, &[cod])?;
                self.check_type(&inner, &body[0])
            }
            Term::Nat => Ok(()),
            Term::Id(ty, x, y) => {
                self.check_type(ctx, ty)?;
                self.check(ctx, x, ty)?;
                self.check(ctx, y, ty)
            }
            Term::Univ(l) => self.check_level(ctx, l),
            Term::Decode(l, code) => {
                self.check_level(ctx, l)?;
                self.check(ctx, code, &Term::Univ(l.clone()))
            }
            Term::LvlPi(v, body) => {
                let (inner, _, body) = self.enter_level(ctx, v, &[body])?;
                self.check_type(&inner, &body[0])
            }
            Term::CstrPi(psi, body) => {
                let inner = self.enter_constraints(ctx, psi)?;
                self.check_type(&inner, body)
            }
            _ => fail(ctx, "not-a-type", format!("expected a type, found `{a}`")),
        }
    }

    pub fn infer(&self, ctx: &Context, t: &Term) -> CheckResult<Term> {
        match t {
            Term::Var(x) => match ctx.lookup(x) {
                Some(a) => Ok(a.clone()),
                None => fail(ctx, "var", format!("unbound variable `{x}`")),
            },
            Term::Const(c) => match self.sig.get(c) {
                Some(d) => Ok(d.ty.clone()),
                None => fail(ctx, "unknown-identifier", format!("unknown constant `{c}`")),
            },
            Term::App(f, a) => {
                let fty = self.infer(ctx, f)?;
                match self.whnf(ctx, &fty) {
                    Term::Pi(x, dom, cod) => {
                        self.check(ctx, a, &dom)?;
                        Ok(cod.subst(&x, a))
                    }
                    other => fail(ctx, "app", format!("application of non-function `{f}` of type `{other}`")),
                }
            }
            Term::Lam(x, a, b) => {
                self.check_type(ctx, a)?;
                let (inner, y, body) = self.enter(ctx, x, a, &[b])?;
                let bty = self.infer(&inner, &body[0])?;
                Ok(Term::Pi(y, a.clone(), Arc::new(bty)))
            }
            Term::Fst(p) | Term::Snd(p) => {
                let pty = self.infer(ctx, p)?;
                match self.whnf(ctx, &pty) {
                    Term::Sigma(x, a, b) => Ok(if matches!(t, Term::Fst(_)) {
                        (*a).clone()
                    } else {
                        b.subst(&x, &Term::Fst(p.clone()))
                    }),
                    other => fail(ctx, "proj", format!("projection from `{p}` of non-pair type `{other}`")),
                }
            }
            Term::Zero => Ok(Term::Nat),
            Term::Suc(n) => {
                self.check(ctx, n, &Term::Nat)?;
                Ok(Term::Nat)
            }
            Term::NatRec { var, motive, base, step, target } => {
                let (inner, x, p) = self.enter(ctx, var, &Term::Nat, &[motive])?;
                let p = &p[0];
                self.check_type(&inner, p)?;
                self.check(ctx, base, &p.subst(&x, &Term::Zero))?;
                let y = fresh_for(ctx, "n", &[p]);
                let yv = Term::Var(y.clone());
                let step_ty = Term::Pi(
                    y.clone(),
                    Arc::new(Term::Nat),
                    Arc::new(Term::arrow(p.subst(&x, &yv), p.subst(&x, &Term::suc(yv.clone())))),
                );
                self.check(ctx, step, &step_ty)?;
                self.check(ctx, target, &Term::Nat)?;
                Ok(p.subst(&x, target))
            }
            Term::Refl(a, x) => {
                self.check_type(ctx, a)?;
                self.check(ctx, x, a)?;
                Ok(Term::Id(a.clone(), x.clone(), x.clone()))
            }
            Term::J { ty, from, x, p, motive, base, to, path } => {
                self.check_type(ctx, ty)?;
                self.check(ctx, from, ty)?;
                let (inner, x2, c) = self.enter(ctx, x, ty, &[motive])?;
                let path_ty = Term::Id(ty.clone(), from.clone(), Arc::new(Term::Var(x2.clone())));
                let (inner, p2, c) = self.enter(&inner, p, &path_ty, &[&c[0]])?;
                let c = &c[0];
                self.check_type(&inner, c)?;
                let at = |a: &Term, q: &Term| Subst::new().term(x2.clone(), a.clone()).term(p2.clone(), q.clone()).apply(c);
                self.check(ctx, base, &at(from, &Term::Refl(ty.clone(), from.clone())))?;
                self.check(ctx, to, ty)?;
                self.check(ctx, path, &Term::Id(ty.clone(), from.clone(), to.clone()))?;
                Ok(at(to, path))
            }
            Term::CodeUniv(l, m) => {
                self.check_level(ctx, l)?;
                self.check_level(ctx, m)?;
                if !self.oracle(ctx).lt(l, m) {
                    return fail(ctx, "ucode-lt", format!("U-code requires l<m, but {l} < {m} does not hold"));
                }
                Ok(Term::Univ(m.clone()))
            }
            Term::CodePi(n, m, a, b) | Term::CodeSigma(n, m, a, b) => {
                self.check_level(ctx, n)?;
                self.check_level(ctx, m)?;
                self.check(ctx, a, &Term::Univ(n.clone()))?;
                let fam = Term::arrow(Term::decode(n.clone(), (**a).clone()), Term::Univ(m.clone()));
                self.check(ctx, b, &fam)?;
                Ok(Term::Univ(n.clone().join(m.clone())))
            }
            Term::CodeNat(l) => {
                self.check_level(ctx, l)?;
                Ok(Term::Univ(l.clone()))
            }
            Term::CodeId(l, a, x, y) => {
                self.check_level(ctx, l)?;
                self.check(ctx, a, &Term::Univ(l.clone()))?;
                let el = Term::decode(l.clone(), (**a).clone());
                self.check(ctx, x, &el)?;
                self.check(ctx, y, &el)?;
                Ok(Term::Univ(l.clone()))
            }
            Term::LvlLam(a, body) => {
                let (inner, b, body) = self.enter_level(ctx, a, &[body])?;
                let ty = self.infer(&inner, &body[0])?;
                Ok(Term::LvlPi(b, Arc::new(ty)))
            }
            Term::LvlApp(f, l) => {
                if self.config.mode == Mode::External {
                    return fail(ctx, "external-level", "level application in the external system");
                }
                self.check_level(ctx, l)?;
                let fty = self.infer(ctx, f)?;
                match self.whnf(ctx, &fty) {
                    Term::LvlPi(a, body) => Ok(body.subst_level(&a, l)),
                    other => fail(ctx, "lvl-app", format!("level application of `{f}` of type `{other}`")),
                }
            }
            Term::CstrLam(psi, body) => {
                let inner = self.enter_constraints(ctx, psi)?;
                let ty = self.infer(&inner, body)?;
                Ok(Term::CstrPi(psi.clone(), Arc::new(ty)))
            }
            Term::Lift(l, m, a) => {
                if !self.config.cumulative {
                    return fail(ctx, "lift-disabled", "lift requires cumulative mode");
                }
                self.check_level(ctx, l)?;
                self.check_level(ctx, m)?;
                if !self.oracle(ctx).leq(l, m) {
                    return fail(ctx, "lift-leq", format!("lift requires {l} <= {m}"));
                }
                self.check(ctx, a, &Term::Univ(l.clone()))?;
                Ok(Term::Univ(m.clone()))
            }
            Term::Pair(..) => fail(ctx, "cannot-infer", format!("cannot infer the type of pair `{t}`; annotate it")),
            Term::Pi(..)
            | Term::Sigma(..)
            | Term::Nat
            | Term::Id(..)
            | Term::Univ(_)
            | Term::Decode(..)
            | Term::LvlPi(..)
            | Term::CstrPi(..) => {
                fail(ctx, "not-a-term", format!("`{t}` is a type, not a term; use its code in a universe"))
            }
        }
    }

    pub fn check(&self, ctx: &Context, t: &Term, ty: &Term) -> CheckResult<()> {
        match t {
            Term::Lam(x, a, b) => {
                let Term::Pi(y, dom, cod) = self.whnf(ctx, ty) else {
                    return self.check_by_inference(ctx, t, ty);
                };
                self.check_type(ctx, a)?;
                if !self.conv(ctx, a, &dom) {
                    return fail(
                        ctx,
                        "conversion",
                        format!("binder `{x}` annotated with `{a}` but the expected domain is `{dom}`"),
                    );
                }
                let (inner, z, bodies) = self.enter(ctx, x, a, &[b])?;
                let cod = cod.subst(&y, &Term::Var(z));
                self.check(&inner, &bodies[0], &cod)
            }
            Term::Pair(a, b) => match self.whnf(ctx, ty) {
                Term::Sigma(x, dom, cod) => {
                    self.check(ctx, a, &dom)?;
                    self.check(ctx, b, &cod.subst(&x, a))
                }
                other => fail(ctx, "pair", format!("pair checked against non-Σ type `{other}`")),
            },
            Term::LvlLam(a, body) => {
                let Term::LvlPi(b, cod) = self.whnf(ctx, ty) else {
                    return self.check_by_inference(ctx, t, ty);
                };
                let (inner, c, bodies) = self.enter_level(ctx, a, &[body])?;
                let cod = cod.subst_level(&b, &LevelExpr::Var(c));
                self.check(&inner, &bodies[0], &cod)
            }
            Term::CstrLam(psi, body) => {
                if self.config.mode == Mode::Internal && self.oracle(ctx).valid(psi) {
                    let inner = self.enter_constraints(ctx, psi)?;
                    return self.check(&inner, body, ty);
                }
                match self.whnf(ctx, ty) {
                    Term::CstrPi(q, cod) => {
                        let inner = self.enter_constraints(ctx, psi)?;
                        let with_q = self.enter_constraints(ctx, &q)?;
                        if !(self.oracle(&inner).valid(&q) && self.oracle(&with_q).valid(psi)) {
                            return fail(
                                ctx,
                                "conversion",
                                format!("constraint abstraction over {} checked against a type guarded by {}", show(psi), show(&q)),
                            );
                        }
                        self.check(&inner, body, &cod)
                    }
                    _ => self.check_by_inference(ctx, t, ty),
                }
            }
            _ => self.check_by_inference(ctx, t, ty),
        }
    }

    fn check_by_inference(&self, ctx: &Context, t: &Term, ty: &Term) -> CheckResult<()> {
        let actual = self.infer(ctx, t)?;
        if self.conv(ctx, &actual, ty) {
            Ok(())
        } else {
            fail(ctx, "conversion", format!("type mismatch for `{t}`: expected `{ty}`, found `{actual}`"))
        }
    }
}

fn show(psi: &[Constraint]) -> String {
    let cs: Vec<String> = psi.iter().map(ToString::to_string).collect();
    format!("[{}]", cs.join(", "))
}
