//! Interpretation of level-polymorphic judgments in the externally indexed
//! system: specialize level redexes away, then replace every level by its
//! value under an assignment and re-check with numeral levels.

use std::sync::Arc;

use thiserror::Error;

use crate::check::{Checker, CheckerConfig, Mode};
use crate::constraint::Constraint;
use crate::context::{Context, ContextEntry};
use crate::diagnostic::Diagnostic;
use crate::level::{Assignment, LevelError, LevelExpr, LevelVar};
use crate::syntax::{Name, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MonoError {
    #[error("assignment {assignment} falsifies the constraint {constraint}")]
    UnsatisfiedConstraint { constraint: Constraint, assignment: Assignment },
    #[error("level variable `{0}` has no value in the assignment")]
    Unassigned(LevelVar),
    #[error("a level or constraint binder remains after specialization: {0}")]
    ResidualPolymorphism(String),
}

impl From<LevelError> for MonoError {
    fn from(e: LevelError) -> Self {
        match e {
            LevelError::Unassigned(v) => MonoError::Unassigned(v),
        }
    }
}

/// A judgment `Γ ⊢ t : A` with numeral levels only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalJudgment {
    pub ctx: Vec<(Name, Term)>,
    pub term: Term,
    pub ty: Term,
}

/// Unfolds every constant, reduces level redexes and drops constraint
/// binders that `ctx` entails. Redexes exposed by unfolding (applied
/// abstractions, projections of pairs) are reduced too, since the unfolded
/// bodies carry no type annotation to infer them from.
pub fn specialize(ck: &Checker, ctx: &Context, t: &Term) -> Term {
    use Term::*;
    let go = |s: &Arc<Term>| Arc::new(specialize(ck, ctx, s));
    match t {
        Const(c) => match ck.signature().get(c).and_then(|d| d.body.clone()) {
            Some(body) => specialize(ck, ctx, &body),
            None => t.clone(),
        },
        LvlApp(f, l) => match specialize(ck, ctx, f) {
            LvlLam(a, body) => specialize(ck, ctx, &body.subst_level(&a, l)),
            f => LvlApp(Arc::new(f), l.clone()),
        },
        CstrPi(psi, body) | CstrLam(psi, body) => {
            if ck.oracle(ctx).valid(psi) {
                return specialize(ck, ctx, body);
            }
            let body = match ctx.with_constraints(psi.clone()) {
                Ok(inner) => Arc::new(specialize(ck, &inner, body)),
                Err(_) => body.clone(),
            };
            if matches!(t, CstrPi(..)) {
                CstrPi(psi.clone(), body)
            } else {
                CstrLam(psi.clone(), body)
            }
        }
        LvlPi(a, body) | LvlLam(a, body) => {
            let (a2, body) = if ctx.has_level(a) {
                let a2 = crate::check::fresh_level_for(ctx, a, &[&**body]);
                let b = body.subst_level(a, &LevelExpr::Var(a2.clone()));
                (a2, b)
            } else {
                (a.clone(), (**body).clone())
            };
            let inner = ctx.with_level(a2.clone()).expect("fresh level variable");
            let body = Arc::new(specialize(ck, &inner, &body));
            if matches!(t, LvlPi(..)) {
                LvlPi(a2, body)
            } else {
                LvlLam(a2, body)
            }
        }
        Var(_) | Nat | Zero | Univ(_) | CodeUniv(..) | CodeNat(_) => t.clone(),
        Pi(x, a, b) => Pi(x.clone(), go(a), go(b)),
        Lam(x, a, b) => Lam(x.clone(), go(a), go(b)),
        Sigma(x, a, b) => Sigma(x.clone(), go(a), go(b)),
        App(f, a) => match specialize(ck, ctx, f) {
            Lam(x, _, body) => specialize(ck, ctx, &body.subst(&x, a)),
            f => App(Arc::new(f), go(a)),
        },
        Pair(a, b) => Pair(go(a), go(b)),
        Fst(p) => match specialize(ck, ctx, p) {
            Pair(a, _) => (*a).clone(),
            p => Fst(Arc::new(p)),
        },
        Snd(p) => match specialize(ck, ctx, p) {
            Pair(_, b) => (*b).clone(),
            p => Snd(Arc::new(p)),
        },
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
        Lift(l, m, a) => Lift(l.clone(), m.clone(), go(a)),
    }
}

/// Moves the leading level and constraint binders of a declaration's type
/// (and the matching abstractions of its body) into a context.
pub fn peel(ty: &Term, body: &Term) -> (Context, Term, Term) {
    let mut ctx = Context::new();
    let (mut ty, mut body) = (ty.clone(), body.clone());
    loop {
        match ty {
            Term::LvlPi(ref a, ref cod) => {
                if ctx.has_level(a) {
                    break;
                }
                let v = LevelExpr::Var(a.clone());
                body = match &body {
                    Term::LvlLam(b, t) => t.subst_level(b, &v),
                    other => Term::lvl_app(other.clone(), v),
                };
                ctx = ctx.with_level(a.clone()).expect("checked above");
                ty = (**cod).clone();
            }
            Term::CstrPi(ref psi, ref cod) => {
                let Ok(inner) = ctx.with_constraints(psi.clone()) else { break };
                ctx = inner;
                if let Term::CstrLam(_, t) = &body {
                    body = (**t).clone();
                }
                ty = (**cod).clone();
            }
            _ => break,
        }
    }
    (ctx, ty, body)
}

fn erase_level(l: &LevelExpr, rho: &Assignment) -> Result<LevelExpr, MonoError> {
    let n = l.eval_nat(rho)?;
    Ok(LevelExpr::numeral(u32::try_from(n).expect("level values fit in u32")))
}

/// Replaces every level by its numeral value under `rho`.
pub fn erase_term(t: &Term, rho: &Assignment) -> Result<Term, MonoError> {
    use Term::*;
    let go = |s: &Arc<Term>| erase_term(s, rho).map(Arc::new);
    let lv = |l: &LevelExpr| erase_level(l, rho);
    Ok(match t {
        LvlPi(..) | LvlLam(..) | LvlApp(..) | CstrPi(..) | CstrLam(..) => {
            return Err(MonoError::ResidualPolymorphism(t.to_string()))
        }
        Var(_) | Const(_) | Nat | Zero => t.clone(),
        Pi(x, a, b) => Pi(x.clone(), go(a)?, go(b)?),
        Lam(x, a, b) => Lam(x.clone(), go(a)?, go(b)?),
        Sigma(x, a, b) => Sigma(x.clone(), go(a)?, go(b)?),
        App(f, a) => App(go(f)?, go(a)?),
        Pair(a, b) => Pair(go(a)?, go(b)?),
        Fst(a) => Fst(go(a)?),
        Snd(a) => Snd(go(a)?),
        Suc(n) => Suc(go(n)?),
        NatRec { var, motive, base, step, target } => NatRec {
            var: var.clone(),
            motive: go(motive)?,
            base: go(base)?,
            step: go(step)?,
            target: go(target)?,
        },
        Id(a, x, y) => Id(go(a)?, go(x)?, go(y)?),
        Refl(a, x) => Refl(go(a)?, go(x)?),
        J { ty, from, x, p, motive, base, to, path } => J {
            ty: go(ty)?,
            from: go(from)?,
            x: x.clone(),
            p: p.clone(),
            motive: go(motive)?,
            base: go(base)?,
            to: go(to)?,
            path: go(path)?,
        },
        Univ(l) => Univ(lv(l)?),
        Decode(l, a) => Decode(lv(l)?, go(a)?),
        CodeUniv(l, m) => CodeUniv(lv(l)?, lv(m)?),
        CodePi(l, m, a, b) => CodePi(lv(l)?, lv(m)?, go(a)?, go(b)?),
        CodeSigma(l, m, a, b) => CodeSigma(lv(l)?, lv(m)?, go(a)?, go(b)?),
        CodeNat(l) => CodeNat(lv(l)?),
        CodeId(l, a, x, y) => CodeId(lv(l)?, go(a)?, go(x)?, go(y)?),
        Lift(l, m, a) => Lift(lv(l)?, lv(m)?, go(a)?),
    })
}

/// Checks that `rho` covers the level variables of `ctx` and satisfies its
/// constraints.
pub fn check_assignment(ctx: &Context, rho: &Assignment) -> Result<(), MonoError> {
    for a in ctx.level_vars() {
        if rho.get(a).is_none() {
            return Err(MonoError::Unassigned(a.clone()));
        }
    }
    for c in ctx.constraints() {
        if !c.holds_in(rho)? {
            return Err(MonoError::UnsatisfiedConstraint { constraint: c.clone(), assignment: rho.clone() });
        }
    }
    Ok(())
}

/// Erases a specialized judgment. Level declarations and constraint blocks
/// are dropped from the context.
pub fn erase(ctx: &Context, term: &Term, ty: &Term, rho: &Assignment) -> Result<ExternalJudgment, MonoError> {
    check_assignment(ctx, rho)?;
    let decls = ctx
        .term_decls()
        .map(|(x, a)| Ok((x.clone(), erase_term(a, rho)?)))
        .collect::<Result<Vec<_>, MonoError>>()?;
    Ok(ExternalJudgment { ctx: decls, term: erase_term(term, rho)?, ty: erase_term(ty, rho)? })
}

/// Specializes and erases the declaration `c : ty = body`.
pub fn mono_decl(ck: &Checker, ty: &Term, body: &Term, rho: &Assignment) -> Result<ExternalJudgment, MonoError> {
    let (ctx, ty, body) = peel(ty, body);
    check_assignment(&ctx, rho)?;
    let ty = specialize(ck, &ctx, &ty);
    let body = specialize(ck, &ctx, &body);
    erase(&ctx, &body, &ty, rho)
}

/// Re-checks an erased judgment with numeral levels.
pub fn check_external(j: &ExternalJudgment, cumulative: bool) -> Result<(), Diagnostic> {
    let ck = Checker::new(CheckerConfig { cumulative, mode: Mode::External });
    let entries: Vec<ContextEntry> = j.ctx.iter().map(|(x, a)| ContextEntry::TermDecl(x.clone(), a.clone())).collect();
    let ctx = ck.check_ctx(&entries)?;
    ck.check_type(&ctx, &j.ty)?;
    ck.check(&ctx, &j.term, &j.ty)
}

/// Whether the internal judgment `Γ ⊢ t : A`, already accepted, survives
/// erasure under `rho`. Erasure failures are reported as diagnostics.
pub fn check_commutes(ck: &Checker, ctx: &Context, t: &Term, ty: &Term, rho: &Assignment) -> Result<(), Diagnostic> {
    let t = specialize(ck, ctx, t);
    let ty = specialize(ck, ctx, ty);
    let j = erase(ctx, &t, &ty, rho).map_err(|e| Diagnostic::error(mono_rule(&e), e.to_string()))?;
    check_external(&j, ck.config().cumulative)
}

/// [`check_commutes`] for a top-level declaration.
pub fn check_commutes_decl(ck: &Checker, ty: &Term, body: &Term, rho: &Assignment) -> Result<(), Diagnostic> {
    let (ctx, ty, body) = peel(ty, body);
    check_commutes(ck, &ctx, &body, &ty, rho)
}

/// Commutation for a closed type formation `A type`.
pub fn check_type_commutes(ck: &Checker, ty: &Term, rho: &Assignment) -> Result<(), Diagnostic> {
    let (ctx, ty, _) = peel(ty, &Term::Zero);
    let ty = specialize(ck, &ctx, &ty);
    let j = erase(&ctx, &Term::Zero, &ty, rho).map_err(|e| Diagnostic::error(mono_rule(&e), e.to_string()))?;
    let ext = Checker::new(CheckerConfig { cumulative: ck.config().cumulative, mode: Mode::External });
    let entries: Vec<ContextEntry> = j.ctx.iter().map(|(x, a)| ContextEntry::TermDecl(x.clone(), a.clone())).collect();
    let ectx = ext.check_ctx(&entries)?;
    ext.check_type(&ectx, &j.ty)
}

pub fn mono_rule(e: &MonoError) -> &'static str {
    match e {
        MonoError::UnsatisfiedConstraint { .. } => "unsatisfied-constraint",
        MonoError::Unassigned(_) => "unassigned-level",
        MonoError::ResidualPolymorphism(_) => "residual-polymorphism",
    }
}

/// Level variables bound by the leading binders of a declaration type.
pub fn leading_level_vars(ty: &Term) -> Vec<LevelVar> {
    peel(ty, &Term::var("_")).0.level_vars().cloned().collect()
}

/// All assignments of values `0..=max` to `vars` that satisfy the theory of `ctx`.
pub fn satisfying_assignments(ctx: &Context, vars: &[LevelVar], max: u64) -> Vec<Assignment> {
    let mut out = Vec::new();
    let total = (max + 1).pow(vars.len() as u32);
    for code in 0..total {
        let mut c = code;
        let rho: Assignment = vars
            .iter()
            .map(|v| {
                let x = c % (max + 1);
                c /= max + 1;
                (v.clone(), x)
            })
            .collect();
        if check_assignment(ctx, &rho).is_ok() {
            out.push(rho);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(a: &str) -> LevelExpr {
        LevelExpr::var(a)
    }

    fn levels(names: &[&str]) -> Context {
        Context::from_entries(names.iter().map(|a| ContextEntry::LevelDecl(LevelVar::new(a)))).unwrap()
    }

    #[test]
    fn specialize_examples() {
        let ck = Checker::new(CheckerConfig::internal());
        let ctx = levels(&["b"]);
        let t = Term::lvl_app(Term::lvl_lam("a", Term::Univ(lv("a"))), lv("b").suc());
        assert_eq!(specialize(&ck, &ctx, &t), Term::Univ(lv("b").suc()));
        let psi = vec![Constraint::lt(lv("a"), lv("b"))];
        let ctx = levels(&["a", "b"]).with_constraints(psi.clone()).unwrap();
        assert_eq!(specialize(&ck, &ctx, &Term::cstr_lam(psi, Term::Zero)), Term::Zero);
        assert_eq!(specialize(&ck, &Context::new(), &Term::Zero), Term::Zero);
    }

    #[test]
    fn erase_examples() {
        let rho = Assignment::new().with("a", 1);
        let got = erase_term(&Term::CodeUniv(lv("a"), lv("a").suc()), &rho).unwrap();
        assert_eq!(got, Term::CodeUniv(LevelExpr::numeral(1), LevelExpr::numeral(2)));

        let ctx = levels(&["a", "b"]).with_constraints(vec![Constraint::lt(lv("a"), lv("b"))]).unwrap();
        let rho = Assignment::new().with("a", 0).with("b", 0);
        assert!(matches!(
            erase(&ctx, &Term::Zero, &Term::Nat, &rho),
            Err(MonoError::UnsatisfiedConstraint { .. })
        ));

        let rho = Assignment::new().with("a", 2).with("b", 1);
        let got = erase_term(&Term::decode(lv("a").join(lv("b")), Term::var("X")), &rho).unwrap();
        assert_eq!(got, Term::decode(LevelExpr::numeral(2), Term::var("X")));

        let poly = Term::lvl_pi("a", Term::Univ(lv("a")));
        assert!(matches!(erase_term(&poly, &rho), Err(MonoError::ResidualPolymorphism(_))));
    }

    #[test]
    fn identity_commutes() {
        let ck = Checker::new(CheckerConfig::internal());
        let id = Term::lvl_lam(
            "a",
            Term::lam("X", Term::Univ(lv("a")), Term::lam("x", Term::decode(lv("a"), Term::var("X")), Term::var("x"))),
        );
        let ty = ck.infer(&Context::new(), &id).unwrap();
        let rho = Assignment::new().with("a", 3);
        check_commutes_decl(&ck, &ty, &id, &rho).unwrap();
        let j = mono_decl(&ck, &ty, &id, &rho).unwrap();
        assert_eq!(j.ty.to_string(), "(X : U 3) -> T 3 X -> T 3 X");
    }
}
