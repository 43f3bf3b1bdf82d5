//! Weak-head normalization, conversion and bidirectional type checking.

mod conv;
mod typing;
mod whnf;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::constraint::{Constraint, ConstraintError, ConstraintTheory};
use crate::context::{Context, ContextError};
use crate::diagnostic::Diagnostic;
use crate::level::{Assignment, LevelExpr, LevelVar};
use crate::syntax::{fresh_name, Name, Term};

pub type CheckResult<T> = Result<T, Diagnostic>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Level variables, level binders and constraints.
    #[default]
    Internal,
    /// Numeral levels only.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CheckerConfig {
    pub cumulative: bool,
    pub mode: Mode,
}

impl CheckerConfig {
    pub fn internal() -> Self {
        CheckerConfig { cumulative: false, mode: Mode::Internal }
    }

    pub fn external() -> Self {
        CheckerConfig { cumulative: false, mode: Mode::External }
    }

    pub fn cumulative(self, on: bool) -> Self {
        CheckerConfig { cumulative: on, ..self }
    }
}

/// Decides level (in)equalities in some ambient context.
pub trait LevelOracle {
    fn leq(&self, l: &LevelExpr, m: &LevelExpr) -> bool;

    fn eq(&self, l: &LevelExpr, m: &LevelExpr) -> bool {
        self.leq(l, m) && self.leq(m, l)
    }

    fn lt(&self, l: &LevelExpr, m: &LevelExpr) -> bool {
        self.leq(&l.clone().suc(), m)
    }

    fn valid(&self, psi: &[Constraint]) -> bool {
        psi.iter().all(|c| self.eq(&c.lhs, &c.rhs))
    }
}

/// Entailment in the theory presented by a context. Undeclared variables
/// make every query false.
pub struct TheoryOracle<'a>(pub &'a ConstraintTheory);

impl LevelOracle for TheoryOracle<'_> {
    fn leq(&self, l: &LevelExpr, m: &LevelExpr) -> bool {
        self.0.entails_leq(l, m).unwrap_or(false)
    }
}

/// Natural-number arithmetic on closed numeral levels.
pub struct NatOracle;

impl NatOracle {
    fn value(l: &LevelExpr) -> Option<u64> {
        l.eval_nat(&Assignment::new()).ok()
    }
}

impl LevelOracle for NatOracle {
    fn leq(&self, l: &LevelExpr, m: &LevelExpr) -> bool {
        matches!((Self::value(l), Self::value(m)), (Some(a), Some(b)) if a <= b)
    }
}

#[derive(Debug, Clone)]
pub struct Definition {
    pub ty: Term,
    /// `None` for postulated constants, which never unfold.
    pub body: Option<Term>,
}

/// Checked top-level definitions in declaration order.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    order: Vec<Name>,
    defs: BTreeMap<Name, Definition>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, c: &str) -> Option<&Definition> {
        self.defs.get(c)
    }

    pub fn contains(&self, c: &str) -> bool {
        self.defs.contains_key(c)
    }

    /// Adds a definition; returns false if the name is taken.
    pub fn insert(&mut self, c: Name, ty: Term, body: Option<Term>) -> bool {
        if self.defs.contains_key(&c) {
            return false;
        }
        self.order.push(c.clone());
        self.defs.insert(c, Definition { ty, body });
        true
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> + '_ {
        self.order.iter()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub struct Checker {
    config: CheckerConfig,
    sig: Signature,
    steps: AtomicU64,
}

impl Checker {
    pub fn new(config: CheckerConfig) -> Self {
        Self::with_signature(config, Signature::new())
    }

    pub fn with_signature(config: CheckerConfig, sig: Signature) -> Self {
        Checker { config, sig, steps: AtomicU64::new(0) }
    }

    pub fn config(&self) -> CheckerConfig {
        self.config
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn signature_mut(&mut self) -> &mut Signature {
        &mut self.sig
    }

    /// Number of head reduction steps taken so far.
    pub fn steps(&self) -> u64 {
        self.steps.load(Ordering::Relaxed)
    }

    pub fn reset_steps(&self) {
        self.steps.store(0, Ordering::Relaxed);
    }

    fn tick(&self) {
        self.steps.fetch_add(1, Ordering::Relaxed);
    }

    pub fn oracle<'a>(&self, ctx: &'a Context) -> Box<dyn LevelOracle + 'a> {
        match self.config.mode {
            Mode::Internal => Box::new(TheoryOracle(ctx.theory())),
            Mode::External => Box::new(NatOracle),
        }
    }
}

pub(crate) fn ctx_error(ctx: &Context, e: ContextError) -> Diagnostic {
    let d = match &e {
        ContextError::DuplicateName(_) => Diagnostic::error("duplicate-name", e.to_string()),
        ContextError::Constraint(ConstraintError::Loop(_)) => Diagnostic::error("loop", e.to_string()),
        ContextError::Constraint(ConstraintError::UndeclaredVar(_)) => {
            Diagnostic::error("undeclared-level", e.to_string())
        }
    };
    d.with_context(ctx)
}

pub(crate) fn fail<T>(ctx: &Context, rule: &str, msg: impl Into<String>) -> CheckResult<T> {
    Err(Diagnostic::error(rule, msg).with_context(ctx))
}

/// A term variable named after `x` that is not declared in `ctx` and not
/// free in any of `terms`.
pub(crate) fn fresh_for(ctx: &Context, x: &str, terms: &[&Term]) -> Name {
    let fv: Vec<_> = terms.iter().map(|t| t.free_vars()).collect();
    fresh_name(x, |n| ctx.has_term(n) || fv.iter().any(|s| s.contains(n)))
}

pub fn fresh_level_for(ctx: &Context, a: &LevelVar, terms: &[&Term]) -> LevelVar {
    let fv: Vec<_> = terms.iter().map(|t| t.free_level_vars()).collect();
    LevelVar::new(fresh_name(a.name(), |n| {
        let v = LevelVar::new(n);
        v.is_numeral_base() || ctx.has_level(&v) || fv.iter().any(|s| s.contains(&v))
    }))
}
