//! Typing contexts: term declarations, level declarations and constraint
//! blocks, with the level theory they present kept alongside.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::constraint::{Constraint, ConstraintError, ConstraintTheory};
use crate::level::LevelVar;
use crate::syntax::{Name, Term};

#[derive(Clone, PartialEq, Eq)]
pub enum ContextEntry {
    TermDecl(Name, Term),
    LevelDecl(LevelVar),
    ConstraintBlock(Vec<Constraint>),
}

impl fmt::Display for ContextEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextEntry::TermDecl(x, a) => write!(f, "{x} : {a}"),
            ContextEntry::LevelDecl(a) => write!(f, "{a} level"),
            ContextEntry::ConstraintBlock(psi) => {
                let cs: Vec<String> = psi.iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", cs.join(", "))
            }
        }
    }
}

impl fmt::Debug for ContextEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("`{0}` is already declared")]
    DuplicateName(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

#[derive(Clone, Default)]
pub struct Context {
    entries: Vec<ContextEntry>,
    theory: Arc<ConstraintTheory>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a context by extending the empty one entry by entry.
    pub fn from_entries(entries: impl IntoIterator<Item = ContextEntry>) -> Result<Self, ContextError> {
        entries.into_iter().try_fold(Context::new(), |ctx, e| ctx.extend(e))
    }

    pub fn entries(&self) -> &[ContextEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn theory(&self) -> &ConstraintTheory {
        &self.theory
    }

    pub fn theory_arc(&self) -> Arc<ConstraintTheory> {
        self.theory.clone()
    }

    pub fn lookup(&self, x: &str) -> Option<&Term> {
        self.entries.iter().rev().find_map(|e| match e {
            ContextEntry::TermDecl(y, a) if &**y == x => Some(a),
            _ => None,
        })
    }

    pub fn has_term(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    pub fn has_level(&self, a: &LevelVar) -> bool {
        self.theory.is_declared(a)
    }

    pub fn level_vars(&self) -> impl Iterator<Item = &LevelVar> + '_ {
        self.entries.iter().filter_map(|e| match e {
            ContextEntry::LevelDecl(a) => Some(a),
            _ => None,
        })
    }

    pub fn term_decls(&self) -> impl Iterator<Item = (&Name, &Term)> + '_ {
        self.entries.iter().filter_map(|e| match e {
            ContextEntry::TermDecl(x, a) => Some((x, a)),
            _ => None,
        })
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Constraint> + '_ {
        self.entries.iter().flat_map(|e| match e {
            ContextEntry::ConstraintBlock(psi) => psi.as_slice(),
            _ => &[],
        })
    }

    /// `Γ, e`. Declared names must be fresh in their namespace; a constraint
    /// block must mention declared variables only and keep the theory
    /// loop-free. The type of a term declaration is not checked here.
    pub fn extend(&self, e: ContextEntry) -> Result<Context, ContextError> {
        let theory = match &e {
            ContextEntry::TermDecl(x, _) => {
                if self.has_term(x) {
                    return Err(ContextError::DuplicateName(x.to_string()));
                }
                self.theory.clone()
            }
            ContextEntry::LevelDecl(a) => {
                if self.has_level(a) || a.is_numeral_base() {
                    return Err(ContextError::DuplicateName(a.to_string()));
                }
                Arc::new(self.theory.extend([], [a.clone()])?)
            }
            ContextEntry::ConstraintBlock(psi) => {
                if psi.is_empty() {
                    self.theory.clone()
                } else {
                    Arc::new(self.theory.extend(psi.iter().cloned(), [])?)
                }
            }
        };
        let mut entries = self.entries.clone();
        entries.push(e);
        Ok(Context { entries, theory })
    }

    pub fn with_term(&self, x: Name, a: Term) -> Result<Context, ContextError> {
        self.extend(ContextEntry::TermDecl(x, a))
    }

    pub fn with_level(&self, a: LevelVar) -> Result<Context, ContextError> {
        self.extend(ContextEntry::LevelDecl(a))
    }

    pub fn with_constraints(&self, psi: Vec<Constraint>) -> Result<Context, ContextError> {
        self.extend(ContextEntry::ConstraintBlock(psi))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("()");
        }
        let shown: Vec<String> = self.entries.iter().map(ToString::to_string).collect();
        f.write_str(&shown.join(", "))
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The theory presented by `Γ`: its level variables and the union of its
/// constraint blocks.
pub fn theory_of(ctx: &Context) -> &ConstraintTheory {
    ctx.theory()
}

pub fn ctx_extend(ctx: &Context, e: ContextEntry) -> Result<Context, ContextError> {
    ctx.extend(e)
}
