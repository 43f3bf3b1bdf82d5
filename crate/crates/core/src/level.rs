//! Universe levels: expressions built from variables with successor and
//! binary join, their normal forms in the free sup-semilattice with an
//! inflationary successor, and evaluation into the natural numbers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A level variable. Two variables are the same iff their names are equal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelVar(Arc<str>);

impl LevelVar {
    /// Base variable of the external numerals. The surface lexer never
    /// produces it, so it cannot clash with a user-declared level.
    pub const NUMERAL_BASE: &'static str = "0";

    pub fn new(name: impl AsRef<str>) -> Self {
        LevelVar(Arc::from(name.as_ref()))
    }

    pub fn numeral_base() -> Self {
        LevelVar::new(Self::NUMERAL_BASE)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_numeral_base(&self) -> bool {
        &*self.0 == Self::NUMERAL_BASE
    }
}

impl fmt::Debug for LevelVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for LevelVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for LevelVar {
    fn from(s: &str) -> Self {
        LevelVar::new(s)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LevelExpr {
    Var(LevelVar),
    Suc(Box<LevelExpr>),
    Join(Box<LevelExpr>, Box<LevelExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("level variable `{0}` has no assigned value")]
    Unassigned(LevelVar),
}

impl LevelExpr {
    pub fn var(name: impl AsRef<str>) -> Self {
        LevelExpr::Var(LevelVar::new(name))
    }

    pub fn suc(self) -> Self {
        LevelExpr::Suc(Box::new(self))
    }

    /// `self` with `k` successors applied.
    pub fn sucs(self, k: u32) -> Self {
        (0..k).fold(self, |l, _| l.suc())
    }

    pub fn join(self, other: LevelExpr) -> Self {
        LevelExpr::Join(Box::new(self), Box::new(other))
    }

    /// The external numeral `n`, encoded as the numeral base with `n` successors.
    pub fn numeral(n: u32) -> Self {
        LevelExpr::Var(LevelVar::numeral_base()).sucs(n)
    }

    /// Returns `Some(n)` if this expression is literally a numeral.
    pub fn as_numeral(&self) -> Option<u32> {
        match self {
            LevelExpr::Var(v) if v.is_numeral_base() => Some(0),
            LevelExpr::Suc(l) => l.as_numeral().map(|n| n + 1),
            _ => None,
        }
    }

    pub fn vars(&self) -> BTreeSet<LevelVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<LevelVar>) {
        match self {
            LevelExpr::Var(v) => {
                out.insert(v.clone());
            }
            LevelExpr::Suc(l) => l.collect_vars(out),
            LevelExpr::Join(l, m) => {
                l.collect_vars(out);
                m.collect_vars(out);
            }
        }
    }

    pub fn mentions(&self, v: &LevelVar) -> bool {
        match self {
            LevelExpr::Var(w) => w == v,
            LevelExpr::Suc(l) => l.mentions(v),
            LevelExpr::Join(l, m) => l.mentions(v) || m.mentions(v),
        }
    }

    pub fn normalize(&self) -> LevelNf {
        match self {
            LevelExpr::Var(v) => LevelNf::atom(v.clone(), 0),
            LevelExpr::Suc(l) => l.normalize().shift(1),
            LevelExpr::Join(l, m) => l.normalize().join(&m.normalize()),
        }
    }

    pub fn eval_nat(&self, rho: &Assignment) -> Result<u64, LevelError> {
        Ok(match self {
            LevelExpr::Var(v) => rho.get(v).ok_or_else(|| LevelError::Unassigned(v.clone()))?,
            LevelExpr::Suc(l) => l.eval_nat(rho)? + 1,
            LevelExpr::Join(l, m) => l.eval_nat(rho)?.max(m.eval_nat(rho)?),
        })
    }

    /// Replace every occurrence of `v` by `by`. Levels have no binders.
    pub fn subst(&self, v: &LevelVar, by: &LevelExpr) -> LevelExpr {
        match self {
            LevelExpr::Var(w) if w == v => by.clone(),
            LevelExpr::Var(_) => self.clone(),
            LevelExpr::Suc(l) => l.subst(v, by).suc(),
            LevelExpr::Join(l, m) => l.subst(v, by).join(m.subst(v, by)),
        }
    }

    pub fn rename(&self, map: &BTreeMap<LevelVar, LevelVar>) -> LevelExpr {
        match self {
            LevelExpr::Var(w) => LevelExpr::Var(map.get(w).cloned().unwrap_or_else(|| w.clone())),
            LevelExpr::Suc(l) => l.rename(map).suc(),
            LevelExpr::Join(l, m) => l.rename(map).join(m.rename(map)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, atomic: bool) -> fmt::Result {
        if let Some(n) = self.as_numeral() {
            return write!(f, "{n}");
        }
        match self {
            LevelExpr::Var(v) => write!(f, "{v}"),
            LevelExpr::Suc(l) => {
                l.fmt_prec(f, true)?;
                f.write_str("^")
            }
            LevelExpr::Join(l, m) => {
                if atomic {
                    f.write_str("(")?;
                }
                l.fmt_prec(f, false)?;
                f.write_str(" \\/ ")?;
                // join is left-associative, so a join on the right needs parens
                m.fmt_prec(f, true)?;
                if atomic {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for LevelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

impl fmt::Debug for LevelExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical form of a level: a nonempty join of shifted variables, with at
/// most one shift per variable (the largest one).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LevelNf {
    atoms: BTreeMap<LevelVar, u32>,
}

impl LevelNf {
    pub fn atom(v: LevelVar, shift: u32) -> Self {
        LevelNf { atoms: BTreeMap::from([(v, shift)]) }
    }

    /// Builds a normal form from `(variable, shift)` pairs, merging repeats.
    /// Returns `None` for an empty input.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (LevelVar, u32)>) -> Option<Self> {
        let mut map = BTreeMap::new();
        for (v, k) in atoms {
            let e = map.entry(v).or_insert(k);
            *e = (*e).max(k);
        }
        (!map.is_empty()).then_some(LevelNf { atoms: map })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&LevelVar, u32)> + '_ {
        self.atoms.iter().map(|(v, k)| (v, *k))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shift_of(&self, v: &LevelVar) -> Option<u32> {
        self.atoms.get(v).copied()
    }

    pub fn max_shift(&self) -> u32 {
        self.atoms.values().copied().max().unwrap_or(0)
    }

    pub fn join(&self, other: &LevelNf) -> LevelNf {
        let mut atoms = self.atoms.clone();
        for (v, k) in &other.atoms {
            let e = atoms.entry(v.clone()).or_insert(*k);
            *e = (*e).max(*k);
        }
        LevelNf { atoms }
    }

    pub fn shift(&self, k: u32) -> LevelNf {
        LevelNf { atoms: self.atoms.iter().map(|(v, s)| (v.clone(), s + k)).collect() }
    }

    /// Whether the atom `v + k` lies below this join in the free theory.
    pub fn absorbs(&self, v: &LevelVar, k: u32) -> bool {
        self.atoms.get(v).is_some_and(|&s| s >= k)
    }

    /// `self <= other` in the free theory.
    pub fn leq(&self, other: &LevelNf) -> bool {
        self.atoms().all(|(v, k)| other.absorbs(v, k))
    }

    pub fn vars(&self) -> impl Iterator<Item = &LevelVar> + '_ {
        self.atoms.keys()
    }

    /// Reads the normal form back as an expression (a left-nested join).
    pub fn to_expr(&self) -> LevelExpr {
        let mut it = self.atoms.iter().map(|(v, k)| LevelExpr::Var(v.clone()).sucs(*k));
        let first = it.next().expect("LevelNf is nonempty");
        it.fold(first, LevelExpr::join)
    }

    pub fn eval_nat(&self, rho: &Assignment) -> Result<u64, LevelError> {
        self.atoms
            .iter()
            .map(|(v, k)| rho.get(v).map(|x| x + u64::from(*k)).ok_or_else(|| LevelError::Unassigned(v.clone())))
            .try_fold(0, |acc, x| x.map(|x| acc.max(x)))
    }
}

impl fmt::Display for LevelNf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Debug for LevelNf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, k)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}↦{k}")?;
        }
        f.write_str("}")
    }
}

/// Equality in the free sup-semilattice with inflationary successor.
pub fn eq_free(l: &LevelExpr, m: &LevelExpr) -> bool {
    l.normalize() == m.normalize()
}

/// `l <= m` in the free theory, i.e. `l \/ m = m`.
pub fn leq_free(l: &LevelExpr, m: &LevelExpr) -> bool {
    l.normalize().leq(&m.normalize())
}

/// An assignment of natural numbers to level variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<LevelVar, u64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: impl Into<LevelVar>, n: u64) -> Self {
        self.0.insert(v.into(), n);
        self
    }

    pub fn insert(&mut self, v: LevelVar, n: u64) {
        self.0.insert(v, n);
    }

    pub fn get(&self, v: &LevelVar) -> Option<u64> {
        if v.is_numeral_base() {
            return Some(self.0.get(v).copied().unwrap_or(0));
        }
        self.0.get(v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LevelVar, u64)> + '_ {
        self.0.iter().map(|(v, n)| (v, *n))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(LevelVar, u64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (LevelVar, u64)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, n)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}={n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> LevelExpr {
        LevelExpr::var(n)
    }

    fn nf(pairs: &[(&str, u32)]) -> LevelNf {
        LevelNf::from_atoms(pairs.iter().map(|(n, k)| (LevelVar::new(n), *k))).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(v("a").join(v("a").suc()).normalize(), nf(&[("a", 1)]));
        assert_eq!(v("a").join(v("b")).suc().normalize(), nf(&[("a", 1), ("b", 1)]));
        assert_eq!(v("a").normalize(), nf(&[("a", 0)]));
    }

    #[test]
    fn join_and_shift_examples() {
        assert_eq!(nf(&[("a", 1)]).join(&nf(&[("a", 0), ("b", 2)])), nf(&[("a", 1), ("b", 2)]));
        assert_eq!(nf(&[("a", 0)]).join(&nf(&[("a", 0)])), nf(&[("a", 0)]));
        assert_eq!(nf(&[("a", 2)]).join(&nf(&[("b", 0)])), nf(&[("a", 2), ("b", 0)]));
        assert_eq!(nf(&[("a", 0), ("b", 1)]).shift(1), nf(&[("a", 1), ("b", 2)]));
        let a = nf(&[("a", 3), ("c", 0)]);
        assert_eq!(a.shift(0), a);
        assert_eq!(nf(&[("a", 1)]).shift(2), nf(&[("a", 3)]));
    }

    #[test]
    fn free_equality_examples() {
        assert!(eq_free(&v("a").join(v("b")), &v("b").join(v("a"))));
        assert!(eq_free(&v("a").join(v("b")), &v("a").join(v("b")).join(v("a"))));
        assert!(!eq_free(&v("a"), &v("a").suc()));
        assert!(leq_free(&v("a"), &v("a").suc()));
        assert!(leq_free(&v("a"), &v("a").join(v("b"))));
        assert!(!leq_free(&v("a").suc(), &v("a")));
    }

    #[test]
    fn eval_examples() {
        let rho = Assignment::new().with("a", 0).with("b", 2);
        assert_eq!(v("a").suc().join(v("b")).eval_nat(&rho).unwrap(), 2);
        assert_eq!(v("a").eval_nat(&Assignment::new().with("a", 5)).unwrap(), 5);
        let rho = Assignment::new().with("a", 1).with("b", 3);
        assert_eq!(v("a").join(v("b")).suc().eval_nat(&rho).unwrap(), 4);
        assert_eq!(v("z").eval_nat(&rho), Err(LevelError::Unassigned(LevelVar::new("z"))));
    }

    #[test]
    fn vars_examples() {
        let set = |xs: &[&str]| xs.iter().map(LevelVar::new).collect::<BTreeSet<_>>();
        assert_eq!(v("a").suc().join(v("b")).vars(), set(&["a", "b"]));
        assert_eq!(v("a").join(v("a")).vars(), set(&["a"]));
        assert_eq!(v("a").suc().suc().vars(), set(&["a"]));
    }

    #[test]
    fn numerals() {
        let three = LevelExpr::numeral(3);
        assert_eq!(three.as_numeral(), Some(3));
        assert_eq!(three.to_string(), "3");
        assert_eq!(three.eval_nat(&Assignment::new()).unwrap(), 3);
        assert_eq!(v("a").join(v("b").suc()).suc().to_string(), "(a \\/ b^)^");
    }
}
