//! Level constraints and the finitely presented semilattices they generate.
//!
//! A theory is a set of declared level variables together with equations
//! between level expressions. Equations are split into atomic inequalities
//! `v + k <= r` where `r` is a normal form. Every question about the theory
//! reduces to computing, for a fixed right-hand side `m`, the largest shift
//! `K(v)` such that `v + K(v) <= m` is derivable. Those shifts are the least
//! fixpoint of
//!
//! ```text
//! K(v) >= k                      for every atom v + k of m
//! K(v) >= j + min_{(w,i) in r} (K(w) - i)   for every fact v + j <= r,
//!                                           when that minimum is >= 0
//! ```
//!
//! A theory has a loop (some `l < l`) exactly when these shifts grow without
//! bound; growth past a fixed bound is reported as a loop.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::level::{Assignment, LevelError, LevelExpr, LevelNf, LevelVar};

/// An equation `lhs = rhs` between levels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: LevelExpr,
    pub rhs: LevelExpr,
}

impl Constraint {
    pub fn eq(lhs: LevelExpr, rhs: LevelExpr) -> Self {
        Constraint { lhs, rhs }
    }

    /// `l <= m`, i.e. `l \/ m = m`.
    pub fn leq(l: LevelExpr, m: LevelExpr) -> Self {
        Constraint { lhs: l.join(m.clone()), rhs: m }
    }

    /// `l < m`, i.e. `m = l^ \/ m`.
    pub fn lt(l: LevelExpr, m: LevelExpr) -> Self {
        Constraint { lhs: m.clone(), rhs: l.suc().join(m) }
    }

    pub fn vars(&self) -> BTreeSet<LevelVar> {
        let mut vs = self.lhs.vars();
        vs.extend(self.rhs.vars());
        vs
    }

    pub fn subst(&self, v: &LevelVar, by: &LevelExpr) -> Constraint {
        Constraint { lhs: self.lhs.subst(v, by), rhs: self.rhs.subst(v, by) }
    }

    pub fn rename(&self, map: &BTreeMap<LevelVar, LevelVar>) -> Constraint {
        Constraint { lhs: self.lhs.rename(map), rhs: self.rhs.rename(map) }
    }

    pub fn holds_in(&self, rho: &Assignment) -> Result<bool, LevelError> {
        Ok(self.lhs.eval_nat(rho)? == self.rhs.eval_nat(rho)?)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `var + shift <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicIneq {
    pub var: LevelVar,
    pub shift: u32,
    pub bound: LevelNf,
}

impl fmt::Display for AtomicIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}+{} <= {}", self.var, self.shift, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("constraints {0} create a loop (some level l with l < l)")]
    Loop(String),
    #[error("level variable `{0}` is not declared")]
    UndeclaredVar(LevelVar),
}

/// Splits equations into atomic inequalities. Facts whose bound already
/// absorbs the left atom carry no information and are dropped.
pub fn atomize<'a>(cs: impl IntoIterator<Item = &'a Constraint>) -> Vec<AtomicIneq> {
    let mut out = BTreeSet::new();
    for c in cs {
        let (l, r) = (c.lhs.normalize(), c.rhs.normalize());
        for (small, big) in [(&l, &r), (&r, &l)] {
            for (v, k) in small.atoms() {
                if !big.absorbs(v, k) {
                    out.insert(AtomicIneq { var: v.clone(), shift: k, bound: big.clone() });
                }
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone)]
struct Fact {
    var: usize,
    shift: u32,
    bound: Vec<(usize, u32)>,
}

/// Largest derivable shift per variable below some fixed level; `-1` means
/// no atom of that variable is below it.
type Shifts = Vec<i64>;

#[derive(Debug)]
enum Closure {
    Bounded(Shifts),
    Unbounded,
}

/// A finitely presented sup-semilattice with successor. Immutable once
/// built; queries are memoized per right-hand side.
pub struct ConstraintTheory {
    vars: BTreeSet<LevelVar>,
    constraints: Vec<Constraint>,
    atomized: Vec<AtomicIneq>,
    index: BTreeMap<LevelVar, usize>,
    facts: Vec<Fact>,
    watchers: Vec<Vec<usize>>,
    max_shift: u32,
    cache: Mutex<HashMap<LevelNf, Arc<Closure>>>,
}

impl Clone for ConstraintTheory {
    fn clone(&self) -> Self {
        ConstraintTheory::build(self.vars.clone(), self.constraints.clone())
    }
}

impl fmt::Debug for ConstraintTheory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintTheory")
            .field("vars", &self.vars)
            .field("constraints", &self.constraints)
            .finish()
    }
}

impl Default for ConstraintTheory {
    fn default() -> Self {
        ConstraintTheory::build(BTreeSet::new(), Vec::new())
    }
}

impl ConstraintTheory {
    pub fn empty() -> Self {
        Self::default()
    }

    /// A theory over `vars` with no constraints.
    pub fn free(vars: impl IntoIterator<Item = LevelVar>) -> Self {
        ConstraintTheory::build(vars.into_iter().collect(), Vec::new())
    }

    /// Declares `vars` and adds `cs`, failing on undeclared variables or loops.
    pub fn new(
        vars: impl IntoIterator<Item = LevelVar>,
        cs: impl IntoIterator<Item = Constraint>,
    ) -> Result<Self, ConstraintError> {
        ConstraintTheory::empty().extend(cs, vars)
    }

    fn build(vars: BTreeSet<LevelVar>, constraints: Vec<Constraint>) -> Self {
        let index: BTreeMap<LevelVar, usize> = vars.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let atomized = atomize(&constraints);
        let mut watchers = vec![Vec::new(); vars.len()];
        let mut facts = Vec::with_capacity(atomized.len());
        let mut max_shift = 0;
        for (fi, a) in atomized.iter().enumerate() {
            let bound: Vec<(usize, u32)> = a.bound.atoms().map(|(w, i)| (index[w], i)).collect();
            for &(w, _) in &bound {
                watchers[w].push(fi);
            }
            max_shift = max_shift.max(a.shift).max(a.bound.max_shift());
            facts.push(Fact { var: index[&a.var], shift: a.shift, bound });
        }
        ConstraintTheory {
            vars,
            constraints,
            atomized,
            index,
            facts,
            watchers,
            max_shift,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn vars(&self) -> &BTreeSet<LevelVar> {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn atomized(&self) -> &[AtomicIneq] {
        &self.atomized
    }

    pub fn is_declared(&self, v: &LevelVar) -> bool {
        self.vars.contains(v)
    }

    /// Adds the variables `new_vars` and the constraints `psi`.
    pub fn extend(
        &self,
        psi: impl IntoIterator<Item = Constraint>,
        new_vars: impl IntoIterator<Item = LevelVar>,
    ) -> Result<Self, ConstraintError> {
        let mut vars = self.vars.clone();
        vars.extend(new_vars);
        let psi: Vec<Constraint> = psi.into_iter().collect();
        for c in &psi {
            if let Some(v) = c.vars().into_iter().find(|v| !vars.contains(v)) {
                return Err(ConstraintError::UndeclaredVar(v));
            }
        }
        let added = !psi.is_empty();
        let mut constraints = self.constraints.clone();
        for c in psi.iter() {
            if !constraints.contains(c) {
                constraints.push(c.clone());
            }
        }
        let th = ConstraintTheory::build(vars, constraints);
        if added && th.has_loop() {
            let shown: Vec<String> = psi.iter().map(ToString::to_string).collect();
            return Err(ConstraintError::Loop(shown.join(", ")));
        }
        Ok(th)
    }

    fn check_declared(&self, l: &LevelExpr) -> Result<(), ConstraintError> {
        match l.vars().into_iter().find(|v| !self.vars.contains(v)) {
            Some(v) => Err(ConstraintError::UndeclaredVar(v)),
            None => Ok(()),
        }
    }

    fn closure(&self, target: &LevelNf) -> Arc<Closure> {
        if let Some(c) = self.cache.lock().unwrap().get(target) {
            return c.clone();
        }
        let computed = Arc::new(self.compute_closure(target));
        self.cache.lock().unwrap().entry(target.clone()).or_insert(computed).clone()
    }

    fn compute_closure(&self, target: &LevelNf) -> Closure {
        let n = self.vars.len();
        let mut k: Shifts = vec![-1; n];
        for (v, s) in target.atoms() {
            k[self.index[v]] = i64::from(s);
        }
        let step = i64::from(self.max_shift) + 1;
        let limit = i64::from(target.max_shift()) + (n as i64 + 1) * step;

        let mut queued = vec![true; self.facts.len()];
        let mut queue: Vec<usize> = (0..self.facts.len()).rev().collect();
        while let Some(fi) = queue.pop() {
            queued[fi] = false;
            let fact = &self.facts[fi];
            let mut slack = i64::MAX;
            for &(w, i) in &fact.bound {
                slack = slack.min(k[w] - i64::from(i));
                if slack < 0 {
                    break;
                }
            }
            if slack < 0 {
                continue;
            }
            let derived = i64::from(fact.shift) + slack;
            if derived > k[fact.var] {
                if derived > limit {
                    return Closure::Unbounded;
                }
                k[fact.var] = derived;
                for &g in &self.watchers[fact.var] {
                    if !queued[g] {
                        queued[g] = true;
                        queue.push(g);
                    }
                }
            }
        }
        Closure::Bounded(k)
    }

    fn has_loop(&self) -> bool {
        if self.vars.is_empty() || self.facts.is_empty() {
            return false;
        }
        // With every variable at the theory's largest shift, every fact is
        // applicable, and the closure is unbounded iff some level sits below
        // its own successor.
        let top = LevelNf::from_atoms(self.vars.iter().map(|v| (v.clone(), self.max_shift))).unwrap();
        matches!(*self.closure(&top), Closure::Unbounded)
    }

    /// Decides `l <= m` in the presented semilattice.
    pub fn entails_leq(&self, l: &LevelExpr, m: &LevelExpr) -> Result<bool, ConstraintError> {
        self.check_declared(l)?;
        self.check_declared(m)?;
        self.nf_leq(&l.normalize(), &m.normalize())
    }

    pub fn nf_leq(&self, l: &LevelNf, m: &LevelNf) -> Result<bool, ConstraintError> {
        if let Some(v) = l.vars().chain(m.vars()).find(|v| !self.vars.contains(*v)) {
            return Err(ConstraintError::UndeclaredVar(v.clone()));
        }
        if l.leq(m) {
            return Ok(true);
        }
        match &*self.closure(m) {
            Closure::Bounded(k) => Ok(l.atoms().all(|(v, s)| k[self.index[v]] >= i64::from(s))),
            Closure::Unbounded => Err(ConstraintError::Loop(format!("below {m}"))),
        }
    }

    /// For each declared variable `v`, the largest `k` with `v + k <= m`
    /// derivable, or `None` when no atom of `v` lies below `m`.
    pub fn shifts_below(&self, m: &LevelNf) -> Result<BTreeMap<LevelVar, Option<u32>>, ConstraintError> {
        if let Some(v) = m.vars().find(|v| !self.vars.contains(*v)) {
            return Err(ConstraintError::UndeclaredVar(v.clone()));
        }
        match &*self.closure(m) {
            Closure::Bounded(k) => Ok(self
                .index
                .iter()
                .map(|(v, &i)| (v.clone(), u32::try_from(k[i]).ok()))
                .collect()),
            Closure::Unbounded => Err(ConstraintError::Loop(format!("below {m}"))),
        }
    }

    pub fn entails(&self, c: &Constraint) -> Result<bool, ConstraintError> {
        Ok(self.entails_leq(&c.lhs, &c.rhs)? && self.entails_leq(&c.rhs, &c.lhs)?)
    }

    pub fn entails_all<'a>(&self, psi: impl IntoIterator<Item = &'a Constraint>) -> Result<bool, ConstraintError> {
        for c in psi {
            if !self.entails(c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `rho` satisfies every constraint of the theory.
    pub fn satisfied_by(&self, rho: &Assignment) -> Result<bool, LevelError> {
        for c in &self.constraints {
            if !c.holds_in(rho)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Searches for an assignment with values in `0..=bound` that satisfies
    /// the theory but not `c`.
    pub fn falsifying_assignment(&self, c: &Constraint, bound: u64) -> Option<Assignment> {
        let vars: Vec<LevelVar> = self.vars.iter().cloned().chain(c.vars()).collect::<BTreeSet<_>>().into_iter().collect();
        let mut values = vec![0u64; vars.len()];
        loop {
            let rho: Assignment = vars.iter().cloned().zip(values.iter().copied()).collect();
            if self.satisfied_by(&rho).unwrap_or(false) && !c.holds_in(&rho).unwrap_or(true) {
                return Some(rho);
            }
            let mut i = 0;
            loop {
                if i == values.len() {
                    return None;
                }
                if values[i] < bound {
                    values[i] += 1;
                    break;
                }
                values[i] = 0;
                i += 1;
            }
        }
    }
}

/// Whether the constraints `cs` over `vars` are free of loops. Variables
/// occurring in `cs` but missing from `vars` are treated as declared.
pub fn loop_free<'a>(vars: impl IntoIterator<Item = &'a LevelVar>, cs: &[Constraint]) -> bool {
    let mut all: BTreeSet<LevelVar> = vars.into_iter().cloned().collect();
    for c in cs {
        all.extend(c.vars());
    }
    !ConstraintTheory::build(all, cs.to_vec()).has_loop()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> LevelExpr {
        LevelExpr::var(n)
    }

    fn vars(ns: &[&str]) -> Vec<LevelVar> {
        ns.iter().map(LevelVar::new).collect()
    }

    fn nf(pairs: &[(&str, u32)]) -> LevelNf {
        LevelNf::from_atoms(pairs.iter().map(|(n, k)| (LevelVar::new(n), *k))).unwrap()
    }

    fn ineq(var: &str, shift: u32, bound: &[(&str, u32)]) -> AtomicIneq {
        AtomicIneq { var: LevelVar::new(var), shift, bound: nf(bound) }
    }

    #[test]
    fn atomize_examples() {
        let got = atomize(&[Constraint::eq(v("a").join(v("b")), v("g"))]);
        let mut want = vec![
            ineq("a", 0, &[("g", 0)]),
            ineq("b", 0, &[("g", 0)]),
            ineq("g", 0, &[("a", 0), ("b", 0)]),
        ];
        want.sort();
        assert_eq!(got, want);

        assert_eq!(atomize(&[Constraint::lt(v("a"), v("b"))]), vec![ineq("a", 1, &[("b", 0)])]);
        assert!(atomize(&[]).is_empty());
    }

    #[test]
    fn entails_examples() {
        let th = ConstraintTheory::new(
            vars(&["a", "b", "g"]),
            [Constraint::leq(v("a"), v("g")), Constraint::leq(v("g").suc(), v("b"))],
        )
        .unwrap();
        assert!(th.entails(&Constraint::leq(v("a").suc(), v("b"))).unwrap());

        let th = ConstraintTheory::new(vars(&["a", "b"]), [Constraint::eq(v("a").join(v("b")), v("a").suc())]).unwrap();
        assert!(!th.entails(&Constraint::eq(v("b"), v("a").suc())).unwrap());

        let th = ConstraintTheory::new(
            vars(&["a", "b", "g"]),
            [Constraint::eq(v("a").join(v("b")), v("a").join(v("g")))],
        )
        .unwrap();
        assert!(th.entails(&Constraint::leq(v("a").join(v("b")), v("a").join(v("g")))).unwrap());

        let th = ConstraintTheory::free(vars(&["a"]));
        assert!(th.entails(&Constraint::eq(v("a"), v("a"))).unwrap());
        assert_eq!(
            th.entails(&Constraint::eq(v("a"), v("q"))),
            Err(ConstraintError::UndeclaredVar(LevelVar::new("q")))
        );
    }

    #[test]
    fn entails_all_examples() {
        let th = ConstraintTheory::new(vars(&["a", "b"]), [Constraint::lt(v("a"), v("b"))]).unwrap();
        assert!(th
            .entails_all(&[Constraint::lt(v("a"), v("b")), Constraint::leq(v("a"), v("b"))])
            .unwrap());
        assert!(th.entails_all(&[]).unwrap());
        let free = ConstraintTheory::free(vars(&["a", "b"]));
        assert!(!free.entails_all(&[Constraint::lt(v("a"), v("b"))]).unwrap());
    }

    #[test]
    fn loop_free_examples() {
        assert!(loop_free(&vars(&["a"]), &[]));
        assert!(!loop_free(&vars(&["a"]), &[Constraint::eq(v("a"), v("a").suc())]));
        assert!(!loop_free(&vars(&["a"]), &[Constraint::leq(v("a").suc(), v("a"))]));
        assert!(loop_free(
            &vars(&["a", "b", "g"]),
            &[Constraint::leq(v("a"), v("g")), Constraint::leq(v("g").suc(), v("b"))]
        ));
        // a loop that only shows up on a join: a^^ <= b^ and b^^ <= a^
        assert!(!loop_free(
            &vars(&["a", "b"]),
            &[
                Constraint::leq(v("a").sucs(2), v("b").suc()),
                Constraint::leq(v("b").sucs(2), v("a").suc())
            ]
        ));
    }

    #[test]
    fn extend_examples() {
        let th = ConstraintTheory::new(vars(&["a", "b"]), [Constraint::leq(v("a"), v("b"))]).unwrap();
        let ext = th.extend([Constraint::leq(v("b"), v("g"))], vars(&["g"])).unwrap();
        assert_eq!(ext.constraints().len(), 2);
        assert!(ext.entails(&Constraint::leq(v("a"), v("g"))).unwrap());

        let th = ConstraintTheory::free(vars(&["a"]));
        assert!(matches!(
            th.extend([Constraint::leq(v("a").suc(), v("a"))], []),
            Err(ConstraintError::Loop(_))
        ));
        assert_eq!(
            th.extend([Constraint::eq(v("b"), v("a"))], []).unwrap_err(),
            ConstraintError::UndeclaredVar(LevelVar::new("b"))
        );
    }

    #[test]
    fn falsifier_finds_witness() {
        let free = ConstraintTheory::free(vars(&["a", "b"]));
        let rho = free.falsifying_assignment(&Constraint::lt(v("a"), v("b")), 6).unwrap();
        assert_eq!(rho, Assignment::new().with("a", 0).with("b", 0));

        // Over the naturals a \/ b = a^ forces b = a^, so no witness exists
        // even though the abstract theory does not entail it.
        let th = ConstraintTheory::new(vars(&["a", "b"]), [Constraint::eq(v("a").join(v("b")), v("a").suc())]).unwrap();
        assert_eq!(th.falsifying_assignment(&Constraint::eq(v("b"), v("a").suc()), 6), None);
    }
}
