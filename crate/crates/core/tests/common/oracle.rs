//! Independent entailment oracle for small constraint theories.
//!
//! Decides `l <= m` by naive forward saturation over an explicit set of
//! atoms `(v, k)` with `k <= cap`, and cross-checks with an exhaustive search
//! for falsifying assignments over the naturals.

#![allow(dead_code)]

use levtt::constraint::Constraint;
use levtt::level::{Assignment, LevelExpr, LevelNf, LevelVar};

#[derive(Debug, Clone)]
pub struct Rule {
    pub var: usize,
    pub shift: u32,
    pub bound: Vec<(usize, u32)>,
}

#[derive(Debug, Clone)]
pub struct OracleTheory {
    pub vars: Vec<LevelVar>,
    pub rules: Vec<Rule>,
}

/// Per-variable set of atoms below a level, as a bitmask over shifts.
pub type AtomSet = Vec<u64>;

impl OracleTheory {
    pub fn new(vars: &[LevelVar], cs: &[Constraint]) -> Self {
        let mut th = OracleTheory { vars: vars.to_vec(), rules: Vec::new() };
        for c in cs {
            let l = c.lhs.normalize();
            let r = c.rhs.normalize();
            th.add_leq(&l, &r);
            th.add_leq(&r, &l);
        }
        th
    }

    pub fn from_rules(vars: &[LevelVar], rules: Vec<Rule>) -> Self {
        OracleTheory { vars: vars.to_vec(), rules }
    }

    fn idx(&self, v: &LevelVar) -> usize {
        self.vars.iter().position(|w| w == v).expect("variable declared in oracle theory")
    }

    fn add_leq(&mut self, l: &LevelNf, r: &LevelNf) {
        let bound: Vec<(usize, u32)> = r.atoms().map(|(w, i)| (self.idx(w), i)).collect();
        for (v, k) in l.atoms() {
            let var = self.idx(v);
            self.rules.push(Rule { var, shift: k, bound: bound.clone() });
        }
    }

    pub fn saturate(&self, target: &LevelNf, cap: u32) -> AtomSet {
        let below = |k: u32| -> u64 { if k >= 63 { u64::MAX } else { (1u64 << (k + 1)) - 1 } };
        let mut set = vec![0u64; self.vars.len()];
        for (v, k) in target.atoms() {
            set[self.idx(v)] |= below(k.min(cap));
        }
        let mut changed = true;
        while changed {
            changed = false;
            for rule in &self.rules {
                for d in 0..=cap {
                    if rule.shift + d > cap {
                        break;
                    }
                    let fires = rule
                        .bound
                        .iter()
                        .all(|&(w, i)| i + d <= cap && set[w] >> (i + d) & 1 == 1);
                    if fires {
                        let add = below(rule.shift + d);
                        if set[rule.var] | add != set[rule.var] {
                            set[rule.var] |= add;
                            changed = true;
                        }
                    }
                }
            }
        }
        set
    }

    /// Largest shift `k <= cap` with `v + k <= target`, per variable.
    pub fn shifts_below(&self, target: &LevelNf, cap: u32) -> Vec<Option<u32>> {
        self.saturate(target, cap)
            .into_iter()
            .map(|mask| if mask == 0 { None } else { Some(63 - mask.leading_zeros()) })
            .collect()
    }

    pub fn saturation_leq(&self, l: &LevelNf, m: &LevelNf, cap: u32) -> bool {
        let set = self.saturate(m, cap);
        l.atoms().all(|(v, k)| k <= cap && set[self.idx(v)] >> k & 1 == 1)
    }

    pub fn satisfied_by(&self, rho: &[u64]) -> bool {
        self.rules.iter().all(|r| {
            let rhs = r.bound.iter().map(|&(w, i)| rho[w] + u64::from(i)).max().unwrap();
            rho[r.var] + u64::from(r.shift) <= rhs
        })
    }

    /// All assignments with values in `0..=bound` satisfying the theory.
    pub fn models(&self, bound: u64) -> Vec<Vec<u64>> {
        let n = self.vars.len();
        let mut out = Vec::new();
        let total = (bound + 1).pow(n as u32);
        for code in 0..total {
            let mut rho = vec![0u64; n];
            let mut c = code;
            for x in rho.iter_mut() {
                *x = c % (bound + 1);
                c /= bound + 1;
            }
            if self.satisfied_by(&rho) {
                out.push(rho);
            }
        }
        out
    }

    pub fn assignment(&self, rho: &[u64]) -> Assignment {
        self.vars.iter().cloned().zip(rho.iter().copied()).collect()
    }

    pub fn nat_falsifies(&self, c: &Constraint, bound: u64) -> bool {
        self.models(bound).iter().any(|rho| !c.holds_in(&self.assignment(rho)).unwrap())
    }

    /// Entailment: a falsifying natural-number model wins, otherwise a
    /// saturation derivation of both inequalities is required.
    pub fn entails(&self, c: &Constraint, bound: u32) -> bool {
        if self.nat_falsifies(c, u64::from(bound)) {
            return false;
        }
        let cap = bound + 4 * (self.vars.len() as u32 + 1);
        let (l, r) = (c.lhs.normalize(), c.rhs.normalize());
        self.saturation_leq(&l, &r, cap) && self.saturation_leq(&r, &l, cap)
    }

    /// Searches for a level `l` (shifts at most `lcap`) with `l^ <= l`.
    pub fn find_loop(&self, lcap: u32) -> Option<LevelNf> {
        let n = self.vars.len();
        let cap = lcap + 12;
        let choices = lcap + 2; // absent, or shift 0..=lcap
        let total = u64::from(choices).pow(n as u32);
        for code in 1..total {
            let mut c = code;
            let mut atoms = Vec::new();
            for v in &self.vars {
                let pick = (c % u64::from(choices)) as u32;
                c /= u64::from(choices);
                if pick > 0 {
                    atoms.push((v.clone(), pick - 1));
                }
            }
            let Some(l) = LevelNf::from_atoms(atoms) else { continue };
            if self.saturation_leq(&l.shift(1), &l, cap) {
                return Some(l);
            }
        }
        None
    }
}

pub fn atom_expr(v: &LevelVar, k: u32) -> LevelExpr {
    LevelExpr::Var(v.clone()).sucs(k)
}
