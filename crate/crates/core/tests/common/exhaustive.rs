//! Exhaustive comparison of the constraint engine against the oracle on all
//! theories of at most three atomic inequalities over three variables with
//! shifts at most two, up to renaming of the variables.

#![allow(dead_code)]

use std::collections::HashMap;

use levtt::constraint::{Constraint, ConstraintError, ConstraintTheory};
use levtt::level::{LevelNf, LevelVar};

use super::oracle::{atom_expr, OracleTheory, Rule};

const NVARS: usize = 3;
const MAX_SHIFT: u32 = 2;
/// Saturation cap for the oracle; well above any finite shift these theories derive.
const CAP: u32 = 24;
const MODEL_BOUND: u64 = 4;

/// `var + shift <= join of bound`, where `bound[w]` is 0 for absent and
/// `i + 1` for atom `w + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct RawFact {
    var: usize,
    shift: u32,
    bound: [u32; NVARS],
}

impl RawFact {
    fn permute(&self, p: &[usize; NVARS]) -> RawFact {
        let mut bound = [0; NVARS];
        for (w, &b) in self.bound.iter().enumerate() {
            bound[p[w]] = b;
        }
        RawFact { var: p[self.var], shift: self.shift, bound }
    }
}

fn universe() -> Vec<RawFact> {
    let mut out = Vec::new();
    for var in 0..NVARS {
        for shift in 0..=MAX_SHIFT {
            let choices = MAX_SHIFT + 2;
            for code in 1..choices.pow(NVARS as u32) {
                let mut bound = [0; NVARS];
                let mut c = code;
                for b in bound.iter_mut() {
                    *b = c % choices;
                    c /= choices;
                }
                // drop facts already true in the free theory
                if bound[var] > 0 && bound[var] > shift {
                    continue;
                }
                out.push(RawFact { var, shift, bound });
            }
        }
    }
    out.sort();
    out
}

const PERMS: [[usize; 3]; 5] = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ExhaustiveReport {
    pub theories: u64,
    pub loop_free: u64,
    pub loopy: u64,
    pub targets_compared: u64,
    pub model_checks: u64,
    pub disagreements: Vec<String>,
}

fn vars() -> Vec<LevelVar> {
    ["a", "b", "c"].iter().map(LevelVar::new).collect()
}

fn nf_of(vars: &[LevelVar], bound: &[u32; NVARS]) -> LevelNf {
    LevelNf::from_atoms(
        bound
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > 0)
            .map(|(w, &b)| (vars[w].clone(), b - 1)),
    )
    .unwrap()
}

fn targets(vars: &[LevelVar]) -> Vec<LevelNf> {
    let mut out = Vec::new();
    for code in 1u32..(1 << NVARS) {
        let bound: [u32; NVARS] = std::array::from_fn(|w| (code >> w) & 1);
        out.push(nf_of(vars, &bound));
    }
    for w in 0..NVARS {
        for s in 1..=MAX_SHIFT {
            let mut bound = [0; NVARS];
            bound[w] = s + 1;
            out.push(nf_of(vars, &bound));
        }
    }
    out
}

fn check_theory(facts: &[RawFact], vars: &[LevelVar], targets: &[LevelNf], report: &mut ExhaustiveReport) {
    report.theories += 1;
    let constraints: Vec<Constraint> = facts
        .iter()
        .map(|f| Constraint::leq(atom_expr(&vars[f.var], f.shift), nf_of(vars, &f.bound).to_expr()))
        .collect();
    let rules: Vec<Rule> = facts
        .iter()
        .map(|f| Rule {
            var: f.var,
            shift: f.shift,
            bound: f.bound.iter().enumerate().filter(|(_, &b)| b > 0).map(|(w, &b)| (w, b - 1)).collect(),
        })
        .collect();
    let oracle = OracleTheory::from_rules(vars, rules);
    let models = oracle.models(MODEL_BOUND);

    let engine = ConstraintTheory::new(vars.iter().cloned(), constraints.iter().cloned());
    let th = match engine {
        Err(ConstraintError::Loop(_)) => {
            report.loopy += 1;
            if !models.is_empty() {
                report.disagreements.push(format!("{facts:?}: engine loop but a natural model exists"));
            } else if oracle.find_loop(3).is_none() {
                report.disagreements.push(format!("{facts:?}: engine loop but oracle finds no l < l"));
            }
            return;
        }
        Err(e) => {
            report.disagreements.push(format!("{facts:?}: unexpected error {e}"));
            return;
        }
        Ok(th) => th,
    };
    report.loop_free += 1;
    if models.is_empty() {
        if let Some(l) = oracle.find_loop(3) {
            report.disagreements.push(format!("{facts:?}: engine loop-free but oracle has {l} < {l}"));
            return;
        }
    }
    for m in targets {
        report.targets_compared += 1;
        let engine_shifts = match th.shifts_below(m) {
            Ok(s) => s,
            Err(e) => {
                report.disagreements.push(format!("{facts:?} below {m}: engine error {e}"));
                continue;
            }
        };
        let oracle_shifts = oracle.shifts_below(m, CAP);
        for (i, v) in vars.iter().enumerate() {
            let e = engine_shifts[v];
            let o = oracle_shifts[i];
            if e != o {
                report
                    .disagreements
                    .push(format!("{facts:?}: largest shift of {v} below {m}: engine {e:?} oracle {o:?}"));
            }
            // natural-number soundness of every derived atom
            if let Some(k) = e {
                for rho in &models {
                    report.model_checks += 1;
                    let rhs = m.atoms().map(|(w, s)| rho[vars.iter().position(|x| x == w).unwrap()] + u64::from(s)).max().unwrap();
                    if rho[i] + u64::from(k) > rhs {
                        report.disagreements.push(format!("{facts:?}: {v}+{k} <= {m} falsified by {rho:?}"));
                    }
                }
            }
        }
    }
}

fn is_canonical(ids: &[usize], facts: &[RawFact], code_of: &HashMap<RawFact, usize>) -> bool {
    for p in &PERMS {
        let mut permuted: Vec<usize> = ids.iter().map(|&i| code_of[&facts[i].permute(p)]).collect();
        permuted.sort_unstable();
        if permuted.as_slice() < ids {
            return false;
        }
    }
    true
}

pub fn run() -> ExhaustiveReport {
    let facts = universe();
    let code_of: HashMap<RawFact, usize> = facts.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let vars = vars();
    let targets = targets(&vars);
    let mut report = ExhaustiveReport::default();
    let n = facts.len();
    let visit = |ids: &[usize], report: &mut ExhaustiveReport| {
        if is_canonical(ids, &facts, &code_of) {
            let chosen: Vec<RawFact> = ids.iter().map(|&i| facts[i]).collect();
            check_theory(&chosen, &vars, &targets, report);
        }
    };
    visit(&[], &mut report);
    for i in 0..n {
        visit(&[i], &mut report);
        for j in i + 1..n {
            visit(&[i, j], &mut report);
            for k in j + 1..n {
                visit(&[i, j, k], &mut report);
            }
        }
    }
    report
}
