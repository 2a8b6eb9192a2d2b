//! Case-splitting satisfiability check with a congruence and linear-arithmetic theory.

use std::collections::{BTreeMap, BTreeSet};

use super::cc::Congruence;
use super::encode::{EncodeEnv, IntSym};
use super::fm::{self, Constraint, Feasibility};
use super::formula::{Atom, Formula, LinAtom, Lit, PropId, Rel, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

#[derive(Clone, Default)]
struct Branch {
    props: BTreeMap<PropId, bool>,
    lits: Vec<Lit>,
}

pub(crate) fn check(f: &Formula, env: &EncodeEnv) -> SatResult {
    solve(vec![f], Branch::default(), env)
}

fn solve<'a>(mut todo: Vec<&'a Formula>, mut branch: Branch, env: &EncodeEnv) -> SatResult {
    let mut ors: Vec<&'a Formula> = Vec::new();
    while let Some(f) = todo.pop() {
        match f {
            Formula::True => {}
            Formula::False => return SatResult::Unsat,
            Formula::And(fs) => todo.extend(fs.iter()),
            Formula::Or(_) => ors.push(f),
            Formula::Lit(l) => {
                if let Atom::Prop(p) = l.atom {
                    match branch.props.insert(p, l.positive) {
                        Some(prev) if prev != l.positive => return SatResult::Unsat,
                        _ => {}
                    }
                } else {
                    branch.lits.push(l.clone());
                }
            }
        }
    }
    let Some(pick) = (0..ors.len()).min_by_key(|&i| match ors[i] {
        Formula::Or(fs) => fs.len(),
        _ => 0,
    }) else {
        return theory(&branch.lits, env);
    };
    let Formula::Or(disjuncts) = ors.swap_remove(pick) else {
        unreachable!()
    };
    let mut unknown = false;
    for g in disjuncts {
        let mut next = ors.clone();
        next.push(g);
        match solve(next, branch.clone(), env) {
            SatResult::Sat => return SatResult::Sat,
            SatResult::Unknown => unknown = true,
            SatResult::Unsat => {}
        }
    }
    if unknown {
        SatResult::Unknown
    } else {
        SatResult::Unsat
    }
}

fn theory(lits: &[Lit], env: &EncodeEnv) -> SatResult {
    let mut eqs = Vec::new();
    let mut diseqs = Vec::new();
    let mut lin: Vec<(bool, &LinAtom)> = Vec::new();
    for l in lits {
        match &l.atom {
            Atom::ObjEq(a, b) => {
                if l.positive {
                    eqs.push((*a, *b))
                } else {
                    diseqs.push((*a, *b))
                }
            }
            Atom::Lin(a) => lin.push((l.positive, a)),
            Atom::Prop(_) => {}
        }
    }
    let mut cc = Congruence::close(env, &eqs);
    if diseqs.iter().any(|(a, b)| cc.same(*a, *b)) {
        return SatResult::Unsat;
    }
    let vars: BTreeSet<VarId> = lin
        .iter()
        .flat_map(|(_, a)| a.coeffs.keys().copied())
        .collect();
    let vars: Vec<VarId> = vars.into_iter().collect();
    let mut base: Vec<Constraint> = Vec::new();
    for &x in &vars {
        if matches!(env.int_sym(x), Some(IntSym::App("card", _))) {
            base.push(Constraint::new(BTreeMap::from([(x, -1)]), 0));
        }
    }
    for (x, y) in cc.int_equalities(env, &vars) {
        base.push(Constraint::new(BTreeMap::from([(x, 1), (y, -1)]), 0));
        base.push(Constraint::new(BTreeMap::from([(x, -1), (y, 1)]), 0));
    }
    let mut splits: Vec<[Constraint; 2]> = Vec::new();
    for (pos, a) in lin {
        let neg: BTreeMap<VarId, i128> = a.coeffs.iter().map(|(x, k)| (*x, -k)).collect();
        match (pos, a.rel) {
            (true, Rel::Le) => base.push(Constraint::new(a.coeffs.clone(), a.rhs)),
            (false, Rel::Le) => base.push(Constraint::new(neg, -a.rhs - 1)),
            (true, Rel::Eq) => {
                base.push(Constraint::new(a.coeffs.clone(), a.rhs));
                base.push(Constraint::new(neg, -a.rhs));
            }
            (false, Rel::Eq) => splits.push([
                Constraint::new(a.coeffs.clone(), a.rhs - 1),
                Constraint::new(neg, -a.rhs - 1),
            ]),
        }
    }
    split_feasible(base, &splits)
}

fn split_feasible(base: Vec<Constraint>, splits: &[[Constraint; 2]]) -> SatResult {
    let Some((first, rest)) = splits.split_first() else {
        return match fm::feasible(base) {
            Feasibility::Feasible => SatResult::Sat,
            Feasibility::Infeasible => SatResult::Unsat,
            Feasibility::Unknown => SatResult::Unknown,
        };
    };
    let mut unknown = false;
    for c in first {
        let mut cs = base.clone();
        cs.push(c.clone());
        match split_feasible(cs, rest) {
            SatResult::Sat => return SatResult::Sat,
            SatResult::Unknown => unknown = true,
            SatResult::Unsat => {}
        }
    }
    if unknown {
        SatResult::Unknown
    } else {
        SatResult::Unsat
    }
}
