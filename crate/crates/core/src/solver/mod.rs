//! Decision procedures for encoded qualifiers.

mod cc;
pub mod encode;
pub mod fm;
pub mod formula;
pub mod interpolant;
mod sat;

use std::cell::Cell;
use std::collections::BTreeSet;

pub use encode::EncodeEnv;
pub use formula::{Atom, Formula, LinAtom, Lit, Rel};
pub use interpolant::{check_craig, craig_interpolant};
pub use sat::SatResult;

use fm::{Constraint, FmError};
use formula::{PropId, VarId};

thread_local! {
    static CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of satisfiability queries issued on this thread.
pub fn solver_calls() -> u64 {
    CALLS.with(Cell::get)
}

pub fn is_sat(f: &Formula, env: &EncodeEnv) -> SatResult {
    CALLS.with(|c| c.set(c.get() + 1));
    sat::check(f, env)
}

/// `a ⇒ b`. Unknown counts as not valid.
pub fn is_valid_implication(a: &Formula, b: &Formula, env: &EncodeEnv) -> bool {
    is_sat(&Formula::and([a.clone(), b.negate()]), env) == SatResult::Unsat
}

fn dnf(f: &Formula) -> Vec<Vec<Lit>> {
    match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Lit(l) => vec![vec![l.clone()]],
        Formula::Or(fs) => fs.iter().flat_map(dnf).collect(),
        Formula::And(fs) => {
            let mut acc = vec![vec![]];
            for g in fs {
                let d = dnf(g);
                let mut next = Vec::new();
                for a in &acc {
                    for b in &d {
                        let mut c: Vec<Lit> = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Linear constraints (`≤` form) for a literal; a negated equality yields two alternatives.
pub(crate) fn lit_constraints(positive: bool, a: &LinAtom) -> Vec<Vec<Constraint>> {
    let neg = a.coeffs.iter().map(|(x, k)| (*x, -k)).collect();
    match (positive, a.rel) {
        (true, Rel::Le) => vec![vec![Constraint::new(a.coeffs.clone(), a.rhs)]],
        (false, Rel::Le) => vec![vec![Constraint::new(neg, -a.rhs - 1)]],
        (true, Rel::Eq) => vec![vec![
            Constraint::new(a.coeffs.clone(), a.rhs),
            Constraint::new(neg, -a.rhs),
        ]],
        (false, Rel::Eq) => vec![
            vec![Constraint::new(a.coeffs.clone(), a.rhs - 1)],
            vec![Constraint::new(neg, -a.rhs - 1)],
        ],
    }
}

/// Turns `≤` constraints back into atoms, pairing opposite bounds into equalities.
pub(crate) fn constraints_to_atoms(cs: &[Constraint]) -> Vec<LinAtom> {
    let mut used = vec![false; cs.len()];
    let mut out = Vec::new();
    for i in 0..cs.len() {
        if used[i] {
            continue;
        }
        let flipped: std::collections::BTreeMap<VarId, i128> =
            cs[i].coeffs.iter().map(|(x, k)| (*x, -k)).collect();
        let partner = (i + 1..cs.len())
            .find(|&j| !used[j] && cs[j].coeffs == flipped && cs[j].rhs == -cs[i].rhs);
        if let Some(j) = partner {
            used[j] = true;
            let first_positive = cs[i].coeffs.values().next().is_some_and(|k| *k > 0);
            let (c, r) = if first_positive {
                (cs[i].coeffs.clone(), cs[i].rhs)
            } else {
                (flipped, -cs[i].rhs)
            };
            out.push(LinAtom::new(c, Rel::Eq, r));
        } else {
            out.push(LinAtom::new(cs[i].coeffs.clone(), Rel::Le, cs[i].rhs));
        }
    }
    out
}

/// Existentially eliminates propositions and integer variables. Propositions are removed by
/// case splitting, integers by Fourier–Motzkin on each disjunct. `None` if a disjunct mixes
/// eliminated variables with object equalities in a way that cannot be tracked, or blows up.
pub fn eliminate(f: &Formula, props: &BTreeSet<PropId>, vars: &BTreeSet<VarId>) -> Option<Formula> {
    let mut disjuncts = Vec::new();
    for conj in dnf(f) {
        let mut kept = Vec::new();
        let mut alternatives: Vec<Vec<Constraint>> = vec![vec![]];
        for l in conj {
            match &l.atom {
                Atom::Prop(p) if props.contains(p) => {}
                Atom::Lin(a) if a.coeffs.keys().any(|x| vars.contains(x)) => {
                    let opts = lit_constraints(l.positive, a);
                    alternatives = alternatives
                        .iter()
                        .flat_map(|base| {
                            opts.iter()
                                .map(move |o| base.iter().chain(o).cloned().collect())
                        })
                        .collect();
                }
                _ => kept.push(Formula::Lit(l)),
            }
        }
        for alt in alternatives {
            match fm::eliminate(alt, vars) {
                Ok(cs) => {
                    let mut parts = kept.clone();
                    parts.extend(constraints_to_atoms(&cs).into_iter().map(Formula::lin));
                    disjuncts.push(Formula::and(parts));
                }
                Err(FmError::Infeasible) => {}
                Err(FmError::Blowup) => return None,
            }
        }
    }
    Some(Formula::or(disjuncts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn le(x: VarId, y: VarId) -> Formula {
        Formula::lin(LinAtom::diff(x, y, std::cmp::Ordering::Less, 0))
    }

    fn bound(x: VarId, rel: std::cmp::Ordering, c: i128) -> Formula {
        Formula::lin(LinAtom::bound(x, rel, c))
    }

    #[test]
    fn contradiction_of_literals() {
        let env = EncodeEnv::new();
        let f = Formula::and([Formula::prop(0), Formula::prop(0).negate()]);
        assert_eq!(is_sat(&f, &env), SatResult::Unsat);
    }

    #[test]
    fn bounded_chain() {
        use std::cmp::Ordering::*;
        let env = EncodeEnv::new();
        let f = Formula::and([le(0, 1), bound(1, Less, 20), bound(0, Equal, 30)]);
        assert_eq!(is_sat(&f, &env), SatResult::Unsat);
        let g = Formula::and([le(0, 1), bound(1, Less, 40), bound(0, Equal, 30)]);
        assert_eq!(is_sat(&g, &env), SatResult::Sat);
    }

    #[test]
    fn implication_and_trivial_consequence() {
        use std::cmp::Ordering::*;
        let env = EncodeEnv::new();
        let a = Formula::and([bound(0, Equal, 3), bound(1, Equal, 3)]);
        let b = Formula::lin(LinAtom::diff(0, 1, Greater, 0));
        assert!(is_valid_implication(&a, &b, &env));
        assert!(is_valid_implication(&a, &Formula::True, &env));
    }

    #[test]
    fn eliminate_bound() {
        use std::cmp::Ordering::*;
        let f = Formula::and([le(0, 1), bound(0, Equal, 30)]);
        let out = eliminate(&f, &BTreeSet::new(), &BTreeSet::from([0])).unwrap();
        assert_eq!(
            out,
            Formula::lin(LinAtom::new(BTreeMap::from([(1, -1)]), Rel::Le, -30))
        );
        let g = Formula::and([Formula::prop(0), Formula::prop(1)]);
        assert_eq!(
            eliminate(&g, &BTreeSet::from([0]), &BTreeSet::new()).unwrap(),
            Formula::prop(1)
        );
    }

    #[test]
    fn interpolant_of_chain() {
        use std::cmp::Ordering::*;
        let env = EncodeEnv::new();
        let a = Formula::and([le(0, 1), bound(1, Less, 20)]);
        let b = bound(0, Equal, 30);
        let i = craig_interpolant(&a, &b, &env, 3).unwrap();
        assert_eq!(i, bound(0, Less, 20));
        assert!(check_craig(&a, &b, &i, &env));
        let p = Formula::prop(0);
        assert_eq!(craig_interpolant(&p, &p.negate(), &env, 3), Some(p));
    }
}
