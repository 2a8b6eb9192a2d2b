//! Template-based Craig interpolation.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::encode::EncodeEnv;
use super::formula::{Atom, Formula, LinAtom};
use super::{eliminate, is_sat, is_valid_implication, SatResult};

const MAX_CANDIDATES: usize = 48;

/// Literals of `f` projected onto the symbols it shares with `other`.
fn projected(f: &Formula, other: &Formula) -> Vec<Formula> {
    let props = f.props().difference(&other.props()).copied().collect();
    let ints = f
        .int_vars()
        .difference(&other.int_vars())
        .copied()
        .collect();
    let mut out = Vec::new();
    if let Some(p) = eliminate(f, &props, &ints) {
        p.visit(&mut |l| out.push(Formula::Lit(l.clone())));
    }
    out
}

/// Candidate atoms over the symbols shared by `a` and `b`: consequences of `a`, negated
/// consequences of `b`, then bounds built from constants of either side.
fn candidates(a: &Formula, b: &Formula) -> Vec<Formula> {
    let ints: Vec<_> = a.int_vars().intersection(&b.int_vars()).copied().collect();
    let props: Vec<_> = a.props().intersection(&b.props()).copied().collect();
    let consts: BTreeSet<i128> = a.constants().union(&b.constants()).copied().collect();
    let mut out = projected(a, b);
    out.extend(projected(b, a).iter().map(Formula::negate));
    for &x in &ints {
        for &c in &consts {
            for rel in [Ordering::Less, Ordering::Greater, Ordering::Equal] {
                out.push(Formula::lin(LinAtom::bound(x, rel, c)));
            }
        }
    }
    for (i, &x) in ints.iter().enumerate() {
        for &y in &ints[i + 1..] {
            for rel in [Ordering::Less, Ordering::Greater, Ordering::Equal] {
                out.push(Formula::lin(LinAtom::diff(x, y, rel, 0)));
            }
        }
    }
    for &p in &props {
        out.push(Formula::prop(p));
        out.push(Formula::prop(p).negate());
    }
    let mut seen = BTreeSet::new();
    out.retain(|f| seen.insert(f.clone()));
    out
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn go(
        start: usize,
        n: usize,
        k: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            cur.push(i);
            if go(i + 1, n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    go(0, n, k, &mut Vec::new(), f)
}

/// Finds `I` with `a ⇒ I`, `I ∧ b` unsatisfiable, and symbols of `I` common to both sides.
/// Conjunctions of up to `bound` atoms are tried smallest first. `None` when `a ∧ b` is
/// satisfiable or no template fits.
pub fn craig_interpolant(
    a: &Formula,
    b: &Formula,
    env: &EncodeEnv,
    bound: usize,
) -> Option<Formula> {
    if is_sat(&Formula::and([a.clone(), b.clone()]), env) != SatResult::Unsat {
        return None;
    }
    let shared_ints = a
        .int_vars()
        .intersection(&b.int_vars())
        .copied()
        .collect::<BTreeSet<_>>();
    let shared_props = a
        .props()
        .intersection(&b.props())
        .copied()
        .collect::<BTreeSet<_>>();
    if shared_ints.is_empty() && shared_props.is_empty() {
        return [Formula::True, Formula::False].into_iter().find(|i| {
            is_valid_implication(a, i, env)
                && is_sat(&Formula::and([i.clone(), b.clone()]), env) == SatResult::Unsat
        });
    }
    let implied: Vec<Formula> = candidates(a, b)
        .into_iter()
        .filter(|c| is_valid_implication(a, c, env))
        .take(MAX_CANDIDATES)
        .collect();
    let mut found = None;
    for k in 1..=bound.min(implied.len()) {
        let hit = combinations(implied.len(), k, &mut |idx| {
            let conj = Formula::and(idx.iter().map(|&i| implied[i].clone()));
            if is_sat(&Formula::and([conj.clone(), b.clone()]), env) == SatResult::Unsat {
                found = Some(conj);
                true
            } else {
                false
            }
        });
        if hit {
            break;
        }
    }
    let i = found?;
    debug_assert!(check_craig(a, b, &i, env));
    Some(i)
}

/// The three Craig conditions.
pub fn check_craig(a: &Formula, b: &Formula, i: &Formula, env: &EncodeEnv) -> bool {
    let shared_ints: BTreeSet<_> = a.int_vars().intersection(&b.int_vars()).copied().collect();
    let shared_props: BTreeSet<_> = a.props().intersection(&b.props()).copied().collect();
    let mut symbols_ok = i.int_vars().is_subset(&shared_ints) && i.props().is_subset(&shared_props);
    i.visit(&mut |l| {
        if matches!(l.atom, Atom::ObjEq(..)) {
            symbols_ok = false;
        }
    });
    symbols_ok
        && is_valid_implication(a, i, env)
        && is_sat(&Formula::and([i.clone(), b.clone()]), env) == SatResult::Unsat
}
