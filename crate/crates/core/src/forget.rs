//! Projecting terms and atoms out of qualifiers.

use std::collections::BTreeSet;

use crate::qualifier::{QLit, Qualifier, SynAtom, TableExpr, Term};
use crate::solver::fm::{self, Constraint, FmError};
use crate::solver::{constraints_to_atoms, lit_constraints, EncodeEnv, Formula};

/// What to project out of a qualifier.
pub struct Forget<'a> {
    pub term: &'a dyn Fn(&Term) -> bool,
    pub atom: &'a dyn Fn(&SynAtom) -> bool,
}

impl Forget<'_> {
    fn touches_term(&self, t: &Term) -> bool {
        (self.term)(t.split_offset().0)
    }

    fn touches_expr(&self, e: &TableExpr) -> bool {
        (self.term)(&Term::Card(e.clone()))
    }

    fn touches(&self, q: &Qualifier) -> bool {
        match q {
            Qualifier::True | Qualifier::False => false,
            Qualifier::Syn(a) => (self.atom)(a),
            Qualifier::Cmp(a, _, b) => self.touches_term(a) || self.touches_term(b),
            Qualifier::TableEq(a, b) => self.touches_expr(a) || self.touches_expr(b),
            Qualifier::Not(inner) => self.touches(inner),
            Qualifier::And(qs) | Qualifier::Or(qs) => qs.iter().any(|q| self.touches(q)),
        }
    }
}

/// The strongest qualifier (up to linear elimination) implied by `q` that mentions no
/// forgotten term or atom. Top-level conjuncts that mention nothing forgotten are kept as they are.
pub fn forget(q: &Qualifier, what: &Forget<'_>) -> Qualifier {
    let parts: Vec<Qualifier> = match q {
        Qualifier::And(qs) => qs.clone(),
        q => vec![q.clone()],
    };
    let (touched, kept): (Vec<Qualifier>, Vec<Qualifier>) =
        parts.into_iter().partition(|p| what.touches(p));
    if touched.is_empty() {
        return q.clone();
    }
    let projected = Qualifier::or(
        Qualifier::and(touched)
            .dnf()
            .into_iter()
            .map(|c| forget_conjunct(&c, what)),
    );
    Qualifier::and(kept.into_iter().chain([projected]))
}

fn forget_conjunct(lits: &[QLit], what: &Forget<'_>) -> Qualifier {
    let mut kept = Vec::new();
    let mut env = EncodeEnv::new();
    let mut alternatives: Vec<Vec<Constraint>> = vec![vec![]];
    for l in lits {
        match &l.atom {
            Qualifier::Syn(a) if (what.atom)(a) => {}
            Qualifier::TableEq(..) if what.touches(&l.atom) => {}
            Qualifier::Cmp(..) if what.touches(&l.atom) => {
                let Formula::Lit(lit) = env.encode(&l.atom) else {
                    continue;
                };
                let crate::solver::Atom::Lin(a) = &lit.atom else {
                    continue;
                };
                let opts = lit_constraints(l.positive, a);
                alternatives = alternatives
                    .iter()
                    .flat_map(|base| {
                        opts.iter()
                            .map(move |o| base.iter().chain(o).cloned().collect())
                    })
                    .collect();
            }
            _ => kept.push(l.to_qualifier()),
        }
    }
    let vars: BTreeSet<u32> = (0..env.num_ints() as u32)
        .filter(|&x| env.int_term(x).is_some_and(|t| what.touches_term(t)))
        .collect();
    let mut disjuncts = Vec::new();
    for alt in alternatives {
        match fm::eliminate(alt, &vars) {
            Ok(cs) => {
                let mut parts = kept.clone();
                parts.extend(
                    constraints_to_atoms(&cs)
                        .iter()
                        .filter_map(|a| env.decode_lin(a)),
                );
                disjuncts.push(Qualifier::and(parts));
            }
            Err(FmError::Infeasible) => {}
            Err(FmError::Blowup) => disjuncts.push(Qualifier::and(kept.clone())),
        }
    }
    Qualifier::or(disjuncts)
}

/// Forgets every semantic term that depends on any of `cols`, and no atoms.
pub fn forget_columns(q: &Qualifier, cols: &BTreeSet<String>) -> Qualifier {
    forget(
        q,
        &Forget {
            term: &|t: &Term| cols.iter().any(|c| t.depends_on(c)),
            atom: &|_: &SynAtom| false,
        },
    )
}
