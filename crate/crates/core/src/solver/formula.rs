//! Solver-level formulas over propositions, linear integer atoms and object equalities.

use std::collections::{BTreeMap, BTreeSet};

pub type PropId = u32;
pub type VarId = u32;
pub type ObjId = u32;

/// `Σ coeffs·x ≤ rhs` or `Σ coeffs·x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinAtom {
    pub coeffs: BTreeMap<VarId, i128>,
    pub rel: Rel,
    pub rhs: i128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rel {
    Le,
    Eq,
}

impl LinAtom {
    pub fn new(coeffs: BTreeMap<VarId, i128>, rel: Rel, rhs: i128) -> LinAtom {
        let coeffs = coeffs.into_iter().filter(|(_, a)| *a != 0).collect();
        LinAtom { coeffs, rel, rhs }
    }

    /// `x ≤ c`, `x ≥ c` or `x = c` for a single variable.
    pub fn bound(x: VarId, rel: std::cmp::Ordering, c: i128) -> LinAtom {
        match rel {
            std::cmp::Ordering::Less => LinAtom::new(BTreeMap::from([(x, 1)]), Rel::Le, c),
            std::cmp::Ordering::Greater => LinAtom::new(BTreeMap::from([(x, -1)]), Rel::Le, -c),
            std::cmp::Ordering::Equal => LinAtom::new(BTreeMap::from([(x, 1)]), Rel::Eq, c),
        }
    }

    /// `x - y ≤ c`, `x - y ≥ c` or `x - y = c`.
    pub fn diff(x: VarId, y: VarId, rel: std::cmp::Ordering, c: i128) -> LinAtom {
        let m = |a: i128, b: i128| BTreeMap::from([(x, a), (y, b)]);
        match rel {
            std::cmp::Ordering::Less => LinAtom::new(m(1, -1), Rel::Le, c),
            std::cmp::Ordering::Greater => LinAtom::new(m(-1, 1), Rel::Le, -c),
            std::cmp::Ordering::Equal => LinAtom::new(m(1, -1), Rel::Eq, c),
        }
    }

    /// Truth value when the atom has no variables.
    pub fn constant_value(&self) -> Option<bool> {
        if !self.coeffs.is_empty() {
            return None;
        }
        Some(match self.rel {
            Rel::Le => 0 <= self.rhs,
            Rel::Eq => self.rhs == 0,
        })
    }

    /// Difference-logic shape: one variable with coefficient ±1, or two with +1 and -1.
    pub fn is_difference(&self) -> bool {
        let cs: Vec<i128> = self.coeffs.values().copied().collect();
        match cs.as_slice() {
            [a] => a.abs() == 1,
            [a, b] => (*a == 1 && *b == -1) || (*a == -1 && *b == 1),
            _ => cs.is_empty(),
        }
    }

    pub fn eval(&self, assignment: &BTreeMap<VarId, i128>) -> Option<bool> {
        let mut s = 0i128;
        for (x, a) in &self.coeffs {
            s += a * assignment.get(x)?;
        }
        Some(match self.rel {
            Rel::Le => s <= self.rhs,
            Rel::Eq => s == self.rhs,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Prop(PropId),
    Lin(LinAtom),
    ObjEq(ObjId, ObjId),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub positive: bool,
    pub atom: Atom,
}

/// Formula in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Lit(Lit),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(atom: Atom) -> Formula {
        Formula::lit(true, atom)
    }

    pub fn lit(positive: bool, atom: Atom) -> Formula {
        if let Atom::Lin(l) = &atom {
            if let Some(v) = l.constant_value() {
                return if v == positive {
                    Formula::True
                } else {
                    Formula::False
                };
            }
        }
        if let Atom::ObjEq(a, b) = atom {
            if a == b {
                return if positive {
                    Formula::True
                } else {
                    Formula::False
                };
            }
        }
        Formula::Lit(Lit { positive, atom })
    }

    pub fn prop(p: PropId) -> Formula {
        Formula::atom(Atom::Prop(p))
    }

    pub fn lin(l: LinAtom) -> Formula {
        Formula::atom(Atom::Lin(l))
    }

    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// Negation, pushed to the atoms.
    pub fn negate(&self) -> Formula {
        match self {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Lit(l) => Formula::lit(!l.positive, l.atom.clone()),
            Formula::And(fs) => Formula::or(fs.iter().map(Formula::negate)),
            Formula::Or(fs) => Formula::and(fs.iter().map(Formula::negate)),
        }
    }

    pub fn props(&self) -> BTreeSet<PropId> {
        let mut out = BTreeSet::new();
        self.visit(&mut |l| {
            if let Atom::Prop(p) = l.atom {
                out.insert(p);
            }
        });
        out
    }

    pub fn int_vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.visit(&mut |l| {
            if let Atom::Lin(a) = &l.atom {
                out.extend(a.coeffs.keys().copied());
            }
        });
        out
    }

    pub fn objects(&self) -> BTreeSet<ObjId> {
        let mut out = BTreeSet::new();
        self.visit(&mut |l| {
            if let Atom::ObjEq(a, b) = l.atom {
                out.insert(a);
                out.insert(b);
            }
        });
        out
    }

    /// Right-hand constants of linear atoms.
    pub fn constants(&self) -> BTreeSet<i128> {
        let mut out = BTreeSet::new();
        self.visit(&mut |l| {
            if let Atom::Lin(a) = &l.atom {
                let scale = if a.coeffs.values().all(|c| *c < 0) {
                    -1
                } else {
                    1
                };
                out.insert(scale * a.rhs);
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Lit)) {
        match self {
            Formula::Lit(l) => f(l),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| g.visit(f)),
            _ => {}
        }
    }

    /// Evaluation under a total assignment; `None` if a symbol is unassigned or an object atom occurs.
    pub fn eval(
        &self,
        props: &BTreeMap<PropId, bool>,
        ints: &BTreeMap<VarId, i128>,
    ) -> Option<bool> {
        match self {
            Formula::True => Some(true),
            Formula::False => Some(false),
            Formula::Lit(l) => {
                let v = match &l.atom {
                    Atom::Prop(p) => *props.get(p)?,
                    Atom::Lin(a) => a.eval(ints)?,
                    Atom::ObjEq(..) => return None,
                };
                Some(v == l.positive)
            }
            Formula::And(fs) => {
                let mut out = true;
                for g in fs {
                    out &= g.eval(props, ints)?;
                }
                Some(out)
            }
            Formula::Or(fs) => {
                let mut out = false;
                for g in fs {
                    out |= g.eval(props, ints)?;
                }
                Some(out)
            }
        }
    }
}
