//! Translation of qualifiers into solver formulas.

use std::collections::BTreeMap;

use indexmap::IndexSet;

use super::formula::{Atom, Formula, LinAtom, ObjId, PropId, Rel, VarId};
use crate::program::{FilterOp, Operand};
use crate::qualifier::{CmpOp, Qualifier, SynAtom, TableExpr, Term};
use crate::value::Value;

/// Object-sorted terms. Column sets, operators and values are object constants;
/// projection and filtering are uninterpreted functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ObjTerm {
    Var(String),
    ColSet(Vec<String>),
    Column(String),
    Value(Value),
    Op(FilterOp),
    App(&'static str, Vec<ObjId>),
}

/// Integer-sorted symbols: named variables or uninterpreted applications to one object.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntSym {
    Named(String),
    App(&'static str, ObjId),
}

/// Interning tables shared by every formula encoded under this environment.
#[derive(Clone, Debug, Default)]
pub struct EncodeEnv {
    props: IndexSet<SynAtom>,
    objs: IndexSet<ObjTerm>,
    ints: IndexSet<IntSym>,
    terms: Vec<Term>,
}

type LinExpr = (BTreeMap<VarId, i128>, i128);

impl EncodeEnv {
    pub fn new() -> EncodeEnv {
        EncodeEnv::default()
    }

    pub fn prop(&mut self, a: &SynAtom) -> PropId {
        self.props.insert_full(a.clone()).0 as PropId
    }

    pub fn prop_atom(&self, p: PropId) -> Option<&SynAtom> {
        self.props.get_index(p as usize)
    }

    pub fn lookup_prop(&self, a: &SynAtom) -> Option<PropId> {
        self.props.get_index_of(a).map(|i| i as PropId)
    }

    pub fn obj(&self, id: ObjId) -> Option<&ObjTerm> {
        self.objs.get_index(id as usize)
    }

    pub fn num_objs(&self) -> usize {
        self.objs.len()
    }

    pub fn int_sym(&self, x: VarId) -> Option<&IntSym> {
        self.ints.get_index(x as usize)
    }

    pub fn num_ints(&self) -> usize {
        self.ints.len()
    }

    /// The qualifier-level term an integer variable stands for.
    pub fn int_term(&self, x: VarId) -> Option<&Term> {
        self.terms.get(x as usize)
    }

    pub fn lookup_term(&self, t: &Term) -> Option<VarId> {
        self.terms.iter().position(|u| u == t).map(|i| i as VarId)
    }

    fn intern_obj(&mut self, o: ObjTerm) -> ObjId {
        self.objs.insert_full(o).0 as ObjId
    }

    fn intern_int(&mut self, s: IntSym, t: &Term) -> VarId {
        let (i, fresh) = self.ints.insert_full(s);
        if fresh {
            self.terms.push(t.clone());
        }
        i as VarId
    }

    fn operand(&mut self, o: &Operand) -> ObjId {
        match o {
            Operand::Column(c) => self.intern_obj(ObjTerm::Column(c.clone())),
            Operand::Value(v) => self.intern_obj(ObjTerm::Value(v.clone())),
        }
    }

    pub fn table(&mut self, e: &TableExpr) -> ObjId {
        match e {
            TableExpr::Var(v) => self.intern_obj(ObjTerm::Var(v.clone())),
            TableExpr::Proj(inner, cols) => {
                let a = self.table(inner);
                let cs = self.intern_obj(ObjTerm::ColSet(cols.clone()));
                self.intern_obj(ObjTerm::App("proj", vec![a, cs]))
            }
            TableExpr::Filter(inner, p) => {
                let a = self.table(inner);
                let op = self.intern_obj(ObjTerm::Op(p.op));
                let l = self.operand(&p.lhs);
                let r = self.operand(&p.rhs);
                self.intern_obj(ObjTerm::App("filter", vec![a, op, l, r]))
            }
        }
    }

    /// Integer variable for a non-constant term.
    pub fn int_var(&mut self, t: &Term) -> Option<VarId> {
        let sym = match t {
            Term::Card(e) => IntSym::App("card", self.table(e)),
            Term::Max(e) => IntSym::App("max", self.table(e)),
            Term::Min(e) => IntSym::App("min", self.table(e)),
            Term::Var(v) => IntSym::Named(v.clone()),
            Term::Const(_) | Term::Offset(..) => return None,
        };
        Some(self.intern_int(sym, t))
    }

    fn linear(&mut self, t: &Term) -> LinExpr {
        match t {
            Term::Const(n) => (BTreeMap::new(), *n as i128),
            Term::Offset(inner, k) => {
                let (m, c) = self.linear(inner);
                (m, c + *k as i128)
            }
            t => {
                let x = self.int_var(t).expect("non-constant term");
                (BTreeMap::from([(x, 1)]), 0)
            }
        }
    }

    /// Encodes a qualifier; the environment grows with any new symbols.
    pub fn encode(&mut self, q: &Qualifier) -> Formula {
        match q {
            Qualifier::True => Formula::True,
            Qualifier::False => Formula::False,
            Qualifier::Syn(a) => Formula::prop(self.prop(a)),
            Qualifier::Cmp(a, op, b) => {
                let (la, ca) = self.linear(a);
                let (lb, cb) = self.linear(b);
                let mut coeffs = la;
                for (x, k) in lb {
                    *coeffs.entry(x).or_insert(0) -= k;
                }
                let rhs = cb - ca;
                let atom = match op {
                    CmpOp::Le => LinAtom::new(coeffs, Rel::Le, rhs),
                    CmpOp::Eq => LinAtom::new(coeffs, Rel::Eq, rhs),
                    CmpOp::Ge => LinAtom::new(
                        coeffs.into_iter().map(|(x, k)| (x, -k)).collect(),
                        Rel::Le,
                        -rhs,
                    ),
                };
                Formula::lin(atom)
            }
            Qualifier::TableEq(a, b) => {
                let a = self.table(a);
                let b = self.table(b);
                Formula::atom(Atom::ObjEq(a, b))
            }
            Qualifier::Not(inner) => self.encode(inner).negate(),
            Qualifier::And(qs) => {
                Formula::and(qs.iter().map(|q| self.encode(q)).collect::<Vec<_>>())
            }
            Qualifier::Or(qs) => Formula::or(qs.iter().map(|q| self.encode(q)).collect::<Vec<_>>()),
        }
    }

    /// Maps a formula over this environment's symbols back to a qualifier.
    pub fn decode(&self, f: &Formula) -> Option<Qualifier> {
        Some(match f {
            Formula::True => Qualifier::True,
            Formula::False => Qualifier::False,
            Formula::And(fs) => Qualifier::and(
                fs.iter()
                    .map(|g| self.decode(g))
                    .collect::<Option<Vec<_>>>()?,
            ),
            Formula::Or(fs) => Qualifier::or(
                fs.iter()
                    .map(|g| self.decode(g))
                    .collect::<Option<Vec<_>>>()?,
            ),
            Formula::Lit(l) => {
                let q = match &l.atom {
                    Atom::Prop(p) => Qualifier::Syn(self.prop_atom(*p)?.clone()),
                    Atom::Lin(a) => self.decode_lin(a)?,
                    Atom::ObjEq(..) => return None,
                };
                if l.positive {
                    q
                } else {
                    Qualifier::not(q)
                }
            }
        })
    }

    /// Renders a difference or bound atom as a comparison of terms.
    pub fn decode_lin(&self, a: &LinAtom) -> Option<Qualifier> {
        let op = match a.rel {
            Rel::Le => CmpOp::Le,
            Rel::Eq => CmpOp::Eq,
        };
        let entries: Vec<(VarId, i128)> = a.coeffs.iter().map(|(x, k)| (*x, *k)).collect();
        let c = i64::try_from(a.rhs).ok()?;
        match entries.as_slice() {
            [(x, 1)] => Some(Qualifier::Cmp(
                self.int_term(*x)?.clone(),
                op,
                Term::Const(c),
            )),
            [(x, -1)] => Some(Qualifier::Cmp(
                Term::Const(-c),
                op,
                self.int_term(*x)?.clone(),
            )),
            [(x, kx), (y, ky)] if kx * ky == -1 => {
                let (pos, neg) = if *kx == 1 { (*x, *y) } else { (*y, *x) };
                let lhs = self.int_term(pos)?.clone();
                let rhs = self.int_term(neg)?.clone();
                let rhs = if c == 0 {
                    rhs
                } else {
                    Term::Offset(Box::new(rhs), c)
                };
                Some(Qualifier::Cmp(lhs, op, rhs))
            }
            _ => None,
        }
    }
}
