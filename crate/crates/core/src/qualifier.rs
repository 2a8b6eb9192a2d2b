//! Logical qualifiers of refinement types.

use std::collections::BTreeSet;
use std::fmt;

use crate::program::{Channel, FilterPred};
use crate::table::OpTag;

/// The refinement variable.
pub const NU: &str = "ν";
/// Canonical name of the plot's table parameter.
pub const TABLE_PARAM: &str = "T";

/// Table-valued expressions inside terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableExpr {
    Var(String),
    /// Projection onto a column set. The set is kept sorted and deduplicated.
    Proj(Box<TableExpr>, Vec<String>),
    Filter(Box<TableExpr>, FilterPred),
}

impl TableExpr {
    pub fn nu() -> TableExpr {
        TableExpr::Var(NU.to_string())
    }

    pub fn proj(of: TableExpr, cols: impl IntoIterator<Item = impl Into<String>>) -> TableExpr {
        let set: BTreeSet<String> = cols.into_iter().map(Into::into).collect();
        TableExpr::Proj(Box::new(of), set.into_iter().collect())
    }

    /// `Proj(ν, cols)`.
    pub fn nu_proj(cols: impl IntoIterator<Item = impl Into<String>>) -> TableExpr {
        TableExpr::proj(TableExpr::nu(), cols)
    }

    /// Columns this expression's value depends on; `None` means every column.
    pub fn columns(&self) -> Option<BTreeSet<String>> {
        match self {
            TableExpr::Var(_) => None,
            TableExpr::Proj(inner, cols) => {
                let mut out: BTreeSet<String> = cols.iter().cloned().collect();
                out.extend(inner.filter_columns());
                Some(out)
            }
            TableExpr::Filter(..) => None,
        }
    }

    fn filter_columns(&self) -> BTreeSet<String> {
        match self {
            TableExpr::Var(_) => BTreeSet::new(),
            TableExpr::Proj(inner, _) => inner.filter_columns(),
            TableExpr::Filter(inner, pred) => {
                let mut out = inner.filter_columns();
                out.extend(pred.columns().into_iter().map(String::from));
                out
            }
        }
    }

    pub fn base_var(&self) -> &str {
        match self {
            TableExpr::Var(v) => v,
            TableExpr::Proj(inner, _) | TableExpr::Filter(inner, _) => inner.base_var(),
        }
    }

    fn rename(&self, from: &str, to: &str) -> TableExpr {
        match self {
            TableExpr::Var(v) if v == from => TableExpr::Var(to.to_string()),
            TableExpr::Var(v) => TableExpr::Var(v.clone()),
            TableExpr::Proj(inner, cols) => {
                TableExpr::Proj(Box::new(inner.rename(from, to)), cols.clone())
            }
            TableExpr::Filter(inner, p) => {
                TableExpr::Filter(Box::new(inner.rename(from, to)), p.clone())
            }
        }
    }
}

/// Integer-valued terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// Number of distinct tuples.
    Card(TableExpr),
    Max(TableExpr),
    Min(TableExpr),
    Const(i64),
    Var(String),
    /// `term + n`; produced when eliminating variables.
    Offset(Box<Term>, i64),
}

impl Term {
    pub fn card(cols: impl IntoIterator<Item = impl Into<String>>) -> Term {
        Term::Card(TableExpr::nu_proj(cols))
    }

    pub fn card_nu() -> Term {
        Term::Card(TableExpr::nu())
    }

    /// Columns the term depends on; `None` means every column. Constants depend on nothing.
    pub fn columns(&self) -> Option<BTreeSet<String>> {
        match self {
            Term::Card(e) | Term::Max(e) | Term::Min(e) => e.columns(),
            Term::Const(_) | Term::Var(_) => Some(BTreeSet::new()),
            Term::Offset(t, _) => t.columns(),
        }
    }

    /// True if the term refers to the refinement variable at all.
    pub fn is_semantic(&self) -> bool {
        match self {
            Term::Card(e) | Term::Max(e) | Term::Min(e) => e.base_var() == NU,
            Term::Const(_) | Term::Var(_) => false,
            Term::Offset(t, _) => t.is_semantic(),
        }
    }

    pub fn depends_on(&self, col: &str) -> bool {
        self.is_semantic() && self.columns().is_none_or(|cs| cs.contains(col))
    }

    /// Drops any `Offset` wrapper, returning the base term and the accumulated constant.
    pub fn split_offset(&self) -> (&Term, i64) {
        match self {
            Term::Offset(t, k) => {
                let (b, j) = t.split_offset();
                (b, j + k)
            }
            t => (t, 0),
        }
    }

    fn rename(&self, from: &str, to: &str) -> Term {
        match self {
            Term::Card(e) => Term::Card(e.rename(from, to)),
            Term::Max(e) => Term::Max(e.rename(from, to)),
            Term::Min(e) => Term::Min(e.rename(from, to)),
            Term::Offset(t, k) => Term::Offset(Box::new(t.rename(from, to)), *k),
            t => t.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Le => "≤",
            CmpOp::Ge => "≥",
        }
    }

    pub fn parse(s: &str) -> Option<CmpOp> {
        match s {
            "=" | "==" => Some(CmpOp::Eq),
            "<=" | "≤" => Some(CmpOp::Le),
            ">=" | "≥" => Some(CmpOp::Ge),
            _ => None,
        }
    }
}

/// The attribute a syntactic constraint talks about.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SynField {
    Channel(Channel),
    Column(String),
}

/// What the attribute was derived from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SynSource {
    Op(OpTag),
    Column { var: String, col: String },
}

/// `π(var.field, source)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynAtom {
    pub var: String,
    pub field: SynField,
    pub source: SynSource,
}

impl SynAtom {
    pub fn column_op(col: impl Into<String>, op: OpTag) -> SynAtom {
        SynAtom {
            var: NU.into(),
            field: SynField::Column(col.into()),
            source: SynSource::Op(op),
        }
    }

    pub fn channel(ch: Channel, col: impl Into<String>) -> SynAtom {
        SynAtom {
            var: NU.into(),
            field: SynField::Channel(ch),
            source: SynSource::Column {
                var: TABLE_PARAM.into(),
                col: col.into(),
            },
        }
    }

    pub fn column(&self) -> Option<&str> {
        match &self.field {
            SynField::Column(c) => Some(c),
            SynField::Channel(_) => None,
        }
    }

    pub fn op(&self) -> Option<OpTag> {
        match self.source {
            SynSource::Op(op) => Some(op),
            SynSource::Column { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Qualifier {
    True,
    False,
    Syn(SynAtom),
    Cmp(Term, CmpOp, Term),
    /// Equality of two table expressions.
    TableEq(TableExpr, TableExpr),
    Not(Box<Qualifier>),
    And(Vec<Qualifier>),
    Or(Vec<Qualifier>),
}

/// A literal of a qualifier in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QLit {
    pub positive: bool,
    pub atom: Qualifier,
}

impl QLit {
    pub fn to_qualifier(&self) -> Qualifier {
        if self.positive {
            self.atom.clone()
        } else {
            Qualifier::not(self.atom.clone())
        }
    }
}

impl Qualifier {
    pub fn syn(a: SynAtom) -> Qualifier {
        Qualifier::Syn(a)
    }

    pub fn cmp(a: Term, op: CmpOp, b: Term) -> Qualifier {
        Qualifier::Cmp(a, op, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(q: Qualifier) -> Qualifier {
        match q {
            Qualifier::True => Qualifier::False,
            Qualifier::False => Qualifier::True,
            Qualifier::Not(inner) => *inner,
            q => Qualifier::Not(Box::new(q)),
        }
    }

    /// Flattening conjunction with unit and zero simplification.
    pub fn and(parts: impl IntoIterator<Item = Qualifier>) -> Qualifier {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Qualifier::True => {}
                Qualifier::False => return Qualifier::False,
                Qualifier::And(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                q => {
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
            }
        }
        match out.len() {
            0 => Qualifier::True,
            1 => out.pop().unwrap(),
            _ => Qualifier::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Qualifier>) -> Qualifier {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Qualifier::False => {}
                Qualifier::True => return Qualifier::True,
                Qualifier::Or(inner) => {
                    for q in inner {
                        if !out.contains(&q) {
                            out.push(q);
                        }
                    }
                }
                q => {
                    if !out.contains(&q) {
                        out.push(q);
                    }
                }
            }
        }
        match out.len() {
            0 => Qualifier::False,
            1 => out.pop().unwrap(),
            _ => Qualifier::Or(out),
        }
    }

    pub fn conj(&self, other: &Qualifier) -> Qualifier {
        Qualifier::and([self.clone(), other.clone()])
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Qualifier::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Qualifier::False)
    }

    fn is_atom(&self) -> bool {
        matches!(
            self,
            Qualifier::Syn(_) | Qualifier::Cmp(..) | Qualifier::TableEq(..)
        )
    }

    /// Negation normal form: negations only on atoms.
    pub fn nnf(&self) -> Qualifier {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Qualifier {
        match self {
            Qualifier::True => {
                if pos {
                    Qualifier::True
                } else {
                    Qualifier::False
                }
            }
            Qualifier::False => {
                if pos {
                    Qualifier::False
                } else {
                    Qualifier::True
                }
            }
            Qualifier::Not(q) => q.nnf_pol(!pos),
            Qualifier::And(qs) => {
                let parts = qs.iter().map(|q| q.nnf_pol(pos));
                if pos {
                    Qualifier::and(parts)
                } else {
                    Qualifier::or(parts)
                }
            }
            Qualifier::Or(qs) => {
                let parts = qs.iter().map(|q| q.nnf_pol(pos));
                if pos {
                    Qualifier::or(parts)
                } else {
                    Qualifier::and(parts)
                }
            }
            atom => {
                if pos {
                    atom.clone()
                } else {
                    Qualifier::Not(Box::new(atom.clone()))
                }
            }
        }
    }

    /// Disjunctive normal form as a list of literal conjunctions. `[]` is false, `[[]]` is true.
    pub fn dnf(&self) -> Vec<Vec<QLit>> {
        fn go(q: &Qualifier) -> Vec<Vec<QLit>> {
            match q {
                Qualifier::True => vec![vec![]],
                Qualifier::False => vec![],
                Qualifier::Not(inner) => vec![vec![QLit {
                    positive: false,
                    atom: (**inner).clone(),
                }]],
                Qualifier::Or(qs) => qs.iter().flat_map(go).collect(),
                Qualifier::And(qs) => {
                    let mut acc: Vec<Vec<QLit>> = vec![vec![]];
                    for q in qs {
                        let d = go(q);
                        let mut next = Vec::new();
                        for a in &acc {
                            for b in &d {
                                let mut c = a.clone();
                                for l in b {
                                    if !c.contains(l) {
                                        c.push(l.clone());
                                    }
                                }
                                next.push(c);
                            }
                        }
                        acc = next;
                    }
                    acc
                }
                atom => vec![vec![QLit {
                    positive: true,
                    atom: atom.clone(),
                }]],
            }
        }
        go(&self.nnf())
    }

    /// Literals of a conjunctive qualifier, or `None` if it has disjunctions.
    pub fn conjuncts(&self) -> Option<Vec<QLit>> {
        let d = self.dnf();
        match d.len() {
            0 => Some(vec![QLit {
                positive: true,
                atom: Qualifier::False,
            }]),
            1 => d.into_iter().next(),
            _ => None,
        }
    }

    pub fn from_dnf(d: Vec<Vec<QLit>>) -> Qualifier {
        Qualifier::or(
            d.into_iter()
                .map(|c| Qualifier::and(c.iter().map(QLit::to_qualifier))),
        )
    }

    /// All syntactic atoms, in order of first appearance.
    pub fn syn_atoms(&self) -> Vec<SynAtom> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |q| {
            if let Qualifier::Syn(a) = q {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        });
        out
    }

    /// All maximal terms compared by `Cmp` atoms (offsets stripped), in order of first appearance.
    pub fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        self.visit_atoms(&mut |q| {
            if let Qualifier::Cmp(a, _, b) = q {
                for t in [a, b] {
                    let (base, _) = t.split_offset();
                    if !out.contains(base) {
                        out.push(base.clone());
                    }
                }
            }
        });
        out
    }

    /// Semantic terms whose value depends on `col`.
    pub fn terms_on(&self, col: &str) -> Vec<Term> {
        self.terms()
            .into_iter()
            .filter(|t| t.depends_on(col))
            .collect()
    }

    pub fn semantic_terms(&self) -> Vec<Term> {
        self.terms().into_iter().filter(Term::is_semantic).collect()
    }

    /// Column names mentioned by column-field syntactic atoms or projections.
    pub fn mentioned_columns(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |q| match q {
            Qualifier::Syn(a) => {
                if let Some(c) = a.column() {
                    out.insert(c.to_string());
                }
                if let SynSource::Column { col, .. } = &a.source {
                    out.insert(col.clone());
                }
            }
            Qualifier::Cmp(a, _, b) => {
                for t in [a, b] {
                    if let Some(cs) = t.columns() {
                        out.extend(cs);
                    }
                }
            }
            _ => {}
        });
        out
    }

    pub fn visit_atoms(&self, f: &mut impl FnMut(&Qualifier)) {
        match self {
            Qualifier::Not(q) => q.visit_atoms(f),
            Qualifier::And(qs) | Qualifier::Or(qs) => qs.iter().for_each(|q| q.visit_atoms(f)),
            q if q.is_atom() => f(q),
            _ => {}
        }
    }

    /// Replaces atoms for which `keep` is false by `true` after moving to NNF.
    /// The result is implied by the original.
    pub fn weaken(&self, keep: &impl Fn(&Qualifier) -> bool) -> Qualifier {
        fn go(q: &Qualifier, keep: &impl Fn(&Qualifier) -> bool) -> Qualifier {
            match q {
                Qualifier::And(qs) => Qualifier::and(qs.iter().map(|q| go(q, keep))),
                Qualifier::Or(qs) => Qualifier::or(qs.iter().map(|q| go(q, keep))),
                Qualifier::Not(inner) => {
                    if keep(inner) {
                        q.clone()
                    } else {
                        Qualifier::True
                    }
                }
                Qualifier::True | Qualifier::False => q.clone(),
                atom => {
                    if keep(atom) {
                        atom.clone()
                    } else {
                        Qualifier::True
                    }
                }
            }
        }
        go(&self.nnf(), keep)
    }

    /// Renames a table variable throughout, including syntactic atoms.
    pub fn rename_var(&self, from: &str, to: &str) -> Qualifier {
        match self {
            Qualifier::Syn(a) => {
                let mut a = a.clone();
                if a.var == from {
                    a.var = to.to_string();
                }
                if let SynSource::Column { var, .. } = &mut a.source {
                    if var == from {
                        *var = to.to_string();
                    }
                }
                Qualifier::Syn(a)
            }
            Qualifier::Cmp(a, op, b) => Qualifier::Cmp(a.rename(from, to), *op, b.rename(from, to)),
            Qualifier::TableEq(a, b) => Qualifier::TableEq(a.rename(from, to), b.rename(from, to)),
            Qualifier::Not(q) => Qualifier::Not(Box::new(q.rename_var(from, to))),
            Qualifier::And(qs) => {
                Qualifier::And(qs.iter().map(|q| q.rename_var(from, to)).collect())
            }
            Qualifier::Or(qs) => Qualifier::Or(qs.iter().map(|q| q.rename_var(from, to)).collect()),
            q => q.clone(),
        }
    }

    /// Renames only the variable of column sources in syntactic atoms.
    pub fn rename_source_var(&self, to: &str) -> Qualifier {
        self.map_atoms(&|q| match q {
            Qualifier::Syn(a) => {
                let mut a = a.clone();
                if let SynSource::Column { var, .. } = &mut a.source {
                    *var = to.to_string();
                }
                Qualifier::Syn(a)
            }
            q => q.clone(),
        })
    }

    pub fn map_atoms(&self, f: &impl Fn(&Qualifier) -> Qualifier) -> Qualifier {
        match self {
            Qualifier::Not(q) => Qualifier::not(q.map_atoms(f)),
            Qualifier::And(qs) => Qualifier::and(qs.iter().map(|q| q.map_atoms(f))),
            Qualifier::Or(qs) => Qualifier::or(qs.iter().map(|q| q.map_atoms(f))),
            q if q.is_atom() => f(q),
            q => q.clone(),
        }
    }
}

impl fmt::Display for TableExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableExpr::Var(v) => f.write_str(v),
            TableExpr::Proj(inner, cols) => write!(f, "Proj({inner},{{{}}})", cols.join(",")),
            TableExpr::Filter(inner, p) => {
                write!(
                    f,
                    "Filter({inner}, {} {} {})",
                    operand(&p.lhs),
                    p.op.symbol(),
                    operand(&p.rhs)
                )
            }
        }
    }
}

fn operand(o: &crate::program::Operand) -> String {
    match o {
        crate::program::Operand::Column(c) => c.clone(),
        crate::program::Operand::Value(crate::value::Value::Text(s)) => format!("{s:?}"),
        crate::program::Operand::Value(v) => v.to_string(),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Card(e) => write!(f, "|{e}|"),
            Term::Max(e) => write!(f, "max({e})"),
            Term::Min(e) => write!(f, "min({e})"),
            Term::Const(n) => write!(f, "{n}"),
            Term::Var(v) => f.write_str(v),
            Term::Offset(t, k) if *k < 0 => write!(f, "{t} - {}", -k),
            Term::Offset(t, k) => write!(f, "{t} + {k}"),
        }
    }
}

impl fmt::Display for SynAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match &self.field {
            SynField::Channel(ch) => ch.name(),
            SynField::Column(c) => c,
        };
        match &self.source {
            SynSource::Op(op) => write!(f, "π({}.{field}, {op})", self.var),
            SynSource::Column { var, col } => write!(f, "π({}.{field}, {var}.{col})", self.var),
        }
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(q: &Qualifier) -> String {
            match q {
                Qualifier::And(_) | Qualifier::Or(_) => format!("({q})"),
                q => q.to_string(),
            }
        }
        match self {
            Qualifier::True => f.write_str("true"),
            Qualifier::False => f.write_str("⊥"),
            Qualifier::Syn(a) => write!(f, "{a}"),
            Qualifier::Cmp(a, op, b) => write!(f, "{a} {} {b}", op.symbol()),
            Qualifier::TableEq(a, b) => write!(f, "{a} = {b}"),
            Qualifier::Not(q) => write!(f, "¬{}", child(q)),
            Qualifier::And(qs) => {
                f.write_str(&qs.iter().map(child).collect::<Vec<_>>().join(" ∧ "))
            }
            Qualifier::Or(qs) => f.write_str(&qs.iter().map(child).collect::<Vec<_>>().join(" ∨ ")),
        }
    }
}
