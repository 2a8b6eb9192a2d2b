//! Concrete satisfaction of qualifiers by tables and plots.

use crate::eval::{apply_op, MutateRegistry};
use crate::program::{PlotProgram, TableOp};
use crate::qualifier::{CmpOp, Qualifier, SynAtom, SynField, SynSource, TableExpr, Term, NU};
use crate::table::{ProvTag, Table};
use crate::types::{BaseType, RefinementType};

fn eval_expr(e: &TableExpr, t: &Table) -> Option<(Table, Option<Vec<String>>)> {
    match e {
        TableExpr::Var(v) if v == NU => Some((t.clone(), None)),
        TableExpr::Var(_) => None,
        TableExpr::Proj(inner, cols) => {
            let (base, _) = eval_expr(inner, t)?;
            if cols.iter().any(|c| base.index_of(c).is_none()) {
                return None;
            }
            Some((base, Some(cols.clone())))
        }
        TableExpr::Filter(inner, pred) => {
            let (base, proj) = eval_expr(inner, t)?;
            let out = apply_op(
                &TableOp::Filter(pred.clone()),
                &base,
                &MutateRegistry::empty(),
            )
            .ok()?;
            Some((out, proj))
        }
    }
}

fn eval_term(term: &Term, t: &Table) -> Option<f64> {
    match term {
        Term::Const(n) => Some(*n as f64),
        Term::Var(_) => None,
        Term::Offset(inner, k) => Some(eval_term(inner, t)? + *k as f64),
        Term::Card(e) => {
            let (base, proj) = eval_expr(e, t)?;
            base.cardinality(&proj.unwrap_or_default())
                .ok()
                .map(|n| n as f64)
        }
        Term::Max(e) | Term::Min(e) => {
            let (base, proj) = eval_expr(e, t)?;
            let cols = proj?;
            let [c] = cols.as_slice() else { return None };
            let vals = base.values(c)?.filter_map(|v| v.as_f64());
            if matches!(term, Term::Max(_)) {
                vals.reduce(f64::max)
            } else {
                vals.reduce(f64::min)
            }
        }
    }
}

fn table_rows(e: &TableExpr, t: &Table) -> Option<Vec<String>> {
    let (base, proj) = eval_expr(e, t)?;
    let idx: Vec<usize> = match proj {
        Some(cols) => cols
            .iter()
            .map(|c| base.index_of(c))
            .collect::<Option<_>>()?,
        None => (0..base.columns().len()).collect(),
    };
    let mut rows: Vec<String> = base
        .rows()
        .iter()
        .map(|r| {
            idx.iter()
                .map(|&i| r[i].to_string())
                .collect::<Vec<_>>()
                .join("\u{1f}")
        })
        .collect();
    rows.sort();
    Some(rows)
}

fn table_atom(a: &SynAtom, t: &Table) -> Option<bool> {
    if a.var != NU {
        return None;
    }
    let SynField::Column(c) = &a.field else {
        return None;
    };
    let prov = t.provenance(c)?;
    Some(match &a.source {
        SynSource::Op(op) => prov.contains(&ProvTag::Op(*op)),
        SynSource::Column { col, .. } => prov.contains(&ProvTag::Source(col.clone())),
    })
}

fn eval3(q: &Qualifier, atom: &impl Fn(&Qualifier) -> Option<bool>) -> Option<bool> {
    match q {
        Qualifier::True => Some(true),
        Qualifier::False => Some(false),
        Qualifier::Not(inner) => eval3(inner, atom).map(|b| !b),
        Qualifier::And(qs) => {
            let mut out = Some(true);
            for q in qs {
                match eval3(q, atom) {
                    Some(false) => return Some(false),
                    None => out = None,
                    Some(true) => {}
                }
            }
            out
        }
        Qualifier::Or(qs) => {
            let mut out = Some(false);
            for q in qs {
                match eval3(q, atom) {
                    Some(true) => return Some(true),
                    None => out = None,
                    Some(false) => {}
                }
            }
            out
        }
        a => atom(a),
    }
}

/// Whether `t` satisfies `q` read as a refinement of `ν`. Undefined terms make the qualifier false.
pub fn table_models(t: &Table, q: &Qualifier) -> bool {
    let atom = |a: &Qualifier| -> Option<bool> {
        match a {
            Qualifier::Syn(s) => table_atom(s, t),
            Qualifier::Cmp(l, op, r) => {
                let (l, r) = (eval_term(l, t)?, eval_term(r, t)?);
                Some(match op {
                    CmpOp::Eq => l == r,
                    CmpOp::Le => l <= r,
                    CmpOp::Ge => l >= r,
                })
            }
            Qualifier::TableEq(a, b) => Some(table_rows(a, t)? == table_rows(b, t)?),
            _ => None,
        }
    };
    eval3(q, &atom).unwrap_or(false)
}

/// Concrete membership of a table in a table type: schema columns present with subtype column
/// types, and the qualifier holds.
pub fn models(t: &Table, ty: &RefinementType) -> bool {
    let Some(BaseType::Table(s)) = ty.base() else {
        return false;
    };
    s.iter()
        .all(|(c, ct)| t.column_type(c).is_some_and(|tt| tt.is_subtype(*ct)))
        && table_models(t, ty.qual())
}

/// Whether a plot over table `T` belongs to the plot type `ty`.
pub fn plot_inhabits(plot: &PlotProgram, ty: &RefinementType) -> bool {
    if ty.base() != Some(&BaseType::Plot(plot.kind)) {
        return false;
    }
    let atom = |a: &Qualifier| -> Option<bool> {
        let Qualifier::Syn(s) = a else { return None };
        match (&s.field, &s.source) {
            (SynField::Channel(ch), SynSource::Column { col, .. }) if s.var == NU => {
                Some(plot.channel(*ch) == Some(col.as_str()))
            }
            _ => None,
        }
    };
    eval3(ty.qual(), &atom).unwrap_or(false)
}
