//! Syntactic requirements for turning input column types into goal column types.

use std::collections::{BTreeSet, HashMap};

use crate::ctype::ColumnType;
use crate::qualifier::{QLit, Qualifier, SynAtom};
use crate::table::OpTag;
use crate::types::{RefinementType, Schema};

/// Type-changing operator: tag, accepted input, output type.
type TypeOp = (OpTag, fn(ColumnType) -> bool, ColumnType);

fn type_ops(bins: bool) -> Vec<TypeOp> {
    let mut ops: Vec<TypeOp> = vec![
        (OpTag::Count, |_| true, ColumnType::Discrete),
        (
            OpTag::Mean,
            ColumnType::is_quantitative,
            ColumnType::Continuous,
        ),
        (
            OpTag::Sum,
            ColumnType::is_quantitative,
            ColumnType::Continuous,
        ),
    ];
    if bins {
        ops.push((
            OpTag::Bin,
            ColumnType::is_quantitative,
            ColumnType::Discrete,
        ));
    }
    ops
}

/// Requirement generator with a memo table. The requirement for one column is expressed over a
/// placeholder and instantiated per column.
#[derive(Default)]
pub struct GenReq {
    memo: HashMap<(ColumnType, ColumnType, usize, bool), Qualifier>,
}

const HOLE: &str = "\u{0}";

fn positive_dnf(q: &Qualifier) -> Vec<BTreeSet<SynAtom>> {
    q.dnf()
        .into_iter()
        .map(|c| {
            c.into_iter()
                .filter_map(|QLit { atom, .. }| match atom {
                    Qualifier::Syn(a) => Some(a),
                    _ => None,
                })
                .collect()
        })
        .collect()
}

/// Drops every disjunct implied by the disjunction of the others.
fn absorb(disjuncts: Vec<Qualifier>) -> Qualifier {
    let mut kept: Vec<Qualifier> = Vec::new();
    for d in disjuncts {
        if d.is_false() || kept.contains(&d) {
            continue;
        }
        kept.push(d);
    }
    let dnfs: Vec<Vec<BTreeSet<SynAtom>>> = kept.iter().map(positive_dnf).collect();
    let mut alive = vec![true; kept.len()];
    for i in 0..kept.len() {
        let covered = dnfs[i].iter().all(|conj| {
            (0..kept.len())
                .any(|j| j != i && alive[j] && dnfs[j].iter().any(|other| other.is_subset(conj)))
        });
        if covered {
            alive[i] = false;
        }
    }
    Qualifier::or(
        kept.into_iter()
            .zip(alive)
            .filter(|(_, a)| *a)
            .map(|(q, _)| q),
    )
}

impl GenReq {
    pub fn new() -> GenReq {
        GenReq::default()
    }

    fn column(&mut self, src: ColumnType, dst: ColumnType, k: usize, bins: bool) -> Qualifier {
        if src.compatible(dst) {
            return Qualifier::True;
        }
        if k == 0 {
            return Qualifier::False;
        }
        if let Some(q) = self.memo.get(&(src, dst, k, bins)) {
            return q.clone();
        }
        let ops = type_ops(bins);
        let pi = |t: OpTag| Qualifier::syn(SynAtom::column_op(HOLE, t));
        let base: Vec<Qualifier> = ops
            .iter()
            .filter(|(_, accepts, out)| accepts(src) && out.compatible(dst))
            .map(|(t, _, _)| pi(*t))
            .collect();
        let q = if k == 1 {
            Qualifier::or(base)
        } else {
            let mut disjuncts: Vec<Qualifier> = base;
            for (t, accepts, out) in &ops {
                if accepts(src) {
                    let rest = self.column(*out, dst, k - 1, bins);
                    disjuncts.push(Qualifier::and([pi(*t), rest]));
                }
            }
            absorb(disjuncts)
        };
        self.memo.insert((src, dst, k, bins), q.clone());
        q
    }

    /// Requirement any program of at most `k` operators must meet to turn a table of schema
    /// `src` into one of schema `dst`. Columns absent from `src` are unconstrained.
    pub fn requirement(
        &mut self,
        src: &Schema,
        dst: &Schema,
        k: usize,
        bins: bool,
    ) -> RefinementType {
        let mut parts = Vec::new();
        for (c, dt) in dst {
            let Some(st) = src.get(c) else { continue };
            let q = self.column(*st, *dt, k, bins);
            parts.push(q.map_atoms(&|a| match a {
                Qualifier::Syn(s) if s.column() == Some(HOLE) => Qualifier::syn(
                    SynAtom::column_op(c.clone(), s.op().expect("operator atom")),
                ),
                other => other.clone(),
            }));
        }
        RefinementType::table(dst.clone(), Qualifier::and(parts))
    }
}
