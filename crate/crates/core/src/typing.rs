//! Typing rules for table operators and plots, forwards and backwards.

use std::collections::BTreeSet;

use crate::ctype::ColumnType;
use crate::eval::MutateRegistry;
use crate::forget::{forget, Forget};
use crate::program::{Agg, Channel, PlotKind, PlotProgram, TableOp, TableProgram};
use crate::qualifier::{CmpOp, QLit, Qualifier, SynAtom, SynField, Term};
use crate::table::{OpTag, Table};
use crate::types::{qualifier_implies, BaseType, RefinementType, Schema, TypeError};

fn no_rule(msg: impl Into<String>) -> TypeError {
    TypeError::NoRule(msg.into())
}

fn split(ty: &RefinementType) -> Result<(&Schema, &Qualifier), TypeError> {
    match ty {
        RefinementType::Scalar {
            base: BaseType::Table(s),
            qual,
        } => Ok((s, qual)),
        other => Err(no_rule(format!("expected a table type, found {other}"))),
    }
}

fn atom_on(a: &SynAtom, col: &str) -> bool {
    a.column() == Some(col)
}

fn as_set(cols: &[String]) -> BTreeSet<String> {
    cols.iter().cloned().collect()
}

/// Terms over columns outside `cols`, plus whole-table cardinalities.
fn outside(cols: &BTreeSet<String>) -> impl Fn(&Term) -> bool + '_ {
    move |t: &Term| t.is_semantic() && t.columns().is_none_or(|cs| !cs.is_subset(cols))
}

/// Terms that name `col` explicitly.
fn naming(col: &str) -> impl Fn(&Term) -> bool + '_ {
    move |t: &Term| t.is_semantic() && t.columns().is_some_and(|cs| cs.contains(col))
}

/// Top-level literals of a conjunction.
fn top_literals(q: &Qualifier) -> Vec<QLit> {
    let parts = match q {
        Qualifier::And(qs) => qs.clone(),
        q => vec![q.clone()],
    };
    parts
        .into_iter()
        .filter_map(|p| match p {
            Qualifier::Not(inner) if matches!(*inner, Qualifier::Syn(_)) => Some(QLit {
                positive: false,
                atom: *inner,
            }),
            Qualifier::Syn(_) => Some(QLit {
                positive: true,
                atom: p,
            }),
            _ => None,
        })
        .collect()
}

fn card_le(a: Term, b: Term) -> Qualifier {
    Qualifier::cmp(a, CmpOp::Le, b)
}

fn prov(col: &str, op: OpTag) -> Qualifier {
    Qualifier::syn(SynAtom::column_op(col, op))
}

/// Type of a concrete input table: exact per-column and whole-table cardinalities, and
/// no operator in any column's provenance.
pub fn input_type(t: &Table) -> RefinementType {
    let schema: Schema = t
        .columns()
        .iter()
        .map(|c| (c.name.clone(), c.ctype))
        .collect();
    let mut parts = Vec::new();
    for c in t.columns() {
        let n = t.cardinality(std::slice::from_ref(&c.name)).unwrap_or(0) as i64;
        parts.push(Qualifier::cmp(
            Term::card([c.name.clone()]),
            CmpOp::Eq,
            Term::Const(n),
        ));
    }
    parts.push(Qualifier::cmp(
        Term::card_nu(),
        CmpOp::Eq,
        Term::Const(t.cardinality(&[]).unwrap_or(0) as i64),
    ));
    for c in t.columns() {
        for op in OpTag::ALL {
            parts.push(Qualifier::not(prov(&c.name, op)));
        }
    }
    RefinementType::table(schema, Qualifier::and(parts))
}

/// Output type of one operator applied to a table of type `input`.
pub fn type_of_op(
    op: &TableOp,
    input: &RefinementType,
    registry: &MutateRegistry,
) -> Result<RefinementType, TypeError> {
    let (s, q) = split(input)?;
    let col = |c: &str| {
        s.get(c)
            .copied()
            .ok_or_else(|| no_rule(format!("unknown column `{c}`")))
    };
    match op {
        TableOp::Select(cols) => {
            if cols.is_empty() || as_set(cols).len() != cols.len() {
                return Err(no_rule("select needs distinct columns"));
            }
            let schema = cols
                .iter()
                .map(|c| Ok((c.clone(), col(c)?)))
                .collect::<Result<Schema, TypeError>>()?;
            let keep = as_set(cols);
            if keep.len() == s.len() {
                return Ok(RefinementType::table(schema, q.clone()));
            }
            let qual = forget(
                q,
                &Forget {
                    term: &outside(&keep),
                    atom: &|a: &SynAtom| a.column().is_some_and(|c| !keep.contains(c)),
                },
            );
            Ok(RefinementType::table(schema, qual))
        }
        TableOp::Filter(pred) => {
            for c in pred.columns() {
                col(c)?;
            }
            let qual = forget(
                q,
                &Forget {
                    term: &|t: &Term| t.is_semantic(),
                    atom: &|a: &SynAtom| a.op() == Some(OpTag::Filter),
                },
            );
            let added = s.keys().map(|c| prov(c, OpTag::Filter));
            Ok(RefinementType::table(
                s.clone(),
                Qualifier::and(std::iter::once(qual).chain(added)),
            ))
        }
        TableOp::Summarize { keys, agg, target } => {
            if keys.is_empty() || as_set(keys).len() != keys.len() || keys.contains(target) {
                return Err(no_rule(
                    "summarize needs distinct keys that exclude the target",
                ));
            }
            let tt = col(target)?;
            if *agg != Agg::Count && !tt.is_quantitative() {
                return Err(no_rule(format!(
                    "{} of non-quantitative column `{target}`",
                    agg.name()
                )));
            }
            let mut schema = keys
                .iter()
                .map(|k| Ok((k.clone(), col(k)?)))
                .collect::<Result<Schema, TypeError>>()?;
            schema.insert(target.clone(), agg_output(*agg));
            let keyset = as_set(keys);
            let mut live = keyset.clone();
            live.insert(target.clone());
            let tag = agg.tag();
            let qual = forget(
                q,
                &Forget {
                    term: &|t: &Term| outside(&keyset)(t),
                    atom: &|a: &SynAtom| match a.column() {
                        Some(c) => !live.contains(c) || (c == target && a.op() == Some(tag)),
                        None => false,
                    },
                },
            );
            let group_card = Term::card(keys.iter().cloned());
            Ok(RefinementType::table(
                schema,
                Qualifier::and([
                    qual,
                    prov(target, tag),
                    card_le(Term::card([target.clone()]), group_card.clone()),
                    Qualifier::cmp(Term::card_nu(), CmpOp::Eq, group_card),
                ]),
            ))
        }
        TableOp::Bin { bins, target } => {
            if *bins < 2 {
                return Err(no_rule("bin needs at least two bins"));
            }
            if !col(target)?.is_quantitative() {
                return Err(no_rule(format!(
                    "bin of non-quantitative column `{target}`"
                )));
            }
            let mut schema = s.clone();
            schema.insert(target.clone(), ColumnType::Discrete);
            let qual = forget(
                q,
                &Forget {
                    term: &|t: &Term| t.depends_on(target),
                    atom: &|a: &SynAtom| atom_on(a, target) && a.op() == Some(OpTag::Bin),
                },
            );
            Ok(RefinementType::table(
                schema,
                Qualifier::and([qual, prov(target, OpTag::Bin), bin_bound(target, *bins)]),
            ))
        }
        TableOp::Mutate { target, op, args } => {
            if s.contains_key(target) {
                return Err(no_rule(format!("column `{target}` already exists")));
            }
            if args.len() < 2 || as_set(args).len() != args.len() {
                return Err(no_rule("mutate needs at least two distinct arguments"));
            }
            if registry.get(op).is_none() {
                return Err(no_rule(format!("unknown mutate operator `{op}`")));
            }
            for a in args {
                if !col(a)?.is_quantitative() {
                    return Err(no_rule(format!("mutate of non-quantitative column `{a}`")));
                }
            }
            let mut schema = s.clone();
            schema.insert(target.clone(), ColumnType::Top);
            let lits = top_literals(q);
            let has = |a: &str, tag: OpTag, positive: bool| {
                lits.iter()
                    .any(|l| l.positive == positive && l.atom == prov(a, tag))
            };
            let mut parts = vec![q.clone(), prov(target, OpTag::Mutate)];
            for tag in OpTag::ALL.into_iter().filter(|t| *t != OpTag::Mutate) {
                if args.iter().any(|a| has(a, tag, true)) {
                    parts.push(prov(target, tag));
                } else if args.iter().all(|a| has(a, tag, false)) {
                    parts.push(Qualifier::not(prov(target, tag)));
                }
            }
            parts.push(card_le(
                Term::card([target.clone()]),
                Term::card(args.iter().cloned()),
            ));
            Ok(RefinementType::table(schema, Qualifier::and(parts)))
        }
    }
}

/// Distinct values after binning. Nulls stay null and form one extra value.
pub fn bin_bound(target: &str, bins: usize) -> Qualifier {
    card_le(
        Term::card([target.to_string()]),
        Term::Const(bins as i64 + 1),
    )
}

pub fn agg_output(agg: Agg) -> ColumnType {
    match agg {
        Agg::Count => ColumnType::Discrete,
        Agg::Mean | Agg::Sum => ColumnType::Continuous,
    }
}

/// Types of every node, innermost (the input) first.
pub fn node_types(
    p: &TableProgram,
    input: &RefinementType,
    registry: &MutateRegistry,
) -> Result<Vec<RefinementType>, TypeError> {
    let mut ops = p.ops();
    ops.reverse();
    let mut out = vec![input.clone()];
    for op in &ops {
        let next = type_of_op(op, out.last().expect("non-empty"), registry)?;
        out.push(next);
    }
    Ok(out)
}

pub fn type_of_table(
    p: &TableProgram,
    input: &RefinementType,
    registry: &MutateRegistry,
) -> Result<RefinementType, TypeError> {
    Ok(node_types(p, input, registry)?.pop().expect("non-empty"))
}

/// Channels whose distinct combinations must cover the distinct `y` values, or `None` when the
/// plot kind has no such premise.
pub fn card_premise(plot: &PlotProgram) -> Option<Qualifier> {
    if plot.kind == PlotKind::Scatter {
        return None;
    }
    let keys: Vec<String> = [Channel::X, Channel::Color, Channel::Subplot]
        .into_iter()
        .filter_map(|ch| plot.channel(ch).map(str::to_string))
        .collect();
    Some(Qualifier::cmp(
        Term::card(keys),
        CmpOp::Ge,
        Term::card([plot.y.clone()]),
    ))
}

/// `φ ⇒ premise`, also accepting any subset of the grouping channels since cardinality is
/// monotone in the projected columns.
fn premise_holds(plot: &PlotProgram, q: &Qualifier) -> bool {
    let keys: Vec<String> = [Channel::X, Channel::Color, Channel::Subplot]
        .into_iter()
        .filter_map(|ch| plot.channel(ch).map(str::to_string))
        .collect();
    let y = Term::card([plot.y.clone()]);
    let n = keys.len();
    let mut subsets: Vec<Vec<String>> = (1u32..(1 << n))
        .map(|m| {
            (0..n)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| keys[i].clone())
                .collect()
        })
        .collect();
    subsets.sort_by_key(|s: &Vec<String>| std::cmp::Reverse(s.len()));
    subsets
        .into_iter()
        .any(|ks| qualifier_implies(q, &Qualifier::cmp(Term::card(ks), CmpOp::Ge, y.clone())))
}

/// Checks the per-channel column-type premises of a plot kind.
pub fn check_channel_types(plot: &PlotProgram, schema: &Schema) -> Result<(), TypeError> {
    use ColumnType::*;
    let ty = |ch: Channel| -> Result<Option<ColumnType>, TypeError> {
        match plot.channel(ch) {
            None => Ok(None),
            Some(c) => schema
                .get(c)
                .copied()
                .map(Some)
                .ok_or_else(|| no_rule(format!("unknown column `{c}`"))),
        }
    };
    let fail = |ch: Channel, t: ColumnType| {
        no_rule(format!(
            "{} cannot encode {} column on {}",
            plot.kind.type_name(),
            t,
            ch.name()
        ))
    };
    let not = |ch: Channel, bad: &[ColumnType]| -> Result<(), TypeError> {
        match ty(ch)? {
            Some(t) if bad.contains(&t) => Err(fail(ch, t)),
            _ => Ok(()),
        }
    };
    let quantitative_y = || -> Result<(), TypeError> {
        match ty(Channel::Y)? {
            Some(t) if !t.is_quantitative() => Err(fail(Channel::Y, t)),
            _ => Ok(()),
        }
    };
    match plot.kind {
        PlotKind::Bar => {
            quantitative_y()?;
            not(Channel::X, &[Continuous])?;
            not(Channel::Color, &[Continuous])?;
            not(Channel::Subplot, &[Continuous])
        }
        PlotKind::Scatter => {
            ty(Channel::Color)?;
            not(Channel::X, &[Nominal])?;
            not(Channel::Y, &[Temporal, Nominal])?;
            not(Channel::Subplot, &[Continuous])
        }
        PlotKind::Line | PlotKind::Area => {
            quantitative_y()?;
            not(Channel::X, &[Nominal])?;
            not(Channel::Color, &[Continuous])?;
            not(Channel::Subplot, &[Continuous])
        }
    }
}

/// Closed-world plot qualifier: each bound channel names its column, every other channel and
/// column pair among `columns` is excluded.
pub fn plot_qualifier<'a>(
    plot: &PlotProgram,
    columns: impl IntoIterator<Item = &'a String>,
) -> Qualifier {
    let columns: Vec<&String> = columns.into_iter().collect();
    let mut parts = Vec::new();
    for ch in Channel::ALL {
        let bound = plot.channel(ch);
        if let Some(c) = bound {
            parts.push(Qualifier::syn(SynAtom::channel(ch, c)));
        }
        for c in &columns {
            if bound != Some(c.as_str()) {
                parts.push(Qualifier::not(Qualifier::syn(SynAtom::channel(
                    ch,
                    c.as_str(),
                ))));
            }
        }
    }
    Qualifier::and(parts)
}

/// Type of a plot over a table of type `table`.
pub fn type_of_plot(
    plot: &PlotProgram,
    table: &RefinementType,
) -> Result<RefinementType, TypeError> {
    let (s, q) = split(table)?;
    check_channel_types(plot, s)?;
    if card_premise(plot).is_some() && !premise_holds(plot, q) {
        return Err(no_rule(format!(
            "cannot show that the grouping channels of {} determine `{}`",
            plot.kind.type_name(),
            plot.y
        )));
    }
    Ok(RefinementType::scalar(
        BaseType::Plot(plot.kind),
        plot_qualifier(plot, s.keys()),
    ))
}

/// What an operator guarantees about its output whatever its input, over the goal's columns.
pub fn op_conclusion(op: &TableOp, goal: &Schema) -> RefinementType {
    match op {
        TableOp::Select(cols) => RefinementType::table(
            cols.iter().map(|c| (c.clone(), ColumnType::Top)).collect(),
            Qualifier::True,
        ),
        TableOp::Filter(_) => RefinementType::table(
            Schema::new(),
            Qualifier::and(goal.keys().map(|c| prov(c, OpTag::Filter))),
        ),
        TableOp::Summarize { keys, agg, target } => {
            let mut s: Schema = keys.iter().map(|k| (k.clone(), ColumnType::Top)).collect();
            s.insert(target.clone(), agg_output(*agg));
            RefinementType::table(s, prov(target, agg.tag()))
        }
        TableOp::Bin { bins, target } => RefinementType::table(
            Schema::from([(target.clone(), ColumnType::Discrete)]),
            Qualifier::and([prov(target, OpTag::Bin), bin_bound(target, *bins)]),
        ),
        TableOp::Mutate { target, .. } => RefinementType::table(
            Schema::from([(target.clone(), ColumnType::Top)]),
            prov(target, OpTag::Mutate),
        ),
    }
}

/// Necessary condition on the input of `op` for its output to meet `goal`, or `None` when no
/// input can work.
pub fn backward_goal(op: &TableOp, goal: &RefinementType) -> Option<RefinementType> {
    let (s, q) = split(goal).ok()?;
    match op {
        TableOp::Select(cols) => {
            let keep = as_set(cols);
            if !s.keys().all(|c| keep.contains(c)) {
                return None;
            }
            let qual = forget(
                q,
                &Forget {
                    term: &outside(&keep),
                    atom: &|a: &SynAtom| a.column().is_some_and(|c| !keep.contains(c)),
                },
            );
            Some(RefinementType::table(s.clone(), qual))
        }
        TableOp::Filter(pred) => {
            let mut schema = s.clone();
            for c in pred.columns() {
                schema.entry(c.to_string()).or_insert(ColumnType::Top);
            }
            let qual = forget(
                q,
                &Forget {
                    term: &|t: &Term| t.is_semantic(),
                    atom: &|a: &SynAtom| a.op() == Some(OpTag::Filter),
                },
            );
            Some(RefinementType::table(schema, qual))
        }
        TableOp::Summarize { keys, agg, target } => {
            let mut live = as_set(keys);
            live.insert(target.clone());
            if keys.contains(target) || !s.keys().all(|c| live.contains(c)) {
                return None;
            }
            if s.get(target)
                .is_some_and(|t| !t.compatible(agg_output(*agg)))
            {
                return None;
            }
            let mut schema: Schema = keys
                .iter()
                .map(|k| (k.clone(), s.get(k).copied().unwrap_or(ColumnType::Top)))
                .collect();
            let input_t = if *agg == Agg::Count {
                ColumnType::Top
            } else {
                ColumnType::Quantitative
            };
            schema.insert(target.clone(), input_t);
            let keyset = as_set(keys);
            let tag = agg.tag();
            let qual = forget(
                q,
                &Forget {
                    term: &outside(&keyset),
                    atom: &|a: &SynAtom| match a.column() {
                        Some(c) => !live.contains(c) || (c == target && a.op() == Some(tag)),
                        None => false,
                    },
                },
            );
            Some(RefinementType::table(schema, qual))
        }
        TableOp::Bin { target, .. } => {
            if s.get(target)
                .is_some_and(|t| !t.compatible(ColumnType::Discrete))
            {
                return None;
            }
            let mut schema = s.clone();
            schema.insert(target.clone(), ColumnType::Quantitative);
            let qual = forget(
                q,
                &Forget {
                    term: &|t: &Term| t.depends_on(target),
                    atom: &|a: &SynAtom| atom_on(a, target) && a.op() == Some(OpTag::Bin),
                },
            );
            Some(RefinementType::table(schema, qual))
        }
        TableOp::Mutate { target, args, .. } => {
            if args.contains(target) {
                return None;
            }
            let mut schema = s.clone();
            schema.shift_remove(target);
            for a in args {
                let t = schema
                    .get(a)
                    .copied()
                    .unwrap_or(ColumnType::Top)
                    .meet(ColumnType::Quantitative)?;
                schema.insert(a.clone(), t);
            }
            let qual = forget(
                q,
                &Forget {
                    term: &naming(target),
                    atom: &|a: &SynAtom| atom_on(a, target),
                },
            );
            Some(RefinementType::table(schema, qual))
        }
    }
}

/// Channel of a plot-level atom, if any.
pub fn atom_channel(a: &SynAtom) -> Option<Channel> {
    match &a.field {
        SynField::Channel(ch) => Some(*ch),
        SynField::Column(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{FilterOp, FilterPred, Operand};
    use crate::table::Column;
    use crate::value::Value;

    fn cars() -> Table {
        let rows = vec![
            ("US", 130, 18),
            ("US", 165, 15),
            ("Japan", 95, 24),
            ("Europe", 97, 26),
            ("Japan", 88, 27),
            ("US", 150, 16),
        ];
        Table::new(
            vec![
                Column {
                    name: "Origin".into(),
                    ctype: ColumnType::Nominal,
                },
                Column {
                    name: "Horsepower".into(),
                    ctype: ColumnType::Continuous,
                },
                Column {
                    name: "MPG".into(),
                    ctype: ColumnType::Discrete,
                },
            ],
            rows.into_iter()
                .map(|(o, h, m)| vec![Value::Text(o.into()), Value::Integer(h), Value::Integer(m)])
                .collect(),
        )
        .unwrap()
    }

    fn reg() -> MutateRegistry {
        MutateRegistry::default()
    }

    #[test]
    fn input_type_records_cardinalities() {
        let t = input_type(&cars());
        let s = t.to_string();
        assert!(s.contains("|Proj(ν,{Origin})| = 3"), "{s}");
        assert!(s.contains("|ν| = 6"), "{s}");
        assert!(s.contains("¬π(ν.Origin, count)"), "{s}");
    }

    #[test]
    fn summarize_output() {
        let op = TableOp::Summarize {
            keys: vec!["Origin".into()],
            agg: Agg::Mean,
            target: "Horsepower".into(),
        };
        let out = type_of_op(&op, &input_type(&cars()), &reg()).unwrap();
        let s = out.schema().unwrap();
        assert_eq!(s.get("Horsepower"), Some(&ColumnType::Continuous));
        assert!(!s.contains_key("MPG"));
        let txt = out.qual().to_string();
        assert!(txt.contains("π(ν.Horsepower, mean)"), "{txt}");
        assert!(!txt.contains("¬π(ν.Horsepower, mean)"), "{txt}");
        assert!(txt.contains("|Proj(ν,{Origin})| = 3"), "{txt}");
    }

    #[test]
    fn bar_needs_grouping_cardinality() {
        let input = input_type(&cars());
        let bar = PlotProgram {
            kind: PlotKind::Bar,
            x: "Origin".into(),
            y: "Horsepower".into(),
            color: None,
            subplot: None,
        };
        assert!(type_of_plot(&bar, &input).is_err());
        let op = TableOp::Summarize {
            keys: vec!["Origin".into()],
            agg: Agg::Mean,
            target: "Horsepower".into(),
        };
        let summarized = type_of_op(&op, &input, &reg()).unwrap();
        let pt = type_of_plot(&bar, &summarized).unwrap();
        assert!(pt.qual().to_string().contains("π(ν.x, T.Origin)"));
    }

    #[test]
    fn scatter_rejects_nominal_x() {
        let input = input_type(&cars());
        let sc = PlotProgram {
            kind: PlotKind::Scatter,
            x: "Origin".into(),
            y: "MPG".into(),
            color: None,
            subplot: None,
        };
        assert!(type_of_plot(&sc, &input).is_err());
        let ok = PlotProgram {
            kind: PlotKind::Scatter,
            x: "Horsepower".into(),
            y: "MPG".into(),
            color: Some("Origin".into()),
            subplot: None,
        };
        assert!(type_of_plot(&ok, &input).is_ok());
    }

    #[test]
    fn filter_marks_every_column() {
        let pred = FilterPred {
            lhs: Operand::Column("Origin".into()),
            op: FilterOp::Eq,
            rhs: Operand::Value(Value::Text("US".into())),
        };
        let out = type_of_op(&TableOp::Filter(pred), &input_type(&cars()), &reg()).unwrap();
        let txt = out.qual().to_string();
        assert!(txt.contains("π(ν.MPG, filter)"), "{txt}");
        assert!(!txt.contains("|Proj"), "{txt}");
    }

    #[test]
    fn backward_summarize_needs_quantitative_target() {
        let goal = RefinementType::table(
            Schema::from([
                ("Origin".to_string(), ColumnType::Nominal),
                ("Horsepower".to_string(), ColumnType::Continuous),
            ]),
            prov("Horsepower", OpTag::Mean),
        );
        let op = TableOp::Summarize {
            keys: vec!["Origin".into()],
            agg: Agg::Mean,
            target: "Horsepower".into(),
        };
        let child = backward_goal(&op, &goal).unwrap();
        assert_eq!(
            child.schema().unwrap().get("Horsepower"),
            Some(&ColumnType::Quantitative)
        );
        assert!(child.qual().is_true());
        let count = TableOp::Summarize {
            keys: vec!["Origin".into()],
            agg: Agg::Count,
            target: "Horsepower".into(),
        };
        assert!(backward_goal(&count, &goal).is_none());
    }

    #[test]
    fn mutate_target_provenance() {
        let op = TableOp::Mutate {
            target: "max_MPG_Horsepower".into(),
            op: "max".into(),
            args: vec!["MPG".into(), "Horsepower".into()],
        };
        let out = type_of_op(&op, &input_type(&cars()), &reg()).unwrap();
        let txt = out.qual().to_string();
        assert!(txt.contains("π(ν.max_MPG_Horsepower, mutate)"));
        assert!(txt.contains("¬π(ν.max_MPG_Horsepower, mean)"));
    }
}
