//! Interpreter for table-transformation programs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ctype::ColumnType;
use crate::program::{Agg, FilterPred, Operand, TableOp, TableProgram};
use crate::table::{Column, OpTag, ProvTag, Table};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unknown column `{0}`")]
    MissingColumn(String),
    #[error("{op} needs a quantitative column, `{column}` is {ctype}")]
    NotQuantitative {
        op: &'static str,
        column: String,
        ctype: ColumnType,
    },
    #[error("cannot compare {0} with {1}")]
    Incomparable(String, String),
    #[error("column `{0}` already exists")]
    ColumnExists(String),
    #[error("unknown mutate operator `{0}`")]
    UnknownOp(String),
    #[error("invalid arguments: {0}")]
    Invalid(String),
}

/// Named binary operators available to `mutate`.
#[derive(Clone)]
pub struct MutateRegistry {
    ops: IndexMap<String, fn(f64, f64) -> f64>,
}

impl fmt::Debug for MutateRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ops.keys()).finish()
    }
}

impl PartialEq for MutateRegistry {
    fn eq(&self, other: &Self) -> bool {
        self.names().eq(other.names())
    }
}

impl Default for MutateRegistry {
    fn default() -> Self {
        let mut r = MutateRegistry::empty();
        r.register("max", f64::max);
        r.register("min", f64::min);
        r.register("add", |a, b| a + b);
        r.register("sub", |a, b| a - b);
        r
    }
}

impl MutateRegistry {
    pub fn empty() -> Self {
        MutateRegistry {
            ops: IndexMap::new(),
        }
    }

    pub fn register(&mut self, name: &str, f: fn(f64, f64) -> f64) {
        self.ops.insert(name.to_string(), f);
    }

    pub fn get(&self, name: &str) -> Option<fn(f64, f64) -> f64> {
        self.ops.get(name).copied()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(|s| s.as_str())
    }

    /// Keeps only the named operators.
    pub fn restricted(&self, names: &[&str]) -> MutateRegistry {
        MutateRegistry {
            ops: self
                .ops
                .iter()
                .filter(|(k, _)| names.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Evaluates a program against an input table using the default mutate registry.
pub fn eval_transform(p: &TableProgram, input: &Table) -> Result<Table, EvalError> {
    eval_transform_with(p, input, &MutateRegistry::default())
}

pub fn eval_transform_with(
    p: &TableProgram,
    input: &Table,
    registry: &MutateRegistry,
) -> Result<Table, EvalError> {
    match p.split() {
        None => Ok(input.clone()),
        Some((op, inner)) => {
            let t = eval_transform_with(inner, input, registry)?;
            apply_op(&op, &t, registry)
        }
    }
}

fn index(t: &Table, c: &str) -> Result<usize, EvalError> {
    t.index_of(c)
        .ok_or_else(|| EvalError::MissingColumn(c.to_string()))
}

fn require_quantitative(t: &Table, op: &'static str, c: &str) -> Result<usize, EvalError> {
    let i = index(t, c)?;
    let ctype = t.columns()[i].ctype;
    if !ctype.is_quantitative() {
        return Err(EvalError::NotQuantitative {
            op,
            column: c.to_string(),
            ctype,
        });
    }
    Ok(i)
}

/// Applies one operator to a concrete table.
pub fn apply_op(op: &TableOp, t: &Table, registry: &MutateRegistry) -> Result<Table, EvalError> {
    match op {
        TableOp::Select(cols) => select(t, cols),
        TableOp::Filter(pred) => filter(t, pred),
        TableOp::Summarize { keys, agg, target } => summarize(t, keys, *agg, target),
        TableOp::Bin { bins, target } => bin(t, *bins, target),
        TableOp::Mutate { target, op, args } => mutate(t, target, op, args, registry),
    }
}

fn select(t: &Table, cols: &[String]) -> Result<Table, EvalError> {
    if cols.is_empty() {
        return Err(EvalError::Invalid(
            "select needs at least one column".into(),
        ));
    }
    let idx = cols
        .iter()
        .map(|c| index(t, c))
        .collect::<Result<Vec<_>, _>>()?;
    if idx.iter().collect::<BTreeSet<_>>().len() != idx.len() {
        return Err(EvalError::Invalid("duplicate column in select".into()));
    }
    let columns = idx.iter().map(|&i| t.columns()[i].clone()).collect();
    let rows = t
        .rows()
        .iter()
        .map(|r| idx.iter().map(|&i| r[i].clone()).collect())
        .collect();
    let prov = cols
        .iter()
        .map(|c| (c.clone(), t.provenance(c).cloned().unwrap_or_default()))
        .collect();
    Ok(Table::from_parts(columns, rows, prov))
}

fn operand<'a>(t: &Table, o: &'a Operand) -> Result<Result<usize, &'a Value>, EvalError> {
    Ok(match o {
        Operand::Column(c) => Ok(index(t, c)?),
        Operand::Value(v) => Err(v),
    })
}

fn filter(t: &Table, pred: &FilterPred) -> Result<Table, EvalError> {
    let lhs = operand(t, &pred.lhs)?;
    let rhs = operand(t, &pred.rhs)?;
    let mut rows = Vec::new();
    for r in t.rows() {
        let a = match lhs {
            Ok(i) => &r[i],
            Err(v) => v,
        };
        let b = match rhs {
            Ok(i) => &r[i],
            Err(v) => v,
        };
        if a.is_null() || b.is_null() {
            continue;
        }
        match a.compare(b) {
            Some(ord) => {
                if pred.op.holds(ord) {
                    rows.push(r.clone());
                }
            }
            None => return Err(EvalError::Incomparable(a.to_string(), b.to_string())),
        }
    }
    let mut prov = t.provenance_map().clone();
    for tags in prov.values_mut() {
        tags.insert(ProvTag::Op(OpTag::Filter));
    }
    Ok(Table::from_parts(t.columns().to_vec(), rows, prov))
}

fn summarize(t: &Table, keys: &[String], agg: Agg, target: &str) -> Result<Table, EvalError> {
    if keys.is_empty() {
        return Err(EvalError::Invalid(
            "summarize needs at least one key".into(),
        ));
    }
    if keys.iter().any(|k| k == target) {
        return Err(EvalError::Invalid(format!(
            "`{target}` is both key and target"
        )));
    }
    let kidx = keys
        .iter()
        .map(|k| index(t, k))
        .collect::<Result<Vec<_>, _>>()?;
    if kidx.iter().collect::<BTreeSet<_>>().len() != kidx.len() {
        return Err(EvalError::Invalid("duplicate summarize key".into()));
    }
    let tidx = match agg {
        Agg::Count => index(t, target)?,
        _ => require_quantitative(t, agg.name(), target)?,
    };
    let mut groups: IndexMap<Vec<Value>, Vec<&Value>> = IndexMap::new();
    for r in t.rows() {
        let key: Vec<Value> = kidx.iter().map(|&i| r[i].clone()).collect();
        groups.entry(key).or_default().push(&r[tidx]);
    }
    let rows = groups
        .into_iter()
        .map(|(mut key, vals)| {
            key.push(aggregate(agg, &vals));
            key
        })
        .collect();
    let mut columns: Vec<Column> = kidx.iter().map(|&i| t.columns()[i].clone()).collect();
    let out_type = if agg == Agg::Count {
        ColumnType::Discrete
    } else {
        ColumnType::Continuous
    };
    columns.push(Column {
        name: target.to_string(),
        ctype: out_type,
    });
    let mut prov: BTreeMap<String, BTreeSet<ProvTag>> = keys
        .iter()
        .map(|k| (k.clone(), t.provenance(k).cloned().unwrap_or_default()))
        .collect();
    let mut tp = t.provenance(target).cloned().unwrap_or_default();
    tp.insert(ProvTag::Op(agg.tag()));
    prov.insert(target.to_string(), tp);
    Ok(Table::from_parts(columns, rows, prov))
}

fn aggregate(agg: Agg, vals: &[&Value]) -> Value {
    if agg == Agg::Count {
        return Value::Integer(vals.len() as i64);
    }
    let nums: Vec<f64> = vals.iter().filter_map(|v| v.as_f64()).collect();
    if nums.is_empty() {
        return Value::Null;
    }
    let sum: f64 = nums.iter().sum();
    match agg {
        Agg::Sum => Value::Number(sum),
        _ => Value::Number(sum / nums.len() as f64),
    }
}

fn bin(t: &Table, bins: usize, target: &str) -> Result<Table, EvalError> {
    if bins < 2 {
        return Err(EvalError::Invalid("bin needs at least two bins".into()));
    }
    let i = require_quantitative(t, "bin", target)?;
    let nums: Vec<f64> = t.rows().iter().filter_map(|r| r[i].as_f64()).collect();
    let lo = nums.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let rows = t
        .rows()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            if let Some(x) = r[i].as_f64() {
                let k = if width > 0.0 {
                    (((x - lo) / width).floor() as usize).min(bins - 1)
                } else {
                    0
                };
                let a = lo + width * k as f64;
                let b = if k == bins - 1 {
                    hi
                } else {
                    lo + width * (k + 1) as f64
                };
                r[i] = Value::Interval { lo: a, hi: b };
            }
            r
        })
        .collect();
    let mut columns = t.columns().to_vec();
    columns[i].ctype = ColumnType::Discrete;
    let mut prov = t.provenance_map().clone();
    prov.entry(target.to_string())
        .or_default()
        .insert(ProvTag::Op(OpTag::Bin));
    Ok(Table::from_parts(columns, rows, prov))
}

fn mutate(
    t: &Table,
    target: &str,
    op: &str,
    args: &[String],
    registry: &MutateRegistry,
) -> Result<Table, EvalError> {
    if t.index_of(target).is_some() {
        return Err(EvalError::ColumnExists(target.to_string()));
    }
    if args.len() < 2 {
        return Err(EvalError::Invalid(
            "mutate needs at least two arguments".into(),
        ));
    }
    if args.iter().any(|a| a == target) {
        return Err(EvalError::Invalid(format!(
            "`{target}` is both argument and target"
        )));
    }
    let f = registry
        .get(op)
        .ok_or_else(|| EvalError::UnknownOp(op.to_string()))?;
    let idx = args
        .iter()
        .map(|a| require_quantitative(t, "mutate", a))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = t
        .rows()
        .iter()
        .map(|r| {
            let mut out = r.clone();
            let vals: Option<Vec<f64>> = idx.iter().map(|&i| r[i].as_f64()).collect();
            let v = match vals {
                Some(vs) => {
                    let x = vs[1..].iter().fold(vs[0], |acc, &b| f(acc, b));
                    let all_int = idx.iter().all(|&i| matches!(r[i], Value::Integer(_)));
                    if all_int && x.fract() == 0.0 && x.abs() < 9.0e15 {
                        Value::Integer(x as i64)
                    } else {
                        Value::Number(x)
                    }
                }
                None => Value::Null,
            };
            out.push(v);
            out
        })
        .collect();
    let mut columns = t.columns().to_vec();
    columns.push(Column {
        name: target.to_string(),
        ctype: ColumnType::Top,
    });
    let mut prov = t.provenance_map().clone();
    let mut tp: BTreeSet<ProvTag> = args
        .iter()
        .flat_map(|a| t.provenance(a).cloned().unwrap_or_default())
        .collect();
    tp.insert(ProvTag::Op(OpTag::Mutate));
    prov.insert(target.to_string(), tp);
    Ok(Table::from_parts(columns, rows, prov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::FilterOp;

    fn text(s: &str) -> Value {
        Value::Text(s.into())
    }

    fn table(cols: &[(&str, ColumnType)], rows: Vec<Vec<Value>>) -> Table {
        Table::new(
            cols.iter()
                .map(|(n, t)| Column {
                    name: n.to_string(),
                    ctype: *t,
                })
                .collect(),
            rows,
        )
        .unwrap()
    }

    fn xy() -> Table {
        table(
            &[("c1", ColumnType::Nominal), ("c2", ColumnType::Nominal)],
            vec![
                vec![text("x1"), text("y1")],
                vec![text("x2"), text("y2")],
                vec![text("x1"), text("y2")],
            ],
        )
    }

    #[test]
    fn summarize_count_groups() {
        let p = TableProgram::from_ops(&[TableOp::Summarize {
            keys: vec!["c1".into()],
            agg: Agg::Count,
            target: "c2".into(),
        }]);
        let out = eval_transform(&p, &xy()).unwrap();
        assert_eq!(
            out.rows(),
            &[
                vec![text("x1"), Value::Integer(2)],
                vec![text("x2"), Value::Integer(1)]
            ]
        );
        assert_eq!(out.column_type("c2"), Some(ColumnType::Discrete));
        assert!(out
            .provenance("c2")
            .unwrap()
            .contains(&ProvTag::Op(OpTag::Count)));
    }

    #[test]
    fn filter_equality() {
        let t = table(
            &[("c1", ColumnType::Nominal), ("c2", ColumnType::Nominal)],
            vec![
                vec![text("x1"), text("y1")],
                vec![text("x2"), text("y2")],
                vec![text("x3"), text("y1")],
            ],
        );
        let pred = FilterPred {
            lhs: Operand::Column("c2".into()),
            op: FilterOp::Eq,
            rhs: Operand::Value(text("y1")),
        };
        let out = eval_transform(&TableProgram::from_ops(&[TableOp::Filter(pred)]), &t).unwrap();
        assert_eq!(
            out.rows(),
            &[vec![text("x1"), text("y1")], vec![text("x3"), text("y1")]]
        );
        assert!(out
            .provenance("c1")
            .unwrap()
            .contains(&ProvTag::Op(OpTag::Filter)));
    }

    #[test]
    fn mutate_max() {
        let t = table(
            &[("c1", ColumnType::Discrete), ("c2", ColumnType::Discrete)],
            vec![
                vec![Value::Integer(1), Value::Integer(5)],
                vec![Value::Integer(7), Value::Integer(2)],
            ],
        );
        let op = TableOp::Mutate {
            target: "c3".into(),
            op: "max".into(),
            args: vec!["c1".into(), "c2".into()],
        };
        let out = eval_transform(&TableProgram::from_ops(&[op]), &t).unwrap();
        assert_eq!(
            out.values("c3").unwrap().cloned().collect::<Vec<_>>(),
            vec![Value::Integer(5), Value::Integer(7)]
        );
        assert_eq!(out.column_type("c3"), Some(ColumnType::Top));
    }

    #[test]
    fn select_is_idempotent() {
        let once = TableProgram::from_ops(&[TableOp::Select(vec!["c1".into()])]);
        let twice = TableProgram::from_ops(&[
            TableOp::Select(vec!["c1".into()]),
            TableOp::Select(vec!["c1".into()]),
        ]);
        assert_eq!(
            eval_transform(&once, &xy()).unwrap(),
            eval_transform(&twice, &xy()).unwrap()
        );
    }

    #[test]
    fn bin_equal_width() {
        let t = table(
            &[("v", ColumnType::Continuous)],
            (0..5).map(|i| vec![Value::Number(i as f64)]).collect(),
        );
        let out = eval_transform(
            &TableProgram::from_ops(&[TableOp::Bin {
                bins: 2,
                target: "v".into(),
            }]),
            &t,
        )
        .unwrap();
        let labels: Vec<String> = out.values("v").unwrap().map(|v| v.to_string()).collect();
        assert_eq!(labels, ["0-2", "0-2", "2-4", "2-4", "2-4"]);
        assert_eq!(out.column_type("v"), Some(ColumnType::Discrete));
    }

    #[test]
    fn mean_of_text_is_rejected() {
        let p = TableProgram::from_ops(&[TableOp::Summarize {
            keys: vec!["c1".into()],
            agg: Agg::Mean,
            target: "c2".into(),
        }]);
        assert!(matches!(
            eval_transform(&p, &xy()),
            Err(EvalError::NotQuantitative { .. })
        ));
    }
}
