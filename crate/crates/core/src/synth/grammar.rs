//! The finite universe of table operators the search draws from.

use indexmap::IndexSet;

use crate::ctype::ColumnType;
use crate::program::{Agg, FilterOp, FilterPred, Operand, TableOp};
use crate::synth::config::SynthConfig;
use crate::table::Table;
use crate::types::Schema;
use crate::value::Value;

#[derive(Clone, Debug)]
pub struct Grammar {
    /// Column names operators may refer to, in canonical order.
    pub columns: Vec<String>,
    select_max: usize,
    max_keys: usize,
    bins: Vec<TableOp>,
    mutates: Vec<TableOp>,
    filters: Vec<TableOp>,
}

/// Name of the column a mutate writes.
pub fn mutate_target(op: &str, args: &[String]) -> String {
    format!("{op}_{}", args.join("_"))
}

fn is_ordered(t: ColumnType) -> bool {
    t.is_quantitative() || matches!(t, ColumnType::Temporal | ColumnType::Ordinal)
}

/// Most frequent non-null values first, ties broken by first appearance.
fn frequent_values(t: &Table, col: &str, cap: usize) -> Vec<Value> {
    let mut counts: indexmap::IndexMap<&Value, usize> = indexmap::IndexMap::new();
    for v in t.values(col).into_iter().flatten().filter(|v| !v.is_null()) {
        *counts.entry(v).or_insert(0) += 1;
    }
    let mut vals: Vec<(usize, usize, &Value)> = counts
        .iter()
        .enumerate()
        .map(|(i, (v, n))| (*n, i, *v))
        .collect();
    vals.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    vals.into_iter()
        .take(cap)
        .map(|(_, _, v)| v.clone())
        .collect()
}

fn subsets(items: &[String], max: usize, f: &mut impl FnMut(&[String])) {
    fn go(
        items: &[String],
        start: usize,
        max: usize,
        cur: &mut Vec<String>,
        f: &mut impl FnMut(&[String]),
    ) {
        if !cur.is_empty() {
            f(cur);
        }
        if cur.len() == max {
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, i + 1, max, cur, f);
            cur.pop();
        }
    }
    go(items, 0, max, &mut Vec::new(), f);
}

impl Grammar {
    /// Builds the universe for `data`. `mentioned` lists further column names (from goals) that
    /// operators may refer to.
    pub fn new(
        data: &Table,
        cfg: &SynthConfig,
        mentioned: impl IntoIterator<Item = String>,
    ) -> Grammar {
        let quantitative: Vec<String> = data
            .columns()
            .iter()
            .filter(|c| c.ctype.is_quantitative())
            .map(|c| c.name.clone())
            .collect();
        let mut mutates = Vec::new();
        for op in cfg.mutate.names() {
            for (i, a) in quantitative.iter().enumerate() {
                for b in &quantitative[i + 1..] {
                    let args = vec![a.clone(), b.clone()];
                    mutates.push(TableOp::Mutate {
                        target: mutate_target(op, &args),
                        op: op.to_string(),
                        args,
                    });
                }
            }
        }
        let mut columns: IndexSet<String> = data.column_names().into_iter().collect();
        for m in &mutates {
            if let TableOp::Mutate { target, .. } = m {
                columns.insert(target.clone());
            }
        }
        columns.extend(mentioned);
        let bins = quantitative
            .iter()
            .flat_map(|c| {
                cfg.bins.iter().map(move |&n| TableOp::Bin {
                    bins: n,
                    target: c.clone(),
                })
            })
            .collect();
        let mut filters = Vec::new();
        for c in data.columns() {
            let ops: &[FilterOp] = if is_ordered(c.ctype) {
                &[FilterOp::Eq, FilterOp::Ne, FilterOp::Le, FilterOp::Ge]
            } else {
                &[FilterOp::Eq, FilterOp::Ne]
            };
            for v in frequent_values(data, &c.name, cfg.filter_constants) {
                for &op in ops {
                    filters.push(TableOp::Filter(FilterPred {
                        lhs: Operand::Column(c.name.clone()),
                        op,
                        rhs: Operand::Value(v.clone()),
                    }));
                }
            }
        }
        Grammar {
            columns: columns.into_iter().collect(),
            select_max: cfg.select_max,
            max_keys: cfg.max_keys,
            bins,
            mutates,
            filters,
        }
    }

    fn selects(&self, required: &[&String]) -> Vec<TableOp> {
        let mut out = Vec::new();
        subsets(&self.columns, self.select_max, &mut |cols| {
            if required.iter().all(|r| cols.contains(r)) {
                out.push(TableOp::Select(cols.to_vec()));
            }
        });
        out
    }

    fn summarizes(&self, required: &[&String]) -> Vec<TableOp> {
        let mut out = Vec::new();
        for target in &self.columns {
            let others: Vec<String> = self
                .columns
                .iter()
                .filter(|c| *c != target)
                .cloned()
                .collect();
            let need: Vec<&&String> = required.iter().filter(|r| **r != target).collect();
            subsets(&others, self.max_keys, &mut |keys| {
                if need.iter().all(|r| keys.contains(r)) {
                    for agg in Agg::ALL {
                        out.push(TableOp::Summarize {
                            keys: keys.to_vec(),
                            agg,
                            target: target.clone(),
                        });
                    }
                }
            });
        }
        out
    }

    /// Operators whose output can carry every column of `goal`, in expansion order.
    pub fn productions(&self, goal: &Schema) -> Vec<TableOp> {
        let required: Vec<&String> = goal.keys().collect();
        let mut out = self.selects(&required);
        out.extend(self.summarizes(&required));
        out.extend(self.bins.iter().cloned());
        out.extend(self.mutates.iter().cloned());
        out.extend(self.filters.iter().cloned());
        out
    }

    /// Every operator in the universe.
    pub fn all(&self) -> Vec<TableOp> {
        self.productions(&Schema::new())
    }
}
