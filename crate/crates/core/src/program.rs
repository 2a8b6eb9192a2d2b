//! Abstract syntax of table-transformation and plotting programs.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::table::OpTag;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agg {
    Mean,
    Sum,
    Count,
}

impl Agg {
    pub const ALL: [Agg; 3] = [Agg::Mean, Agg::Sum, Agg::Count];

    pub fn tag(self) -> OpTag {
        match self {
            Agg::Mean => OpTag::Mean,
            Agg::Sum => OpTag::Sum,
            Agg::Count => OpTag::Count,
        }
    }

    pub fn name(self) -> &'static str {
        self.tag().name()
    }

    pub fn parse(s: &str) -> Option<Agg> {
        Agg::ALL.into_iter().find(|a| a.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FilterOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl FilterOp {
    pub const ALL: [FilterOp; 6] = [
        FilterOp::Eq,
        FilterOp::Ne,
        FilterOp::Lt,
        FilterOp::Le,
        FilterOp::Gt,
        FilterOp::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            FilterOp::Eq => "=",
            FilterOp::Ne => "!=",
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Gt => ">",
            FilterOp::Ge => ">=",
        }
    }

    pub fn parse(s: &str) -> Option<FilterOp> {
        match s {
            "≠" => Some(FilterOp::Ne),
            "≤" => Some(FilterOp::Le),
            "≥" => Some(FilterOp::Ge),
            "==" => Some(FilterOp::Eq),
            _ => FilterOp::ALL.into_iter().find(|o| o.symbol() == s),
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            FilterOp::Eq => ord == Equal,
            FilterOp::Ne => ord != Equal,
            FilterOp::Lt => ord == Less,
            FilterOp::Le => ord != Greater,
            FilterOp::Gt => ord == Greater,
            FilterOp::Ge => ord != Less,
        }
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, FilterOp::Eq | FilterOp::Ne)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operand {
    Column(String),
    Value(Value),
}

impl Operand {
    pub fn column(&self) -> Option<&str> {
        match self {
            Operand::Column(c) => Some(c),
            Operand::Value(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FilterPred {
    pub lhs: Operand,
    pub op: FilterOp,
    pub rhs: Operand,
}

impl FilterPred {
    pub fn columns(&self) -> Vec<&str> {
        [&self.lhs, &self.rhs]
            .into_iter()
            .filter_map(|o| o.column())
            .collect()
    }
}

/// Table-transformation program. Every operator has exactly one table argument.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableProgram {
    Input,
    Bin {
        input: Box<TableProgram>,
        bins: usize,
        target: String,
    },
    Filter {
        input: Box<TableProgram>,
        pred: FilterPred,
    },
    Summarize {
        input: Box<TableProgram>,
        keys: Vec<String>,
        agg: Agg,
        target: String,
    },
    Mutate {
        input: Box<TableProgram>,
        target: String,
        op: String,
        args: Vec<String>,
    },
    Select {
        input: Box<TableProgram>,
        columns: Vec<String>,
    },
}

/// One operator with its table argument left open.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableOp {
    Bin {
        bins: usize,
        target: String,
    },
    Filter(FilterPred),
    Summarize {
        keys: Vec<String>,
        agg: Agg,
        target: String,
    },
    Mutate {
        target: String,
        op: String,
        args: Vec<String>,
    },
    Select(Vec<String>),
}

impl TableOp {
    pub fn apply(&self, input: TableProgram) -> TableProgram {
        let input = Box::new(input);
        match self.clone() {
            TableOp::Bin { bins, target } => TableProgram::Bin {
                input,
                bins,
                target,
            },
            TableOp::Filter(pred) => TableProgram::Filter { input, pred },
            TableOp::Summarize { keys, agg, target } => TableProgram::Summarize {
                input,
                keys,
                agg,
                target,
            },
            TableOp::Mutate { target, op, args } => TableProgram::Mutate {
                input,
                target,
                op,
                args,
            },
            TableOp::Select(columns) => TableProgram::Select { input, columns },
        }
    }
}

impl TableProgram {
    /// Splits off the outermost operator.
    pub fn split(&self) -> Option<(TableOp, &TableProgram)> {
        Some(match self {
            TableProgram::Input => return None,
            TableProgram::Bin {
                input,
                bins,
                target,
            } => (
                TableOp::Bin {
                    bins: *bins,
                    target: target.clone(),
                },
                input,
            ),
            TableProgram::Filter { input, pred } => (TableOp::Filter(pred.clone()), input),
            TableProgram::Summarize {
                input,
                keys,
                agg,
                target,
            } => (
                TableOp::Summarize {
                    keys: keys.clone(),
                    agg: *agg,
                    target: target.clone(),
                },
                input,
            ),
            TableProgram::Mutate {
                input,
                target,
                op,
                args,
            } => (
                TableOp::Mutate {
                    target: target.clone(),
                    op: op.clone(),
                    args: args.clone(),
                },
                input,
            ),
            TableProgram::Select { input, columns } => (TableOp::Select(columns.clone()), input),
        })
    }

    /// Operators from the outermost inwards.
    pub fn ops(&self) -> Vec<TableOp> {
        let mut out = vec![];
        let mut cur = self;
        while let Some((op, inner)) = cur.split() {
            out.push(op);
            cur = inner;
        }
        out
    }

    /// Rebuilds a program from operators listed outermost first.
    pub fn from_ops(ops: &[TableOp]) -> TableProgram {
        ops.iter()
            .rev()
            .fold(TableProgram::Input, |acc, op| op.apply(acc))
    }

    /// Number of operators.
    pub fn depth(&self) -> usize {
        self.ops().len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlotKind {
    Bar,
    Scatter,
    Line,
    Area,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] = [
        PlotKind::Bar,
        PlotKind::Scatter,
        PlotKind::Line,
        PlotKind::Area,
    ];

    pub fn type_name(self) -> &'static str {
        match self {
            PlotKind::Bar => "BarPlot",
            PlotKind::Scatter => "ScatterPlot",
            PlotKind::Line => "LinePlot",
            PlotKind::Area => "AreaPlot",
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            PlotKind::Bar => "bar",
            PlotKind::Scatter => "scatter",
            PlotKind::Line => "line",
            PlotKind::Area => "area",
        }
    }

    pub fn parse(s: &str) -> Option<PlotKind> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.type_name().eq_ignore_ascii_case(s) || k.keyword().eq_ignore_ascii_case(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Color,
    Subplot,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::X, Channel::Y, Channel::Color, Channel::Subplot];

    pub fn name(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Color => "color",
            Channel::Subplot => "subplot",
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        match s {
            "x" | "x-axis" => Some(Channel::X),
            "y" | "y-axis" => Some(Channel::Y),
            "color" | "colour" => Some(Channel::Color),
            "subplot" | "column" | "facet" => Some(Channel::Subplot),
            _ => None,
        }
    }
}

/// A plotting program over the transformed table.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlotProgram {
    pub kind: PlotKind,
    pub x: String,
    pub y: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub color: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub subplot: Option<String>,
}

impl PlotProgram {
    pub fn channel(&self, ch: Channel) -> Option<&str> {
        match ch {
            Channel::X => Some(&self.x),
            Channel::Y => Some(&self.y),
            Channel::Color => self.color.as_deref(),
            Channel::Subplot => self.subplot.as_deref(),
        }
    }

    pub fn bindings(&self) -> BTreeMap<Channel, String> {
        Channel::ALL
            .into_iter()
            .filter_map(|ch| self.channel(ch).map(|c| (ch, c.to_string())))
            .collect()
    }

    pub fn columns(&self) -> Vec<&str> {
        Channel::ALL
            .into_iter()
            .filter_map(|ch| self.channel(ch))
            .collect()
    }
}

/// `let T = table in plot`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VisProgram {
    pub table: TableProgram,
    pub plot: PlotProgram,
}

impl VisProgram {
    /// Node count: one per table operator plus the input and the plot.
    pub fn ast_size(&self) -> usize {
        self.table.depth() + 2
    }
}

impl fmt::Display for TableProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_table(self))
    }
}

impl fmt::Display for PlotProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(T, x={}, y={}",
            self.kind.type_name().trim_end_matches("Plot"),
            self.x,
            self.y
        )?;
        if let Some(c) = &self.color {
            write!(f, ", color={c}")?;
        }
        if let Some(s) = &self.subplot {
            write!(f, ", subplot={s}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for VisProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_vis(self))
    }
}
