//! Vega-Lite v5 output.

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::ctype::ColumnType;
use crate::eval::{eval_transform_with, EvalError, MutateRegistry};
use crate::program::{PlotKind, PlotProgram, VisProgram};
use crate::table::Table;

pub const SCHEMA_URL: &str = "https://vega.github.io/schema/vega-lite/v5.json";

#[derive(Debug, Error, PartialEq)]
pub enum VegaError {
    #[error("channel column `{0}` is missing from the table")]
    MissingColumn(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub fn mark(kind: PlotKind) -> &'static str {
    match kind {
        PlotKind::Bar => "bar",
        PlotKind::Scatter => "point",
        PlotKind::Line => "line",
        PlotKind::Area => "area",
    }
}

pub fn field_type(t: ColumnType) -> &'static str {
    match t {
        ColumnType::Ordinal => "ordinal",
        ColumnType::Temporal => "temporal",
        ColumnType::Quantitative | ColumnType::Discrete | ColumnType::Continuous => "quantitative",
        ColumnType::Top | ColumnType::Qualitative | ColumnType::Nominal => "nominal",
    }
}

/// Vega-Lite reads `.` and `[` in field names as paths.
fn field_name(column: &str) -> String {
    let mut out = String::with_capacity(column.len());
    for ch in column.chars() {
        if matches!(ch, '.' | '[' | ']' | '\\') {
            out.push('\\');
        }
        out.push(ch);
    }
    out
}

/// Evaluates the table program on `input` and renders the plot over its output.
pub fn emit_vegalite(
    program: &VisProgram,
    input: &Table,
    registry: &MutateRegistry,
) -> Result<Json, VegaError> {
    let output = eval_transform_with(&program.table, input, registry)?;
    emit_plot(&program.plot, &output)
}

/// Renders a plot over an already transformed table.
pub fn emit_plot(plot: &PlotProgram, table: &Table) -> Result<Json, VegaError> {
    let mut encoding = Map::new();
    let channels = [
        ("x", Some(plot.x.as_str())),
        ("y", Some(plot.y.as_str())),
        ("color", plot.color.as_deref()),
        ("column", plot.subplot.as_deref()),
    ];
    for (name, column) in channels {
        let Some(column) = column else { continue };
        let ctype = table
            .column_type(column)
            .ok_or_else(|| VegaError::MissingColumn(column.to_string()))?;
        encoding.insert(
            name.to_string(),
            json!({"field": field_name(column), "type": field_type(ctype)}),
        );
    }
    let names = table.column_names();
    let values: Vec<Json> = table
        .rows()
        .iter()
        .map(|row| {
            Json::Object(
                names
                    .iter()
                    .zip(row)
                    .map(|(n, v)| (n.clone(), v.to_json()))
                    .collect(),
            )
        })
        .collect();
    Ok(json!({
        "$schema": SCHEMA_URL,
        "data": {"values": values},
        "mark": mark(plot.kind),
        "encoding": encoding,
    }))
}
