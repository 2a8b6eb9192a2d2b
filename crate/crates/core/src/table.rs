//! Tables, CSV ingestion and column-type inference.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ctype::ColumnType;
use crate::value::{parse_date, Value};

/// Operators recorded in column provenance and named by syntactic constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpTag {
    Mean,
    Sum,
    Count,
    Bin,
    Filter,
    Mutate,
}

impl OpTag {
    pub const ALL: [OpTag; 6] = [
        OpTag::Mean,
        OpTag::Sum,
        OpTag::Count,
        OpTag::Bin,
        OpTag::Filter,
        OpTag::Mutate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpTag::Mean => "mean",
            OpTag::Sum => "sum",
            OpTag::Count => "count",
            OpTag::Bin => "bin",
            OpTag::Filter => "filter",
            OpTag::Mutate => "mutate",
        }
    }

    pub fn parse(s: &str) -> Option<OpTag> {
        OpTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

impl fmt::Display for OpTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One entry of a column's derivation history.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProvTag {
    Op(OpTag),
    Source(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Column {
    pub name: String,
    pub ctype: ColumnType,
}

/// A bag of typed rows with per-column provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<Column>,
    rows: Vec<Vec<Value>>,
    provenance: BTreeMap<String, BTreeSet<ProvTag>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum TableError {
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("empty column name at position {0}")]
    EmptyColumnName(usize),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("empty table")]
    Empty,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth {
        row: usize,
        found: usize,
        expected: usize,
    },
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub header: bool,
    /// Integer columns with more distinct values than this are Continuous.
    pub discrete_threshold: usize,
    pub overrides: BTreeMap<String, ColumnType>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            header: true,
            discrete_threshold: 20,
            overrides: BTreeMap::new(),
        }
    }
}

impl Table {
    /// Builds a table, initialising provenance of every column to its own name.
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<Value>>) -> Result<Table, TableError> {
        let mut seen = HashSet::new();
        for (i, c) in columns.iter().enumerate() {
            if c.name.is_empty() {
                return Err(TableError::EmptyColumnName(i));
            }
            if !seen.insert(c.name.clone()) {
                return Err(TableError::DuplicateColumn(c.name.clone()));
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != columns.len() {
                return Err(TableError::RowWidth {
                    row: i,
                    found: r.len(),
                    expected: columns.len(),
                });
            }
        }
        let provenance = columns
            .iter()
            .map(|c| {
                (
                    c.name.clone(),
                    BTreeSet::from([ProvTag::Source(c.name.clone())]),
                )
            })
            .collect();
        Ok(Table {
            columns,
            rows,
            provenance,
        })
    }

    pub(crate) fn from_parts(
        columns: Vec<Column>,
        rows: Vec<Vec<Value>>,
        provenance: BTreeMap<String, BTreeSet<ProvTag>>,
    ) -> Table {
        Table {
            columns,
            rows,
            provenance,
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_type(&self, name: &str) -> Option<ColumnType> {
        self.column(name).map(|c| c.ctype)
    }

    pub fn provenance(&self, name: &str) -> Option<&BTreeSet<ProvTag>> {
        self.provenance.get(name)
    }

    pub fn provenance_map(&self) -> &BTreeMap<String, BTreeSet<ProvTag>> {
        &self.provenance
    }

    pub fn values<'a>(&'a self, name: &str) -> Option<impl Iterator<Item = &'a Value> + 'a> {
        let i = self.index_of(name)?;
        Some(self.rows.iter().map(move |r| &r[i]))
    }

    /// Number of distinct tuples over `cols`; all columns when `cols` is empty.
    pub fn cardinality(&self, cols: &[String]) -> Result<usize, TableError> {
        if cols.is_empty() {
            let set: HashSet<&Vec<Value>> = self.rows.iter().collect();
            return Ok(set.len());
        }
        let idx = cols
            .iter()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| TableError::UnknownColumn(c.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let set: HashSet<Vec<&Value>> = self
            .rows
            .iter()
            .map(|r| idx.iter().map(|&i| &r[i]).collect())
            .collect();
        Ok(set.len())
    }

    /// Content hash identifying the dataset.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.columns {
            h.update(c.name.as_bytes());
            h.update([0u8]);
            h.update(c.ctype.name().as_bytes());
            h.update([1u8]);
        }
        for r in &self.rows {
            for v in r {
                h.update(v.to_string().as_bytes());
                h.update([2u8]);
            }
            h.update([3u8]);
        }
        hex::encode(&h.finalize()[..8])
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }
}

/// Parses a CSV document into a typed table.
pub fn load_table(bytes: &[u8], options: &LoadOptions) -> Result<Table, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| TableError::Csv(e.to_string()))?;
        records.push(rec.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    }
    if records.is_empty() {
        return Err(TableError::Empty);
    }
    let names: Vec<String> = if options.header {
        records
            .remove(0)
            .into_iter()
            .map(|s| s.trim().to_string())
            .collect()
    } else {
        (1..=records[0].len()).map(|i| format!("col{i}")).collect()
    };
    if records.is_empty() {
        return Err(TableError::Empty);
    }
    for (i, r) in records.iter().enumerate() {
        if r.len() != names.len() {
            return Err(TableError::RowWidth {
                row: i + 1,
                found: r.len(),
                expected: names.len(),
            });
        }
    }
    let mut columns = Vec::with_capacity(names.len());
    let mut cells: Vec<Vec<Value>> = vec![Vec::with_capacity(names.len()); records.len()];
    for (j, name) in names.iter().enumerate() {
        let raw: Vec<&str> = records.iter().map(|r| r[j].as_str()).collect();
        let parsed: Vec<Value> = raw.iter().map(|s| parse_cell(s)).collect();
        let inferred = infer_column_type(&parsed, options.discrete_threshold);
        let ctype = options.overrides.get(name).copied().unwrap_or(inferred);
        for (i, (v, s)) in parsed.into_iter().zip(&raw).enumerate() {
            cells[i].push(coerce(v, s, ctype));
        }
        columns.push(Column {
            name: name.clone(),
            ctype,
        });
    }
    Table::new(columns, cells)
}

fn parse_cell(s: &str) -> Value {
    let t = s.trim();
    if t.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = t.parse::<i64>() {
        return Value::Integer(i);
    }
    if let Ok(x) = t.parse::<f64>() {
        if x.is_finite() {
            return Value::Number(x);
        }
    }
    if let Some(d) = parse_date(t) {
        return Value::Date(d);
    }
    Value::Text(t.to_string())
}

fn coerce(v: Value, raw: &str, ctype: ColumnType) -> Value {
    match (ctype, &v) {
        (_, Value::Null) => Value::Null,
        (
            ColumnType::Nominal | ColumnType::Ordinal | ColumnType::Qualitative | ColumnType::Top,
            _,
        ) => Value::Text(raw.trim().to_string()),
        _ => v,
    }
}

fn is_year(v: &Value) -> bool {
    matches!(v, Value::Integer(i) if (1000..=2999).contains(i))
}

/// Infers a column type from parsed cell values (nulls ignored).
///
/// Dates and four-digit years are Temporal; numeric columns are Continuous when any value is
/// fractional or there are more than `discrete_threshold` distinct values, Discrete otherwise;
/// everything else is Nominal. Ordinal is never inferred.
pub fn infer_column_type(values: &[Value], discrete_threshold: usize) -> ColumnType {
    let present: Vec<&Value> = values.iter().filter(|v| !v.is_null()).collect();
    if present.is_empty() {
        return ColumnType::Nominal;
    }
    if present.iter().all(|v| matches!(v, Value::Date(_))) || present.iter().all(|v| is_year(v)) {
        return ColumnType::Temporal;
    }
    if present.iter().all(|v| v.is_numeric()) {
        let fractional = present
            .iter()
            .any(|v| matches!(v, Value::Number(x) if x.fract() != 0.0));
        let distinct: HashSet<&Value> = present.iter().copied().collect();
        if fractional || distinct.len() > discrete_threshold {
            return ColumnType::Continuous;
        }
        return ColumnType::Discrete;
    }
    ColumnType::Nominal
}
