//! One synthesis request end to end: specifications in, ranked charts out.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use indexmap::IndexMap;
use serde::Serialize;
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::ctype::ColumnType;
use crate::dsl::print_vis;
use crate::frontend::{heuristic_parse, parse_spec_file, SpecError};
use crate::program::{Operand, TableOp, VisProgram};
use crate::synth::{
    synthesize_session, ConfigError, Counters, LemmaStore, ScoredSpec, SynthConfig,
};
use crate::table::{Column, Table, TableError};
use crate::types;
use crate::vegalite::{emit_vegalite, VegaError};

pub const RESULT_VERSION: u32 = 1;
pub const LEMMA_BANK_CAPACITY: usize = 64;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no specifications")]
    NoSpecs,
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("rendering a result failed: {0}")]
    Vega(#[from] VegaError),
}

#[derive(Clone, Debug)]
pub enum SpecSource {
    Query(String),
    /// Contents of a spec file.
    SpecFile(String),
    Specs(Vec<ScoredSpec>),
}

#[derive(Clone, Debug, Default)]
pub struct SessionOptions {
    pub config: SynthConfig,
    /// Report zero timings so identical requests give identical bytes.
    pub deterministic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionResult {
    pub version: u32,
    pub dataset: String,
    pub results: Vec<RankedProgram>,
    pub counters: Counters,
    pub timing: Timing,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankedProgram {
    pub program: Json,
    pub vega: Json,
    pub spec_rank: usize,
    pub score: f64,
    pub ast_size: usize,
}

impl RankedProgram {
    pub fn text(&self) -> &str {
        self.program["text"].as_str().unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Timing {
    pub parse_ms: f64,
    pub synth_ms: f64,
}

/// Specifications ready to search, with the table they refer to.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub table: Table,
    pub specs: Vec<ScoredSpec>,
    pub warnings: Vec<String>,
    pub parse_ms: f64,
}

/// Lemma stores per dataset fingerprint, evicting the least recently used.
#[derive(Debug)]
pub struct LemmaBank {
    capacity: usize,
    stores: Mutex<IndexMap<String, Arc<Mutex<LemmaStore>>>>,
}

impl Default for LemmaBank {
    fn default() -> Self {
        LemmaBank::new(LEMMA_BANK_CAPACITY)
    }
}

impl LemmaBank {
    pub fn new(capacity: usize) -> LemmaBank {
        LemmaBank {
            capacity: capacity.max(1),
            stores: Mutex::new(IndexMap::new()),
        }
    }

    pub fn store(&self, fingerprint: &str) -> Arc<Mutex<LemmaStore>> {
        let mut stores = self.stores.lock().unwrap_or_else(|e| e.into_inner());
        let store = stores.shift_remove(fingerprint).unwrap_or_default();
        if stores.len() >= self.capacity {
            stores.shift_remove_index(0);
        }
        stores.insert(fingerprint.to_string(), store.clone());
        store
    }

    pub fn len(&self) -> usize {
        self.stores.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, fingerprint: &str) -> bool {
        self.stores
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .contains_key(fingerprint)
    }
}

/// Replaces column types, leaving values untouched.
pub fn retype(t: &Table, types: &BTreeMap<String, ColumnType>) -> Result<Table, TableError> {
    if let Some(bad) = types.keys().find(|c| t.column(c).is_none()) {
        return Err(TableError::UnknownColumn(bad.clone()));
    }
    if types.iter().all(|(c, ty)| t.column_type(c) == Some(*ty)) {
        return Ok(t.clone());
    }
    let columns = t
        .columns()
        .iter()
        .map(|c| Column {
            name: c.name.clone(),
            ctype: types.get(&c.name).copied().unwrap_or(c.ctype),
        })
        .collect();
    Table::new(columns, t.rows().to_vec())
}

pub fn prepare(
    data: &Table,
    source: &SpecSource,
    max_specs: usize,
) -> Result<Prepared, SessionError> {
    let start = Instant::now();
    let (table, mut specs, warnings) = match source {
        SpecSource::Query(q) => (data.clone(), heuristic_parse(q, data), vec![]),
        SpecSource::SpecFile(text) => {
            let file = parse_spec_file(text, Some(&data.column_names()))?;
            (retype(data, &file.column_types)?, file.specs, file.warnings)
        }
        SpecSource::Specs(specs) => (data.clone(), specs.clone(), vec![]),
    };
    if specs.is_empty() {
        return Err(SessionError::NoSpecs);
    }
    specs.truncate(max_specs);
    Ok(Prepared {
        table,
        specs,
        warnings,
        parse_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn execute(
    prepared: &Prepared,
    options: &SessionOptions,
    lemmas: &mut LemmaStore,
) -> Result<SessionResult, SessionError> {
    let cfg = &options.config;
    cfg.validate()?;
    types::reset_cache();
    let start = Instant::now();
    let out = synthesize_session(&prepared.table, &prepared.specs, cfg, lemmas);
    let synth_ms = start.elapsed().as_secs_f64() * 1e3;
    let results = out
        .results
        .iter()
        .map(|f| {
            Ok(RankedProgram {
                program: program_json(&f.program),
                vega: emit_vegalite(&f.program, &prepared.table, &cfg.mutate)?,
                spec_rank: f.spec_rank,
                score: f.score,
                ast_size: f.ast_size,
            })
        })
        .collect::<Result<Vec<_>, VegaError>>()?;
    let timing = if options.deterministic {
        Timing::default()
    } else {
        Timing {
            parse_ms: round3(prepared.parse_ms),
            synth_ms: round3(synth_ms),
        }
    };
    Ok(SessionResult {
        version: RESULT_VERSION,
        dataset: prepared.table.fingerprint(),
        results,
        counters: out.counters,
        timing,
        warnings: prepared.warnings.clone(),
    })
}

/// Prepares, looks up the dataset's lemma store in `bank` and searches.
pub fn run_session(
    data: &Table,
    source: &SpecSource,
    options: &SessionOptions,
    bank: &LemmaBank,
) -> Result<SessionResult, SessionError> {
    options.config.validate()?;
    let prepared = prepare(data, source, options.config.max_specs)?;
    let store = bank.store(&prepared.table.fingerprint());
    let mut lemmas = store.lock().unwrap_or_else(|e| e.into_inner());
    execute(&prepared, options, &mut lemmas)
}

fn round3(x: f64) -> f64 {
    (x * 1e3).round() / 1e3
}

fn operand_json(o: &Operand) -> Json {
    match o {
        Operand::Column(c) => json!({"column": c}),
        Operand::Value(v) => json!({"value": v.to_json()}),
    }
}

/// DSL text plus the operators listed innermost first.
pub fn program_json(p: &VisProgram) -> Json {
    let steps: Vec<Json> = p
        .table
        .ops()
        .iter()
        .rev()
        .map(|op| match op {
            TableOp::Select(columns) => json!({"op": "select", "columns": columns}),
            TableOp::Filter(pred) => json!({
                "op": "filter",
                "cmp": pred.op.symbol(),
                "lhs": operand_json(&pred.lhs),
                "rhs": operand_json(&pred.rhs),
            }),
            TableOp::Summarize { keys, agg, target } => {
                json!({"op": "summarize", "keys": keys, "agg": agg.name(), "target": target})
            }
            TableOp::Bin { bins, target } => json!({"op": "bin", "target": target, "bins": bins}),
            TableOp::Mutate { target, op, args } => {
                json!({"op": "mutate", "target": target, "fn": op, "args": args})
            }
        })
        .collect();
    json!({
        "text": print_vis(p),
        "steps": steps,
        "plot": p.plot,
    })
}
