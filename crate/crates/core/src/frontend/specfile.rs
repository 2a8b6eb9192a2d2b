//! JSON specification files.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::ctype::ColumnType;
use crate::program::{Channel, FilterOp, FilterPred, Operand, PlotKind};
use crate::qualifier::{
    CmpOp, Qualifier, SynAtom, SynField, SynSource, TableExpr, Term, NU, TABLE_PARAM,
};
use crate::synth::ScoredSpec;
use crate::table::OpTag;
use crate::types::{BaseType, RefinementType, Schema};
use crate::value::Value;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
}

/// A parsed specification file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpecFile {
    /// Column type overrides to apply when loading the dataset.
    pub column_types: BTreeMap<String, ColumnType>,
    /// Specifications by descending probability.
    pub specs: Vec<ScoredSpec>,
    pub warnings: Vec<String>,
}

struct Ctx<'a> {
    warnings: Vec<String>,
    columns: Option<&'a [String]>,
    /// Columns `*` expands to in the spec being parsed.
    wildcard: Vec<String>,
}

fn fail<T>(pointer: &str, message: impl Into<String>) -> Result<T, SpecError> {
    Err(SpecError::Schema {
        pointer: if pointer.is_empty() {
            "/".into()
        } else {
            pointer.into()
        },
        message: message.into(),
    })
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn object<'a>(v: &'a Json, at: &str) -> Result<&'a Map<String, Json>, SpecError> {
    v.as_object()
        .map_or_else(|| fail(at, "expected an object"), Ok)
}

fn string<'a>(v: &'a Json, at: &str) -> Result<&'a str, SpecError> {
    v.as_str().map_or_else(|| fail(at, "expected a string"), Ok)
}

fn only_keys(m: &Map<String, Json>, at: &str, allowed: &[&str]) -> Result<(), SpecError> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => fail(&format!("{at}/{}", escape(k)), "unexpected member"),
        None => Ok(()),
    }
}

fn field<'a>(m: &'a Map<String, Json>, at: &str, key: &str) -> Result<&'a Json, SpecError> {
    m.get(key)
        .map_or_else(|| fail(at, format!("missing member `{key}`")), Ok)
}

fn column_type(v: &Json, at: &str) -> Result<ColumnType, SpecError> {
    let s = string(v, at)?;
    ColumnType::ALL
        .into_iter()
        .find(|t| t.name() == s)
        .map_or_else(|| fail(at, format!("unknown column type `{s}`")), Ok)
}

/// The single key of a `{"node": body}` object.
fn node<'a>(v: &'a Json, at: &str) -> Result<(&'a str, &'a Json, String), SpecError> {
    let m = object(v, at)?;
    let mut keys = m.keys().filter(|k| *k != "offset");
    match (keys.next(), keys.next()) {
        (Some(k), None) => Ok((k.as_str(), &m[k], format!("{at}/{}", escape(k)))),
        _ => fail(at, "expected exactly one node kind"),
    }
}

impl Ctx<'_> {
    fn check_column(&mut self, c: &str, at: &str) {
        if let Some(cols) = self.columns {
            if c != "*" && !cols.iter().any(|k| k == c) {
                self.warnings
                    .push(format!("{at}: column `{c}` is not in the dataset"));
            }
        }
    }

    fn column(&mut self, v: &Json, at: &str) -> Result<String, SpecError> {
        let c = string(v, at)?;
        self.check_column(c, at);
        Ok(c.to_string())
    }

    fn columns(&mut self, v: &Json, at: &str) -> Result<Vec<String>, SpecError> {
        let a = v
            .as_array()
            .map_or_else(|| fail(at, "expected an array"), Ok)?;
        a.iter()
            .enumerate()
            .map(|(i, c)| self.column(c, &format!("{at}/{i}")))
            .collect()
    }

    fn qualifier(&mut self, v: &Json, at: &str) -> Result<Qualifier, SpecError> {
        let (kind, body, at) = node(v, at)?;
        match kind {
            "and" | "or" => {
                let a = body
                    .as_array()
                    .map_or_else(|| fail(&at, "expected an array"), Ok)?;
                let parts = a
                    .iter()
                    .enumerate()
                    .map(|(i, q)| self.qualifier(q, &format!("{at}/{i}")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(if kind == "and" {
                    Qualifier::and(parts)
                } else {
                    Qualifier::or(parts)
                })
            }
            "not" => Ok(Qualifier::not(self.qualifier(body, &at)?)),
            "const" => match body.as_bool() {
                Some(true) => Ok(Qualifier::True),
                Some(false) => Ok(Qualifier::False),
                None => fail(&at, "expected a boolean"),
            },
            "pi" => self.pi(body, &at),
            "cmp" => self.cmp(body, &at),
            other => fail(&at, format!("`{other}` is not a qualifier")),
        }
    }

    fn pi(&mut self, body: &Json, at: &str) -> Result<Qualifier, SpecError> {
        let m = object(body, at)?;
        only_keys(
            m,
            at,
            &["var", "column", "channel", "op", "from", "from_var"],
        )?;
        let var = match m.get("var") {
            Some(v) => string(v, &format!("{at}/var"))?.to_string(),
            None => NU.to_string(),
        };
        let (field_at, field) = match (m.get("column"), m.get("channel")) {
            (Some(c), None) => {
                let at = format!("{at}/column");
                (at.clone(), SynField::Column(self.column(c, &at)?))
            }
            (None, Some(ch)) => {
                let at = format!("{at}/channel");
                let s = string(ch, &at)?;
                let ch = Channel::parse(s)
                    .map_or_else(|| fail(&at, format!("unknown channel `{s}`")), Ok)?;
                (at, SynField::Channel(ch))
            }
            _ => return fail(at, "expected exactly one of `column` and `channel`"),
        };
        let source = match (m.get("op"), m.get("from")) {
            (Some(op), None) => {
                let at = format!("{at}/op");
                let s = string(op, &at)?;
                SynSource::Op(
                    OpTag::parse(s)
                        .map_or_else(|| fail(&at, format!("unknown operator `{s}`")), Ok)?,
                )
            }
            (None, Some(from)) => {
                let var = match m.get("from_var") {
                    Some(v) => string(v, &format!("{at}/from_var"))?.to_string(),
                    None => TABLE_PARAM.to_string(),
                };
                SynSource::Column {
                    var,
                    col: self.column(from, &format!("{at}/from"))?,
                }
            }
            _ => return fail(at, "expected exactly one of `op` and `from`"),
        };
        let atom = SynAtom { var, field, source };
        let wild_field = matches!(&atom.field, SynField::Column(c) if c == "*");
        let wild_source = matches!(&atom.source, SynSource::Column { col, .. } if col == "*");
        if !wild_field && !wild_source {
            return Ok(Qualifier::syn(atom));
        }
        if self.wildcard.is_empty() {
            return fail(&field_at, "`*` needs a table goal with columns");
        }
        let cols = self.wildcard.clone();
        Ok(Qualifier::or(cols.iter().map(|c| {
            let mut a = atom.clone();
            if wild_field {
                a.field = SynField::Column(c.clone());
            }
            if let (true, SynSource::Column { col, .. }) = (wild_source, &mut a.source) {
                *col = c.clone();
            }
            Qualifier::syn(a)
        })))
    }

    fn cmp(&mut self, body: &Json, at: &str) -> Result<Qualifier, SpecError> {
        let m = object(body, at)?;
        only_keys(m, at, &["op", "lhs", "rhs"])?;
        let op_at = format!("{at}/op");
        let s = string(field(m, at, "op")?, &op_at)?;
        let op = CmpOp::parse(s)
            .map_or_else(|| fail(&op_at, format!("unknown comparison `{s}`")), Ok)?;
        let (lhs, rhs) = (field(m, at, "lhs")?, field(m, at, "rhs")?);
        let is_table = |v: &Json| matches!(node(v, ""), Ok(("proj" | "filter", _, _)));
        if is_table(lhs) || is_table(rhs) {
            if op != CmpOp::Eq {
                return fail(&op_at, "tables can only be compared with `=`");
            }
            return Ok(Qualifier::TableEq(
                self.table_expr(lhs, &format!("{at}/lhs"))?,
                self.table_expr(rhs, &format!("{at}/rhs"))?,
            ));
        }
        Ok(Qualifier::cmp(
            self.term(lhs, &format!("{at}/lhs"))?,
            op,
            self.term(rhs, &format!("{at}/rhs"))?,
        ))
    }

    fn term(&mut self, v: &Json, at: &str) -> Result<Term, SpecError> {
        let (kind, body, inner_at) = node(v, at)?;
        let t = match kind {
            "card" => Term::Card(self.table_expr(body, &inner_at)?),
            "max" => Term::Max(self.table_expr(body, &inner_at)?),
            "min" => Term::Min(self.table_expr(body, &inner_at)?),
            "const" => Term::Const(
                body.as_i64()
                    .map_or_else(|| fail(&inner_at, "expected an integer"), Ok)?,
            ),
            "var" => Term::Var(string(body, &inner_at)?.to_string()),
            other => return fail(&inner_at, format!("`{other}` is not a term")),
        };
        match v.get("offset") {
            None => Ok(t),
            Some(k) => match k.as_i64() {
                Some(k) => Ok(Term::Offset(Box::new(t), k)),
                None => fail(&format!("{at}/offset"), "expected an integer"),
            },
        }
    }

    fn table_expr(&mut self, v: &Json, at: &str) -> Result<TableExpr, SpecError> {
        let (kind, body, at) = node(v, at)?;
        match kind {
            "var" => Ok(TableExpr::Var(string(body, &at)?.to_string())),
            "proj" => {
                let m = object(body, &at)?;
                only_keys(m, &at, &["of", "columns"])?;
                let of = match m.get("of") {
                    Some(of) => self.table_expr(of, &format!("{at}/of"))?,
                    None => TableExpr::nu(),
                };
                let cols = self.columns(field(m, &at, "columns")?, &format!("{at}/columns"))?;
                Ok(TableExpr::proj(of, cols))
            }
            "filter" => {
                let m = object(body, &at)?;
                only_keys(m, &at, &["of", "op", "lhs", "rhs"])?;
                let of = match m.get("of") {
                    Some(of) => self.table_expr(of, &format!("{at}/of"))?,
                    None => TableExpr::nu(),
                };
                let op_at = format!("{at}/op");
                let s = string(field(m, &at, "op")?, &op_at)?;
                let op = FilterOp::parse(s)
                    .map_or_else(|| fail(&op_at, format!("unknown comparison `{s}`")), Ok)?;
                let lhs = self.operand(field(m, &at, "lhs")?, &format!("{at}/lhs"))?;
                let rhs = self.operand(field(m, &at, "rhs")?, &format!("{at}/rhs"))?;
                Ok(TableExpr::Filter(Box::new(of), FilterPred { lhs, op, rhs }))
            }
            other => fail(&at, format!("`{other}` is not a table expression")),
        }
    }

    fn operand(&mut self, v: &Json, at: &str) -> Result<Operand, SpecError> {
        let (kind, body, at) = node(v, at)?;
        match kind {
            "col" => Ok(Operand::Column(self.column(body, &at)?)),
            "const" => Ok(Operand::Value(json_value(body, &at)?)),
            other => fail(&at, format!("`{other}` is not an operand")),
        }
    }
}

fn json_value(v: &Json, at: &str) -> Result<Value, SpecError> {
    match v {
        Json::Null => Ok(Value::Null),
        Json::String(s) => Ok(Value::Text(s.clone())),
        Json::Number(n) => match n.as_i64() {
            Some(i) => Ok(Value::Integer(i)),
            None => Ok(Value::Number(n.as_f64().unwrap_or(f64::NAN))),
        },
        Json::Object(m) if m.len() == 1 && m.contains_key("date") => {
            let s = string(&m["date"], &format!("{at}/date"))?;
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map(Value::Date)
                .or_else(|_| fail(&format!("{at}/date"), "expected YYYY-MM-DD"))
        }
        _ => fail(at, "expected a string, number, null or date"),
    }
}

fn parse_spec(ctx: &mut Ctx<'_>, v: &Json, at: &str) -> Result<ScoredSpec, SpecError> {
    let m = object(v, at)?;
    only_keys(m, at, &["prob", "plot", "table"])?;
    let prob_at = format!("{at}/prob");
    let prob = field(m, at, "prob")?
        .as_f64()
        .map_or_else(|| fail(&prob_at, "expected a number"), Ok)?;
    if !(prob > 0.0 && prob <= 1.0) {
        return fail(&prob_at, "probability must be in (0, 1]");
    }

    let table_at = format!("{at}/table");
    let tm = object(field(m, at, "table")?, &table_at)?;
    only_keys(tm, &table_at, &["schema", "qualifier"])?;
    let schema_at = format!("{table_at}/schema");
    let mut schema = Schema::new();
    for (c, t) in object(field(tm, &table_at, "schema")?, &schema_at)? {
        let at = format!("{schema_at}/{}", escape(c));
        ctx.check_column(c, &at);
        schema.insert(c.clone(), column_type(t, &at)?);
    }
    ctx.wildcard = schema.keys().cloned().collect();
    let table_q = match tm.get("qualifier") {
        Some(q) => ctx.qualifier(q, &format!("{table_at}/qualifier"))?,
        None => Qualifier::True,
    };

    let plot_at = format!("{at}/plot");
    let pm = object(field(m, at, "plot")?, &plot_at)?;
    only_keys(pm, &plot_at, &["base", "qualifier"])?;
    let base_at = format!("{plot_at}/base");
    let base = string(field(pm, &plot_at, "base")?, &base_at)?;
    let kind = PlotKind::ALL
        .into_iter()
        .find(|k| k.type_name() == base)
        .map_or_else(|| fail(&base_at, format!("unknown plot type `{base}`")), Ok)?;
    let plot_q = match pm.get("qualifier") {
        Some(q) => ctx.qualifier(q, &format!("{plot_at}/qualifier"))?,
        None => Qualifier::True,
    };
    Ok(ScoredSpec {
        plot: RefinementType::scalar(BaseType::Plot(kind), plot_q),
        table: RefinementType::table(schema, table_q),
        score: prob,
    })
}

/// Parses and validates a specification file. When `columns` is given, qualifiers naming other
/// columns produce warnings; they are kept since they may refer to derived columns.
pub fn parse_spec_file(text: &str, columns: Option<&[String]>) -> Result<SpecFile, SpecError> {
    let root: Json = serde_json::from_str(text).map_err(|e| SpecError::Json(e.to_string()))?;
    let m = object(&root, "")?;
    only_keys(m, "", &["version", "datasets", "specs"])?;
    if let Some(v) = m.get("version") {
        if v.as_u64() != Some(FORMAT_VERSION) {
            return fail(
                "/version",
                format!("unsupported version, expected {FORMAT_VERSION}"),
            );
        }
    }
    let mut out = SpecFile::default();
    if let Some(d) = m.get("datasets") {
        let dm = object(d, "/datasets")?;
        only_keys(dm, "/datasets", &["column_types"])?;
        if let Some(ct) = dm.get("column_types") {
            for (c, t) in object(ct, "/datasets/column_types")? {
                out.column_types.insert(
                    c.clone(),
                    column_type(t, &format!("/datasets/column_types/{}", escape(c)))?,
                );
            }
        }
    }
    let specs = field(m, "", "specs")?
        .as_array()
        .map_or_else(|| fail("/specs", "expected an array"), Ok)?;
    let mut ctx = Ctx {
        warnings: Vec::new(),
        columns,
        wildcard: Vec::new(),
    };
    for (i, s) in specs.iter().enumerate() {
        out.specs
            .push(parse_spec(&mut ctx, s, &format!("/specs/{i}"))?);
    }
    if out.specs.windows(2).any(|w| w[0].score < w[1].score) {
        ctx.warnings
            .push("specifications were not sorted by probability; reordered".into());
        out.specs.sort_by(|a, b| b.score.total_cmp(&a.score));
    }
    out.warnings = ctx.warnings;
    Ok(out)
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Date(d) => json!({ "date": d.format("%Y-%m-%d").to_string() }),
        v => v.to_json(),
    }
}

fn operand_json(o: &Operand) -> Json {
    match o {
        Operand::Column(c) => json!({ "col": c }),
        Operand::Value(v) => json!({ "const": value_json(v) }),
    }
}

fn table_expr_json(e: &TableExpr) -> Json {
    let of = |inner: &TableExpr, m: &mut Map<String, Json>| {
        if *inner != TableExpr::nu() {
            m.insert("of".into(), table_expr_json(inner));
        }
    };
    match e {
        TableExpr::Var(v) => json!({ "var": v }),
        TableExpr::Proj(inner, cols) => {
            let mut m = Map::new();
            of(inner, &mut m);
            m.insert("columns".into(), json!(cols));
            json!({ "proj": m })
        }
        TableExpr::Filter(inner, p) => {
            let mut m = Map::new();
            of(inner, &mut m);
            m.insert("op".into(), json!(p.op.symbol()));
            m.insert("lhs".into(), operand_json(&p.lhs));
            m.insert("rhs".into(), operand_json(&p.rhs));
            json!({ "filter": m })
        }
    }
}

fn term_json(t: &Term) -> Json {
    match t {
        Term::Card(e) => json!({ "card": table_expr_json(e) }),
        Term::Max(e) => json!({ "max": table_expr_json(e) }),
        Term::Min(e) => json!({ "min": table_expr_json(e) }),
        Term::Const(n) => json!({ "const": n }),
        Term::Var(v) => json!({ "var": v }),
        Term::Offset(inner, k) => {
            let (base, j) = (inner.split_offset().0, inner.split_offset().1 + k);
            let mut v = term_json(base);
            v["offset"] = json!(j);
            v
        }
    }
}

pub fn qualifier_json(q: &Qualifier) -> Json {
    match q {
        Qualifier::True => json!({ "const": true }),
        Qualifier::False => json!({ "const": false }),
        Qualifier::Not(inner) => json!({ "not": qualifier_json(inner) }),
        Qualifier::And(qs) => json!({ "and": qs.iter().map(qualifier_json).collect::<Vec<_>>() }),
        Qualifier::Or(qs) => json!({ "or": qs.iter().map(qualifier_json).collect::<Vec<_>>() }),
        Qualifier::Cmp(a, op, b) => {
            json!({ "cmp": { "op": op.symbol(), "lhs": term_json(a), "rhs": term_json(b) } })
        }
        Qualifier::TableEq(a, b) => {
            json!({ "cmp": { "op": "=", "lhs": table_expr_json(a), "rhs": table_expr_json(b) } })
        }
        Qualifier::Syn(a) => {
            let mut m = Map::new();
            if a.var != NU {
                m.insert("var".into(), json!(a.var));
            }
            match &a.field {
                SynField::Column(c) => m.insert("column".into(), json!(c)),
                SynField::Channel(ch) => m.insert("channel".into(), json!(ch.name())),
            };
            match &a.source {
                SynSource::Op(op) => {
                    m.insert("op".into(), json!(op.name()));
                }
                SynSource::Column { var, col } => {
                    m.insert("from".into(), json!(col));
                    if var != TABLE_PARAM {
                        m.insert("from_var".into(), json!(var));
                    }
                }
            }
            json!({ "pi": m })
        }
    }
}

pub fn spec_json(s: &ScoredSpec) -> Json {
    let kind = s.kind().map_or("BarPlot", |k| k.type_name());
    let schema: Map<String, Json> = s
        .table
        .schema()
        .into_iter()
        .flatten()
        .map(|(c, t)| (c.clone(), json!(t.name())))
        .collect();
    json!({
        "prob": s.score,
        "plot": { "base": kind, "qualifier": qualifier_json(s.plot.qual()) },
        "table": { "schema": schema, "qualifier": qualifier_json(s.table.qual()) },
    })
}

/// Canonical serialization; `parse_spec_file` reads it back to the same specifications.
pub fn serialize_specs(
    specs: &[ScoredSpec],
    column_types: &BTreeMap<String, ColumnType>,
) -> String {
    let mut root = Map::new();
    root.insert("version".into(), json!(FORMAT_VERSION));
    if !column_types.is_empty() {
        let ct: Map<String, Json> = column_types
            .iter()
            .map(|(c, t)| (c.clone(), json!(t.name())))
            .collect();
        root.insert("datasets".into(), json!({ "column_types": ct }));
    }
    root.insert(
        "specs".into(),
        Json::Array(specs.iter().map(spec_json).collect()),
    );
    serde_json::to_string_pretty(&Json::Object(root)).expect("serializable")
}
