//! Concrete s-expression syntax for table and visualization programs.
//!
//! ```text
//! vis     := (let T table plot) | table
//! table   := T
//!          | (select table (col ...))
//!          | (filter table (cmp operand operand))
//!          | (summarize table (col ...) agg col)
//!          | (bin table col n)
//!          | (mutate table col (op col col ...))
//! plot    := (kind (x col) (y col) [(color col)] [(subplot col)])
//! operand := col | "text" | number | null | @yyyy-mm-dd
//! ```
//!
//! Column names that are not plain identifiers are written between backquotes.

use std::fmt::Write as _;

use chrono::NaiveDate;
use thiserror::Error;

use crate::program::{
    Agg, Channel, FilterOp, FilterPred, Operand, PlotKind, PlotProgram, TableProgram, VisProgram,
};
use crate::value::Value;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// A parsed source file: either a bare table program or a full visualization program.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Table(TableProgram),
    Vis(VisProgram),
}

fn is_plain(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
        && !matches!(name, "T" | "null" | "let")
}

fn ident(name: &str) -> String {
    if is_plain(name) {
        name.to_string()
    } else {
        format!("`{}`", name.replace('\\', "\\\\").replace('`', "\\`"))
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn print_value(v: &Value) -> String {
    match v {
        Value::Text(s) => quote(s),
        Value::Null => "null".into(),
        Value::Date(d) => format!("@{}", d.format("%Y-%m-%d")),
        Value::Interval { lo, hi } => {
            format!("(interval {} {})", Value::Number(*lo), Value::Number(*hi))
        }
        Value::Number(x) if x.fract() == 0.0 && x.is_finite() => format!("{x:.1}"),
        v => v.to_string(),
    }
}

fn print_operand(o: &Operand) -> String {
    match o {
        Operand::Column(c) => ident(c),
        Operand::Value(v) => print_value(v),
    }
}

fn idents(cols: &[String]) -> String {
    cols.iter().map(|c| ident(c)).collect::<Vec<_>>().join(" ")
}

pub fn print_table(p: &TableProgram) -> String {
    match p {
        TableProgram::Input => "T".into(),
        TableProgram::Select { input, columns } => {
            format!("(select {} ({}))", print_table(input), idents(columns))
        }
        TableProgram::Filter { input, pred } => format!(
            "(filter {} ({} {} {}))",
            print_table(input),
            pred.op.symbol(),
            print_operand(&pred.lhs),
            print_operand(&pred.rhs)
        ),
        TableProgram::Summarize {
            input,
            keys,
            agg,
            target,
        } => {
            format!(
                "(summarize {} ({}) {} {})",
                print_table(input),
                idents(keys),
                agg.name(),
                ident(target)
            )
        }
        TableProgram::Bin {
            input,
            bins,
            target,
        } => format!("(bin {} {} {bins})", print_table(input), ident(target)),
        TableProgram::Mutate {
            input,
            target,
            op,
            args,
        } => {
            format!(
                "(mutate {} {} ({} {}))",
                print_table(input),
                ident(target),
                ident(op),
                idents(args)
            )
        }
    }
}

pub fn print_plot(p: &PlotProgram) -> String {
    let mut out = format!("({}", p.kind.keyword());
    for (ch, c) in p.bindings() {
        let _ = write!(out, " ({} {})", ch.name(), ident(&c));
    }
    out.push(')');
    out
}

pub fn print_vis(p: &VisProgram) -> String {
    format!("(let T {} {})", print_table(&p.table), print_plot(&p.plot))
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
    Quoted(String),
    Str(String),
}

fn position(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn error(src: &str, offset: usize, message: impl Into<String>) -> DslError {
    let (line, col) = position(src, offset);
    DslError {
        line,
        col,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, DslError> {
    let mut toks = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            ';' => while it.next_if(|&(_, c)| c != '\n').is_some() {},
            '(' | ')' => {
                it.next();
                toks.push((if c == '(' { Tok::Open } else { Tok::Close }, i));
            }
            '"' | '`' => {
                it.next();
                let mut s = String::new();
                loop {
                    match it.next() {
                        None => return Err(error(src, i, "unterminated literal")),
                        Some((_, '\\')) => match it.next() {
                            Some((_, e)) => s.push(e),
                            None => return Err(error(src, i, "unterminated literal")),
                        },
                        Some((_, e)) if e == c => break,
                        Some((_, e)) => s.push(e),
                    }
                }
                toks.push((
                    if c == '"' {
                        Tok::Str(s)
                    } else {
                        Tok::Quoted(s)
                    },
                    i,
                ));
            }
            _ => {
                let mut s = String::new();
                while let Some((_, c)) = it.next_if(|&(_, c)| {
                    !c.is_whitespace() && !matches!(c, '(' | ')' | '"' | '`' | ';')
                }) {
                    s.push(c);
                }
                toks.push((Tok::Atom(s), i));
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser<'_> {
    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.src.len(), |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, DslError> {
        Err(error(self.src, self.offset(), message))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn open(&mut self) -> Result<(), DslError> {
        match self.peek() {
            Some(Tok::Open) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected `(`"),
        }
    }

    fn close(&mut self) -> Result<(), DslError> {
        match self.peek() {
            Some(Tok::Close) => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err("expected `)`"),
        }
    }

    fn keyword(&mut self) -> Result<String, DslError> {
        match self.peek() {
            Some(Tok::Atom(a)) => {
                let a = a.clone();
                self.pos += 1;
                Ok(a)
            }
            _ => self.err("expected a keyword"),
        }
    }

    fn column(&mut self) -> Result<String, DslError> {
        match self.peek() {
            Some(Tok::Quoted(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Atom(a)) if is_plain(a) => {
                let a = a.clone();
                self.pos += 1;
                Ok(a)
            }
            _ => self.err("expected a column name"),
        }
    }

    fn columns(&mut self) -> Result<Vec<String>, DslError> {
        self.open()?;
        let mut out = Vec::new();
        while self.peek() != Some(&Tok::Close) {
            out.push(self.column()?);
        }
        self.close()?;
        Ok(out)
    }

    fn number(&mut self) -> Result<usize, DslError> {
        let at = self.pos;
        match self.keyword()?.parse() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos = at;
                self.err("expected a non-negative integer")
            }
        }
    }

    fn operand(&mut self) -> Result<Operand, DslError> {
        let at = self.pos;
        match self.next() {
            Some(Tok::Str(s)) => Ok(Operand::Value(Value::Text(s))),
            Some(Tok::Quoted(s)) => Ok(Operand::Column(s)),
            Some(Tok::Atom(a)) if a == "null" => Ok(Operand::Value(Value::Null)),
            Some(Tok::Atom(a)) if a.starts_with('@') => {
                match NaiveDate::parse_from_str(&a[1..], "%Y-%m-%d") {
                    Ok(d) => Ok(Operand::Value(Value::Date(d))),
                    Err(_) => {
                        self.pos = at;
                        self.err(format!("bad date `{a}`"))
                    }
                }
            }
            Some(Tok::Atom(a)) if is_plain(&a) => Ok(Operand::Column(a)),
            Some(Tok::Atom(a)) => {
                if let Ok(i) = a.parse::<i64>() {
                    Ok(Operand::Value(Value::Integer(i)))
                } else if let Ok(x) = a.parse::<f64>() {
                    Ok(Operand::Value(Value::Number(x)))
                } else {
                    self.pos = at;
                    self.err(format!("bad operand `{a}`"))
                }
            }
            Some(Tok::Open) => {
                self.pos = at;
                self.open()?;
                if self.keyword()? != "interval" {
                    self.pos = at;
                    return self.err("expected `interval`");
                }
                let mut bound = || -> Result<f64, DslError> {
                    let at = self.pos;
                    self.keyword()?.parse().or_else(|_| {
                        self.pos = at;
                        self.err("expected a number")
                    })
                };
                let (lo, hi) = (bound()?, bound()?);
                self.close()?;
                Ok(Operand::Value(Value::Interval { lo, hi }))
            }
            _ => {
                self.pos = at;
                self.err("expected an operand")
            }
        }
    }

    fn table(&mut self) -> Result<TableProgram, DslError> {
        if let Some(Tok::Atom(a)) = self.peek() {
            if a == "T" {
                self.pos += 1;
                return Ok(TableProgram::Input);
            }
        }
        self.open()?;
        let at = self.pos;
        let head = self.keyword()?;
        let p = match head.as_str() {
            "select" => {
                let input = Box::new(self.table()?);
                TableProgram::Select {
                    input,
                    columns: self.columns()?,
                }
            }
            "filter" => {
                let input = Box::new(self.table()?);
                self.open()?;
                let at = self.pos;
                let sym = self.keyword()?;
                let Some(op) = FilterOp::parse(&sym) else {
                    self.pos = at;
                    return self.err(format!("unknown comparison `{sym}`"));
                };
                let lhs = self.operand()?;
                let rhs = self.operand()?;
                self.close()?;
                TableProgram::Filter {
                    input,
                    pred: FilterPred { lhs, op, rhs },
                }
            }
            "summarize" => {
                let input = Box::new(self.table()?);
                let keys = self.columns()?;
                let at = self.pos;
                let name = self.keyword()?;
                let Some(agg) = Agg::parse(&name) else {
                    self.pos = at;
                    return self.err(format!("unknown aggregate `{name}`"));
                };
                TableProgram::Summarize {
                    input,
                    keys,
                    agg,
                    target: self.column()?,
                }
            }
            "bin" => {
                let input = Box::new(self.table()?);
                let target = self.column()?;
                TableProgram::Bin {
                    input,
                    target,
                    bins: self.number()?,
                }
            }
            "mutate" => {
                let input = Box::new(self.table()?);
                let target = self.column()?;
                self.open()?;
                let op = self.column()?;
                let mut args = Vec::new();
                while self.peek() != Some(&Tok::Close) {
                    args.push(self.column()?);
                }
                self.close()?;
                TableProgram::Mutate {
                    input,
                    target,
                    op,
                    args,
                }
            }
            other => {
                self.pos = at;
                return self.err(format!("unknown operator `{other}`"));
            }
        };
        self.close()?;
        Ok(p)
    }

    fn plot(&mut self) -> Result<PlotProgram, DslError> {
        self.open()?;
        let at = self.pos;
        let name = self.keyword()?;
        let Some(kind) = PlotKind::parse(&name) else {
            self.pos = at;
            return self.err(format!("unknown plot kind `{name}`"));
        };
        let mut bound = std::collections::BTreeMap::new();
        while self.peek() != Some(&Tok::Close) {
            self.open()?;
            let at = self.pos;
            let name = self.keyword()?;
            let Some(ch) = Channel::parse(&name) else {
                self.pos = at;
                return self.err(format!("unknown channel `{name}`"));
            };
            if bound.contains_key(&ch) {
                self.pos = at;
                return self.err(format!("channel `{name}` bound twice"));
            }
            bound.insert(ch, self.column()?);
            self.close()?;
        }
        let (Some(x), Some(y)) = (bound.remove(&Channel::X), bound.remove(&Channel::Y)) else {
            return self.err("plots need both `x` and `y`");
        };
        self.close()?;
        Ok(PlotProgram {
            kind,
            x,
            y,
            color: bound.remove(&Channel::Color),
            subplot: bound.remove(&Channel::Subplot),
        })
    }

    fn source(&mut self) -> Result<Source, DslError> {
        let is_let = matches!(self.toks.get(self.pos + 1), Some((Tok::Atom(a), _)) if a == "let")
            && self.peek() == Some(&Tok::Open);
        if !is_let {
            return Ok(Source::Table(self.table()?));
        }
        self.open()?;
        self.pos += 1;
        if self.keyword()? != "T" {
            self.pos -= 1;
            return self.err("expected `T`");
        }
        let table = self.table()?;
        let plot = self.plot()?;
        self.close()?;
        Ok(Source::Vis(VisProgram { table, plot }))
    }

    fn finish(&self) -> Result<(), DslError> {
        if self.pos < self.toks.len() {
            return self.err("trailing input");
        }
        Ok(())
    }
}

/// Parses a table program or a `let` visualization program.
pub fn parse_source(src: &str) -> Result<Source, DslError> {
    let mut p = Parser {
        src,
        toks: lex(src)?,
        pos: 0,
    };
    if p.toks.is_empty() {
        return p.err("empty program");
    }
    let s = p.source()?;
    p.finish()?;
    Ok(s)
}

pub fn parse_table(src: &str) -> Result<TableProgram, DslError> {
    match parse_source(src)? {
        Source::Table(t) => Ok(t),
        Source::Vis(_) => Err(error(
            src,
            0,
            "expected a table program, found a visualization",
        )),
    }
}

pub fn parse_vis(src: &str) -> Result<VisProgram, DslError> {
    match parse_source(src)? {
        Source::Vis(v) => Ok(v),
        Source::Table(_) => Err(error(src, 0, "expected a `let` visualization program")),
    }
}
