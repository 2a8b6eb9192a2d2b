//! Subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use plotsynth::dsl::{parse_source, Source};
use plotsynth::eval::eval_transform_with;
use plotsynth::session::{
    run_session, LemmaBank, SessionError, SessionOptions, SessionResult, SpecSource,
};
use plotsynth::synth::SynthConfig;
use plotsynth::table::{load_table, LoadOptions, Table};
use plotsynth::typing::{input_type, type_of_plot, type_of_table};

use crate::overrides::Overrides;
use crate::{result_json, Internal};

#[derive(Debug, Parser)]
#[command(
    name = "plotsynth",
    version,
    about = "Synthesize visualizations from tabular data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for programs matching a query or a spec file.
    Synthesize(SynthesizeArgs),
    /// Print the type of a program over a dataset.
    Typecheck(ProgramArgs),
    /// Evaluate a program's table transformation and print the result as CSV.
    Run(ProgramArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Integer columns with more distinct values are treated as continuous.
    #[arg(long, default_value_t = 20)]
    pub discrete_threshold: usize,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Natural-language request.
    #[arg(
        long,
        conflicts_with = "spec_file",
        required_unless_present = "spec_file"
    )]
    pub query: Option<String>,
    /// JSON file of ranked specifications.
    #[arg(long)]
    pub spec_file: Option<PathBuf>,
    /// base-only, syn-only, table-only or no-lemma. May be repeated.
    #[arg(long)]
    pub ablation: Vec<String>,
    /// Number of specifications to search.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub max_results: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_expansions: Option<u64>,
    /// Report zero timings so repeated runs print identical output.
    #[arg(long)]
    pub seedless_determinism: bool,
    /// Directory for result.json and one .vl.json per program.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProgramArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Program file; `-` reads standard input.
    pub program: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Load every CSV file in this directory at startup.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
}

pub fn load(args: &DataArgs) -> Result<Table> {
    let bytes = fs::read(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let options = LoadOptions {
        discrete_threshold: args.discrete_threshold,
        ..LoadOptions::default()
    };
    load_table(&bytes, &options).with_context(|| format!("loading {}", args.data.display()))
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        return std::io::read_to_string(std::io::stdin()).context("reading standard input");
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn synthesize(args: &SynthesizeArgs) -> Result<SessionResult> {
    let data = load(&args.data)?;
    let source = match (&args.query, &args.spec_file) {
        (Some(q), None) => SpecSource::Query(q.clone()),
        (None, Some(path)) => SpecSource::SpecFile(read_text(path)?),
        _ => return Err(anyhow!("give exactly one of --query and --spec-file")),
    };
    let overrides = Overrides {
        k: args.k,
        max_results: args.max_results,
        max_depth: args.max_depth,
        max_expansions: args.max_expansions,
        ablation: args.ablation.clone(),
        ..Overrides::default()
    };
    let options = SessionOptions {
        config: overrides.apply(SynthConfig::default())?,
        deterministic: args.seedless_determinism,
    };
    run_session(&data, &source, &options, &LemmaBank::default()).map_err(|e| match e {
        SessionError::Vega(e) => anyhow::Error::new(Internal(e.to_string())),
        e => e.into(),
    })
}

pub fn write_outputs(dir: &Path, result: &SessionResult) -> Result<()> {
    let io = |e: std::io::Error| anyhow::Error::new(Internal(format!("{}: {e}", dir.display())));
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("result.json"), result_json(result)).map_err(io)?;
    for (i, r) in result.results.iter().enumerate() {
        let doc = serde_json::to_string_pretty(&r.vega).expect("vega serializes");
        fs::write(dir.join(format!("{:02}.vl.json", i + 1)), doc + "\n").map_err(io)?;
    }
    Ok(())
}

/// Inferred types, one line per component.
pub fn typecheck(args: &ProgramArgs) -> Result<String> {
    let data = load(&args.data)?;
    let text = read_text(&args.program)?;
    let name = args.program.display();
    let source = parse_source(&text).map_err(|e| anyhow!("{name}:{e}"))?;
    let registry = SynthConfig::default().mutate;
    let input = input_type(&data);
    let table = match &source {
        Source::Table(p) => p,
        Source::Vis(v) => &v.table,
    };
    let t = type_of_table(table, &input, &registry).context("type error")?;
    let mut out = format!("table: {t}\n");
    if let Source::Vis(v) = &source {
        let p = type_of_plot(&v.plot, &t).context("type error")?;
        out.push_str(&format!("plot: {p}\n"));
    }
    Ok(out)
}

pub fn run_program(args: &ProgramArgs) -> Result<String> {
    let data = load(&args.data)?;
    let text = read_text(&args.program)?;
    let name = args.program.display();
    let table = match parse_source(&text).map_err(|e| anyhow!("{name}:{e}"))? {
        Source::Table(p) => p,
        Source::Vis(v) => v.table,
    };
    let out = eval_transform_with(&table, &data, &SynthConfig::default().mutate)
        .context("evaluation failed")?;
    Ok(out.to_csv())
}
