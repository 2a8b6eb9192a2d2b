use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use plotsynth_cli::commands::{self, Cli, Command};
use plotsynth_cli::service::{self, AppState};
use plotsynth_cli::{result_json, Internal};

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Synthesize(args) => {
            let result = commands::synthesize(&args)?;
            if let Some(dir) = &args.out {
                commands::write_outputs(dir, &result)?;
            }
            print!("{}", result_json(&result));
        }
        Command::Typecheck(args) => print!("{}", commands::typecheck(&args)?),
        Command::Run(args) => print!("{}", commands::run_program(&args)?),
        Command::Serve(args) => {
            let state = Arc::new(AppState::new());
            if let Some(dir) = &args.data_dir {
                let n = state.load_dir(dir)?;
                eprintln!("loaded {n} datasets from {}", dir.display());
            }
            let rt = tokio::runtime::Runtime::new()
                .map_err(|e| anyhow::Error::new(Internal(e.to_string())))?;
            rt.block_on(service::serve(&args.host, args.port, state))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<Internal>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
        Err(_) => ExitCode::from(2),
    }
}
