mod args;
mod bot;
mod data;
mod eval;
mod policy;
mod probe;
mod run;
mod tournament;

use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use args::{Cli, Command};
use clap::Parser;
use run::{ErrorClass, Run, RunConfig};

fn dispatch(command: &Command, run: &mut Run) -> Result<()> {
    match command {
        Command::Gen(c) => data::gen(c, run),
        Command::Ingest(a) => data::ingest(a, run),
        Command::Split(a) => data::split(a, run),
        Command::Eval(c) => eval::eval(c, run),
        Command::Tournament(a) => tournament::tournament(a, run),
        Command::Rate(a) => tournament::rate(a, run),
        Command::Probe(c) => probe::probe(c, run),
        Command::Bot(c) => bot::bot(c, run),
        Command::Rerun(_) => Err(anyhow!("a run manifest cannot itself record a rerun")).context(ErrorClass::Config),
    }
}

fn config_of(cli: &Cli) -> Result<RunConfig> {
    let workers = match cli.workers {
        Some(0) => return Err(anyhow!("--workers must be at least 1")).context(ErrorClass::Usage),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    match &cli.command {
        Command::Rerun(a) => {
            let manifest = run::read_manifest(&a.manifest).context(ErrorClass::Config)?;
            Ok(RunConfig { workers: cli.workers.unwrap_or(manifest.config.workers), ..manifest.config })
        }
        command => Ok(RunConfig { command: command.clone(), workers }),
    }
}

fn report(err: &anyhow::Error) -> ExitCode {
    let class = ErrorClass::of(err);
    let message = run::describe(err);
    eprintln!("error: {message}");
    eprintln!("{}", serde_json::json!({"error": class.key(), "exit_code": class.exit_code(), "message": message}));
    ExitCode::from(class.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ErrorClass::Usage.exit_code() } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let config = match config_of(&cli) {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    let mut run = Run::new(cli.out.clone(), config.workers);
    let result = dispatch(&config.command, &mut run);
    if result.is_ok() || run.has_outputs() {
        match run.finish(config, result.as_ref().err()) {
            Ok(path) => log::info!("run manifest: {}", path.display()),
            Err(e) if result.is_ok() => return report(&e),
            Err(e) => log::warn!("could not write the run manifest: {}", run::describe(&e)),
        }
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
