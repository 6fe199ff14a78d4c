mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::Globals;

fn parse() -> Result<Cli, ExitCode> {
    let raw: Vec<OsString> = std::env::args_os().collect();
    let argv = match config::config_path(&raw) {
        Some(path) => {
            let spliced = config::read_pairs(&path).and_then(|pairs| config::splice(raw, &pairs, &Cli::command()));
            match spliced {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Err(ExitCode::from(1));
                }
            }
        }
        None => raw,
    };
    Cli::try_parse_from(argv).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            ExitCode::from(1)
        } else {
            ExitCode::SUCCESS
        }
    })
}

fn main() -> ExitCode {
    let cli = match parse() {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let globals = Globals {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
    };
    let outcome = match &cli.command {
        Command::Generate(a) => commands::generate(a, &globals),
        Command::Spread(a) => commands::spread(a, &globals),
        Command::Optimize(a) => commands::optimize(a, &globals),
        Command::Filter(a) => commands::filter(a, &globals),
        Command::Correlate(a) => commands::correlate(a, &globals),
        Command::Compare(a) => commands::compare(a, &globals),
        Command::Centrality(a) => commands::centrality_cmd(a, &globals),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
