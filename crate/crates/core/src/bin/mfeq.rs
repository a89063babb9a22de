use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mfeq::cli::{self, Command, Format, Model, RunConfig};

/// Solve q-shift functional equations as truncated multivariate series.
#[derive(Parser, Debug)]
#[command(name = "mfeq", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the solution series.
    Solve(Common),
    /// Cross-check the solvers and the model's combinatorial oracles.
    Verify(Common),
    /// Print a coefficient grid over two variables (others set to 1).
    Table {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "x")]
        rows: String,
        #[arg(long, default_value = "q")]
        cols: String,
    },
}

#[derive(clap::Args, Debug)]
struct Common {
    /// coin, mbm, symmetric, polyomino, lmr or file:PATH
    #[arg(long)]
    model: Model,
    /// Truncation caps, e.g. --cap x=8 q=8
    #[arg(long = "cap", value_name = "VAR=N", num_args = 1.., value_parser = parse_cap)]
    caps: Vec<(String, u32)>,
    /// Model parameter, e.g. L=2 or f=q*s
    #[arg(long = "param", value_name = "NAME=V", num_args = 1.., value_parser = parse_param)]
    params: Vec<(String, String)>,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "human")]
    format: Format,
    /// Set a variable to 1 in the printed series
    #[arg(long = "specialize", value_name = "VAR=1", num_args = 1.., value_parser = parse_specialize)]
    specialize: Vec<String>,
    /// Worker threads (1 disables parallel search)
    #[arg(long)]
    threads: Option<usize>,
}

fn split_pair(s: &str) -> Result<(&str, &str), String> {
    s.split_once('=')
        .filter(|(k, _)| !k.trim().is_empty())
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))
}

fn parse_cap(s: &str) -> Result<(String, u32), String> {
    let (k, v) = split_pair(s)?;
    let n = v.parse().map_err(|_| format!("cap `{k}` must be a nonnegative integer, got `{v}`"))?;
    Ok((k.to_string(), n))
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    let (k, v) = split_pair(s)?;
    Ok((k.to_string(), v.to_string()))
}

fn parse_specialize(s: &str) -> Result<String, String> {
    match split_pair(s)? {
        (k, "1") => Ok(k.to_string()),
        (k, v) => Err(format!("only VAR=1 is supported, got `{k}={v}`")),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, common, rows, cols) = match args.command {
        Cmd::Solve(c) => (Command::Solve, c, None, None),
        Cmd::Verify(c) => (Command::Verify, c, None, None),
        Cmd::Table { common, rows, cols } => (Command::Table, common, Some(rows), Some(cols)),
    };
    let mut config = RunConfig::new(command, common.model);
    config.caps = common.caps;
    config.params = common.params.into_iter().collect::<BTreeMap<_, _>>();
    config.format = common.format;
    config.out = common.out;
    config.specialize = common.specialize;
    if let Some(r) = rows {
        config.rows = r;
    }
    if let Some(c) = cols {
        config.cols = c;
    }
    if let Some(n) = common.threads {
        config.parallel = n > 1;
        if n > 1 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }

    let outcome = match cli::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &outcome.output) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", outcome.output),
    }
    ExitCode::from(outcome.exit_code as u8)
}
