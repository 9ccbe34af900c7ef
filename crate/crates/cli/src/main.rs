use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crflow_cli::scenario::{find_scenario, parse_documents, registry};
use crflow_cli::{run_scenario, CliError, Result, RunOutcome, Scenario};

#[derive(Parser)]
#[command(name = "crflow", version, about = "Conformal Ricci flow experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenario files (JSON) or built-in scenario names.
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output root; each scenario writes into `<root>/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the scenarios concurrently.
        #[arg(long)]
        sweep: bool,
    },
    /// List the built-in scenarios, or print one as a JSON document.
    Scenarios { name: Option<String> },
    /// Print the JSON schema of scenario documents.
    Schema,
}

fn load(arg: &str) -> Result<Vec<Scenario>> {
    match std::fs::read_to_string(arg) {
        Ok(text) => parse_documents(&text).map_err(|e| CliError::Config(format!("{arg}: {e}"))),
        Err(err) => match find_scenario(arg) {
            Some(s) => Ok(vec![s.resolve()?]),
            None => Err(CliError::Config(format!("{arg}: {err}, and no built-in scenario has that name"))),
        },
    }
}

fn output_root(out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| std::env::var_os("CRFLOW_OUT").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("crflow_out"))
}

fn report(r: &Result<RunOutcome>, name: &str) -> i32 {
    match r {
        Ok(o) => {
            println!("{}: {:?} -> {}", o.name, o.termination, o.out_dir.display());
            o.exit_code
        }
        Err(e) => {
            eprintln!("{name}: {e}");
            e.exit_code()
        }
    }
}

fn run(configs: Vec<String>, out: Option<PathBuf>, sweep: bool) -> Result<i32> {
    let mut scenarios = Vec::new();
    for c in &configs {
        scenarios.extend(load(c)?);
    }
    let mut names: Vec<&str> = scenarios.iter().map(|s| s.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(CliError::Config(format!("scenario name {} is used twice", w[0])));
    }
    let root = output_root(out);
    let one = |s: &Scenario| run_scenario(s, &root.join(&s.name));
    let results: Vec<Result<RunOutcome>> =
        if sweep { scenarios.par_iter().map(one).collect() } else { scenarios.iter().map(one).collect() };
    Ok(results.iter().zip(&scenarios).map(|(r, s)| report(r, &s.name)).max().unwrap_or(0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { configs, out, sweep } => run(configs, out, sweep).unwrap_or_else(|e| {
            eprintln!("{e}");
            e.exit_code()
        }),
        Command::Scenarios { name: None } => {
            for s in registry() {
                println!("{:<26} {}", s.name, s.description.unwrap_or_default());
            }
            0
        }
        Command::Scenarios { name: Some(name) } => match find_scenario(&name) {
            Some(s) => {
                println!("{}", serde_json::to_string_pretty(&s).expect("scenario serializes"));
                0
            }
            None => {
                eprintln!("no built-in scenario named {name}");
                2
            }
        },
        Command::Schema => {
            println!("{}", serde_json::to_string_pretty(&crflow_cli::schema::schema()).expect("schema serializes"));
            0
        }
    };
    ExitCode::from(code as u8)
}
