use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symmlab::scenario::{self, ScenarioConfig};

/// Scenario runner for the model-manifold workbench.
#[derive(Parser)]
#[command(name = "symmlab", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario config (a TOML path or a built-in scenario name) and
    /// write its JSON report.
    Run {
        config: String,
        /// Report destination; defaults to the config's outputs.report, then stdout.
        #[arg(long)]
        report: Option<String>,
        /// Profile CSV destination; defaults to the config's outputs.csv.
        #[arg(long)]
        csv: Option<String>,
        /// Worker threads for check execution.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Seed override for geodesic and node sampling.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List built-in manifolds, fields, checks and scenarios.
    List,
    /// Write the symmetrization profile CSV for a scenario's field and grid.
    Profile {
        config: String,
        #[arg(long)]
        csv: Option<String>,
    },
}

fn load_config(arg: &str) -> Result<ScenarioConfig, String> {
    let text = if Path::new(arg).exists() {
        std::fs::read_to_string(arg).map_err(|e| format!("cannot read '{arg}': {e}"))?
    } else if let Some(builtin) = scenario::builtin_scenario(arg) {
        builtin.to_owned()
    } else {
        return Err(format!(
            "'{arg}' is neither a readable file nor a built-in scenario (try 'symmlab list')"
        ));
    };
    ScenarioConfig::from_toml_str(&text).map_err(|e| e.to_string())
}

fn write_out(path: Option<&str>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| format!("cannot write '{p}': {e}")),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::List => {
            print!("{}", scenario::list_catalog());
            ExitCode::SUCCESS
        }
        Cmd::Profile { config, csv } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let out = match scenario::dump_profile(&cfg) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let dest = csv.or(cfg.outputs.csv.clone());
            if let Err(e) = write_out(dest.as_deref(), &out) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Cmd::Run { config, report, csv, threads, seed } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outcome = match scenario::run_scenario(&cfg, threads) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            for c in &outcome.report.checks {
                eprintln!("check {:<18} {}", c.id, c.verdict);
            }
            for e in &outcome.report.errors {
                eprintln!("error entry: {e}");
            }
            let dest = report.or(cfg.outputs.report.clone());
            if let Err(e) = write_out(dest.as_deref(), &outcome.report.to_json()) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if let Some(csv_dest) = csv.or(cfg.outputs.csv.clone()) {
                match scenario::dump_profile(&cfg) {
                    Ok(s) => {
                        if let Err(e) = write_out(Some(&csv_dest), &s) {
                            eprintln!("error: {e}");
                            return ExitCode::from(2);
                        }
                    }
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                }
            }
            if outcome.any_errors {
                ExitCode::from(2)
            } else if outcome.any_fails {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
