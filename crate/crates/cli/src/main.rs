use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use virasoro_cli::{run, Command, Config};

#[derive(Parser)]
#[command(name = "vbott", version, about = "Virasoro-Bott experiments with CSV output")]
struct Cli {
    /// TOML file layered over the built-in defaults
    #[arg(long, global = true, env = "VBOTT_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, env = "VBOTT_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "VBOTT_SEED")]
    seed: Option<u64>,
    /// Override one setting, e.g. `--set kdv.t_final=0.5` (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Randomized residual checks of the group and algebra identities
    CheckIdentities,
    /// KdV geodesic against the reference solution of the chosen preset
    Kdv,
    /// Corner-path ε-sweep, loop bounds and figure samples
    Shortpath,
    /// Tune center-shifting loops for a list of targets
    Center,
    /// Short paths to a target element over a list of length bounds
    Distance,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::CheckIdentities => Command::CheckIdentities,
        Cmd::Kdv => Command::Kdv,
        Cmd::Shortpath => Command::Shortpath,
        Cmd::Center => Command::Center,
        Cmd::Distance => Command::Distance,
    };
    let result = Config::load(cli.config.as_deref(), &cli.overrides).and_then(|mut cfg| {
        if let Some(out) = cli.out {
            cfg.out = out;
        }
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        run(cmd, &cfg)
    });
    match result {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            for n in &outcome.notes {
                println!("note: {n}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
