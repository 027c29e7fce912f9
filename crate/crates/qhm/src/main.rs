use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qhm::commands::{self, Command};
use qhm::config::{parse_override, prepare_output, RunConfig};
use qhm::error::CliError;

/// Numerical checks for the quantum Heisenberg manifold spectral triple.
#[derive(Debug, Parser)]
#[command(name = "qhm", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set alpha=3`. Repeatable.
    #[arg(long = "set", value_parser = parse_override, global = true)]
    set: Vec<(String, String)>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// `M,N,K` or a single size.
    #[arg(long, global = true)]
    window: Option<String>,
    /// Weight of the `S` part of the operator.
    #[arg(long, global = true)]
    t: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    steps: Option<String>,
    /// Homotopy path: `s` or `alpha`.
    #[arg(long, global = true)]
    path: Option<String>,
    /// Table or JSON artifact path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report path; defaults to `qhm-<command>.json`.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Structure constants, algebra identities, commutant and connection checks.
    Validate,
    /// Eigenvalues of the truncated operator as `lambda,m,k,slot`.
    Spectrum,
    /// Counting function `Lambda,N` and its log-log slope.
    Weyl,
    /// Dixmier ratio of an element or a preset.
    Dixmier {
        #[arg(long)]
        element: Option<PathBuf>,
        #[arg(long, default_value = "phi100")]
        preset: String,
    },
    /// Junk-form witnesses and quotients.
    Forms,
    /// Curvature of the `(f, g)` connection family.
    Curvature {
        #[arg(long)]
        f: Option<PathBuf>,
        #[arg(long)]
        g: Option<PathBuf>,
    },
    /// Index pairing by spectral flow.
    Index,
    /// Continuity table along a homotopy path.
    Homotopy,
}

fn overrides(c: &Common) -> Vec<(String, String)> {
    let mut v = c.set.clone();
    let named = [
        ("alpha", &c.alpha),
        ("window", &c.window),
        ("t", &c.t),
        ("seed", &c.seed),
        ("steps", &c.steps),
        ("path", &c.path),
    ];
    for (k, val) in named {
        if let Some(val) = val {
            v.push((k.to_string(), val.clone()));
        }
    }
    v
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let cfg = RunConfig::load(cli.common.config.as_deref(), &overrides(&cli.common))?;
    let cmd = match cli.command {
        Cmd::Validate => Command::Validate,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Weyl => Command::Weyl,
        Cmd::Dixmier { element, preset } => Command::Dixmier { element, preset },
        Cmd::Forms => Command::Forms,
        Cmd::Curvature { f, g } => Command::Curvature { f, g },
        Cmd::Index => Command::Index,
        Cmd::Homotopy => Command::Homotopy,
    };
    let report = commands::run(&cmd, &cfg, cli.common.out.as_deref())?;
    let path = cli.common.report.unwrap_or_else(|| PathBuf::from(format!("qhm-{}.json", cmd.name())));
    report.write(&prepare_output(&path)?)?;
    print!("{}", report.summary());
    Ok(report.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qhm: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
