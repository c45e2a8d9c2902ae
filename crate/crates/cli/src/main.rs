//! `weakmeas`: seeded experiment runs for weakly measured critical Ising chains.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, ConfigError, Settings};

#[derive(Parser)]
#[command(
    name = "weakmeas",
    version,
    about = "Weak measurements on the critical transverse-field Ising chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON config file or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground-state entropy profile, correlators and central-charge fit.
    Ground(Common),
    /// State after uniform outcomes on every site, with predictions.
    Uniform(Common),
    /// Trajectory ensemble: mean entropy profile and c_eff fit.
    Ensemble(Common),
    /// c_eff against the closed-form prediction over a λ grid.
    Sweep(Common),
    /// Tabulate a closed-form curve.
    Analytic(Common),
    /// Exact-diagonalization diagnostics and engine cross-check.
    Oracle(Common),
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Ground(c) => (Command::Ground, c),
            Cmd::Uniform(c) => (Command::Uniform, c),
            Cmd::Ensemble(c) => (Command::Ensemble, c),
            Cmd::Sweep(c) => (Command::Sweep, c),
            Cmd::Analytic(c) => (Command::Analytic, c),
            Cmd::Oracle(c) => (Command::Oracle, c),
        }
    }
}

fn execute(cmd: Cmd) -> anyhow::Result<()> {
    let (command, common) = cmd.split();
    let file = common
        .config
        .as_deref()
        .map(|p| Settings::load(p, command))
        .transpose()?;
    let cfg = config::resolve(command, common.settings, file)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads())
        .build_global()
        .map_err(|e| config::config_error(format!("thread pool: {e}")))?;
    commands::run(&cfg)
}

/// Exit status and error class for a failed run.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    if err.downcast_ref::<ConfigError>().is_some() {
        return (2, "config");
    }
    if let Some(core) = err
        .chain()
        .find_map(|e| e.downcast_ref::<weakmeas_core::Error>())
    {
        return if core.is_argument_error() {
            (2, "config")
        } else {
            (3, "numerical")
        };
    }
    (1, "io")
}

fn report(kind: &str, message: String) {
    let body = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("config", e.to_string().trim().to_string());
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (code, kind) = classify(&err);
            report(kind, format!("{err:#}"));
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        let numerical = anyhow::Error::from(weakmeas_core::Error::NumericalFailure("drift".into()));
        assert_eq!(classify(&numerical), (3, "numerical"));
        let bad_input = anyhow::Error::from(weakmeas_core::Error::InvalidArgument("λ".into()));
        assert_eq!(classify(&bad_input), (2, "config"));
        assert_eq!(classify(&config::config_error("x")), (2, "config"));
        let io = anyhow::Error::from(std::io::Error::other("disk"));
        assert_eq!(classify(&io), (1, "io"));
    }
}
