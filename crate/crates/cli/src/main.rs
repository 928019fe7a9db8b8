use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cfair::audit::emit_report;
use cfair::{run_audit, AuditConfig, AuditError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "audit", version, about = "Counterfactual fairness audits of tabular predictors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the audit described by a JSON config and write the report files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, short)]
        verbose: bool,
    },
}

fn run(config: &PathBuf, out: &PathBuf) -> Result<(), AuditError> {
    let started = Instant::now();
    let cfg = AuditConfig::load(config)?;
    let report = run_audit(&cfg)?;
    let files = emit_report(&report, out)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    log::info!("wrote {} files to {} in {:.1?}", files.len(), out.display(), started.elapsed());
    if let Some(model) = &report.headline.model {
        for (regime, h) in &report.headline.regimes {
            println!(
                "{regime:>15} {model:>8}  wd={}  mmd={}",
                h.wd.map_or("-".into(), |v| format!("{v:.4}")),
                h.mmd.map_or("-".into(), |v| format!("{v:.4}")),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, out, verbose } = cli.command;
    let level = if verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&config, &out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
