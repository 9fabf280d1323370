use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levy_sde_harness::{
    check_conditions, load_spec, run_experiment, simulate, write_outputs, write_paths, ExperimentReport, HarnessError,
    Theorem,
};

#[derive(Parser)]
#[command(name = "levy-sde", version, about = "Simulate Lévy-driven SDEs and check their growth asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the ensemble of a config and export paths.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of paths to export (default: the config's `export_paths`).
        #[arg(long)]
        export: Option<usize>,
    },
    /// Print the condition reports of a config.
    CheckConditions {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the quadrature (and optional martingale) scan of a lemma_scan config.
    LemmaScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a theorem experiment and write report.json, ratio_curve.csv and paths.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize an existing report (a report.json or a directory holding one).
    Report { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn verdict_code(report: &ExperimentReport) -> u8 {
    if report.passed() {
        0
    } else {
        1
    }
}

fn dispatch(command: Command) -> Result<u8, HarnessError> {
    match command {
        Command::Simulate { config, out, export } => {
            let spec = load_spec(&config)?;
            let ens = simulate(&spec)?;
            let finals: Vec<f64> = ens.paths.iter().filter(|p| !p.is_aborted()).map(|p| p.final_value()).collect();
            println!(
                "{}: {} paths, {} aborted, median X(T) = {}",
                spec.name,
                ens.paths.len(),
                ens.aborted(),
                if finals.is_empty() { f64::NAN } else { levy_sde::stats::median(&finals) }
            );
            if let Some(dir) = out {
                write_paths(&dir, &ens, export.unwrap_or(spec.export_paths))?;
            }
            Ok(0)
        }
        Command::CheckConditions { config } => {
            let spec = load_spec(&config)?;
            let reports = check_conditions(&spec)?;
            println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
            Ok(if reports.iter().any(|r| r.verdict == levy_sde::Verdict::Fail) { 1 } else { 0 })
        }
        Command::LemmaScan { config, out } => {
            let spec = load_spec(&config)?;
            if spec.theorem != Theorem::LemmaScan {
                return Err(HarnessError::Config(format!(
                    "lemma-scan needs theorem lemma_scan, got {}",
                    spec.theorem.name()
                )));
            }
            finish(&spec, out.as_deref())
        }
        Command::Experiment { config, out } => {
            let spec = load_spec(&config)?;
            finish(&spec, out.as_deref())
        }
        Command::Report { path } => {
            let file = if path.is_dir() { path.join("report.json") } else { path };
            let text = std::fs::read_to_string(&file).map_err(|e| HarnessError::io(&file, e))?;
            let report: ExperimentReport =
                serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", file.display())))?;
            print!("{}", report.summary());
            Ok(verdict_code(&report))
        }
    }
}

fn finish(spec: &levy_sde_harness::ExperimentSpec, out: Option<&Path>) -> Result<u8, HarnessError> {
    let (report, ensemble) = run_experiment(spec)?;
    print!("{}", report.summary());
    if let Some(dir) = out {
        write_outputs(dir, &report, ensemble.as_ref(), spec.export_paths)?;
    }
    Ok(verdict_code(&report))
}
