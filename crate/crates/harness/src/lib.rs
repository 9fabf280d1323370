//! Experiment runner for the `levy-sde` toolkit: configuration files,
//! theorem diagnostics and reports. The `levy-sde` binary is a thin CLI
//! over this library.

pub mod experiments;
pub mod report;
pub mod spec;

use std::path::Path;

pub use experiments::{
    check_conditions, evaluate, run_bounds_experiment, run_constant_drift_experiment, run_experiment, run_lemma_scan,
    run_moment_growth_experiment, run_power_drift_experiment, simulate, Ensemble,
};
pub use report::{CheckpointStats, ExperimentReport, LemmaOutcome, Outcome};
pub use spec::{DiffusionEntry, ExperimentSpec, GridSpec, MartingaleSpec, Theorem};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid model: {0}")]
    Model(#[from] levy_sde::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.display().to_string(), source }
    }
}

/// Reads and validates an experiment file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    ExperimentSpec::from_json(&text).map_err(|e| match e {
        HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes `report.json`, `ratio_curve.csv` and the first `export_paths`
/// paths (`paths/path_NNNN.csv`, `paths/jumps_NNNN.csv`) under `dir`.
pub fn write_outputs(
    dir: &Path,
    report: &ExperimentReport,
    ensemble: Option<&Ensemble>,
    export_paths: usize,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let p = dir.join("report.json");
    std::fs::write(&p, report.to_json() + "\n").map_err(|e| HarnessError::io(&p, e))?;
    let p = dir.join("ratio_curve.csv");
    let f = std::fs::File::create(&p).map_err(|e| HarnessError::io(&p, e))?;
    report.write_ratio_curve(std::io::BufWriter::new(f)).map_err(|e| HarnessError::io(&p, e))?;
    if let Some(ens) = ensemble {
        write_paths(dir, ens, export_paths)?;
    }
    Ok(())
}

pub fn write_paths(dir: &Path, ensemble: &Ensemble, count: usize) -> Result<(), HarnessError> {
    let paths_dir = dir.join("paths");
    std::fs::create_dir_all(&paths_dir).map_err(|e| HarnessError::io(&paths_dir, e))?;
    for (i, path) in ensemble.paths.iter().take(count).enumerate() {
        let p = paths_dir.join(format!("path_{i:04}.csv"));
        let f = std::fs::File::create(&p).map_err(|e| HarnessError::io(&p, e))?;
        path.write_csv(std::io::BufWriter::new(f)).map_err(|e| HarnessError::io(&p, e))?;
        let p = paths_dir.join(format!("jumps_{i:04}.csv"));
        let f = std::fs::File::create(&p).map_err(|e| HarnessError::io(&p, e))?;
        path.write_jump_csv(std::io::BufWriter::new(f)).map_err(|e| HarnessError::io(&p, e))?;
    }
    Ok(())
}
