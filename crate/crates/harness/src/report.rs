use std::io::{self, Write};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use levy_sde::coefficients::{ConditionReport, Verdict};
use levy_sde::oracles::{DecayFitReport, MartingaleScanReport};
use levy_sde::stats;

use crate::spec::Theorem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
}

/// Cross-sectional statistics of the diagnostic at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub t: f64,
    pub median: f64,
    pub mean: f64,
    pub q05: f64,
    pub q95: f64,
    pub se: f64,
    /// Median of `|R − 1|`; only for ratio diagnostics that should tend to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_abs_dev: Option<f64>,
    pub paths: usize,
}

impl CheckpointStats {
    pub fn from_values(t: f64, values: &[f64], target: Option<f64>) -> Self {
        let sorted = stats::sorted_copy(values);
        let median_abs_dev = target.map(|c| {
            let dev: Vec<f64> = values.iter().map(|v| (v - c).abs()).collect();
            stats::median(&dev)
        });
        Self {
            t,
            median: stats::quantile_sorted(&sorted, 0.5),
            mean: stats::mean(values),
            q05: stats::quantile_sorted(&sorted, 0.05),
            q95: stats::quantile_sorted(&sorted, 0.95),
            se: stats::standard_error(values),
            median_abs_dev,
            paths: values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOutcome {
    pub compensator: DecayFitReport<f64>,
    pub quadratic: DecayFitReport<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale: Option<MartingaleScanReport<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub theorem: Theorem,
    pub verdict: Outcome,
    /// What the checkpoint statistics are statistics of.
    pub diagnostic: String,
    pub checkpoints: Vec<CheckpointStats>,
    pub conditions: Vec<ConditionReport<f64>>,
    pub aborted_paths: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Why the verdict is what it is.
    pub reasons: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<LemmaOutcome>,
    /// Seconds since the Unix epoch; the only nondeterministic field.
    pub timestamp: String,
}

/// Largest tolerated fraction of aborted paths.
pub const MAX_ABORT_FRACTION: f64 = 0.01;

impl ExperimentReport {
    pub fn new(name: &str, theorem: Theorem, seed: u64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            theorem,
            verdict: Outcome::Fail,
            diagnostic: String::new(),
            checkpoints: Vec::new(),
            conditions: Vec::new(),
            aborted_paths: 0,
            n_paths: 0,
            seed,
            tolerance,
            reasons: Vec::new(),
            moment_exponent: None,
            lemma: None,
            timestamp: now(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Outcome::Pass
    }

    pub fn final_checkpoint(&self) -> Option<&CheckpointStats> {
        self.checkpoints.last()
    }

    pub fn preconditions_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.verdict != Verdict::Fail)
    }

    /// Applies the rules shared by every experiment and fixes the verdict:
    /// pass iff `pass` holds, all preconditions hold and at most
    /// [`MAX_ABORT_FRACTION`] of the paths aborted.
    pub fn finish(mut self, pass: bool) -> Self {
        let mut ok = pass;
        if !self.preconditions_hold() {
            self.reasons.push("a precondition failed".into());
            ok = false;
        }
        if self.n_paths > 0 && self.aborted_paths as f64 > MAX_ABORT_FRACTION * self.n_paths as f64 {
            self.reasons.push(format!(
                "{} of {} paths aborted (limit {}%)",
                self.aborted_paths,
                self.n_paths,
                MAX_ABORT_FRACTION * 100.0
            ));
            ok = false;
        }
        self.verdict = if ok { Outcome::Pass } else { Outcome::Fail };
        assert!(!(self.passed() && !self.preconditions_hold()), "pass verdict with a failed precondition");
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON without the timestamp, for determinism comparisons.
    pub fn to_json_without_timestamp(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timestamp");
        serde_json::to_string_pretty(&v).expect("value serializes")
    }

    /// `t,q05,median,q95` rows.
    pub fn write_ratio_curve<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,q05,median,q95")?;
        for c in &self.checkpoints {
            writeln!(out, "{},{},{},{}", c.t, c.q05, c.median, c.q95)?;
        }
        Ok(())
    }

    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let mut s =
            format!("{} [{}]: {}\n", self.name, self.theorem.name(), if self.passed() { "PASS" } else { "FAIL" });
        for c in &self.conditions {
            let id =
                serde_json::to_value(c.condition).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            s += &format!("  condition {id}: {:?} ({})\n", c.verdict, c.detail);
        }
        if !self.diagnostic.is_empty() {
            s += &format!("  diagnostic: {}\n", self.diagnostic);
        }
        for c in &self.checkpoints {
            s += &format!("  t={:<12.6} median={:<12.6} q05={:<12.6} q95={:<12.6}\n", c.t, c.median, c.q05, c.q95);
        }
        if let Some(g) = self.moment_exponent {
            s += &format!("  moment exponent: {g:.4}\n");
        }
        if self.aborted_paths > 0 {
            s += &format!("  aborted paths: {}/{}\n", self.aborted_paths, self.n_paths);
        }
        for r in &self.reasons {
            s += &format!("  - {r}\n");
        }
        s
    }
}

fn now() -> String {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0).to_string()
}
