//! Experiment configuration files.

use serde::{Deserialize, Serialize};

use levy_sde::coefficients::{CoefficientConfig, CoefficientFamily};
use levy_sde::engine::{SdeModel, SimulationConfig};
use levy_sde::noise::{NoiseConfig, NoiseSpec};
use levy_sde::stats::log_space;

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    ConstantDrift,
    Bounds,
    PowerDrift,
    LemmaScan,
    MomentGrowth,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::ConstantDrift => "constant_drift",
            Theorem::Bounds => "bounds",
            Theorem::PowerDrift => "power_drift",
            Theorem::LemmaScan => "lemma_scan",
            Theorem::MomentGrowth => "moment_growth",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Theorem::ConstantDrift => 0.05,
            Theorem::Bounds | Theorem::PowerDrift | Theorem::MomentGrowth => 0.1,
            Theorem::LemmaScan => 0.15,
        }
    }
}

/// One noise term: a coefficient (`kind` plus its parameters, flattened)
/// and the driving process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionEntry {
    #[serde(flatten)]
    pub coefficient: CoefficientConfig,
    pub noise: NoiseConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { lo: 10.0, hi: 1e6, points: 26 }
    }
}

/// Optional ensemble part of a lemma scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleSpec {
    #[serde(default = "one")]
    pub expected_gamma: f64,
    #[serde(default = "gamma_tolerance")]
    pub gamma_tolerance: f64,
    #[serde(default = "dyadic_levels")]
    pub dyadic_levels: usize,
}

fn one() -> f64 {
    1.0
}

fn gamma_tolerance() -> f64 {
    0.1
}

fn dyadic_levels() -> usize {
    8
}

/// One experiment. Keys that only some theorems need are optional here and
/// checked by [`ExperimentSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<CoefficientConfig>,
    #[serde(default)]
    pub diffusion: Vec<DiffusionEntry>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(alias = "growth_beta", default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(rename = "growth_C", default, skip_serializing_if = "Option::is_none")]
    pub growth_c: Option<f64>,
    #[serde(rename = "A_lower", default, skip_serializing_if = "Option::is_none")]
    pub a_lower: Option<f64>,
    #[serde(rename = "A_upper", default, skip_serializing_if = "Option::is_none")]
    pub a_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub x0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    #[serde(default = "default_export")]
    pub export_paths: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub martingale: Option<MartingaleSpec>,
}

fn default_export() -> usize {
    4
}

fn missing(key: &str, theorem: Theorem) -> HarnessError {
    HarnessError::Config(format!("missing key `{key}` (required by theorem {})", theorem.name()))
}

impl ExperimentSpec {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    fn required_keys(&self) -> &'static [&'static str] {
        match self.theorem {
            Theorem::PowerDrift => &["drift", "A", "alpha", "beta", "growth_C", "n_paths", "horizon", "dt"],
            Theorem::ConstantDrift => &["drift", "A", "beta", "growth_C", "n_paths", "horizon", "dt"],
            Theorem::Bounds => &["drift", "A_lower", "A_upper", "beta", "growth_C", "n_paths", "horizon", "dt"],
            Theorem::MomentGrowth => &["drift", "beta", "growth_C", "n_paths", "horizon", "dt"],
            Theorem::LemmaScan => &["alpha", "beta"],
        }
    }

    fn has_key(&self, key: &str) -> bool {
        match key {
            "drift" => self.drift.is_some(),
            "A" => self.a.is_some(),
            "alpha" => self.alpha.is_some(),
            "beta" => self.beta.is_some(),
            "growth_C" => self.growth_c.is_some(),
            "A_lower" => self.a_lower.is_some(),
            "A_upper" => self.a_upper.is_some(),
            "n_paths" => self.n_paths.is_some(),
            "horizon" => self.horizon.is_some(),
            "dt" => self.dt.is_some(),
            _ => true,
        }
    }

    pub fn simulates(&self) -> bool {
        self.theorem != Theorem::LemmaScan || self.martingale.is_some()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let t = self.theorem;
        for key in self.required_keys() {
            if !self.has_key(key) {
                return Err(missing(key, t));
            }
        }
        if self.simulates() {
            for key in ["n_paths", "horizon", "dt"] {
                if !self.has_key(key) {
                    return Err(missing(key, t));
                }
            }
        }
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if let Some(alpha) = self.alpha {
            if !(0.0..1.0).contains(&alpha) {
                return bad(format!("alpha must lie in [0, 1), got {alpha}"));
            }
        }
        if t == Theorem::LemmaScan && self.alpha == Some(0.0) {
            return bad("lemma_scan needs alpha in (0, 1)".into());
        }
        if t == Theorem::ConstantDrift && self.alpha.is_some_and(|a| a != 0.0) {
            return bad("constant_drift implies alpha = 0".into());
        }
        if let Some(beta) = self.beta {
            if !(beta >= 0.0) {
                return bad(format!("beta must be >= 0, got {beta}"));
            }
        }
        if let (Some(lo), Some(hi)) = (self.a_lower, self.a_upper) {
            if !(lo > 0.0 && lo <= hi) {
                return bad(format!("need 0 < A_lower <= A_upper, got {lo}, {hi}"));
            }
        }
        let tol = self.tolerance();
        // Zero tolerance is meaningful only for the envelope check.
        if !(tol > 0.0 || (t == Theorem::Bounds && tol == 0.0)) || !tol.is_finite() {
            return bad(format!("tolerance must be > 0, got {tol}"));
        }
        if self.n_paths == Some(0) {
            return bad("n_paths must be >= 1".into());
        }
        if self.simulates() {
            let horizon = self.horizon.expect("checked");
            if !(horizon > 0.0) {
                return bad(format!("horizon must be > 0, got {horizon}"));
            }
            for &c in &self.checkpoints() {
                if !(c > 0.0 && c <= horizon) {
                    return bad(format!("checkpoint {c} outside (0, {horizon}]"));
                }
            }
            if self.checkpoints().len() < 2 {
                return bad("need at least two checkpoints".into());
            }
            self.simulation_config()?.validate()?;
        }
        if t == Theorem::LemmaScan {
            let Some(first) = self.diffusion.first() else {
                return bad("lemma_scan needs a diffusion entry with jumps".into());
            };
            if first.noise.jumps.is_none() {
                return bad("lemma_scan: diffusion[0].noise needs a jump measure".into());
            }
            let g = self.x_grid();
            if !(g.lo >= 1.0 && g.hi > g.lo && g.points >= 8) {
                return bad(format!("x_grid must satisfy 1 <= lo < hi and points >= 8, got {g:?}"));
            }
        }
        self.model()?;
        Ok(())
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.theorem.default_tolerance())
    }

    /// Explicit checkpoints, or 8 geometric points from `T/100` to `T`.
    pub fn checkpoints(&self) -> Vec<f64> {
        match (&self.checkpoints, self.horizon) {
            (Some(c), _) => {
                let mut c = c.clone();
                c.sort_by(f64::total_cmp);
                c.dedup();
                c
            }
            (None, Some(t)) => log_space(t / 100.0, t, 8),
            (None, None) => Vec::new(),
        }
    }

    pub fn x_grid(&self) -> GridSpec {
        self.x_grid.unwrap_or_default()
    }

    pub fn drift_family(&self) -> Result<CoefficientFamily<f64>, HarnessError> {
        match &self.drift {
            Some(cfg) => Ok(CoefficientFamily::from_config(cfg)?),
            None => Ok(CoefficientFamily::constant(0.0)),
        }
    }

    pub fn diffusion_families(&self) -> Result<Vec<CoefficientFamily<f64>>, HarnessError> {
        self.diffusion.iter().map(|d| Ok(CoefficientFamily::from_config(&d.coefficient)?)).collect()
    }

    pub fn noises(&self) -> Result<Vec<NoiseSpec<f64>>, HarnessError> {
        self.diffusion.iter().map(|d| Ok(NoiseSpec::from_config(&d.noise)?)).collect()
    }

    pub fn model(&self) -> Result<SdeModel<f64>, HarnessError> {
        let mut model = SdeModel::new(self.drift_family()?);
        for (b, z) in self.diffusion_families()?.into_iter().zip(self.noises()?) {
            model = model.with_term(b, z);
        }
        Ok(model)
    }

    pub fn simulation_config(&self) -> Result<SimulationConfig<f64>, HarnessError> {
        let t = self.theorem;
        let horizon = self.horizon.ok_or_else(|| missing("horizon", t))?;
        let dt = self.dt.ok_or_else(|| missing("dt", t))?;
        let steps = (horizon / dt).ceil().max(1.0) as usize;
        let stride = self.record_stride.unwrap_or((steps / 2000).max(1));
        Ok(SimulationConfig::new(horizon, dt, self.x0, self.base_seed)
            .with_stride(stride)
            .with_checkpoints(self.checkpoints()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const POWER: &str = r#"{
        "name": "p", "theorem": "power_drift",
        "drift": {"kind": "power_drift", "A": 1.0, "alpha": 0.5},
        "diffusion": [{"kind": "constant", "value": 1.0, "noise": {"sigma": 1.0}}],
        "A": 1.0, "alpha": 0.5, "beta": 0.0, "growth_C": 2.0,
        "n_paths": 4, "horizon": 100.0, "dt": 0.1, "x0": 1.0
    }"#;

    #[test]
    fn parses_and_defaults() {
        let s = ExperimentSpec::from_json(POWER).unwrap();
        assert_eq!(s.tolerance(), 0.1);
        let cps = s.checkpoints();
        assert_eq!(cps.len(), 8);
        assert!((cps[0] - 1.0).abs() < 1e-12 && cps[7] == 100.0);
        assert_eq!(s.model().unwrap().terms.len(), 1);
        let again = ExperimentSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn missing_keys_are_named() {
        let text = POWER.replace(r#""horizon": 100.0,"#, "");
        let err = ExperimentSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("`horizon`"), "{err}");
        let text = POWER.replace(r#""alpha": 0.5, "beta""#, r#""beta""#);
        let err = ExperimentSpec::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("`alpha`"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        for (from, to) in [
            (r#""dt": 0.1"#, r#""dt": -0.1"#),
            (r#""n_paths": 4"#, r#""n_paths": 0"#),
            (r#""x0": 1.0"#, r#""x0": 1.0, "checkpoints": [50.0, 200.0]"#),
            (r#""x0": 1.0"#, r#""x0": 1.0, "tolerance": 0.0"#),
            (r#""x0": 1.0"#, r#""x0": 1.0, "bogus": 1"#),
            (r#""sigma": 1.0"#, r#""sigma": -1.0"#),
        ] {
            let text = POWER.replace(from, to);
            assert!(ExperimentSpec::from_json(&text).is_err(), "{to}");
        }
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = ExperimentSpec::from_json("{\n  \"name\": \"x\",\n  oops\n}").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }
}
