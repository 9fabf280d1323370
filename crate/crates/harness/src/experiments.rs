//! Theorem experiments: precondition checks, ensemble simulation and the
//! per-theorem diagnostics and verdicts.

use levy_sde::coefficients::{
    check_drift_asymptotics, check_drift_bounds, check_growth_condition, condition_c_checklist, default_drift_grid,
    default_growth_grid, ConditionReport, DEFAULT_DRIFT_TOLERANCE,
};
use levy_sde::engine::{cross_section, simulate_ensemble, PathRecord, SdeModel};
use levy_sde::oracles::{decay_scan, martingale_moment_scan, DecayOracle};
use levy_sde::stats::{self, log_space};
use levy_sde::transform::SmoothTransform;

use crate::report::{CheckpointStats, ExperimentReport, LemmaOutcome};
use crate::spec::{ExperimentSpec, Theorem};
use crate::HarnessError;

/// Simulated paths together with the checkpoints they were recorded at.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub paths: Vec<PathRecord<f64>>,
    pub checkpoints: Vec<f64>,
}

impl Ensemble {
    pub fn aborted(&self) -> usize {
        self.paths.iter().filter(|p| p.is_aborted()).count()
    }
}

/// Condition reports the theorem of `spec` depends on, in the order
/// drift condition, growth condition, divergence checklist.
pub fn check_conditions(spec: &ExperimentSpec) -> Result<Vec<ConditionReport<f64>>, HarnessError> {
    let drift = spec.drift_family()?;
    let bs = spec.diffusion_families()?;
    let noises = spec.noises()?;
    let alpha = spec.alpha.unwrap_or(0.0);
    let mut out = Vec::new();

    match spec.theorem {
        Theorem::PowerDrift | Theorem::ConstantDrift => {
            let a = spec.a.expect("validated");
            out.push(check_drift_asymptotics(&drift, a, alpha, &default_drift_grid(), DEFAULT_DRIFT_TOLERANCE));
        }
        Theorem::Bounds => {
            let (lo, hi) = (spec.a_lower.expect("validated"), spec.a_upper.expect("validated"));
            out.push(check_drift_bounds(&drift, lo, hi, &default_drift_grid()));
        }
        Theorem::MomentGrowth | Theorem::LemmaScan => {}
    }

    if let Some(c) = spec.growth_c {
        let beta = spec.beta.expect("validated");
        let mut b = check_growth_condition(&bs, c, beta, &default_growth_grid());
        // The exponent restriction belongs to the theorem, not to the bound.
        let (limit, what) = match spec.theorem {
            Theorem::PowerDrift | Theorem::LemmaScan => (1.0 + alpha, "1 + alpha"),
            _ => (1.0, "1"),
        };
        if b.passed() && !(2.0 * beta < limit) {
            b = b.into_failure(format!("2 beta = {} must be < {what} = {limit}", 2.0 * beta));
        }
        out.push(b);
    }

    if spec.theorem != Theorem::LemmaScan {
        out.push(condition_c_checklist(&drift, &bs, &noises, alpha));
    }
    Ok(out)
}

pub fn simulate(spec: &ExperimentSpec) -> Result<Ensemble, HarnessError> {
    simulate_model(spec, &spec.model()?)
}

fn simulate_model(spec: &ExperimentSpec, model: &SdeModel<f64>) -> Result<Ensemble, HarnessError> {
    let cfg = spec.simulation_config()?;
    let n = spec.n_paths.expect("validated");
    Ok(Ensemble { paths: simulate_ensemble(model, &cfg, n)?, checkpoints: spec.checkpoints() })
}

/// Runs the experiment described by `spec`. A failed precondition stops
/// before simulation. The ensemble is returned when one was simulated.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(ExperimentReport, Option<Ensemble>), HarnessError> {
    spec.validate()?;
    if spec.theorem == Theorem::LemmaScan {
        return run_lemma_scan_with_paths(spec);
    }
    let conditions = check_conditions(spec)?;
    if conditions.iter().any(|c| c.verdict == levy_sde::Verdict::Fail) {
        let mut r = ExperimentReport::new(&spec.name, spec.theorem, spec.base_seed, spec.tolerance());
        r.conditions = conditions;
        r.reasons.push("not simulated".into());
        return Ok((r.finish(false), None));
    }
    let ensemble = simulate(spec)?;
    Ok((evaluate(spec, conditions, &ensemble)?, Some(ensemble)))
}

fn expect_theorem(spec: &ExperimentSpec, t: Theorem) -> Result<(), HarnessError> {
    if spec.theorem == t {
        Ok(())
    } else {
        Err(HarnessError::Config(format!("expected theorem {}, got {}", t.name(), spec.theorem.name())))
    }
}

pub fn run_power_drift_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    expect_theorem(spec, Theorem::PowerDrift)?;
    Ok(run_experiment(spec)?.0)
}

pub fn run_constant_drift_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    expect_theorem(spec, Theorem::ConstantDrift)?;
    Ok(run_experiment(spec)?.0)
}

pub fn run_bounds_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    expect_theorem(spec, Theorem::Bounds)?;
    Ok(run_experiment(spec)?.0)
}

pub fn run_moment_growth_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    expect_theorem(spec, Theorem::MomentGrowth)?;
    Ok(run_experiment(spec)?.0)
}

pub fn run_lemma_scan(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    expect_theorem(spec, Theorem::LemmaScan)?;
    Ok(run_experiment(spec)?.0)
}

/// Diagnostics of an already simulated ensemble under the rules of
/// `spec.theorem`. Lets several theorems share one ensemble.
pub fn evaluate(
    spec: &ExperimentSpec,
    conditions: Vec<ConditionReport<f64>>,
    ensemble: &Ensemble,
) -> Result<ExperimentReport, HarnessError> {
    let tol = spec.tolerance();
    let mut r = ExperimentReport::new(&spec.name, spec.theorem, spec.base_seed, tol);
    r.conditions = conditions;
    r.n_paths = ensemble.paths.len();
    r.aborted_paths = ensemble.aborted();

    let (diagnostic, target): (String, Option<f64>) = match spec.theorem {
        Theorem::PowerDrift => {
            let (a, alpha) = (spec.a.expect("validated"), spec.alpha.expect("validated"));
            (format!("X(t) / ((1-alpha) A t)^(1/(1-alpha)), A={a}, alpha={alpha}"), Some(1.0))
        }
        Theorem::ConstantDrift => (format!("X(t) / (A t), A={}", spec.a.expect("validated")), Some(1.0)),
        Theorem::Bounds => ("X(t) / t".into(), None),
        Theorem::MomentGrowth => ("X(t)^2".into(), None),
        Theorem::LemmaScan => return Err(HarnessError::Config("lemma_scan has no ensemble diagnostic".into())),
    };
    r.diagnostic = diagnostic;
    let ratio = diagnostic_fn(spec);

    for &t in &ensemble.checkpoints {
        let values: Vec<f64> = cross_section(&ensemble.paths, t).into_iter().map(|x| ratio(t, x)).collect();
        if values.is_empty() {
            r.reasons.push(format!("no surviving path at t={t}"));
            return Ok(r.finish(false));
        }
        r.checkpoints.push(CheckpointStats::from_values(t, &values, target));
    }
    let last = *r.final_checkpoint().expect("at least two checkpoints");

    let pass = match spec.theorem {
        Theorem::PowerDrift | Theorem::ConstantDrift => {
            let close = (last.median - 1.0).abs() <= tol;
            r.reasons.push(format!("median ratio {:.6} at t={}, tolerance {tol}", last.median, last.t));
            let devs: Vec<f64> = r.checkpoints.iter().rev().take(3).filter_map(|c| c.median_abs_dev).collect();
            let trend = devs.windows(2).all(|w| w[0] <= w[1]);
            if !trend {
                r.reasons.push(format!("median |R-1| not nonincreasing over last three checkpoints: {devs:?}"));
            }
            close && trend
        }
        Theorem::Bounds => {
            let (lo, hi) = (spec.a_lower.expect("validated"), spec.a_upper.expect("validated"));
            r.reasons.push(format!(
                "5-95% envelope [{:.6}, {:.6}] vs [{}, {}] at t={}",
                last.q05,
                last.q95,
                lo - tol,
                hi + tol,
                last.t
            ));
            last.q05 >= lo - tol && last.q95 <= hi + tol
        }
        Theorem::MomentGrowth => {
            let ts: Vec<f64> = r.checkpoints.iter().map(|c| c.t).collect();
            let ms: Vec<f64> = r.checkpoints.iter().map(|c| c.mean).collect();
            match stats::log_log_slope(&ts, &ms) {
                Some(g) => {
                    r.moment_exponent = Some(g);
                    r.reasons.push(format!("E X^2 growth exponent {g:.4}, limit {}", 2.0 + tol));
                    g <= 2.0 + tol
                }
                None => {
                    // Identically zero second moment: trivially bounded.
                    let zero = ms.iter().all(|m| *m == 0.0);
                    r.reasons.push(if zero { "E X^2 vanishes".into() } else { "exponent fit failed".into() });
                    zero
                }
            }
        }
        Theorem::LemmaScan => unreachable!(),
    };
    Ok(r.finish(pass))
}

fn diagnostic_fn(spec: &ExperimentSpec) -> Box<dyn Fn(f64, f64) -> f64> {
    match spec.theorem {
        Theorem::PowerDrift => {
            let (a, alpha) = (spec.a.unwrap_or(1.0), spec.alpha.unwrap_or(0.0));
            let p = 1.0 - alpha;
            Box::new(move |t, x| x / (p * a * t).powf(1.0 / p))
        }
        Theorem::ConstantDrift => {
            let a = spec.a.unwrap_or(1.0);
            Box::new(move |t, x| x / (a * t))
        }
        Theorem::Bounds => Box::new(|t, x| x / t),
        _ => Box::new(|_, x| x * x),
    }
}

fn run_lemma_scan_with_paths(spec: &ExperimentSpec) -> Result<(ExperimentReport, Option<Ensemble>), HarnessError> {
    let tol = spec.tolerance();
    let alpha = spec.alpha.expect("validated");
    let beta = spec.beta.expect("validated");
    let transform = SmoothTransform::new(alpha)?;
    let c = spec.diffusion_families()?.remove(0);
    let noise = spec.noises()?.remove(0);
    let measure = noise.jumps().expect("validated").clone();
    let g = spec.x_grid();
    let grid = log_space(g.lo, g.hi, g.points);

    let mut r = ExperimentReport::new(&spec.name, Theorem::LemmaScan, spec.base_seed, tol);
    r.conditions = check_conditions(spec)?;
    r.diagnostic = "compensator and quadratic integrals of the transformed jump coefficient".into();

    let comp = decay_scan(DecayOracle::Compensator, &transform, &c, &measure, beta, &grid)?;
    let quad = decay_scan(DecayOracle::Quadratic, &transform, &c, &measure, beta, &grid)?;
    let mut pass = true;

    if comp.degenerate {
        r.reasons.push("compensator integral vanishes on the tail (degenerate)".into());
    } else {
        let fitted = comp.fitted_exponent.unwrap_or(f64::NAN);
        let ok = fitted <= comp.predicted_exponent + tol && comp.tail_is_monotone_decreasing(2.0);
        r.reasons.push(format!(
            "compensator exponent {fitted:.4}, predicted {:.4}, slack {tol}, monotone tail {}",
            comp.predicted_exponent,
            comp.tail_is_monotone_decreasing(2.0)
        ));
        pass &= ok;
    }
    if quad.degenerate {
        r.reasons.push("quadratic integral vanishes on the tail (degenerate)".into());
    } else {
        let ok = quad.bound_constant.is_finite() && quad.top_decade_variation < 0.1;
        r.reasons.push(format!(
            "quadratic bound constant {:.6e}, top-decade variation {:.4}",
            quad.bound_constant, quad.top_decade_variation
        ));
        pass &= ok;
    }

    let mut ensemble = None;
    let mut martingale = None;
    if let Some(m) = spec.martingale {
        let mut model = spec.model()?;
        model.drift = levy_sde::CoefficientFamily::constant(0.0);
        let ens = simulate_model(spec, &model)?;
        let scan = martingale_moment_scan(&ens.paths, &ens.checkpoints, m.dyadic_levels)?;
        let gamma = scan.fitted_exponent.unwrap_or(f64::NAN);
        let ok = (gamma - m.expected_gamma).abs() <= m.gamma_tolerance && scan.sup_curve_nonincreasing;
        r.reasons.push(format!(
            "martingale second-moment exponent {gamma:.4}, expected {} +- {}, dyadic sup nonincreasing {}",
            m.expected_gamma, m.gamma_tolerance, scan.sup_curve_nonincreasing
        ));
        r.checkpoints = scan
            .moments
            .iter()
            .map(|mp| {
                let sq: Vec<f64> = cross_section(&ens.paths, mp.t).into_iter().map(|x| (x - spec.x0).powi(2)).collect();
                CheckpointStats::from_values(mp.t, &sq, None)
            })
            .collect();
        r.n_paths = ens.paths.len();
        r.aborted_paths = ens.aborted();
        pass &= ok;
        martingale = Some(scan);
        ensemble = Some(ens);
    }
    r.lemma = Some(LemmaOutcome { compensator: comp, quadratic: quad, martingale });
    Ok((r.finish(pass), ensemble))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> ExperimentSpec {
        ExperimentSpec::from_json(text).unwrap()
    }

    const CONSTANT: &str = r#"{
        "name": "c", "theorem": "constant_drift",
        "drift": {"kind": "constant", "value": 2.0},
        "diffusion": [{"kind": "constant", "value": 1.0, "noise": {"sigma": 1.0}}],
        "A": 2.0, "beta": 0.0, "growth_C": 1.0,
        "n_paths": 200, "horizon": 200.0, "dt": 0.05
    }"#;

    #[test]
    fn constant_drift_small_run() {
        let (r, ens) = run_experiment(&spec(CONSTANT)).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert_eq!(r.conditions.len(), 3);
        assert_eq!(r.checkpoints.len(), 8);
        assert_eq!(ens.unwrap().paths.len(), 200);
    }

    #[test]
    fn zero_noise_constant_drift_is_exact() {
        let text =
            CONSTANT.replace(r#""diffusion": [{"kind": "constant", "value": 1.0, "noise": {"sigma": 1.0}}],"#, "");
        let (r, _) = run_experiment(&spec(&text)).unwrap();
        assert!(r.passed());
        for c in &r.checkpoints {
            assert!((c.median - 1.0).abs() < 1e-9 && c.q05 == c.q95);
        }
    }

    #[test]
    fn failing_precondition_skips_simulation() {
        let text = CONSTANT.replace(r#""A": 2.0"#, r#""A": 3.0"#);
        let (r, ens) = run_experiment(&spec(&text)).unwrap();
        assert!(!r.passed());
        assert!(ens.is_none());
        assert!(r.checkpoints.is_empty());
        // growth exponent outside the theorem's range
        let text = CONSTANT.replace(r#""beta": 0.0"#, r#""beta": 0.5"#);
        let (r, ens) = run_experiment(&spec(&text)).unwrap();
        assert!(!r.passed() && ens.is_none());
    }

    #[test]
    fn tolerance_monotonicity() {
        let s = spec(CONSTANT);
        let conditions = check_conditions(&s).unwrap();
        let ens = simulate(&s).unwrap();
        let mut passed_before = false;
        for tol in [1e-4, 1e-3, 1e-2, 0.05, 0.2, 1.0] {
            let t = ExperimentSpec { tolerance: Some(tol), ..s.clone() };
            let p = evaluate(&t, conditions.clone(), &ens).unwrap().passed();
            assert!(p || !passed_before, "tolerance {tol} flipped pass to fail");
            passed_before |= p;
        }
        assert!(passed_before);
    }

    #[test]
    fn moment_growth_of_brownian_motion() {
        let text = CONSTANT
            .replace(r#""constant_drift""#, r#""moment_growth""#)
            .replace(r#""value": 2.0"#, r#""value": 0.0"#)
            .replace(r#""A": 2.0, "#, "")
            .replace(r#""n_paths": 20"#, r#""n_paths": 400"#);
        let (r, _) = run_experiment(&spec(&text)).unwrap();
        let g = r.moment_exponent.unwrap();
        assert!((g - 1.0).abs() < 0.15, "{g}");
        assert!(r.passed());
    }

    #[test]
    fn lemma_scan_degenerate_passes() {
        let text = r#"{
            "name": "l", "theorem": "lemma_scan", "alpha": 0.5, "beta": 0.0,
            "diffusion": [{"kind": "constant", "value": 0.0,
                           "noise": {"jumps": {"type": "atoms", "atoms": [[1.0, 1.0]]}}}]
        }"#;
        let (r, _) = run_experiment(&spec(text)).unwrap();
        assert!(r.passed(), "{}", r.summary());
        let lemma = r.lemma.unwrap();
        assert!(lemma.compensator.degenerate && lemma.quadratic.degenerate);
    }
}
