//! Deterministic integrals against the Lévy measure for the transformed
//! equation, their decay fits, and empirical moment scans of noise-only
//! ensembles.

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientFamily;
use crate::engine::{second_moment_curve, Integrand, MomentPoint, PathRecord, SdeModel};
use crate::error::{Error, Result};
use crate::noise::{LevyMeasure, NoiseSpec};
use crate::real::Real;
use crate::stats;
use crate::transform::SmoothTransform;

/// Number of trailing grid points used by the slope fit.
pub const TAIL_POINTS: usize = 5;
pub const MIN_GRID_POINTS: usize = 8;

/// `∫ (f(x + c(x)u) − f(x) − f'(x)c(x)u) ν(du)`.
pub fn compensator_integral<T: Real>(
    x: T,
    transform: &SmoothTransform<T>,
    c: &CoefficientFamily<T>,
    measure: &LevyMeasure<T>,
) -> T {
    let cx = c.eval(x);
    measure.integrate(|u| transform.remainder(x, cx * u))
}

/// `∫ (f(x + c(x)u) − f(x))² ν(du)`.
pub fn quadratic_integral<T: Real>(
    x: T,
    transform: &SmoothTransform<T>,
    c: &CoefficientFamily<T>,
    measure: &LevyMeasure<T>,
) -> T {
    let cx = c.eval(x);
    measure.integrate(|u| {
        let d = transform.increment(x, cx * u);
        d * d
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayOracle {
    Compensator,
    Quadratic,
}

impl DecayOracle {
    /// Predicted power of `x` for growth exponent `β` of `c`.
    pub fn predicted_exponent<T: Real>(self, alpha: T, beta: T) -> T {
        let two = T::lit(2.0);
        match self {
            DecayOracle::Compensator => -(T::one() + alpha - two * beta),
            DecayOracle::Quadratic => two * (beta - alpha),
        }
    }

    pub fn eval<T: Real>(
        self,
        x: T,
        transform: &SmoothTransform<T>,
        c: &CoefficientFamily<T>,
        m: &LevyMeasure<T>,
    ) -> T {
        match self {
            DecayOracle::Compensator => compensator_integral(x, transform, c, m),
            DecayOracle::Quadratic => quadratic_integral(x, transform, c, m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFitReport<T> {
    pub x: Vec<T>,
    pub value: Vec<T>,
    /// Log-log slope over the last [`TAIL_POINTS`] points; `None` if degenerate.
    pub fitted_exponent: Option<T>,
    /// `max |value| · x^{−predicted}` over the grid.
    pub bound_constant: T,
    /// Some tail value is exactly zero, so no fit was attempted.
    pub degenerate: bool,
    pub predicted_exponent: T,
    /// `(max − min)/max` of `|value| · x^{−predicted}` over the top decade.
    pub top_decade_variation: T,
}

impl<T: Real> DecayFitReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `|value|` nonincreasing over the points with `x ≥ x_max / 10^decades`.
    pub fn tail_is_monotone_decreasing(&self, decades: T) -> bool {
        let Some(&top) = self.x.last() else { return false };
        let from = top / T::lit(10.0).powf(decades);
        let tail: Vec<T> = self.x.iter().zip(&self.value).filter(|(x, _)| **x >= from).map(|(_, v)| v.abs()).collect();
        tail.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Grid must lie in `[1, ∞)`, be strictly increasing and have at least
/// [`MIN_GRID_POINTS`] points.
pub fn validate_decay_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::InvalidGrid(format!("need at least {MIN_GRID_POINTS} points, got {}", grid.len())));
    }
    if grid[0] < T::one() || !grid.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidGrid("grid must be finite and lie in [1, inf)".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Fits the decay of `oracle` along `grid`, `β` being the growth exponent
/// of the jump coefficient `c`.
pub fn decay_scan<T: Real>(
    oracle: DecayOracle,
    transform: &SmoothTransform<T>,
    c: &CoefficientFamily<T>,
    measure: &LevyMeasure<T>,
    beta: T,
    grid: &[T],
) -> Result<DecayFitReport<T>> {
    validate_decay_grid(grid)?;
    let values: Vec<T> = grid.iter().map(|&x| oracle.eval(x, transform, c, measure)).collect();
    Ok(fit_decay(grid.to_vec(), values, oracle.predicted_exponent(transform.alpha(), beta)))
}

/// Tail fit of arbitrary `(x, value)` data against a predicted exponent.
pub fn fit_decay<T: Real>(x: Vec<T>, value: Vec<T>, predicted_exponent: T) -> DecayFitReport<T> {
    let n = x.len();
    let start = n.saturating_sub(TAIL_POINTS);
    let degenerate = value[start..].iter().any(|v| *v == T::zero());
    let fitted_exponent = if degenerate { None } else { stats::log_log_slope(&x[start..], &value[start..]) };

    let scaled: Vec<T> = x.iter().zip(&value).map(|(&x, &v)| v.abs() * x.powf(-predicted_exponent)).collect();
    let bound_constant = scaled.iter().copied().fold(T::zero(), T::max);
    let top = x[n - 1] / T::lit(10.0);
    let window: Vec<T> = x.iter().zip(&scaled).filter(|(x, _)| **x >= top).map(|(_, s)| *s).collect();
    let hi = window.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = window.iter().copied().fold(T::infinity(), T::min);
    let top_decade_variation = if hi > T::zero() { (hi - lo) / hi } else { T::zero() };

    DecayFitReport { x, value, fitted_exponent, bound_constant, degenerate, predicted_exponent, top_decade_variation }
}

/// Zero-drift model `dM = b dZ`, `M(0) = 0` as the engine input for a
/// martingale scan.
pub fn noise_only_model<T: Real>(integrand: Integrand<T>, noise: NoiseSpec<T>) -> SdeModel<T> {
    SdeModel::new(CoefficientFamily::constant(T::zero())).with_term(integrand, noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPoint<T> {
    pub t: T,
    /// Ensemble mean of `sup_{s ∈ [t, T]} |M(s)/s|` over recorded times.
    pub mean: T,
    pub standard_error: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleScanReport<T> {
    pub moments: Vec<MomentPoint<T>>,
    /// Log-log slope of `E M(t)²` over all checkpoints.
    pub fitted_exponent: Option<T>,
    /// Tail sup curve at `T, T/2, T/4, …`, increasing in `t`.
    pub dyadic: Vec<DyadicPoint<T>>,
    /// The curve is nonincreasing in `t` over the upper half of the dyadic
    /// points, up to 4 standard errors.
    pub sup_curve_nonincreasing: bool,
    pub paths_used: usize,
}

/// Second-moment growth exponent and dyadic tail sups of `M = X − X(0)` for
/// an ensemble simulated with zero drift. Aborted paths are skipped.
pub fn martingale_moment_scan<T: Real>(
    paths: &[PathRecord<T>],
    checkpoints: &[T],
    dyadic_levels: usize,
) -> Result<MartingaleScanReport<T>> {
    let live: Vec<PathRecord<T>> = paths
        .iter()
        .filter(|p| !p.is_aborted())
        .map(|p| {
            let x0 = p.values[0];
            PathRecord { values: p.values.iter().map(|&v| v - x0).collect(), ..p.clone() }
        })
        .collect();
    if live.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if checkpoints.len() < 2 || checkpoints.iter().any(|&t| !(t > T::zero())) {
        return Err(Error::InvalidGrid("need at least two positive checkpoints".into()));
    }
    let moments = second_moment_curve(&live, checkpoints)?;
    let ts: Vec<T> = moments.iter().map(|m| m.t).collect();
    let ms: Vec<T> = moments.iter().map(|m| m.mean).collect();
    let fitted_exponent = stats::log_log_slope(&ts, &ms);

    let horizon = *live[0].times.last().expect("nonempty path");
    let levels: Vec<T> = (0..=dyadic_levels).rev().map(|j| horizon / T::lit(2f64.powi(j as i32))).collect();
    let mut per_level: Vec<Vec<T>> = vec![Vec::with_capacity(live.len()); levels.len()];
    for p in &live {
        // Running sup from the right end, read off at each dyadic level.
        let mut sup = T::zero();
        let mut li = levels.len();
        for (&t, &m) in p.times.iter().zip(&p.values).rev() {
            while li > 0 && t < levels[li - 1] {
                li -= 1;
                per_level[li].push(sup);
            }
            if t > T::zero() {
                sup = sup.max((m / t).abs());
            }
        }
        while li > 0 {
            li -= 1;
            per_level[li].push(sup);
        }
    }
    let dyadic: Vec<DyadicPoint<T>> = levels
        .iter()
        .zip(&per_level)
        .map(|(&t, v)| DyadicPoint { t, mean: stats::mean(v), standard_error: stats::standard_error(v) })
        .collect();
    let half = dyadic.len() / 2;
    let four = T::lit(4.0);
    let sup_curve_nonincreasing = dyadic[half..].windows(2).all(|w| {
        let slack =
            four * (w[0].standard_error * w[0].standard_error + w[1].standard_error * w[1].standard_error).sqrt();
        w[1].mean <= w[0].mean + slack
    });

    Ok(MartingaleScanReport { moments, fitted_exponent, dyadic, sup_curve_nonincreasing, paths_used: live.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate_ensemble, SimulationConfig};
    use crate::noise::DensityShape;
    use approx::assert_relative_eq;

    fn half() -> SmoothTransform<f64> {
        SmoothTransform::new(0.5).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let t = half();
        let c = CoefficientFamily::constant(1.0);
        let nu = LevyMeasure::atoms([(1.0, 1.0)]).unwrap();
        let expected_comp = 2.0 * (101f64.sqrt() - 10.0) - 0.1;
        assert_relative_eq!(compensator_integral(100.0, &t, &c, &nu), expected_comp, max_relative = 1e-10);
        assert_relative_eq!(expected_comp, -2.4876e-4, max_relative = 1e-4);
        let expected_quad = (2.0 * (101f64.sqrt() - 10.0)).powi(2);
        assert_relative_eq!(quadratic_integral(100.0, &t, &c, &nu), expected_quad, max_relative = 1e-12);
        assert_relative_eq!(expected_quad, 9.9502e-3, max_relative = 1e-4);
    }

    #[test]
    fn symmetric_measure_is_negative() {
        let t = half();
        let c = CoefficientFamily::constant(3.0);
        let nu = LevyMeasure::atoms([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        for x in [4.0, 10.0, 1e3] {
            let v = compensator_integral(x, &t, &c, &nu);
            let expected = 0.5 * (t.f(x + 3.0) + t.f(x - 3.0)) - t.f(x);
            assert_relative_eq!(v, expected, max_relative = 1e-9);
            assert!(v < 0.0);
        }
    }

    #[test]
    fn zero_coefficient_and_linearity() {
        let t = half();
        let zero = CoefficientFamily::constant(0.0);
        let nu = LevyMeasure::atoms([(1.0, 1.0), (-2.0, 0.3)]).unwrap();
        assert_eq!(compensator_integral(50.0, &t, &zero, &nu), 0.0);
        assert_eq!(quadratic_integral(50.0, &t, &zero, &nu), 0.0);
        let doubled = LevyMeasure::atoms([(1.0, 2.0), (-2.0, 0.6)]).unwrap();
        let c = CoefficientFamily::constant(1.5);
        assert_eq!(quadratic_integral(50.0, &t, &c, &doubled), 2.0 * quadratic_integral(50.0, &t, &c, &nu));
    }

    #[test]
    fn decay_rates_match_prediction() {
        let t = half();
        let nu = LevyMeasure::atoms([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let grid = stats::log_space(10.0, 1e6, 26);
        for beta in [0.0, 0.25, 0.4] {
            let c = CoefficientFamily::power_diffusion(1.0, beta).unwrap();
            let comp = decay_scan(DecayOracle::Compensator, &t, &c, &nu, beta, &grid).unwrap();
            let slope = comp.fitted_exponent.unwrap();
            assert!(slope <= -(1.0 + 0.5 - 2.0 * beta) + 0.15, "beta={beta} slope={slope}");
            assert!(comp.tail_is_monotone_decreasing(2.0));
            let quad = decay_scan(DecayOracle::Quadratic, &t, &c, &nu, beta, &grid).unwrap();
            assert!(quad.bound_constant.is_finite());
            assert!(quad.top_decade_variation < 0.1, "beta={beta} {}", quad.top_decade_variation);
        }
    }

    #[test]
    fn degenerate_scan_is_flagged() {
        let t = half();
        let nu = LevyMeasure::atoms([(1.0, 1.0)]).unwrap();
        let zero = CoefficientFamily::constant(0.0);
        let grid = stats::log_space(1.0, 1e4, 9);
        let r = decay_scan(DecayOracle::Compensator, &t, &zero, &nu, 0.0, &grid).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.fitted_exponent, None);
        assert!(r.value.iter().all(|v| *v == 0.0));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["x", "value", "fitted_exponent", "bound_constant", "degenerate"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn grid_validation() {
        let t = half();
        let nu = LevyMeasure::atoms([(1.0, 1.0)]).unwrap();
        let c = CoefficientFamily::constant(1.0);
        let short = stats::log_space(1.0, 10.0, 7);
        assert!(decay_scan(DecayOracle::Quadratic, &t, &c, &nu, 0.0, &short).is_err());
        let low = stats::log_space(0.5, 10.0, 9);
        assert!(decay_scan(DecayOracle::Quadratic, &t, &c, &nu, 0.0, &low).is_err());
        let mut unsorted = stats::log_space(1.0, 10.0, 9);
        unsorted.swap(3, 4);
        assert!(decay_scan(DecayOracle::Quadratic, &t, &c, &nu, 0.0, &unsorted).is_err());
    }

    #[test]
    fn density_refinement_is_stable() {
        let t = half();
        let c = CoefficientFamily::power_diffusion(1.0, 0.25).unwrap();
        let shape = DensityShape::Gaussian { mass: 1.0, mean: 0.2, std: 0.7 };
        let coarse = LevyMeasure::density(-4.0, 4.0, 201, shape.clone()).unwrap();
        let fine = LevyMeasure::density(-4.0, 4.0, 401, shape).unwrap();
        // Points where x + c(x)u stays in the power region over the support,
        // so the integrand is smooth in u.
        for x in [30.0, 1e3, 1e4] {
            for o in [DecayOracle::Compensator, DecayOracle::Quadratic] {
                let (a, b) = (o.eval(x, &t, &c, &coarse), o.eval(x, &t, &c, &fine));
                assert!(((a - b) / b).abs() < 1e-8, "{o:?} x={x}: {a} vs {b}");
            }
        }
    }

    fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        stats::log_space(lo, hi, n)
    }

    #[test]
    fn brownian_scan_has_unit_exponent() {
        let cps = geometric(10.0, 200.0, 6);
        let model =
            noise_only_model(Integrand::State(CoefficientFamily::constant(1.0)), NoiseSpec::brownian(1.0).unwrap());
        let cfg = SimulationConfig::new(200.0, 0.1, 0.0, 4).with_stride(20).with_checkpoints(cps.clone());
        let paths = simulate_ensemble(&model, &cfg, 600).unwrap();
        let r = martingale_moment_scan(&paths, &cps, 6).unwrap();
        let g = r.fitted_exponent.unwrap();
        assert!((g - 1.0).abs() < 0.1, "gamma {g}");
        assert!(r.sup_curve_nonincreasing);
        assert_eq!(r.dyadic.len(), 7);
        assert_eq!(r.dyadic.last().unwrap().t, 200.0);
    }

    #[test]
    fn time_power_integrand_exponent() {
        let cps = geometric(10.0, 200.0, 6);
        let model = noise_only_model(Integrand::time_power(1.0, 0.2).unwrap(), NoiseSpec::brownian(1.0).unwrap());
        let cfg = SimulationConfig::new(200.0, 0.1, 0.0, 5).with_stride(20).with_checkpoints(cps.clone());
        let paths = simulate_ensemble(&model, &cfg, 600).unwrap();
        let g = martingale_moment_scan(&paths, &cps, 6).unwrap().fitted_exponent.unwrap();
        assert!((g - 1.4).abs() < 0.1, "gamma {g}");
    }

    #[test]
    fn compensated_poisson_scan() {
        let cps = geometric(10.0, 200.0, 6);
        let nu = LevyMeasure::atoms([(1.0, 1.0)]).unwrap();
        let model = noise_only_model(
            Integrand::State(CoefficientFamily::constant(1.0)),
            NoiseSpec::new(0.0, Some(nu)).unwrap(),
        );
        let cfg = SimulationConfig::new(200.0, 0.1, 0.0, 6).with_stride(20).with_checkpoints(cps.clone());
        let paths = simulate_ensemble(&model, &cfg, 600).unwrap();
        let g = martingale_moment_scan(&paths, &cps, 6).unwrap().fitted_exponent.unwrap();
        assert!((g - 1.0).abs() < 0.1, "gamma {g}");
    }
}
