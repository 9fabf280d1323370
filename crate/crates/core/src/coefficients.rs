//! Drift and noise coefficient families, and grid checks for the growth
//! hypotheses on them.
//!
//! Power families use the regularized form `(1 + x²)^{γ/2}` instead of
//! `|x|^γ`: it is smooth at the origin, Lipschitz for `γ ≤ 1`, and has the
//! same behaviour at infinity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseSpec;
use crate::real::Real;
use crate::stats::log_space;

/// Piecewise-linear function on a strictly increasing grid, constant
/// beyond the end nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<T> {
    xs: Vec<T>,
    ys: Vec<T>,
}

impl<T: Real> Table<T> {
    pub fn new(xs: Vec<T>, ys: Vec<T>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidCoefficient(format!(
                "table needs matching non-empty grids, got {} x / {} y",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficient("table contains non-finite values".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCoefficient("table grid must be strictly increasing".into()));
        }
        Ok(Self { xs, ys })
    }

    /// Samples `a(x) = mid + spread·sin(ln(1 + x₊))` with `mid`, `spread`
    /// chosen so that `a` oscillates between `low` and `high`. Nodes are
    /// log-spaced on `[10⁻³, x_max]`, plus `x = 0`.
    pub fn log_oscillation(low: T, high: T, x_max: T, nodes: usize) -> Result<Self> {
        if !(low <= high) || !(x_max > T::one()) || nodes < 2 {
            return Err(Error::InvalidCoefficient(format!(
                "log oscillation needs low <= high, x_max > 1, nodes >= 2 (got {low}, {high}, {x_max}, {nodes})"
            )));
        }
        let mid = (low + high) / T::lit(2.0);
        let spread = (high - low) / T::lit(2.0);
        let mut xs = vec![T::zero()];
        xs.extend(log_space(T::lit(1e-3), x_max, nodes));
        let ys = xs.iter().map(|&x| mid + spread * x.ln_1p().sin()).collect();
        Self::new(xs, ys)
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&g| g <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn ys(&self) -> &[T] {
        &self.ys
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientFamily<T> {
    /// `A·(1 + x₊²)^{α/2}`, `A > 0`, `α ∈ [0, 1)`.
    PowerDrift {
        a: T,
        alpha: T,
    },
    /// `scale·(1 + x²)^{β/2}`, `scale ≥ 0`, `β ≥ 0`.
    PowerDiffusion {
        scale: T,
        beta: T,
    },
    Constant {
        value: T,
    },
    Table(Table<T>),
}

impl<T: Real> CoefficientFamily<T> {
    pub fn power_drift(a: T, alpha: T) -> Result<Self> {
        if !(a > T::zero()) || !a.is_finite() {
            return Err(Error::InvalidCoefficient(format!("power drift needs A > 0, got {a}")));
        }
        if !(alpha >= T::zero() && alpha < T::one()) {
            return Err(Error::InvalidCoefficient(format!("power drift needs alpha in [0, 1), got {alpha}")));
        }
        Ok(Self::PowerDrift { a, alpha })
    }

    pub fn power_diffusion(scale: T, beta: T) -> Result<Self> {
        if !(scale >= T::zero()) || !scale.is_finite() {
            return Err(Error::InvalidCoefficient(format!("diffusion scale must be >= 0, got {scale}")));
        }
        if !(beta >= T::zero()) || !beta.is_finite() {
            return Err(Error::InvalidCoefficient(format!("diffusion beta must be >= 0, got {beta}")));
        }
        Ok(Self::PowerDiffusion { scale, beta })
    }

    pub fn constant(value: T) -> Self {
        Self::Constant { value }
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        match self {
            Self::PowerDrift { a, alpha } => {
                if *alpha == T::zero() {
                    return *a;
                }
                let xp = x.max(T::zero());
                *a * (T::one() + xp * xp).powf(*alpha / T::lit(2.0))
            }
            Self::PowerDiffusion { scale, beta } => {
                if *beta == T::zero() {
                    return *scale;
                }
                *scale * (T::one() + x * x).powf(*beta / T::lit(2.0))
            }
            Self::Constant { value } => *value,
            Self::Table(t) => t.eval(x),
        }
    }

    /// Constant `C` with `eval(x)² ≤ C(1 + |x|^{2β})` for `PowerDiffusion`.
    pub fn documented_growth_constant(&self) -> Option<T> {
        match self {
            Self::PowerDiffusion { scale, beta } => Some(T::lit(2.0).powf(beta.max(T::one())) * *scale * *scale),
            _ => None,
        }
    }

    fn lipschitz_flag(&self) -> Flag {
        match self {
            Self::PowerDrift { alpha, .. } if *alpha <= T::one() => Flag::Satisfied,
            Self::PowerDiffusion { beta, .. } if *beta <= T::one() => Flag::Satisfied,
            Self::PowerDrift { .. } | Self::PowerDiffusion { .. } => Flag::NotSatisfied,
            Self::Constant { .. } => Flag::Satisfied,
            Self::Table(_) => Flag::Unknown,
        }
    }

    /// Whether `inf_{|x| ≤ R} |b(x)| > 0` for every `R`.
    fn locally_nondegenerate(&self) -> Flag {
        match self {
            Self::PowerDrift { a, .. } => flag(*a > T::zero()),
            Self::PowerDiffusion { scale, .. } => flag(*scale > T::zero()),
            Self::Constant { value } => flag(*value != T::zero()),
            Self::Table(_) => Flag::Unknown,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Self::PowerDrift { .. } => "power_drift",
            Self::PowerDiffusion { .. } => "power_diffusion",
            Self::Constant { .. } => "constant",
            Self::Table(_) => "table",
        }
    }

    pub fn to_config(&self) -> CoefficientConfig {
        match self {
            Self::PowerDrift { a, alpha } => CoefficientConfig::PowerDrift { a: a.as_f64(), alpha: alpha.as_f64() },
            Self::PowerDiffusion { scale, beta } => {
                CoefficientConfig::PowerDiffusion { scale: scale.as_f64(), beta: beta.as_f64() }
            }
            Self::Constant { value } => CoefficientConfig::Constant { value: value.as_f64() },
            Self::Table(t) => CoefficientConfig::Table {
                points: t.xs.iter().zip(&t.ys).map(|(x, y)| [x.as_f64(), y.as_f64()]).collect(),
            },
        }
    }

    pub fn from_config(cfg: &CoefficientConfig) -> Result<Self> {
        match cfg {
            CoefficientConfig::PowerDrift { a, alpha } => Self::power_drift(T::lit(*a), T::lit(*alpha)),
            CoefficientConfig::PowerDiffusion { scale, beta } => Self::power_diffusion(T::lit(*scale), T::lit(*beta)),
            CoefficientConfig::Constant { value } => Ok(Self::constant(T::lit(*value))),
            CoefficientConfig::Table { points } => Ok(Self::Table(Table::new(
                points.iter().map(|p| T::lit(p[0])).collect(),
                points.iter().map(|p| T::lit(p[1])).collect(),
            )?)),
            CoefficientConfig::LogOscillation { low, high, x_max, nodes } => {
                Ok(Self::Table(Table::log_oscillation(T::lit(*low), T::lit(*high), T::lit(*x_max), *nodes)?))
            }
        }
    }
}

/// Serialized coefficient, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientConfig {
    PowerDrift {
        #[serde(rename = "A")]
        a: f64,
        alpha: f64,
    },
    PowerDiffusion {
        scale: f64,
        beta: f64,
    },
    Constant {
        value: f64,
    },
    Table {
        points: Vec<[f64; 2]>,
    },
    /// Builds a [`Table`] via [`Table::log_oscillation`].
    LogOscillation {
        low: f64,
        high: f64,
        #[serde(default = "default_oscillation_x_max")]
        x_max: f64,
        #[serde(default = "default_oscillation_nodes")]
        nodes: usize,
    },
}

fn default_oscillation_x_max() -> f64 {
    1e8
}

fn default_oscillation_nodes() -> usize {
    4000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "A-prime")]
    APrime,
    #[serde(rename = "B")]
    B,
    #[serde(rename = "C-checklist")]
    CChecklist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Unchecked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Satisfied,
    NotSatisfied,
    Unknown,
}

fn flag(b: bool) -> Flag {
    if b {
        Flag::Satisfied
    } else {
        Flag::NotSatisfied
    }
}

fn all_flags(flags: impl IntoIterator<Item = Flag>) -> Flag {
    let mut out = Flag::Satisfied;
    for f in flags {
        match f {
            Flag::NotSatisfied => return Flag::NotSatisfied,
            Flag::Unknown => out = Flag::Unknown,
            Flag::Satisfied => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistItem {
    pub name: String,
    pub flag: Flag,
}

/// Grid point singled out by a check, with the measured ratio there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness<T> {
    pub x: T,
    pub ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport<T> {
    pub condition: ConditionId,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<T>>,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub checklist: Vec<ChecklistItem>,
}

impl<T: Real> ConditionReport<T> {
    fn fail(condition: ConditionId, witness: Option<Witness<T>>, detail: String) -> Self {
        let witness = witness.or(Some(Witness { x: T::nan(), ratio: T::nan() }));
        Self { condition, verdict: Verdict::Fail, witness, detail, checklist: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Turns a passing report into a failure; used when an extra
    /// precondition on the same hypothesis does not hold.
    pub fn into_failure(mut self, detail: impl Into<String>) -> Self {
        self.verdict = Verdict::Fail;
        if self.witness.is_none() {
            self.witness = Some(Witness { x: T::nan(), ratio: T::nan() });
        }
        self.detail = detail.into();
        self
    }
}

pub const DEFAULT_DRIFT_TOLERANCE: f64 = 1e-3;

/// Log-spaced grid `10¹ … 10⁶` used for drift asymptotics.
pub fn default_drift_grid<T: Real>() -> Vec<T> {
    log_space(T::lit(10.0), T::lit(1e6), 21)
}

/// `0` plus `±` log-spaced points in `[1, 10⁶]`, ascending.
pub fn default_growth_grid<T: Real>() -> Vec<T> {
    let pos = log_space(T::one(), T::lit(1e6), 25);
    let mut grid: Vec<T> = pos.iter().rev().map(|&x| -x).collect();
    grid.push(T::zero());
    grid.extend(pos);
    grid
}

/// Checks `a(x) ~ A x^α` on an increasing positive grid: the deviation
/// `|a(x)/(A x^α) − 1|` must not increase over the upper half of the grid and
/// must end below `tolerance`. A failure reports the tail point with the
/// largest deviation.
pub fn check_drift_asymptotics<T: Real>(
    drift: &CoefficientFamily<T>,
    a: T,
    alpha: T,
    grid: &[T],
    tolerance: T,
) -> ConditionReport<T> {
    let id = ConditionId::A;
    if grid.len() < 2 || grid[0] <= T::zero() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return ConditionReport::fail(
            id,
            grid.first().map(|&x| Witness { x, ratio: T::nan() }),
            "grid must be positive and increasing with at least two points".into(),
        );
    }
    if !(a > T::zero()) {
        return ConditionReport::fail(
            id,
            Some(Witness { x: grid[0], ratio: T::nan() }),
            format!("declared A must be positive, got {a}"),
        );
    }
    let ratios: Vec<T> = grid.iter().map(|&x| drift.eval(x) / (a * x.powf(alpha))).collect();
    let dev: Vec<T> = ratios.iter().map(|r| (*r - T::one()).abs()).collect();
    let n = grid.len();
    let slack = T::lit(64.0) * T::epsilon();
    let tail = n / 2;
    let worst = (tail..n).fold(tail, |w, i| if dev[i] > dev[w] || dev[i].is_nan() { i } else { w });
    let worst_witness = Witness { x: grid[worst], ratio: ratios[worst] };
    if let Some(i) = (tail..n - 1).find(|&i| !(dev[i + 1] <= dev[i] + slack)) {
        return ConditionReport::fail(
            id,
            Some(worst_witness),
            format!("deviation from A x^alpha grows at x={}: {} -> {}", grid[i + 1], dev[i], dev[i + 1]),
        );
    }
    let last = Witness { x: grid[n - 1], ratio: ratios[n - 1] };
    if !(dev[n - 1] < tolerance) {
        return ConditionReport::fail(
            id,
            Some(worst_witness),
            format!("a(x)/(A x^alpha) = {} at x = {}, tolerance {}", ratios[n - 1], grid[n - 1], tolerance),
        );
    }
    ConditionReport {
        condition: id,
        verdict: Verdict::Pass,
        witness: Some(last),
        detail: format!("a(x)/(A x^alpha) -> {} at x = {}", ratios[n - 1], grid[n - 1]),
        checklist: Vec::new(),
    }
}

/// Checks `lower ≤ a(x) ≤ upper` at every grid point.
pub fn check_drift_bounds<T: Real>(drift: &CoefficientFamily<T>, lower: T, upper: T, grid: &[T]) -> ConditionReport<T> {
    let id = ConditionId::APrime;
    if !(lower > T::zero() && lower <= upper) {
        return ConditionReport::fail(id, None, format!("need 0 < A_- <= A_+, got [{lower}, {upper}]"));
    }
    let mut worst: Option<(T, T, T)> = None;
    for &x in grid {
        let v = drift.eval(x);
        let excess = (lower - v).max(v - upper);
        if worst.is_none_or(|(_, _, e)| excess > e) {
            worst = Some((x, v, excess));
        }
    }
    let Some((x, v, excess)) = worst else {
        return ConditionReport::fail(id, None, "empty grid".into());
    };
    let witness = Some(Witness { x, ratio: v });
    if excess > T::zero() {
        return ConditionReport::fail(id, witness, format!("a({x}) = {v} outside [{lower}, {upper}]"));
    }
    ConditionReport {
        condition: id,
        verdict: Verdict::Pass,
        witness,
        detail: format!("a(x) within [{lower}, {upper}] on {} grid points", grid.len()),
        checklist: Vec::new(),
    }
}

/// `|x|^{2β}` with the convention `0^{2β} = 0` for every `β`.
fn growth_power<T: Real>(x: T, beta: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x.abs().powf(T::lit(2.0) * beta)
    }
}

/// Checks `Σ b_k²(x) ≤ C(1 + |x|^{2β})` at every grid point. The witness is
/// the grid point with the largest ratio of the two sides.
pub fn check_growth_condition<T: Real>(
    coefficients: &[CoefficientFamily<T>],
    c: T,
    beta: T,
    grid: &[T],
) -> ConditionReport<T> {
    let id = ConditionId::B;
    if !(c > T::zero()) || !(beta >= T::zero()) {
        return ConditionReport::fail(id, None, format!("need C > 0 and beta >= 0, got C={c}, beta={beta}"));
    }
    let mut worst: Option<Witness<T>> = None;
    for &x in grid {
        let lhs: T = coefficients
            .iter()
            .map(|b| {
                let v = b.eval(x);
                v * v
            })
            .sum();
        let rhs = c * (T::one() + growth_power(x, beta));
        let ratio = lhs / rhs;
        if worst.is_none_or(|w| ratio > w.ratio) {
            worst = Some(Witness { x, ratio });
        }
    }
    match worst {
        Some(w) if w.ratio > T::one() => ConditionReport::fail(
            id,
            Some(w),
            format!("sum b_k^2 exceeds C(1+|x|^(2 beta)) at x = {} by factor {}", w.x, w.ratio),
        ),
        w => ConditionReport {
            condition: id,
            verdict: Verdict::Pass,
            witness: w,
            detail: format!("growth bound holds on {} grid points", grid.len()),
            checklist: Vec::new(),
        },
    }
}

/// Inspects the configuration for the documented sufficient conditions of
/// divergence `X(t) → +∞`. Never passes or fails; divergence is a property
/// of the solution, not of the coefficients.
pub fn condition_c_checklist<T: Real>(
    drift: &CoefficientFamily<T>,
    diffusions: &[CoefficientFamily<T>],
    noises: &[NoiseSpec<T>],
    alpha: T,
) -> ConditionReport<T> {
    let mut items = Vec::new();

    let mut lipschitz = vec![drift.lipschitz_flag()];
    items.push(ChecklistItem {
        name: format!("lipschitz: drift ({})", drift.kind_name()),
        flag: drift.lipschitz_flag(),
    });
    for (k, b) in diffusions.iter().enumerate() {
        lipschitz.push(b.lipschitz_flag());
        items.push(ChecklistItem {
            name: format!("lipschitz: diffusion[{k}] ({})", b.kind_name()),
            flag: b.lipschitz_flag(),
        });
    }

    let limit = match drift {
        CoefficientFamily::PowerDrift { a, alpha: own } => flag(*a > T::zero() && *own == alpha),
        CoefficientFamily::Constant { value } => flag(*value > T::zero() && alpha == T::zero()),
        CoefficientFamily::PowerDiffusion { scale, beta } => flag(*scale > T::zero() && *beta == alpha),
        CoefficientFamily::Table(_) => Flag::Unknown,
    };

    let mut nondegenerate = Vec::new();
    for (k, (b, z)) in diffusions.iter().zip(noises).enumerate() {
        let gaussian = flag(z.sigma() > T::zero());
        let positive = flag(z.jumps().is_some_and(|m| m.has_only_positive_jumps()));
        let local = b.locally_nondegenerate();
        items.push(ChecklistItem { name: format!("noise[{k}]: inf_(|x|<=R) |b_k(x)| > 0"), flag: local });
        items.push(ChecklistItem { name: format!("noise[{k}]: nondegenerate gaussian component"), flag: gaussian });
        items.push(ChecklistItem { name: format!("noise[{k}]: positive jumps"), flag: positive });
        let either = match (gaussian, positive) {
            (Flag::Satisfied, _) | (_, Flag::Satisfied) => Flag::Satisfied,
            _ => Flag::NotSatisfied,
        };
        nondegenerate.push(all_flags([local, either]));
    }
    let noise_flag = if nondegenerate.contains(&Flag::Satisfied) {
        Flag::Satisfied
    } else if nondegenerate.contains(&Flag::Unknown) {
        Flag::Unknown
    } else {
        Flag::NotSatisfied
    };

    let mut summary = vec![
        ChecklistItem { name: "lipschitz coefficients".into(), flag: all_flags(lipschitz) },
        ChecklistItem { name: "lim a(x)/|x|^alpha > 0".into(), flag: limit },
        ChecklistItem { name: "some noise nondegenerate (gaussian or positive jumps)".into(), flag: noise_flag },
    ];
    summary.extend(items);
    ConditionReport {
        condition: ConditionId::CChecklist,
        verdict: Verdict::Unchecked,
        witness: None,
        detail: "advisory: sufficient conditions for X(t) -> +inf, not verified".into(),
        checklist: summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::LevyMeasure;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let d = CoefficientFamily::power_drift(1.0, 0.5).unwrap();
        assert_eq!(d.eval(0.0), 1.0);
        let d = CoefficientFamily::power_drift(2.0, 0.0).unwrap();
        assert_eq!(d.eval(1e3), 2.0);
        let b = CoefficientFamily::power_diffusion(1.0, 0.5).unwrap();
        // (1+x²)^{1/4}/x^{1/2} → 1
        for x in [1e2f64, 1e4, 1e6] {
            let r: f64 = b.eval(x) / x.sqrt();
            assert_relative_eq!(r, (1.0 + 1.0 / (x * x)).powf(0.25), max_relative = 1e-14);
        }
        assert_relative_eq!(b.eval(1e6) / 1e3, 1.0, max_relative = 1e-11);
    }

    #[test]
    fn constructors_validate() {
        assert!(CoefficientFamily::power_drift(0.0, 0.5).is_err());
        assert!(CoefficientFamily::power_drift(1.0, 1.0).is_err());
        assert!(CoefficientFamily::power_drift(1.0, -0.1).is_err());
        assert!(CoefficientFamily::power_diffusion(-1.0, 0.5).is_err());
        assert!(CoefficientFamily::power_diffusion(1.0, -0.5).is_err());
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Table::<f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn table_interpolates_and_clamps() {
        let t = CoefficientFamily::Table(Table::new(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, -1.0]).unwrap());
        assert_eq!(t.eval(-5.0), 1.0);
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(2.0), 1.0);
        assert_eq!(t.eval(10.0), -1.0);
    }

    #[test]
    fn log_oscillation_stays_in_band() {
        let t = Table::log_oscillation(1.0, 2.0, 1e8, 2000).unwrap();
        for &y in t.ys() {
            assert!((1.0..=2.0).contains(&y));
        }
        let f = CoefficientFamily::Table(t);
        let x: f64 = 12345.0;
        assert_relative_eq!(f.eval(x), 1.5 + 0.5 * x.ln_1p().sin(), epsilon = 1e-4);
    }

    #[test]
    fn drift_asymptotics_examples() {
        let d = CoefficientFamily::power_drift(1.0, 0.5).unwrap();
        let grid = default_drift_grid::<f64>();
        let tol = DEFAULT_DRIFT_TOLERANCE;
        assert_eq!(check_drift_asymptotics(&d, 1.0, 0.5, &grid, tol).verdict, Verdict::Pass);

        let r = check_drift_asymptotics(&d, 2.0, 0.5, &grid, tol);
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        assert_eq!(w.x, 1e6);
        assert_relative_eq!(w.ratio, 0.5, max_relative = 1e-9);

        let c = CoefficientFamily::constant(1.0);
        assert_eq!(check_drift_asymptotics(&c, 1.0, 0.0, &grid, tol).verdict, Verdict::Pass);
    }

    #[test]
    fn drift_check_rejects_bad_grid_without_panicking() {
        let c = CoefficientFamily::constant(1.0);
        let r = check_drift_asymptotics(&c, 1.0, 0.0, &[10.0, 5.0], 1e-3);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
    }

    #[test]
    fn growth_examples() {
        let grid = default_growth_grid::<f64>();
        let b = CoefficientFamily::power_diffusion(1.0, 0.25).unwrap();
        assert_eq!(check_growth_condition(&[b], 2.0, 0.25, &grid).verdict, Verdict::Pass);

        let r = check_growth_condition(&[CoefficientFamily::constant(3.0)], 1.0, 0.0, &grid);
        assert_eq!(r.verdict, Verdict::Fail);
        let w = r.witness.unwrap();
        assert_eq!(w.x, 0.0);
        assert_eq!(w.ratio, 9.0);

        let r = check_growth_condition::<f64>(&[], 1.0, 0.0, &grid);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn documented_constant_bounds_power_diffusion() {
        let grid = default_growth_grid::<f64>();
        for beta in [0.0, 0.25, 0.5, 0.9, 1.5] {
            let b = CoefficientFamily::power_diffusion(3.0, beta).unwrap();
            let c = b.documented_growth_constant().unwrap();
            assert_eq!(check_growth_condition(&[b], c, beta, &grid).verdict, Verdict::Pass, "beta {beta}");
        }
    }

    #[test]
    fn drift_bounds() {
        let t = CoefficientFamily::Table(Table::log_oscillation(1.0, 2.0, 1e8, 2000).unwrap());
        let grid = default_growth_grid::<f64>();
        assert!(check_drift_bounds(&t, 1.0, 2.0, &grid).passed());
        let r = check_drift_bounds(&t, 1.2, 2.0, &grid);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.witness.is_some());
    }

    fn item(r: &ConditionReport<f64>, name: &str) -> Flag {
        r.checklist.iter().find(|i| i.name == name).map(|i| i.flag).unwrap()
    }

    #[test]
    fn checklist_examples() {
        let a = CoefficientFamily::power_drift(1.0, 0.5).unwrap();
        let b = CoefficientFamily::constant(1.0);
        let z = NoiseSpec::brownian(1.0).unwrap();
        let r = condition_c_checklist(&a, std::slice::from_ref(&b), &[z], 0.5);
        assert_eq!(r.verdict, Verdict::Unchecked);
        assert!(r.checklist[..3].iter().all(|i| i.flag == Flag::Satisfied));

        let neg = NoiseSpec::new(0.0, Some(LevyMeasure::atoms([(-1.0, 1.0)]).unwrap())).unwrap();
        let r = condition_c_checklist(&a, std::slice::from_ref(&b), &[neg], 0.5);
        assert_eq!(item(&r, "noise[0]: positive jumps"), Flag::NotSatisfied);

        let table = CoefficientFamily::Table(Table::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap());
        let r = condition_c_checklist(&table, &[b], &[NoiseSpec::brownian(1.0).unwrap()], 0.0);
        assert_eq!(item(&r, "lipschitz: drift (table)"), Flag::Unknown);
        assert_eq!(r.verdict, Verdict::Unchecked);
    }

    #[test]
    fn config_round_trip() {
        let cfg: CoefficientConfig = serde_json::from_str(r#"{"kind":"power_drift","A":1.5,"alpha":0.5}"#).unwrap();
        let f = CoefficientFamily::<f64>::from_config(&cfg).unwrap();
        assert_eq!(f, CoefficientFamily::PowerDrift { a: 1.5, alpha: 0.5 });
        assert_eq!(f.to_config(), cfg);
    }

    proptest! {
        #[test]
        fn power_drift_positive_and_monotone(a in 1e-3f64..1e3, alpha in 0.0f64..0.999, x in 0.0f64..1e9, dx in 0.0f64..1e6) {
            let d = CoefficientFamily::power_drift(a, alpha).unwrap();
            prop_assert!(d.eval(-x) > 0.0);
            prop_assert!(d.eval(x) > 0.0);
            prop_assert!(d.eval(x + dx) >= d.eval(x));
        }

        #[test]
        fn families_finite_on_range(s in 0.0f64..1e3, g in 0.0f64..0.999, x in -1e9f64..1e9) {
            let drift = CoefficientFamily::PowerDrift { a: s.max(1e-9), alpha: g };
            let diffusion = CoefficientFamily::PowerDiffusion { scale: s, beta: g };
            prop_assert!(drift.eval(x).is_finite());
            prop_assert!(diffusion.eval(x).is_finite());
        }

        #[test]
        fn growth_predicate_monotone(scale in 0.0f64..10.0, beta in 0.0f64..1.0, c in 0.1f64..50.0, dc in 0.0f64..10.0, db in 0.0f64..1.0) {
            let grid = default_growth_grid::<f64>();
            let bs = [CoefficientFamily::power_diffusion(scale, beta).unwrap(), CoefficientFamily::constant(1.0)];
            if check_growth_condition(&bs, c, beta, &grid).passed() {
                prop_assert!(check_growth_condition(&bs, c + dc, beta, &grid).passed());
                prop_assert!(check_growth_condition(&bs, c, beta + db, &grid).passed());
            }
        }
    }
}
