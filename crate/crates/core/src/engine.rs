//! Jump-adapted Euler scheme for `dX = a(X)dt + Σ_k b_k(X−) dZ_k`.
//!
//! Jump times of every driving process are sampled up front and merged into
//! the time grid, so coefficients at a jump see the exact left limit
//! `X(τ−)`. The compensator of each jump part is integrated continuously as
//! the drift correction `−b_k(X) ∫u ν_k(du)`.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientFamily;
use crate::error::{Error, Result};
use crate::noise::{JumpEvent, NoiseSpec};
use crate::real::Real;
use crate::rng::{PathSeed, StreamKind};
use crate::stats;

/// Largest admissible number of Euler steps per path.
pub const MAX_STEPS: f64 = 1e9;

/// Integrand multiplying a driving noise.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrand<T> {
    /// `b(X(t−))`
    State(CoefficientFamily<T>),
    /// Deterministic `scale · t^exponent`, independent of the state.
    TimePower { scale: T, exponent: T },
}

impl<T: Real> Integrand<T> {
    pub fn time_power(scale: T, exponent: T) -> Result<Self> {
        if !(scale.is_finite() && exponent >= T::zero() && exponent.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "time power needs finite scale and exponent >= 0, got {scale}, {exponent}"
            )));
        }
        Ok(Integrand::TimePower { scale, exponent })
    }

    #[inline]
    pub fn eval(&self, t: T, x: T) -> T {
        match self {
            Integrand::State(b) => b.eval(x),
            Integrand::TimePower { scale, exponent } => *scale * t.powf(*exponent),
        }
    }

    pub fn is_state_independent(&self) -> bool {
        matches!(self, Integrand::TimePower { .. } | Integrand::State(CoefficientFamily::Constant { .. }))
    }
}

impl<T> From<CoefficientFamily<T>> for Integrand<T> {
    fn from(b: CoefficientFamily<T>) -> Self {
        Integrand::State(b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTerm<T> {
    pub integrand: Integrand<T>,
    pub noise: NoiseSpec<T>,
}

/// Drift plus a list of independent noise terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SdeModel<T> {
    pub drift: CoefficientFamily<T>,
    pub terms: Vec<NoiseTerm<T>>,
}

impl<T: Real> SdeModel<T> {
    pub fn new(drift: CoefficientFamily<T>) -> Self {
        Self { drift, terms: Vec::new() }
    }

    pub fn with_term(mut self, integrand: impl Into<Integrand<T>>, noise: NoiseSpec<T>) -> Self {
        self.terms.push(NoiseTerm { integrand: integrand.into(), noise });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig<T> {
    pub horizon: T,
    pub dt: T,
    pub x0: T,
    /// Base seed; path `i` of an ensemble uses `PathSeed::new(seed, i)`.
    pub seed: u64,
    /// Store every n-th grid point. The final point is always stored.
    pub record_stride: usize,
    /// Extra times in `[0, horizon]` at which the path is always recorded.
    #[serde(default)]
    pub checkpoints: Vec<T>,
}

impl<T: Real> SimulationConfig<T> {
    pub fn new(horizon: T, dt: T, x0: T, seed: u64) -> Self {
        Self { horizon, dt, x0, seed, record_stride: 1, checkpoints: Vec::new() }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<T>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(Error::NonPositiveHorizon(self.horizon.as_f64()));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt > self.horizon {
            return Err(Error::InvalidConfig(format!("dt {} exceeds horizon {}", self.dt, self.horizon)));
        }
        if (self.horizon / self.dt).as_f64() > MAX_STEPS {
            return Err(Error::InvalidConfig(format!(
                "horizon/dt = {:e} exceeds {MAX_STEPS:e} steps",
                (self.horizon / self.dt).as_f64()
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidConfig("record_stride must be >= 1".into()));
        }
        if !self.x0.is_finite() {
            return Err(Error::InvalidConfig(format!("x0 must be finite, got {}", self.x0)));
        }
        for &c in &self.checkpoints {
            if !(c >= T::zero() && c <= self.horizon) {
                return Err(Error::InvalidConfig(format!("checkpoint {c} outside [0, {}]", self.horizon)));
            }
        }
        Ok(())
    }

    fn step_count(&self) -> usize {
        let n = (self.horizon / self.dt).as_f64();
        let rounded = n.round();
        if (n - rounded).abs() <= 1e-9 * n.max(1.0) {
            rounded.max(1.0) as usize
        } else {
            n.ceil() as usize
        }
    }

    fn grid_time(&self, i: usize, n: usize) -> T {
        if i >= n {
            self.horizon
        } else {
            T::from_usize_lossy(i) * self.dt
        }
    }
}

/// Why and where a path stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathAbort {
    pub time: f64,
    pub last_finite: f64,
    pub reason: String,
}

/// A simulated càdlàg path. `values[i]` is `X(times[i])` including any jump
/// at that instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord<T> {
    pub seed: PathSeed,
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub jumps: Vec<JumpEvent<T>>,
    /// `X(τ−)` for each entry of `jumps`.
    pub pre_jump_values: Vec<T>,
    /// `X(τ)` for each entry of `jumps`.
    pub post_jump_values: Vec<T>,
    pub abort: Option<PathAbort>,
}

impl<T: Real> PathRecord<T> {
    pub fn is_aborted(&self) -> bool {
        self.abort.is_some()
    }

    pub fn final_value(&self) -> T {
        *self.values.last().expect("path has at least the initial point")
    }

    /// Right-continuous lookup: the value at the last recorded time `≤ t`.
    /// `None` past the end of an aborted path. Exact at recorded times,
    /// which include every checkpoint of the config.
    pub fn value_at(&self, t: T) -> Option<T> {
        let last = *self.times.last()?;
        let tol = T::lit(1e-12) * last.abs().max(T::one());
        if t > last + tol {
            return None;
        }
        let idx = self.times.partition_point(|&s| s <= t + tol);
        (idx > 0).then(|| self.values[idx - 1])
    }

    /// Writes `t,x` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,x")?;
        for (t, x) in self.times.iter().zip(&self.values) {
            writeln!(out, "{t},{x}")?;
        }
        Ok(())
    }

    /// Writes `t,u,k,x_pre,x_post` rows, one per applied jump.
    pub fn write_jump_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,u,k,x_pre,x_post")?;
        for ((j, pre), post) in self.jumps.iter().zip(&self.pre_jump_values).zip(&self.post_jump_values) {
            writeln!(out, "{},{},{},{pre},{post}", j.time, j.size, j.noise_index)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Stop<T> {
    Jump(usize),
    Checkpoint(T),
}

/// Simulates one path with the random streams of `seed`.
pub fn simulate_path<T: Real>(model: &SdeModel<T>, cfg: &SimulationConfig<T>, seed: PathSeed) -> Result<PathRecord<T>> {
    cfg.validate()?;
    let n = cfg.step_count();

    let mut events: Vec<JumpEvent<T>> = Vec::new();
    for (k, term) in model.terms.iter().enumerate() {
        if let Some(m) = term.noise.jumps() {
            let mut rng = seed.stream(k, StreamKind::Jumps);
            events.extend(m.sample_jump_events(cfg.horizon, k, &mut rng)?);
        }
    }
    // Stable: simultaneous jumps keep noise-index order.
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite jump times"));

    let mut gauss: Vec<_> = (0..model.terms.len()).map(|k| seed.stream(k, StreamKind::Gaussian)).collect();
    let sigmas: Vec<T> = model.terms.iter().map(|t| t.noise.sigma()).collect();
    let comp: Vec<T> = model.terms.iter().map(|t| t.noise.compensator_rate()).collect();

    // Checkpoints within 1e-9·dt of a grid point are recorded there; the
    // rest become extra stops inside their step.
    let mut snapped = Vec::new();
    let mut off_grid = Vec::new();
    for &c in &cfg.checkpoints {
        let j = (c / cfg.dt).round().to_usize().unwrap_or(n).min(n);
        if (c - cfg.grid_time(j, n)).abs() <= T::lit(1e-9) * cfg.dt {
            snapped.push(j);
        } else {
            off_grid.push(c);
        }
    }
    snapped.sort_unstable();
    snapped.dedup();
    off_grid.sort_by(|a, b| a.partial_cmp(b).expect("finite checkpoints"));
    off_grid.dedup();

    let capacity = n / cfg.record_stride + 2 + cfg.checkpoints.len();
    let mut rec = PathRecord {
        seed,
        times: Vec::with_capacity(capacity),
        values: Vec::with_capacity(capacity),
        jumps: Vec::with_capacity(events.len()),
        pre_jump_values: Vec::with_capacity(events.len()),
        post_jump_values: Vec::with_capacity(events.len()),
        abort: None,
    };
    rec.times.push(T::zero());
    rec.values.push(cfg.x0);

    let mut x = cfg.x0;
    let mut t = T::zero();
    let (mut next_jump, mut next_off, mut next_snap) = (0usize, 0usize, 0usize);
    let mut stops: Vec<Stop<T>> = Vec::new();

    let euler = |x: T, t: T, h: T, gauss: &mut [rand_chacha::ChaCha8Rng]| -> T {
        let mut drift = model.drift.eval(x);
        let mut noise = T::zero();
        let sqrt_h = h.sqrt();
        for (k, term) in model.terms.iter().enumerate() {
            let b = term.integrand.eval(t, x);
            drift -= b * comp[k];
            if sigmas[k] > T::zero() {
                let xi: f64 = gauss[k].sample(StandardNormal);
                noise += b * sigmas[k] * sqrt_h * T::lit(xi);
            }
        }
        x + drift * h + noise
    };

    'grid: for i in 0..n {
        let end = cfg.grid_time(i + 1, n);
        stops.clear();
        while next_jump < events.len() && events[next_jump].time <= end {
            stops.push(Stop::Jump(next_jump));
            next_jump += 1;
        }
        while next_off < off_grid.len() && off_grid[next_off] < end {
            stops.push(Stop::Checkpoint(off_grid[next_off]));
            next_off += 1;
        }
        let time_of = |s: &Stop<T>| match s {
            Stop::Jump(j) => events[*j].time,
            Stop::Checkpoint(c) => *c,
        };
        // Checkpoints sort before jumps at the same instant only if strictly
        // earlier; a checkpoint at a jump time sees the post-jump value.
        stops.sort_by(|a, b| {
            time_of(a).partial_cmp(&time_of(b)).expect("finite").then_with(|| match (a, b) {
                (Stop::Jump(_), Stop::Checkpoint(_)) => std::cmp::Ordering::Less,
                (Stop::Checkpoint(_), Stop::Jump(_)) => std::cmp::Ordering::Greater,
                _ => std::cmp::Ordering::Equal,
            })
        });

        for s in &stops {
            let ts = time_of(s);
            if ts > t {
                x = euler(x, t, ts - t, &mut gauss);
                t = ts;
            }
            match *s {
                Stop::Jump(j) => {
                    let ev = events[j];
                    let pre = x;
                    x = pre + model.terms[ev.noise_index].integrand.eval(t, pre) * ev.size;
                    rec.jumps.push(ev);
                    rec.pre_jump_values.push(pre);
                    rec.post_jump_values.push(x);
                }
                Stop::Checkpoint(c) => {
                    if x.is_finite() {
                        rec.times.push(c);
                        rec.values.push(x);
                    }
                }
            }
            if !x.is_finite() {
                abort(&mut rec, t, "non-finite state after jump or sub-step");
                break 'grid;
            }
        }
        if end > t {
            x = euler(x, t, end - t, &mut gauss);
            t = end;
        }
        if !x.is_finite() {
            abort(&mut rec, t, "non-finite state after Euler step");
            break;
        }
        let j = i + 1;
        let snap = next_snap < snapped.len() && snapped[next_snap] == j;
        if snap {
            next_snap += 1;
        }
        if snap || j % cfg.record_stride == 0 || j == n {
            rec.times.push(t);
            rec.values.push(x);
        }
    }
    Ok(rec)
}

fn abort<T: Real>(rec: &mut PathRecord<T>, t: T, reason: &str) {
    rec.abort = Some(PathAbort {
        time: t.as_f64(),
        last_finite: rec.values.last().map_or(f64::NAN, |v| v.as_f64()),
        reason: reason.to_string(),
    });
}

/// `n_paths` independent paths; path `i` uses `PathSeed::new(cfg.seed, i)`.
/// Runs on the rayon pool; the output equals [`simulate_ensemble_serial`].
pub fn simulate_ensemble<T: Real>(
    model: &SdeModel<T>,
    cfg: &SimulationConfig<T>,
    n_paths: usize,
) -> Result<Vec<PathRecord<T>>> {
    if n_paths == 0 {
        return Err(Error::EmptyEnsemble);
    }
    cfg.validate()?;
    (0..n_paths as u64).into_par_iter().map(|i| simulate_path(model, cfg, PathSeed::new(cfg.seed, i))).collect()
}

pub fn simulate_ensemble_serial<T: Real>(
    model: &SdeModel<T>,
    cfg: &SimulationConfig<T>,
    n_paths: usize,
) -> Result<Vec<PathRecord<T>>> {
    if n_paths == 0 {
        return Err(Error::EmptyEnsemble);
    }
    (0..n_paths as u64).map(|i| simulate_path(model, cfg, PathSeed::new(cfg.seed, i))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPoint<T> {
    pub t: T,
    pub mean: T,
    pub standard_error: T,
}

/// Values of all non-aborted paths at `t`.
pub fn cross_section<T: Real>(paths: &[PathRecord<T>], t: T) -> Vec<T> {
    paths.iter().filter(|p| !p.is_aborted()).filter_map(|p| p.value_at(t)).collect()
}

/// Sample mean of `X(t)²` with jackknife standard error at each checkpoint.
/// Aborted paths are excluded.
pub fn second_moment_curve<T: Real>(paths: &[PathRecord<T>], checkpoints: &[T]) -> Result<Vec<MomentPoint<T>>> {
    if paths.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    checkpoints
        .iter()
        .map(|&t| {
            let sq: Vec<T> = cross_section(paths, t).into_iter().map(|x| x * x).collect();
            if sq.is_empty() {
                return Err(Error::InvalidGrid(format!("no path covers checkpoint {t}")));
            }
            Ok(MomentPoint { t, mean: stats::mean(&sq), standard_error: stats::jackknife_se_of_mean(&sq) })
        })
        .collect()
}
