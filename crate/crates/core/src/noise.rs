//! Centered Lévy noise with finite second moment.
//!
//! A driving process is `Z(t) = σ W(t) + ∫∫ u Ñ(ds, du)`, where `Ñ` is a
//! Poisson random measure with intensity `dt ⊗ ν(du)` minus its compensator.
//! Only finite-activity measures (`ν(ℝ) < ∞`) are represented; an
//! infinite-activity measure has to be truncated by the caller before it can
//! be simulated exactly.
//!
//! Both measure variants reduce to a list of weighted points: atoms are used
//! as given, densities are discretized once with composite Simpson weights.
//! Every integral against `ν` is then a finite weighted sum.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// A point of a discretized measure: location `u` carrying mass `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint<T> {
    pub u: T,
    pub weight: T,
}

/// Shape of an absolutely continuous Lévy measure on its support.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityShape<T> {
    Uniform {
        height: T,
    },
    /// `mass · φ((u − mean)/std) / std`, restricted to the support.
    Gaussian {
        mass: T,
        mean: T,
        std: T,
    },
    /// Density values at the quadrature nodes.
    Tabulated {
        values: Vec<T>,
    },
}

impl<T: Real> DensityShape<T> {
    fn eval(&self, u: T, node: usize) -> T {
        match self {
            DensityShape::Uniform { height } => *height,
            DensityShape::Gaussian { mass, mean, std } => {
                let z = (u - *mean) / *std;
                let norm = (T::lit(2.0) * T::PI()).sqrt();
                *mass * (-(z * z) / T::lit(2.0)).exp() / (*std * norm)
            }
            DensityShape::Tabulated { values } => values[node],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind<T> {
    Atoms,
    Density {
        lo: T,
        hi: T,
        shape: DensityShape<T>,
        /// Density at each node.
        values: Vec<T>,
        /// Trapezoid cumulative mass at each node, for inverse-CDF sampling.
        cdf: Vec<T>,
    },
}

/// Lévy (characteristic) measure `ν` with finite, positive total mass.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure<T> {
    kind: Kind<T>,
    points: Vec<WeightedPoint<T>>,
    /// Cumulative atom weights, used for categorical sampling.
    cumulative: Vec<T>,
    mass: T,
}

impl<T: Real> LevyMeasure<T> {
    /// Discrete measure `Σ wᵢ δ_{uᵢ}`.
    pub fn atoms(atoms: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let points: Vec<WeightedPoint<T>> = atoms.into_iter().map(|(u, weight)| WeightedPoint { u, weight }).collect();
        if points.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for p in &points {
            if !p.u.is_finite() || !p.weight.is_finite() {
                return Err(Error::InvalidMeasure(format!("non-finite atom ({}, {})", p.u, p.weight)));
            }
            if p.weight < T::zero() {
                return Err(Error::InvalidMeasure(format!("negative weight {}", p.weight)));
            }
        }
        let mut acc = T::zero();
        let cumulative = points
            .iter()
            .map(|p| {
                acc += p.weight;
                acc
            })
            .collect();
        Self::finish(Kind::Atoms, points, cumulative)
    }

    /// Density measure on `[lo, hi]` discretized on `nodes` Simpson nodes.
    /// An even node count is raised by one.
    pub fn density(lo: T, hi: T, nodes: usize, shape: DensityShape<T>) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidMeasure(format!("bad support [{lo}, {hi}]")));
        }
        if nodes < 2 {
            return Err(Error::InvalidMeasure(format!("need at least 2 nodes, got {nodes}")));
        }
        let n = if nodes.is_multiple_of(2) { nodes + 1 } else { nodes };
        if let DensityShape::Tabulated { values } = &shape {
            if values.len() != n {
                return Err(Error::InvalidMeasure(format!(
                    "tabulated density has {} values, grid has {n} nodes",
                    values.len()
                )));
            }
        }
        if let DensityShape::Gaussian { std, .. } = &shape {
            if !(*std > T::zero()) {
                return Err(Error::InvalidMeasure(format!("gaussian std must be positive, got {std}")));
            }
        }

        let h = (hi - lo) / T::from_usize_lossy(n - 1);
        let third = h / T::lit(3.0);
        let mut values = Vec::with_capacity(n);
        let mut points = Vec::with_capacity(n);
        for j in 0..n {
            let u = if j + 1 == n { hi } else { lo + h * T::from_usize_lossy(j) };
            let d = shape.eval(u, j);
            if !d.is_finite() || d < T::zero() {
                return Err(Error::InvalidMeasure(format!("density {d} at u={u}")));
            }
            let simpson = if j == 0 || j + 1 == n {
                T::one()
            } else if j % 2 == 1 {
                T::lit(4.0)
            } else {
                T::lit(2.0)
            };
            values.push(d);
            points.push(WeightedPoint { u, weight: third * simpson * d });
        }
        let mut cdf = Vec::with_capacity(n);
        let mut acc = T::zero();
        cdf.push(acc);
        for j in 1..n {
            acc += (values[j - 1] + values[j]) * h / T::lit(2.0);
            cdf.push(acc);
        }
        let kind = Kind::Density { lo, hi, shape, values, cdf };
        Self::finish(kind, points, Vec::new())
    }

    /// Density measure from an arbitrary function, tabulated at the nodes.
    pub fn density_fn(lo: T, hi: T, nodes: usize, d: impl Fn(T) -> T) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidMeasure(format!("need at least 2 nodes, got {nodes}")));
        }
        let n = if nodes.is_multiple_of(2) { nodes + 1 } else { nodes };
        let h = (hi - lo) / T::from_usize_lossy(n - 1);
        let values = (0..n).map(|j| d(if j + 1 == n { hi } else { lo + h * T::from_usize_lossy(j) })).collect();
        Self::density(lo, hi, n, DensityShape::Tabulated { values })
    }

    fn finish(kind: Kind<T>, points: Vec<WeightedPoint<T>>, cumulative: Vec<T>) -> Result<Self> {
        let mass: T = points.iter().map(|p| p.weight).sum();
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::InvalidMeasure(format!("total mass must be finite and > 0, got {mass}")));
        }
        let m = Self { kind, points, cumulative, mass };
        let m2 = m.moment(2);
        if !m2.is_finite() {
            return Err(Error::InvalidMeasure("second moment is not finite".into()));
        }
        Ok(m)
    }

    /// Total mass `λ = ν(ℝ)`; the Poisson intensity of jumps.
    pub fn mass(&self) -> T {
        self.mass
    }

    /// `∫ uᵖ ν(du)`.
    pub fn moment(&self, p: u32) -> T {
        self.integrate(|u| u.powi(p as i32))
    }

    /// `∫ g(u) ν(du)` by the measure's fixed rule (exact for atoms).
    pub fn integrate(&self, mut g: impl FnMut(T) -> T) -> T {
        self.points.iter().map(|p| p.weight * g(p.u)).sum()
    }

    /// The weighted points every integral is summed over.
    pub fn points(&self) -> &[WeightedPoint<T>] {
        &self.points
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, Kind::Atoms)
    }

    /// True when `ν` charges only `(0, ∞)`.
    pub fn has_only_positive_jumps(&self) -> bool {
        match &self.kind {
            Kind::Atoms => self.points.iter().all(|p| p.weight == T::zero() || p.u > T::zero()),
            Kind::Density { lo, values, .. } => *lo > T::zero() || (*lo == T::zero() && values[0] == T::zero()),
        }
    }

    /// Draws one jump size from `ν/λ`.
    pub fn sample_size<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let uniform: f64 = rng.random();
        match &self.kind {
            Kind::Atoms => {
                let target = T::lit(uniform) * self.mass;
                let i = self.cumulative.partition_point(|&c| c <= target);
                self.points[i.min(self.points.len() - 1)].u
            }
            Kind::Density { cdf, .. } => {
                let total = *cdf.last().expect("nodes");
                let target = T::lit(uniform) * total;
                let j = cdf.partition_point(|&c| c <= target).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let (u0, u1) = (self.points[j - 1].u, self.points[j].u);
                if c1 > c0 {
                    u0 + (u1 - u0) * (target - c0) / (c1 - c0)
                } else {
                    u0
                }
            }
        }
    }

    /// Jumps of a Poisson random measure with intensity `dt ⊗ ν` on
    /// `(0, horizon]`: a Poisson(λ·horizon) count, i.i.d. uniform times,
    /// i.i.d. sizes from `ν/λ`, sorted by time.
    pub fn sample_jump_events<R: Rng + ?Sized>(
        &self,
        horizon: T,
        noise_index: usize,
        rng: &mut R,
    ) -> Result<Vec<JumpEvent<T>>> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::NonPositiveHorizon(horizon.as_f64()));
        }
        let rate = (self.mass * horizon).as_f64();
        let poisson = Poisson::new(rate).map_err(|e| Error::InvalidMeasure(format!("poisson rate {rate}: {e}")))?;
        let count = poisson.sample(rng) as usize;
        let mut events = Vec::with_capacity(count);
        for _ in 0..count {
            // (0, 1] so that no jump lands at t = 0.
            let s: f64 = 1.0 - rng.random::<f64>();
            let time = horizon * T::lit(s);
            let size = self.sample_size(rng);
            events.push(JumpEvent { time, size, noise_index });
        }
        events.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
        Ok(events)
    }

    pub fn to_config(&self) -> LevyMeasureConfig {
        match &self.kind {
            Kind::Atoms => LevyMeasureConfig::Atoms {
                atoms: self.points.iter().map(|p| [p.u.as_f64(), p.weight.as_f64()]).collect(),
            },
            Kind::Density { lo, hi, shape, .. } => LevyMeasureConfig::Density {
                support: [lo.as_f64(), hi.as_f64()],
                nodes: self.points.len(),
                density: match shape {
                    DensityShape::Uniform { height } => DensityConfig::Uniform { height: height.as_f64() },
                    DensityShape::Gaussian { mass, mean, std } => {
                        DensityConfig::Gaussian { mass: mass.as_f64(), mean: mean.as_f64(), std: std.as_f64() }
                    }
                    DensityShape::Tabulated { values } => {
                        DensityConfig::Tabulated { values: values.iter().map(|v| v.as_f64()).collect() }
                    }
                },
            },
        }
    }

    pub fn from_config(cfg: &LevyMeasureConfig) -> Result<Self> {
        match cfg {
            LevyMeasureConfig::Atoms { atoms } => Self::atoms(atoms.iter().map(|[u, w]| (T::lit(*u), T::lit(*w)))),
            LevyMeasureConfig::Density { support, nodes, density } => {
                let shape = match density {
                    DensityConfig::Uniform { height } => DensityShape::Uniform { height: T::lit(*height) },
                    DensityConfig::Gaussian { mass, mean, std } => {
                        DensityShape::Gaussian { mass: T::lit(*mass), mean: T::lit(*mean), std: T::lit(*std) }
                    }
                    DensityConfig::Tabulated { values } => {
                        DensityShape::Tabulated { values: values.iter().map(|v| T::lit(*v)).collect() }
                    }
                };
                Self::density(T::lit(support[0]), T::lit(support[1]), *nodes, shape)
            }
        }
    }
}

/// Serialized form of a [`LevyMeasure`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevyMeasureConfig {
    Atoms { atoms: Vec<[f64; 2]> },
    Density { support: [f64; 2], nodes: usize, density: DensityConfig },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    Uniform { height: f64 },
    Gaussian { mass: f64, mean: f64, std: f64 },
    Tabulated { values: Vec<f64> },
}

/// One jump of a sampled path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent<T> {
    pub time: T,
    pub size: T,
    pub noise_index: usize,
}

/// A driving Lévy process `σW + compensated jumps of ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec<T> {
    sigma: T,
    jumps: Option<LevyMeasure<T>>,
}

impl<T: Real> NoiseSpec<T> {
    /// Rejects a process with zero variance rate; use [`NoiseSpec::zero`]
    /// for the zero process.
    pub fn new(sigma: T, jumps: Option<LevyMeasure<T>>) -> Result<Self> {
        if !(sigma >= T::zero()) || !sigma.is_finite() {
            return Err(Error::InvalidNoise(format!("sigma must be finite and >= 0, got {sigma}")));
        }
        let spec = Self { sigma, jumps };
        if !(spec.variance_rate() > T::zero()) {
            return Err(Error::InvalidNoise(
                "variance rate σ² + ∫u²ν(du) is zero; use NoiseSpec::zero for the zero process".into(),
            ));
        }
        Ok(spec)
    }

    pub fn brownian(sigma: T) -> Result<Self> {
        Self::new(sigma, None)
    }

    pub fn zero() -> Self {
        Self { sigma: T::zero(), jumps: None }
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn jumps(&self) -> Option<&LevyMeasure<T>> {
        self.jumps.as_ref()
    }

    /// `σ² + ∫u²ν(du)`, so that `E Z(t)² = t · variance_rate`.
    pub fn variance_rate(&self) -> T {
        self.sigma * self.sigma + self.jumps.as_ref().map_or(T::zero(), |m| m.moment(2))
    }

    /// `∫u ν(du)`, the rate of the compensator drift.
    pub fn compensator_rate(&self) -> T {
        self.jumps.as_ref().map_or(T::zero(), |m| m.moment(1))
    }

    pub fn to_config(&self) -> NoiseConfig {
        NoiseConfig { sigma: self.sigma.as_f64(), jumps: self.jumps.as_ref().map(LevyMeasure::to_config) }
    }

    pub fn from_config(cfg: &NoiseConfig) -> Result<Self> {
        let jumps = cfg.jumps.as_ref().map(LevyMeasure::from_config).transpose()?;
        Self::new(T::lit(cfg.sigma), jumps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jumps: Option<LevyMeasureConfig>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_point() -> LevyMeasure<f64> {
        LevyMeasure::atoms([(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn atom_mass_and_moments() {
        let m = two_point();
        assert_eq!(m.mass(), 1.0);
        assert_eq!(m.moment(2), 1.0);
        assert_eq!(m.moment(1), 0.0);
        let single = LevyMeasure::atoms([(2.0, 3.0)]).unwrap();
        assert_eq!(single.mass(), 3.0);
        assert_eq!(single.moment(2), 12.0);
    }

    #[test]
    fn uniform_density_mass() {
        let m = LevyMeasure::density(0.0, 2.0, 129, DensityShape::Uniform { height: 1.0 }).unwrap();
        assert_relative_eq!(m.mass(), 2.0, max_relative = 1e-12);
        // ∫₀² u² du = 8/3, exact for Simpson.
        assert_relative_eq!(m.moment(2), 8.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(m.moment(1), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn even_node_count_is_raised() {
        let m = LevyMeasure::density(0.0, 1.0, 4, DensityShape::Uniform { height: 1.0 }).unwrap();
        assert_eq!(m.points().len(), 5);
        let m = LevyMeasure::density(0.0, 1.0, 2, DensityShape::Uniform { height: 1.0 }).unwrap();
        assert_eq!(m.points().len(), 3);
    }

    #[test]
    fn invalid_measures_rejected() {
        assert!(LevyMeasure::<f64>::atoms([]).is_err());
        assert!(LevyMeasure::atoms([(1.0, -0.1)]).is_err());
        assert!(LevyMeasure::atoms([(1.0, 0.0)]).is_err());
        assert!(LevyMeasure::atoms([(f64::NAN, 1.0)]).is_err());
        assert!(LevyMeasure::density(1.0, 1.0, 9, DensityShape::Uniform { height: 1.0 }).is_err());
        assert!(LevyMeasure::density(0.0, 1.0, 1, DensityShape::Uniform { height: 1.0 }).is_err());
        assert!(LevyMeasure::density(0.0, 1.0, 9, DensityShape::Uniform { height: -1.0 }).is_err());
        assert!(LevyMeasure::density(0.0, 1.0, 5, DensityShape::Tabulated { values: vec![1.0; 4] }).is_err());
    }

    #[test]
    fn gaussian_density_integrates_to_mass() {
        let m =
            LevyMeasure::density(-8.0, 8.0, 401, DensityShape::Gaussian { mass: 2.0, mean: 0.0, std: 1.0 }).unwrap();
        assert_relative_eq!(m.mass(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(m.moment(2), 2.0, max_relative = 1e-9);
    }

    #[test]
    fn variance_rates() {
        assert_eq!(NoiseSpec::brownian(1.0).unwrap().variance_rate(), 1.0);
        assert_eq!(NoiseSpec::new(0.0, Some(two_point())).unwrap().variance_rate(), 1.0);
        let single = LevyMeasure::atoms([(2.0, 3.0)]).unwrap();
        assert_eq!(NoiseSpec::new(1.0, Some(single)).unwrap().variance_rate(), 13.0);
        assert!(NoiseSpec::<f64>::new(0.0, None).is_err());
        assert!(NoiseSpec::<f64>::new(-1.0, None).is_err());
        let at_zero = LevyMeasure::atoms([(0.0, 1.0)]).unwrap();
        assert!(NoiseSpec::new(0.0, Some(at_zero)).is_err());
        assert_eq!(NoiseSpec::<f64>::zero().variance_rate(), 0.0);
    }

    #[test]
    fn degenerate_size_law() {
        let m = LevyMeasure::atoms([(5.0, 2.0)]).unwrap();
        let mut total = 0usize;
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ev = m.sample_jump_events(10.0, 0, &mut rng).unwrap();
            assert!(ev.iter().all(|e| e.size == 5.0));
            total += ev.len();
        }
        let mean = total as f64 / 200.0;
        // Poisson(20): SE of the mean over 200 draws is √(20/200) ≈ 0.32.
        assert!((mean - 20.0).abs() < 4.0 * (20.0f64 / 200.0).sqrt(), "mean count {mean}");
    }

    #[test]
    fn jump_sampling_is_deterministic_and_sorted() {
        let m = two_point();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            m.sample_jump_events(10.0, 3, &mut rng).unwrap()
        };
        let a = draw();
        assert_eq!(a, draw());
        assert!(a.windows(2).all(|w| w[0].time < w[1].time));
        assert!(a.iter().all(|e| e.time > 0.0 && e.time <= 10.0 && e.noise_index == 3));
    }

    #[test]
    fn rejects_nonpositive_horizon() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(two_point().sample_jump_events(0.0, 0, &mut rng), Err(Error::NonPositiveHorizon(0.0)));
        assert!(two_point().sample_jump_events(-2.0, 0, &mut rng).is_err());
    }

    #[test]
    fn event_count_tail_bound() {
        // λ = 1, horizon 1000: |N − 1000| ≤ 4√1000 except with prob ~1e-4.
        let m = LevyMeasure::atoms([(1.0, 1.0)]).unwrap();
        let bound = 4.0 * 1000f64.sqrt();
        let mut outside = 0;
        for seed in 0..300 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = m.sample_jump_events(1000.0, 0, &mut rng).unwrap().len() as f64;
            if (n - 1000.0).abs() > bound {
                outside += 1;
            }
        }
        assert_eq!(outside, 0);
    }

    #[test]
    fn density_sampling_matches_moments() {
        let m = LevyMeasure::density(0.0, 2.0, 129, DensityShape::Uniform { height: 1.0 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| m.sample_size(&mut rng)).collect();
        assert!(xs.iter().all(|&x| (0.0..=2.0).contains(&x)));
        let mean = xs.iter().sum::<f64>() / n as f64;
        // uniform on [0,2]: mean 1, sd 1/√3
        assert!((mean - 1.0).abs() < 4.0 * (1.0 / 3.0f64).sqrt() / (n as f64).sqrt());
    }

    #[test]
    fn positive_jump_flag() {
        assert!(!LevyMeasure::atoms([(-1.0, 1.0)]).unwrap().has_only_positive_jumps());
        assert!(LevyMeasure::atoms([(1.0, 1.0), (-1.0, 0.0)]).unwrap().has_only_positive_jumps());
        let d = LevyMeasure::density(0.5, 2.0, 9, DensityShape::Uniform { height: 1.0 }).unwrap();
        assert!(d.has_only_positive_jumps());
    }

    #[test]
    fn config_round_trip() {
        let cfg: LevyMeasureConfig = serde_json::from_str(r#"{"type":"atoms","atoms":[[-1,0.5],[1,0.5]]}"#).unwrap();
        let m = LevyMeasure::<f64>::from_config(&cfg).unwrap();
        assert_eq!(m, two_point());
        assert_eq!(m.to_config(), cfg);

        let cfg: LevyMeasureConfig = serde_json::from_str(
            r#"{"type":"density","support":[0,2],"nodes":129,"density":{"shape":"uniform","height":1}}"#,
        )
        .unwrap();
        let m = LevyMeasure::<f64>::from_config(&cfg).unwrap();
        assert_eq!(LevyMeasure::<f64>::from_config(&m.to_config()).unwrap(), m);
    }

    #[test]
    fn works_in_single_precision() {
        let m = LevyMeasure::<f32>::atoms([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(m.moment(2), 1.0f32);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(m.sample_jump_events(5.0f32, 0, &mut rng).is_ok());
    }
}
