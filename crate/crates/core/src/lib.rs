//! Simulation and diagnostics for scalar SDEs driven by Lévy noise,
//! `dX = a(X)dt + Σ_k b_k(X−) dZ_k`, whose drift grows like `A x^α` with
//! `α ∈ [0, 1)`.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar type for the common cases.
//!
//! ```
//! use levy_sde::{simulate_path, CoefficientFamily, PathSeed, SdeModel, SimulationConfig};
//!
//! let model = SdeModel::new(CoefficientFamily::power_drift(1.0, 0.5).unwrap());
//! let cfg = SimulationConfig::new(100.0, 1e-3, 1.0, 7).with_stride(1000);
//! let path = simulate_path(&model, &cfg, PathSeed::new(7, 0)).unwrap();
//! let exact = (0.5f64 * 100.0 + 1.0).powi(2);
//! assert!((path.final_value() / exact - 1.0).abs() < 5e-3);
//! ```

pub mod coefficients;
pub mod engine;
pub mod error;
pub mod noise;
pub mod oracles;
pub mod real;
pub mod rng;
pub mod stats;
pub mod transform;

pub use coefficients::{
    check_drift_asymptotics, check_drift_bounds, check_growth_condition, condition_c_checklist, ChecklistItem,
    CoefficientConfig, CoefficientFamily, ConditionId, ConditionReport, Flag, Table, Verdict, Witness,
};
pub use engine::{
    cross_section, second_moment_curve, simulate_ensemble, simulate_ensemble_serial, simulate_path, Integrand,
    MomentPoint, NoiseTerm, PathAbort, PathRecord, SdeModel, SimulationConfig,
};
pub use error::{Error, Result};
pub use noise::{DensityShape, JumpEvent, LevyMeasure, LevyMeasureConfig, NoiseConfig, NoiseSpec};
pub use oracles::{
    compensator_integral, decay_scan, martingale_moment_scan, quadratic_integral, DecayFitReport, DecayOracle,
    MartingaleScanReport,
};
pub use real::Real;
pub use rng::PathSeed;
pub use transform::{SmoothTransform, TransformedCoefficients, TransformedDrift};

pub type LevyMeasureF64 = LevyMeasure<f64>;
pub type NoiseSpecF64 = NoiseSpec<f64>;
pub type CoefficientF64 = CoefficientFamily<f64>;
pub type SdeModelF64 = SdeModel<f64>;
pub type SimulationConfigF64 = SimulationConfig<f64>;
pub type PathRecordF64 = PathRecord<f64>;
pub type TransformF64 = SmoothTransform<f64>;
pub type DecayFitReportF64 = DecayFitReport<f64>;

pub type LevyMeasureF32 = LevyMeasure<f32>;
pub type NoiseSpecF32 = NoiseSpec<f32>;
pub type CoefficientF32 = CoefficientFamily<f32>;
pub type SdeModelF32 = SdeModel<f32>;
pub type SimulationConfigF32 = SimulationConfig<f32>;
pub type PathRecordF32 = PathRecord<f32>;
pub type TransformF32 = SmoothTransform<f32>;
pub type DecayFitReportF32 = DecayFitReport<f32>;
