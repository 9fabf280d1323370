//! The C² change of variables that turns a power-drift equation into one
//! with asymptotically constant drift, and the Itô-transformed coefficients.
//!
//! `f(x) = 0` for `x ≤ 0` and `f(x) = x^{1−α}/(1−α)` for `x ≥ 1`. On `[0, 1]`
//! the derivative is the polynomial bridge
//!
//! ```text
//! g(y) = y³ (c₃ + c₄ y + c₅ y² + c₆ y³)
//! ```
//!
//! whose coefficients are fixed by `g(1) = 1`, `g'(1) = −α`,
//! `g''(1) = α(α+1)` and `∫₀¹ g = 1/(1−α)`. Then `f = ∫₀ˣ g` joins both
//! tails with matching value and first three derivatives (so `f ∈ C³`),
//! `g ≥ 0`, and `f(x) ≤ x^{1−α}/(1−α)` on `(0, 1)`.

use crate::coefficients::CoefficientFamily;
use crate::error::{Error, Result};
use crate::noise::LevyMeasure;
use crate::oracles;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothTransform<T> {
    alpha: T,
    /// `1 − α`.
    power: T,
    /// Bridge coefficients `c₃ … c₆`.
    bridge: [T; 4],
}

impl<T: Real> SmoothTransform<T> {
    pub fn new(alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidAlpha(alpha.as_f64()));
        }
        let a = alpha;
        let l = |v: f64| T::lit(v);
        let q = T::one() - a;
        let c3 = l(2.0) * (a + l(4.0)) * (a + l(5.0)) * (a + l(6.0)) / (l(3.0) * q);
        let c4 = -l(5.0) * (a + l(3.0)) * (a + l(5.0)) * (a + l(6.0)) / (l(2.0) * q);
        let c5 = l(3.0) * (a + l(3.0)) * (a + l(4.0)) * (a + l(6.0)) / q;
        let c6 = -l(7.0) * (a + l(3.0)) * (a + l(4.0)) * (a + l(5.0)) / (l(6.0) * q);
        Ok(Self { alpha, power: q, bridge: [c3, c4, c5, c6] })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn bridge_coefficients(&self) -> [T; 4] {
        self.bridge
    }

    pub fn f(&self, x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else if x >= T::one() {
            x.powf(self.power) / self.power
        } else {
            let [c3, c4, c5, c6] = self.bridge;
            let l = |v: f64| T::lit(v);
            let x4 = (x * x) * (x * x);
            x4 * (c3 / l(4.0) + x * (c4 / l(5.0) + x * (c5 / l(6.0) + x * (c6 / l(7.0)))))
        }
    }

    pub fn f_prime(&self, x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else if x >= T::one() {
            x.powf(-self.alpha)
        } else {
            let [c3, c4, c5, c6] = self.bridge;
            x * x * x * (c3 + x * (c4 + x * (c5 + x * c6)))
        }
    }

    pub fn f_second(&self, x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else if x >= T::one() {
            -self.alpha * x.powf(-self.alpha - T::one())
        } else {
            let [c3, c4, c5, c6] = self.bridge;
            let l = |v: f64| T::lit(v);
            x * x * (l(3.0) * c3 + x * (l(4.0) * c4 + x * (l(5.0) * c5 + x * (l(6.0) * c6))))
        }
    }

    /// `f(x + h) − f(x)`, without cancellation when both points lie in the
    /// power region.
    pub fn increment(&self, x: T, h: T) -> T {
        let y = x + h;
        if x >= T::one() && y >= T::one() {
            let p = self.power;
            x.powf(p) / p * (p * (h / x).ln_1p()).exp_m1()
        } else {
            self.f(y) - self.f(x)
        }
    }

    /// Taylor remainder `f(x + h) − f(x) − f'(x) h`, accurate to relative
    /// precision in the power region.
    pub fn remainder(&self, x: T, h: T) -> T {
        let y = x + h;
        if x >= T::one() && y >= T::one() {
            let p = self.power;
            x.powf(p) / p * binomial_remainder(p, h / x)
        } else {
            self.f(y) - self.f(x) - self.f_prime(x) * h
        }
    }

    /// Inverse on the power branch: `y ↦ ((1−α) y)^{1/(1−α)}`, valid for
    /// `y ≥ f(1)`.
    pub fn inverse(&self, y: T) -> T {
        (self.power * y).powf(T::one() / self.power)
    }

    /// `2β̃ = 2(β − α)/(1 − α)`, the growth exponent of the reduced equation.
    pub fn reduced_growth_exponent(&self, beta: T) -> T {
        T::lit(2.0) * (beta - self.alpha) / self.power
    }
}

/// `(1 + r)^p − 1 − p r` for `r > −1`.
fn binomial_remainder<T: Real>(p: T, r: T) -> T {
    if r.abs() <= T::lit(0.25) {
        // Σ_{n≥2} C(p, n) rⁿ; terms shrink at least geometrically by |r|.
        let mut term = p * r;
        let mut sum = T::zero();
        for n in 2..200 {
            let nn = T::from_usize_lossy(n);
            term = term * (p - nn + T::one()) / nn * r;
            sum += term;
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (p * r.ln_1p()).exp_m1() - p * r
    }
}

/// The three addends of the transformed drift `ã = ã₁ + ã₂ + ã₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedDrift<T> {
    /// `a(x) f'(x)`
    pub a1: T,
    /// `½ b²(x) f''(x)`
    pub a2: T,
    /// `∫ (f(x + c(x)u) − f(x) − f'(x)c(x)u) ν(du)`
    pub a3: T,
}

impl<T: Real> TransformedDrift<T> {
    pub fn total(&self) -> T {
        self.a1 + self.a2 + self.a3
    }

    pub fn is_finite(&self) -> bool {
        self.a1.is_finite() && self.a2.is_finite() && self.a3.is_finite()
    }
}

/// Drift of `f(X)` for `dX = a dt + b dW + ∫ c u Ñ(dt, du)` at state `x`.
pub fn transformed_drift<T: Real>(
    x: T,
    drift: &CoefficientFamily<T>,
    diffusion: &CoefficientFamily<T>,
    jump: &CoefficientFamily<T>,
    measure: Option<&LevyMeasure<T>>,
    transform: &SmoothTransform<T>,
) -> TransformedDrift<T> {
    let b = diffusion.eval(x);
    TransformedDrift {
        a1: drift.eval(x) * transform.f_prime(x),
        a2: b * b * transform.f_second(x) / T::lit(2.0),
        a3: measure.map_or(T::zero(), |m| oracles::compensator_integral(x, transform, jump, m)),
    }
}

/// `b̃(x) = b(x) f'(x)`.
pub fn transformed_diffusion<T: Real>(x: T, diffusion: &CoefficientFamily<T>, transform: &SmoothTransform<T>) -> T {
    diffusion.eval(x) * transform.f_prime(x)
}

/// `c̃(x, u) = f(x + c(x)u) − f(x)`.
pub fn transformed_jump<T: Real>(x: T, jump: &CoefficientFamily<T>, transform: &SmoothTransform<T>, u: T) -> T {
    transform.increment(x, jump.eval(x) * u)
}

/// All coefficients of the transformed equation at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedCoefficients<T> {
    pub x: T,
    pub drift: TransformedDrift<T>,
    pub b_tilde: T,
    /// `∫ c̃²(x, u) ν(du)`
    pub jump_variance: T,
}

impl<T: Real> TransformedCoefficients<T> {
    pub fn at(
        x: T,
        drift: &CoefficientFamily<T>,
        diffusion: &CoefficientFamily<T>,
        jump: &CoefficientFamily<T>,
        measure: Option<&LevyMeasure<T>>,
        transform: &SmoothTransform<T>,
    ) -> Self {
        Self {
            x,
            drift: transformed_drift(x, drift, diffusion, jump, measure, transform),
            b_tilde: transformed_diffusion(x, diffusion, transform),
            jump_variance: measure.map_or(T::zero(), |m| oracles::quadratic_integral(x, transform, jump, m)),
        }
    }

    /// `b̃² + ∫ c̃² ν(du)`.
    pub fn noise_intensity(&self) -> T {
        self.b_tilde * self.b_tilde + self.jump_variance
    }
}
