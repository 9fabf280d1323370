//! Small descriptive statistics and the log-log power fit.

use crate::real::Real;

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    xs.iter().copied().sum::<T>() / T::from_usize_lossy(xs.len())
}

/// Unbiased sample variance.
pub fn variance<T: Real>(xs: &[T]) -> T {
    let n = xs.len();
    if n < 2 {
        return T::zero();
    }
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / T::from_usize_lossy(n - 1)
}

/// Standard error of the mean.
pub fn standard_error<T: Real>(xs: &[T]) -> T {
    if xs.len() < 2 {
        return T::zero();
    }
    (variance(xs) / T::from_usize_lossy(xs.len())).sqrt()
}

/// Jackknife standard error of the sample mean, from leave-one-out means.
pub fn jackknife_se_of_mean<T: Real>(xs: &[T]) -> T {
    let n = xs.len();
    if n < 2 {
        return T::zero();
    }
    let total: T = xs.iter().copied().sum();
    let nm1 = T::from_usize_lossy(n - 1);
    let loo: Vec<T> = xs.iter().map(|&x| (total - x) / nm1).collect();
    let loo_mean = mean(&loo);
    let ss: T = loo.iter().map(|&m| (m - loo_mean) * (m - loo_mean)).sum();
    (nm1 / T::from_usize_lossy(n) * ss).sqrt()
}

/// Quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending.
pub fn quantile_sorted<T: Real>(sorted: &[T], q: f64) -> T {
    match sorted.len() {
        0 => T::nan(),
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = T::lit(h - lo as f64);
            sorted[lo] + (sorted[hi] - sorted[lo]) * frac
        }
    }
}

pub fn sorted_copy<T: Real>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

pub fn median<T: Real>(xs: &[T]) -> T {
    quantile_sorted(&sorted_copy(xs), 0.5)
}

/// Least-squares slope of `ln|y|` against `ln x`. Returns `None` when fewer
/// than two usable points remain or when any `y` is zero or non-finite.
pub fn log_log_slope<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mut lx = Vec::with_capacity(xs.len());
    let mut ly = Vec::with_capacity(ys.len());
    for (&x, &y) in xs.iter().zip(ys) {
        let ay = y.abs();
        if !(x > T::zero()) || !(ay > T::zero()) || !ay.is_finite() {
            return None;
        }
        lx.push(x.ln());
        ly.push(ay.ln());
    }
    let mx = mean(&lx);
    let my = mean(&ly);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&a, &b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx <= T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_space<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + step * T::from_usize_lossy(i)).exp()
            }
        })
        .collect()
}
