//! Scalar helpers on top of `libm` (no `std` float intrinsics here).

pub use libm::{exp, fabs, floor, log, log1p, round, sqrt};

/// Numerically stable `1 / (1 + exp(-x))`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + log1p(exp(-x))
    } else {
        log1p(exp(x))
    }
}

/// `log(logistic(x))`, finite for every finite `x`.
pub fn log_logistic(x: f64) -> f64 {
    -softplus(-x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    sqrt(ss / (xs.len() - 1) as f64)
}

/// `floor(fraction * count)`, tolerant of representation error just below an
/// integer (e.g. `0.7 * 10 = 6.999...`).
pub fn floor_fraction(fraction: f64, count: usize) -> usize {
    floor(fraction * count as f64 + 1e-9) as usize
}

/// `ceil(n · ln n)`, 0 for `n <= 1`.
pub fn ceil_ln_budget(n: usize) -> u64 {
    if n <= 1 {
        return 0;
    }
    libm::ceil(n as f64 * log(n as f64)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_stable_at_extremes() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(1e4).is_finite());
        assert!(logistic(-1e4) >= 0.0);
        assert!((log_logistic(-1e4) + 1e4).abs() < 1e-9);
        assert!(log_logistic(1e4).abs() < 1e-12);
    }

    #[test]
    fn softplus_matches_naive_in_safe_range() {
        for &x in &[-5.0, -0.3, 0.0, 0.7, 4.0] {
            let naive = libm::log(1.0 + libm::exp(x));
            assert!((softplus(x) - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn floor_fraction_handles_representation_error() {
        assert_eq!(floor_fraction(0.7, 10), 7);
        assert_eq!(floor_fraction(0.05, 24186), 1209);
        assert_eq!(floor_fraction(0.75, 90), 67);
    }
}
