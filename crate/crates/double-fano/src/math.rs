//! Small numeric helpers shared across the crate.
//!
//! Transcendental functions go through `libm` so the core builds without std
//! and produces identical bit patterns on every platform.

/// Square root.
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Absolute value.
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// Natural exponential.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Sine.
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// `x` raised to a real power.
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// Median of a slice; averages the two central elements for even lengths.
/// Returns 0.0 for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted: alloc::vec::Vec<f64> = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("median over NaN"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_even_empty() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[]), 0.0);
        assert_eq!(median(&[7.25]), 7.25);
    }

    #[test]
    fn shims_match_std_within_ulps() {
        // libm and std may differ in the last bit; determinism is why the
        // shims exist, agreement only needs to be at rounding level.
        for &x in &[0.3, 1.0, 2.5, 17.0] {
            approx::assert_relative_eq!(sqrt(x), f64::sqrt(x), max_relative = 1e-15);
            approx::assert_relative_eq!(exp(x), f64::exp(x), max_relative = 1e-15);
            approx::assert_relative_eq!(ln(x), f64::ln(x), max_relative = 1e-15);
            approx::assert_relative_eq!(sin(x), f64::sin(x), max_relative = 1e-15);
            assert_eq!(abs(-x), x);
            approx::assert_relative_eq!(powf(x, 1.7), f64::powf(x, 1.7), max_relative = 1e-15);
        }
    }
}
