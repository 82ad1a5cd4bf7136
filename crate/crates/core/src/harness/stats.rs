//! Binomial confidence intervals.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials` at quantile `z`.
/// Zero trials give the uninformative interval [0, 1].
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(successes <= trials, "successes {successes} exceed trials {trials}");
    if trials == 0 {
        return (0.0, 1.0);
    }
    let t = trials as f64;
    let p = successes as f64 / t;
    let z2 = z * z;
    let denom = 1.0 + z2 / t;
    let centre = (p + z2 / (2.0 * t)) / denom;
    let half = z / denom * (p * (1.0 - p) / t + z2 / (4.0 * t * t)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn hand_computed_values() {
        // 5/10: centre 0.5, half = z/(1+z²/10) sqrt(0.025 + z²/400).
        let (lo, hi) = wilson_interval(5, 10, Z95);
        assert!(close(lo, 0.236593090512564), "{lo}");
        assert!(close(hi, 0.763406909487436), "{hi}");
        // 0/10: upper end z²/(t + z²).
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!(close(hi, Z95 * Z95 / (10.0 + Z95 * Z95)), "{hi}");
        let (lo, hi) = wilson_interval(10, 10, Z95);
        assert!(close(lo, 10.0 / (10.0 + Z95 * Z95)), "{lo}");
        assert_eq!(hi, 1.0);
        // 1/4 with z = 2: centre (0.25 + 0.5)/2 = 0.375, half = sqrt(3/64 + 1/16) = sqrt(7)/8.
        let (lo, hi) = wilson_interval(1, 4, 2.0);
        assert!(close(lo, 0.375 - 7f64.sqrt() / 8.0));
        assert!(close(hi, 0.375 + 7f64.sqrt() / 8.0));
    }

    #[test]
    fn empty_is_uninformative() {
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn contains_the_estimate() {
        for t in 1..60u64 {
            for s in 0..=t {
                let (lo, hi) = wilson_interval(s, t, Z95);
                let p = s as f64 / t as f64;
                assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
            }
        }
    }
}
