//! The single place where milliseconds become sample counts.

use crate::math;

/// Converts a duration to a whole number of samples, rounding to nearest
/// (halves away from zero). Negative or non-finite durations map to 0.
pub fn ms_to_samples(ms: f64, sample_rate_hz: f64) -> usize {
    let samples = ms * sample_rate_hz / 1000.0;
    if !samples.is_finite() || samples <= 0.0 {
        return 0;
    }
    math::round(samples) as usize
}

/// Time in milliseconds of a sample count.
pub fn samples_to_ms(samples: usize, sample_rate_hz: f64) -> f64 {
    samples as f64 * 1000.0 / sample_rate_hz
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_milliseconds_at_1khz() {
        assert_eq!(ms_to_samples(300.0, 1000.0), 300);
        assert_eq!(ms_to_samples(0.0, 1000.0), 0);
        assert_eq!(ms_to_samples(25.0, 1000.0), 25);
    }

    #[test]
    fn rounds_to_nearest() {
        // 25 ms at 2048 Hz = 51.2 samples
        assert_eq!(ms_to_samples(25.0, 2048.0), 51);
        // 10 ms at 1250 Hz = 12.5 samples, half rounds up
        assert_eq!(ms_to_samples(10.0, 1250.0), 13);
        // 7 ms at 500 Hz = 3.5
        assert_eq!(ms_to_samples(7.0, 500.0), 4);
        assert_eq!(ms_to_samples(0.4, 1000.0), 0);
    }

    #[test]
    fn degenerate_durations() {
        assert_eq!(ms_to_samples(-10.0, 1000.0), 0);
        assert_eq!(ms_to_samples(f64::NAN, 1000.0), 0);
    }

    #[test]
    fn samples_back_to_ms() {
        assert_eq!(samples_to_ms(300, 1000.0), 300.0);
        assert_eq!(samples_to_ms(5, 2000.0), 2.5);
    }
}
