use num_complex::Complex64;

use crate::frame::{range_from_delay, SPEED_OF_LIGHT};
use crate::grid::EstimationGrid;

/// Output of a grid-search ML estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarEstimate {
    /// Estimated radar channel gain `h`.
    pub gain: Complex64,
    /// OTFS only: the gain `h' = h exp(j2pi nu tau)` the likelihood is written in.
    pub gain_prime: Option<Complex64>,
    pub delay: f64,
    pub doppler: f64,
    pub range: f64,
    pub velocity: f64,
    /// Value of the maximized statistic at the estimate.
    pub peak: f64,
    pub delay_bin: usize,
    pub doppler_bin: usize,
}

impl RadarEstimate {
    pub(crate) fn at_bin(
        grid: &EstimationGrid,
        delay_bin: usize,
        doppler_bin: usize,
        gain: Complex64,
        gain_prime: Option<Complex64>,
        peak: f64,
    ) -> Self {
        let delay = grid.delay(delay_bin);
        let doppler = grid.doppler(doppler_bin);
        Self {
            gain,
            gain_prime,
            delay,
            doppler,
            range: range_from_delay(delay),
            velocity: doppler * SPEED_OF_LIGHT / (2.0 * grid.carrier()),
            peak,
            delay_bin,
            doppler_bin,
        }
    }
}
